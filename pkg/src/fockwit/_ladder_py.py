"""Pure-numpy fallback for the monomial kernel.

Same contract as the compiled ``apply_tables``: ``src`` has shape
``(dim, k)``; each mode's coefficient table is broadcast along its tensor
axis and the result is shifted by ``shifts[i]`` along that axis.
"""

import numpy as np


def apply_tables(src, dims, tables, shifts):
    n = len(dims)
    k = src.shape[1]
    shape = tuple(int(d) for d in dims)
    t = src.reshape(shape + (k,))

    scaled = t
    for i, d in enumerate(shape):
        bshape = [1] * (n + 1)
        bshape[i] = d
        scaled = scaled * tables[i, :d].reshape(bshape)

    out = np.zeros_like(scaled)
    src_idx, dst_idx = [], []
    for d, s in zip(shape, shifts):
        s = int(s)
        if abs(s) >= d:
            return out.reshape(src.shape)
        if s >= 0:
            src_idx.append(slice(0, d - s))
            dst_idx.append(slice(s, d))
        else:
            src_idx.append(slice(-s, d))
            dst_idx.append(slice(0, d + s))
    src_idx.append(slice(None))
    dst_idx.append(slice(None))
    out[tuple(dst_idx)] = scaled[tuple(src_idx)]
    return out.reshape(src.shape)
