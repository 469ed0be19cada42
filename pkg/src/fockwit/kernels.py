"""Ladder coefficient tables and kernel backend selection.

The compiled kernel is used when the extension was built; otherwise the
numpy fallback is selected at import. ``set_backend`` switches explicitly
(used by the benchmark and the backend-agreement tests).
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from fockwit import _ladder_py

try:
    from fockwit import _ladder as _ladder_c
except ImportError:  # extension not built
    _ladder_c = None

_BACKENDS = {"python": _ladder_py.apply_tables}
if _ladder_c is not None:
    _BACKENDS["cython"] = _ladder_c.apply_tables

BACKEND = "cython" if _ladder_c is not None else "python"
_apply = _BACKENDS[BACKEND]


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def set_backend(name: str) -> None:
    global BACKEND, _apply
    if name not in _BACKENDS:
        raise ValueError(f"kernel backend {name!r} unavailable; have {available_backends()}")
    BACKEND = name
    _apply = _BACKENDS[name]


@lru_cache(maxsize=4096)
def ladder_table(d: int, raise_: int, lower: int) -> np.ndarray:
    """Coefficient of ``(a^dag)^raise_ a^lower |n>`` for every ``n < d``.

    Entries are zero where lowering annihilates the state or raising leaves
    the truncation window. Built as running products of square roots so
    that no factorial is ever formed.
    """
    m = np.arange(d, dtype=float)
    coef = np.ones(d)
    for _ in range(lower):
        coef *= np.sqrt(np.clip(m, 0.0, None))
        m -= 1.0
    for _ in range(raise_):
        m += 1.0
        coef *= np.where(m < d, np.sqrt(np.clip(m, 0.0, None)), 0.0)
    coef.setflags(write=False)
    return coef


@lru_cache(maxsize=4096)
def _packed(dims: tuple, raises: tuple, lowers: tuple):
    tables = np.zeros((len(dims), max(dims)))
    for i, (d, u, v) in enumerate(zip(dims, raises, lowers)):
        tables[i, :d] = ladder_table(d, u, v)
    shifts = np.array([u - v for u, v in zip(raises, lowers)], dtype=np.intp)
    dims_arr = np.array(dims, dtype=np.intp)
    for a in (tables, shifts, dims_arr):
        a.setflags(write=False)
    return dims_arr, tables, shifts


def apply_ladder(dims: tuple, raises: tuple, lowers: tuple, block: np.ndarray) -> np.ndarray:
    """Apply ``prod_i (a_i^dag)^raises[i] a_i^lowers[i]`` to the rows of ``block``.

    ``block`` has shape ``(total_dim, k)``; columns are transformed
    independently.
    """
    dims_arr, tables, shifts = _packed(dims, raises, lowers)
    src = np.ascontiguousarray(block, dtype=np.complex128)
    return _apply(src, dims_arr, tables, shifts)
