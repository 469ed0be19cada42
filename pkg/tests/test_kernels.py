import importlib
import math
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fockwit import kernels
from fockwit._ladder_py import apply_tables as py_apply


def factorial_coefficient(n, d, u, v):
    # reference from the factorial definitions, fine for small n
    if n < v or n - v + u >= d:
        return 0.0
    m = n - v
    return math.sqrt(math.factorial(n) / math.factorial(m)) * math.sqrt(
        math.factorial(m + u) / math.factorial(m)
    )


@pytest.mark.parametrize("d", [1, 2, 3, 7])
@pytest.mark.parametrize("u", [0, 1, 3])
@pytest.mark.parametrize("v", [0, 1, 2])
def test_ladder_table_matches_factorials(d, u, v):
    expected = [factorial_coefficient(n, d, u, v) for n in range(d)]
    np.testing.assert_allclose(kernels.ladder_table(d, u, v), expected, rtol=1e-13)


def test_ladder_table_huge_cutoff_is_finite():
    d = 10**6
    t = kernels.ladder_table(d, 3, 4)
    assert np.all(np.isfinite(t))
    n = d - 4  # lower by 4 then raise by 3: lands on d - 5
    expected = np.exp(0.5 * sum(math.log(k) for k in range(n - 3, n + 1)))
    expected *= np.exp(0.5 * sum(math.log(k) for k in range(n - 3, n)))
    assert t[n] == pytest.approx(expected, rel=1e-9)
    assert t[d - 1] != 0.0 and t[2] == 0.0


def test_ladder_table_is_read_only():
    with pytest.raises(ValueError):
        kernels.ladder_table(4, 1, 1)[0] = 3.0


@settings(max_examples=60, deadline=None)
@given(
    dims=st.lists(st.integers(1, 5), min_size=1, max_size=4),
    data=st.data(),
)
def test_backends_agree(dims, data):
    n = len(dims)
    raises = tuple(data.draw(st.lists(st.integers(0, 3), min_size=n, max_size=n)))
    lowers = tuple(data.draw(st.lists(st.integers(0, 3), min_size=n, max_size=n)))
    k = data.draw(st.integers(1, 3))
    rng = np.random.default_rng(data.draw(st.integers(0, 2**32 - 1)))
    dim = int(np.prod(dims))
    block = rng.normal(size=(dim, k)) + 1j * rng.normal(size=(dim, k))
    outs = []
    for name in kernels.available_backends():
        kernels.set_backend(name)
        outs.append(kernels.apply_ladder(tuple(dims), raises, lowers, block))
    kernels.set_backend("cython" if "cython" in kernels.available_backends() else "python")
    for o in outs[1:]:
        np.testing.assert_allclose(o, outs[0], atol=1e-13)


def test_extension_is_built():
    assert "cython" in kernels.available_backends()


def test_fallback_selected_without_extension(monkeypatch):
    import fockwit

    monkeypatch.setitem(sys.modules, "fockwit._ladder", None)
    monkeypatch.delattr(fockwit, "_ladder", raising=False)
    reloaded = importlib.reload(kernels)
    try:
        assert reloaded.BACKEND == "python"
        assert reloaded.available_backends() == ["python"]
    finally:
        monkeypatch.undo()
        importlib.reload(kernels)


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        kernels.set_backend("fortran")


def test_python_kernel_shift_beyond_window_is_zero():
    dims = np.array([2, 3], dtype=np.intp)
    tables = np.ones((2, 3))
    out = py_apply(np.ones((6, 1), dtype=complex), dims, tables, np.array([2, 0], dtype=np.intp))
    assert not out.any()
