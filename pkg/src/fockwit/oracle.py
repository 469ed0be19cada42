"""Independent reference computations.

Dense operators are assembled entry by entry from the ladder definitions
and Kronecker products; nothing here goes through the monomial kernel.
Used to cross-check expectations, Schmidt ranks and the closed-form phase
optimum of the full-variance criterion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from fockwit.exceptions import CapacityError
from fockwit.fock import CutoffSpec, Ensemble, ModeMonomial, PureState, _as_cutoff

DEFAULT_CAP = 4096


@dataclass(frozen=True, eq=False)
class DenseOperator:
    cutoff: CutoffSpec
    matrix: np.ndarray

    def expectation(self, s) -> complex:
        if isinstance(s, PureState):
            psi = s.amplitudes
            return complex(np.vdot(psi, self.matrix @ psi))
        return complex(np.trace(self.matrix @ s.matrix))

    def adjoint(self) -> DenseOperator:
        return DenseOperator(self.cutoff, self.matrix.conj().T)


def _check_cap(cutoff: CutoffSpec, cap: int) -> None:
    if cutoff.total_dim > cap:
        raise CapacityError(f"total_dim {cutoff.total_dim} exceeds oracle cap {cap}")


def annihilation_matrix(d: int) -> np.ndarray:
    a = np.zeros((d, d))
    for n in range(1, d):
        a[n - 1, n] = np.sqrt(n)
    return a


def dense_monomial(cutoff, m: ModeMonomial, cap: int = DEFAULT_CAP) -> DenseOperator:
    """Explicit matrix of ``prod_i (a_i^dag)^u_i a_i^v_i`` on the truncated space."""
    cutoff = _as_cutoff(cutoff)
    _check_cap(cutoff, cap)
    if m.n_modes != cutoff.n_modes:
        raise ValueError("monomial and cutoff disagree on the number of modes")
    out = np.ones((1, 1))
    for d, u, v in zip(cutoff.dims, m.raise_, m.lower):
        a = annihilation_matrix(d)
        local = np.linalg.matrix_power(a.T, u) @ np.linalg.matrix_power(a, v)
        out = np.kron(out, local)
    return DenseOperator(cutoff, out)


def schmidt_rank(s: PureState, cut, tolerance: float = 1e-8, cap: int = DEFAULT_CAP):
    """Schmidt rank across ``cut`` and the singular values, largest first.

    ``cut`` is anything with ``group`` and ``complement`` mode sets. Singular
    values below ``tolerance`` times the largest one do not count.
    """
    if not isinstance(s, PureState):
        raise TypeError("Schmidt rank is defined for pure states")
    _check_cap(s.cutoff, cap)
    left, right = sorted(cut.group), sorted(cut.complement)
    dims = s.cutoff.dims
    mat = np.transpose(s.tensor(), left + right).reshape(
        int(np.prod([dims[i] for i in left])), -1
    )
    sv = np.linalg.svd(mat, compute_uv=False)
    rank = int(np.sum(sv > tolerance * sv[0]))
    return rank, sv


def _variance_curve(s, cap: int):
    """Callable ``phi -> Var K(phi)`` built from dense ``P = prod_i a_i``."""
    n = s.cutoff.n_modes
    p = dense_monomial(s.cutoff, ModeMonomial.lowering((1,) * n), cap).matrix
    pt = p.T  # real matrix: the adjoint is the transpose
    if isinstance(s, PureState):
        psi = s.amplitudes
        up, down = pt @ psi, p @ psi

        def curve(phi):
            k_psi = np.exp(1j * phi) * up + np.exp(-1j * phi) * down
            mean = np.vdot(psi, k_psi).real
            return float(np.vdot(k_psi, k_psi).real - mean**2)

        return curve

    rho = s.matrix
    up, down = pt @ rho, p @ rho
    t_uu, t_ud = np.trace(pt @ up), np.trace(pt @ down)
    t_du, t_dd = np.trace(p @ up), np.trace(p @ down)
    t_u, t_d = np.trace(up), np.trace(down)

    def curve(phi):
        e = np.exp(1j * phi)
        second = e * e * t_uu + t_ud + t_du + t_dd / (e * e)
        mean = e * t_u + t_d / e
        return float(second.real - mean.real**2)

    return curve


def grid_min_variance(s, n_phi: int = 720, refine: bool = True, cap: int = DEFAULT_CAP):
    """Minimize ``Var K(phi)`` over a uniform grid on ``[0, 2 pi)``.

    With ``refine`` the best grid cell is polished by bounded scalar
    minimization. Returns ``(phi, value, grid_values)``.
    """
    if n_phi < 4:
        raise ValueError("n_phi must be >= 4")
    if isinstance(s, Ensemble):
        s = s.to_density()
    curve = _variance_curve(s, cap)
    phis = 2.0 * np.pi * np.arange(n_phi) / n_phi
    values = np.array([curve(p) for p in phis])
    i = int(np.argmin(values))
    phi, best = float(phis[i]), float(values[i])
    if refine:
        step = 2.0 * np.pi / n_phi
        res = minimize_scalar(curve, bounds=(phi - step, phi + step), method="bounded",
                              options={"xatol": 1e-12})
        if res.fun < best:
            phi, best = float(res.x) % (2.0 * np.pi), float(res.fun)
    return phi, best, values
