"""Truncated multi-mode Fock space.

Basis ordering is row-major with the last mode varying fastest. Ladder
operators use hard truncation: raising past ``d_i - 1`` drops the component,
so truncated ``a^dag`` is exactly the adjoint of truncated ``a``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from fockwit.exceptions import DimensionError
from fockwit.kernels import apply_ladder

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-10


@dataclass(frozen=True)
class CutoffSpec:
    """Per-mode truncation dimensions."""

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) < 1:
            raise ValueError("at least one mode is required")
        if any(d < 1 for d in dims):
            raise ValueError(f"every cutoff must be >= 1, got {dims}")
        object.__setattr__(self, "dims", dims)

    @classmethod
    def uniform(cls, d: int, n_modes: int) -> CutoffSpec:
        return cls((d,) * n_modes)

    @property
    def n_modes(self) -> int:
        return len(self.dims)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64))

    @property
    def strides(self) -> tuple[int, ...]:
        out, s = [], 1
        for d in reversed(self.dims):
            out.append(s)
            s *= d
        return tuple(reversed(out))

    def rank(self, occupations: Sequence[int]) -> int:
        if len(occupations) != self.n_modes:
            raise DimensionError(f"expected {self.n_modes} occupations, got {len(occupations)}")
        r = 0
        for n, d, s in zip(occupations, self.dims, self.strides):
            if not 0 <= n < d:
                raise ValueError(f"occupation {n} outside [0, {d})")
            r += int(n) * s
        return r

    def unrank(self, rank: int) -> tuple[int, ...]:
        if not 0 <= rank < self.total_dim:
            raise ValueError(f"rank {rank} outside [0, {self.total_dim})")
        occ = []
        for d in reversed(self.dims):
            rank, n = divmod(rank, d)
            occ.append(n)
        return tuple(reversed(occ))

    def occupation_grid(self) -> np.ndarray:
        """Occupation numbers of every basis state, shape ``(total_dim, n_modes)``."""
        grids = np.indices(self.dims).reshape(self.n_modes, -1)
        return grids.T.copy()


def _as_cutoff(cutoff) -> CutoffSpec:
    return cutoff if isinstance(cutoff, CutoffSpec) else CutoffSpec(tuple(cutoff))


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized amplitude vector over the multi-mode Fock basis.

    ``truncation_deficit`` records the norm lost to truncation before
    renormalization, for constructors that truncate an infinite series.
    """

    cutoff: CutoffSpec
    amplitudes: np.ndarray
    truncation_deficit: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "cutoff", _as_cutoff(self.cutoff))
        amps = _frozen(np.ravel(self.amplitudes))
        if amps.shape != (self.cutoff.total_dim,):
            raise DimensionError(
                f"amplitude length {amps.size} != total_dim {self.cutoff.total_dim}"
            )
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm^2 = {norm!r})")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_vector(cls, cutoff, vector, truncation_deficit: float = 0.0) -> PureState:
        """Build a state from an unnormalized vector."""
        v = np.asarray(vector, dtype=np.complex128).ravel()
        norm = np.linalg.norm(v)
        if norm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return cls(_as_cutoff(cutoff), v / norm, truncation_deficit)

    @property
    def n_modes(self) -> int:
        return self.cutoff.n_modes

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.cutoff.dims)

    def to_density(self) -> DensityMatrix:
        psi = self.amplitudes
        return DensityMatrix(self.cutoff, np.outer(psi, psi.conj()))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace matrix over the multi-mode Fock basis.

    Positivity is not checked on construction; call :meth:`is_positive`.
    """

    cutoff: CutoffSpec
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "cutoff", _as_cutoff(self.cutoff))
        rho = _frozen(self.matrix)
        dim = self.cutoff.total_dim
        if rho.shape != (dim, dim):
            raise DimensionError(f"matrix shape {rho.shape} != ({dim}, {dim})")
        if dim and np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOL:
            raise ValueError("density matrix is not Hermitian")
        tr = np.trace(rho)
        if abs(tr - 1.0) > HERMITIAN_TOL:
            raise ValueError(f"density matrix trace is {tr!r}, expected 1")
        object.__setattr__(self, "matrix", rho)

    @property
    def n_modes(self) -> int:
        return self.cutoff.n_modes

    def is_positive(self, tol: float = 1e-9) -> bool:
        return bool(np.linalg.eigvalsh(self.matrix)[0] >= -tol)


State = Union[PureState, DensityMatrix]


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Weighted decomposition ``rho = sum_k p_k rho_k``."""

    components: tuple

    def __post_init__(self):
        comps = tuple((float(p), s) for p, s in self.components)
        if not comps:
            raise ValueError("ensemble needs at least one component")
        if any(not 0.0 < p <= 1.0 for p, _ in comps):
            raise ValueError("weights must lie in (0, 1]")
        if abs(sum(p for p, _ in comps) - 1.0) > NORM_TOL:
            raise ValueError("weights must sum to 1")
        cut = comps[0][1].cutoff
        if any(s.cutoff != cut for _, s in comps):
            raise DimensionError("ensemble components have different cutoffs")
        object.__setattr__(self, "components", comps)

    @property
    def cutoff(self) -> CutoffSpec:
        return self.components[0][1].cutoff

    @property
    def weights(self) -> np.ndarray:
        return np.array([p for p, _ in self.components])

    def to_density(self) -> DensityMatrix:
        dim = self.cutoff.total_dim
        rho = np.zeros((dim, dim), dtype=np.complex128)
        for p, s in self.components:
            if isinstance(s, PureState):
                psi = s.amplitudes
                rho += p * np.outer(psi, psi.conj())
            else:
                rho += p * s.matrix
        # remove the rounding asymmetry of the weighted sum
        rho = 0.5 * (rho + rho.conj().T)
        return DensityMatrix(self.cutoff, rho)


@dataclass(frozen=True)
class ModeMonomial:
    """Normal-ordered ``prod_i (a_i^dag)^raise_[i] (a_i)^lower[i]``."""

    raise_: tuple[int, ...]
    lower: tuple[int, ...]

    def __post_init__(self):
        u = tuple(int(x) for x in self.raise_)
        v = tuple(int(x) for x in self.lower)
        if len(u) != len(v):
            raise ValueError("raise and lower powers must cover the same modes")
        if any(x < 0 for x in u + v):
            raise ValueError("ladder powers must be non-negative")
        object.__setattr__(self, "raise_", u)
        object.__setattr__(self, "lower", v)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]]) -> ModeMonomial:
        pairs = list(pairs)
        return cls(tuple(u for u, _ in pairs), tuple(v for _, v in pairs))

    @classmethod
    def identity(cls, n_modes: int) -> ModeMonomial:
        return cls((0,) * n_modes, (0,) * n_modes)

    @classmethod
    def number_power(cls, powers: Sequence[int]) -> ModeMonomial:
        """``prod_i (a_i^dag)^k_i a_i^k_i`` (the number-power moment)."""
        return cls(tuple(powers), tuple(powers))

    @classmethod
    def lowering(cls, powers: Sequence[int]) -> ModeMonomial:
        return cls((0,) * len(powers), tuple(powers))

    @property
    def n_modes(self) -> int:
        return len(self.raise_)

    @property
    def degree(self) -> int:
        return sum(self.raise_) + sum(self.lower)

    def adjoint(self) -> ModeMonomial:
        return ModeMonomial(self.lower, self.raise_)

    def creating_half(self) -> ModeMonomial:
        return ModeMonomial(self.raise_, (0,) * self.n_modes)

    def annihilating_half(self) -> ModeMonomial:
        return ModeMonomial((0,) * self.n_modes, self.lower)


@dataclass(frozen=True)
class BalancedForm:
    """Hermitian ``e^{i phase} M^dag + e^{-i phase} M`` for a monomial ``M``."""

    base: ModeMonomial
    phase: float = 0.0


def _check_modes(m: ModeMonomial, cutoff: CutoffSpec) -> None:
    if m.n_modes != cutoff.n_modes:
        raise DimensionError(
            f"monomial acts on {m.n_modes} modes, state has {cutoff.n_modes}"
        )


def _apply_block(m: ModeMonomial, cutoff: CutoffSpec, block: np.ndarray) -> np.ndarray:
    return apply_ladder(cutoff.dims, m.raise_, m.lower, block)


def apply_monomial(m: ModeMonomial, s: State) -> np.ndarray:
    """Unnormalized ``M|s>`` for a pure state, or ``M rho`` for a density matrix.

    Lowering is applied before raising on every mode; components raised out
    of the truncation window are dropped.
    """
    _check_modes(m, s.cutoff)
    if isinstance(s, PureState):
        return _apply_block(m, s.cutoff, s.amplitudes[:, None])[:, 0]
    return _apply_block(m, s.cutoff, s.matrix)


def expectation(m: ModeMonomial, s: State) -> complex:
    """``<M>`` on a pure state or density matrix.

    For pure states the monomial is split as ``<A s | B s>`` with ``A`` the
    adjoint of the creating half and ``B`` the annihilating half, so only
    lowering operators ever touch the state.
    """
    _check_modes(m, s.cutoff)
    if isinstance(s, PureState):
        col = s.amplitudes[:, None]
        bra = _apply_block(m.creating_half().adjoint(), s.cutoff, col)[:, 0]
        ket = _apply_block(m.annihilating_half(), s.cutoff, col)[:, 0]
        return complex(np.vdot(bra, ket))
    return complex(np.trace(_apply_block(m, s.cutoff, s.matrix)))


def _form_apply(f: BalancedForm, cutoff: CutoffSpec, block: np.ndarray) -> np.ndarray:
    up = _apply_block(f.base.adjoint(), cutoff, block)
    down = _apply_block(f.base, cutoff, block)
    return np.exp(1j * f.phase) * up + np.exp(-1j * f.phase) * down


def form_expectation(f: BalancedForm, s: State) -> float:
    m = expectation(f.base, s)
    return float(2.0 * (np.exp(-1j * f.phase) * m).real)


def variance(f: BalancedForm, s: State) -> float:
    """``<F^2> - <F>^2`` for the Hermitian operator ``F`` denoted by ``f``."""
    _check_modes(f.base, s.cutoff)
    if isinstance(s, PureState):
        psi = s.amplitudes[:, None]
        fpsi = _form_apply(f, s.cutoff, psi)
        second = float(np.vdot(fpsi, fpsi).real)
        first = float(np.vdot(psi, fpsi).real)
    else:
        x = _form_apply(f, s.cutoff, s.matrix)
        second = float(np.trace(_form_apply(f, s.cutoff, x)).real)
        first = float(np.trace(x).real)
    return second - first * first


@dataclass(frozen=True)
class SecondMoments:
    """``<M>``, ``<M^dag M>``, ``<M M^dag>`` and ``<M^2>`` of one monomial."""

    mean: complex
    dag_m: float
    m_dag: float
    square: complex

    def form_variance(self, phase: float) -> float:
        """Variance of ``e^{i phase} M^dag + e^{-i phase} M``."""
        b = self.square - self.mean**2
        return float(
            self.dag_m + self.m_dag - 2.0 * abs(self.mean) ** 2
            + 2.0 * (np.exp(-2j * phase) * b).real
        )


def second_moments(m: ModeMonomial, s: State) -> SecondMoments:
    _check_modes(m, s.cutoff)
    if isinstance(s, PureState):
        psi = s.amplitudes[:, None]
        down = _apply_block(m, s.cutoff, psi)[:, 0]
        up = _apply_block(m.adjoint(), s.cutoff, psi)[:, 0]
        return SecondMoments(
            mean=complex(np.vdot(s.amplitudes, down)),
            dag_m=float(np.vdot(down, down).real),
            m_dag=float(np.vdot(up, up).real),
            square=complex(np.vdot(up, down)),
        )
    down = _apply_block(m, s.cutoff, s.matrix)
    up = _apply_block(m.adjoint(), s.cutoff, s.matrix)
    return SecondMoments(
        mean=complex(np.trace(down)),
        dag_m=float(np.trace(_apply_block(m.adjoint(), s.cutoff, down)).real),
        m_dag=float(np.trace(_apply_block(m, s.cutoff, up)).real),
        square=complex(np.trace(_apply_block(m, s.cutoff, down))),
    )


def partial_trace(s: State, keep: Iterable[int]) -> DensityMatrix:
    """Reduced density matrix on the modes in ``keep`` (kept in ascending order)."""
    n = s.n_modes
    keep = sorted(set(int(k) for k in keep))
    if not keep or len(keep) >= n or keep[0] < 0 or keep[-1] >= n:
        raise ValueError(f"keep must be a nonempty proper subset of modes 0..{n - 1}")
    drop = [i for i in range(n) if i not in keep]
    dims = s.cutoff.dims
    dk = int(np.prod([dims[i] for i in keep]))
    sub = CutoffSpec(tuple(dims[i] for i in keep))
    if isinstance(s, PureState):
        t = np.transpose(s.tensor(), keep + drop).reshape(dk, -1)
        rho = t @ t.conj().T
    else:
        t = s.matrix.reshape(dims + dims)
        t = np.transpose(t, keep + drop + [n + i for i in keep] + [n + i for i in drop])
        dd = s.cutoff.total_dim // dk
        t = t.reshape(dk, dd, dk, dd)
        rho = np.einsum("ajbj->ab", t)
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(sub, rho)


def embed(s: State, headroom: int = 1) -> State:
    """The same state in a window ``headroom`` levels taller on every mode.

    Raising operators of degree ``<= headroom`` then act on it exactly as in
    the untruncated space.
    """
    if headroom < 0:
        raise ValueError("headroom must be >= 0")
    if headroom == 0:
        return s
    dims = s.cutoff.dims
    big = CutoffSpec(tuple(d + headroom for d in dims))
    pad = [(0, headroom)] * len(dims)
    if isinstance(s, PureState):
        t = np.pad(s.tensor(), pad)
        return PureState(big, t.ravel(), s.truncation_deficit)
    t = np.pad(s.matrix.reshape(dims + dims), pad + pad)
    return DensityMatrix(big, t.reshape(big.total_dim, big.total_dim))


def boundary_weight(s: State) -> float:
    """Probability of finding any mode on its top level ``d_i - 1``."""
    occ = s.cutoff.occupation_grid()
    top = (occ == np.array(s.cutoff.dims) - 1).any(axis=1)
    if isinstance(s, PureState):
        probs = np.abs(s.amplitudes) ** 2
    else:
        probs = np.diag(s.matrix).real
    return float(probs[top].sum())
