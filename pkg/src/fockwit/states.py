"""Constructors for the example states and seeded random-state generators."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from fockwit.exceptions import DegenerateStateError, DimensionError, TruncationWarning
from fockwit.fock import CutoffSpec, Ensemble, PureState, _as_cutoff

DEFICIT_WARN = 1e-8


@dataclass(frozen=True)
class CoherentParams:
    amplitudes: tuple[complex, ...]

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", tuple(complex(a) for a in self.amplitudes))


@dataclass(frozen=True)
class CatParams:
    """``|alpha_1, ...> + sign * |-alpha_1, ...>``, normalized."""

    amplitudes: tuple[complex, ...]
    sign: int = -1

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", tuple(complex(a) for a in self.amplitudes))
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")


def make_fock(cutoff, occupations: Sequence[int]) -> PureState:
    cutoff = _as_cutoff(cutoff)
    vec = np.zeros(cutoff.total_dim, dtype=np.complex128)
    vec[cutoff.rank(occupations)] = 1.0
    return PureState(cutoff, vec)


def _require_min_cutoff(cutoff: CutoffSpec, d_min: int) -> None:
    if any(d < d_min for d in cutoff.dims):
        raise ValueError(f"every mode needs cutoff >= {d_min}, got {cutoff.dims}")


def make_ghz(cutoff) -> PureState:
    """``(|0...0> + |1...1>) / sqrt(2)`` on any number of modes >= 2."""
    cutoff = _as_cutoff(cutoff)
    if cutoff.n_modes < 2:
        raise ValueError("GHZ state needs at least two modes")
    return make_weighted_ghz(cutoff, 0.5)


def make_weighted_ghz(cutoff, p0: float) -> PureState:
    """``sqrt(p0)|0...0> + sqrt(1 - p0)|1...1>``."""
    cutoff = _as_cutoff(cutoff)
    _require_min_cutoff(cutoff, 2)
    if not 0.0 <= p0 <= 1.0:
        raise ValueError("p0 must lie in [0, 1]")
    vec = np.zeros(cutoff.total_dim, dtype=np.complex128)
    vec[0] = np.sqrt(p0)
    vec[cutoff.rank([1] * cutoff.n_modes)] = np.sqrt(1.0 - p0)
    return PureState.from_vector(cutoff, vec)


FOUR_TERM_KETS = ((0, 0, 1), (0, 1, 0), (1, 0, 1), (1, 1, 0))


def make_four_term_psi(cutoff) -> PureState:
    """``(|001> + |010> + |101> + |110>) / 2`` on three modes.

    Entangled across AB|C (and B|AC) but a product across A|BC.
    """
    cutoff = _as_cutoff(cutoff)
    if cutoff.n_modes != 3:
        raise DimensionError("this state is defined on three modes")
    _require_min_cutoff(cutoff, 2)
    vec = np.zeros(cutoff.total_dim, dtype=np.complex128)
    for ket in FOUR_TERM_KETS:
        vec[cutoff.rank(ket)] = 0.5
    return PureState(cutoff, vec)


def coherent_vector(d: int, alpha: complex) -> np.ndarray:
    """Unnormalized truncated series ``e^{-|a|^2/2} a^n / sqrt(n!)`` for ``n < d``."""
    c = np.empty(d, dtype=np.complex128)
    c[0] = np.exp(-0.5 * abs(alpha) ** 2)
    for n in range(1, d):
        c[n] = c[n - 1] * alpha / np.sqrt(n)
    return c


def _product_vector(vectors: Sequence[np.ndarray]) -> np.ndarray:
    out = np.ones(1, dtype=np.complex128)
    for v in vectors:
        out = np.kron(out, v)
    return out


def _warn_deficit(deficit: float, what: str) -> None:
    if deficit > DEFICIT_WARN:
        warnings.warn(
            f"{what}: truncation discarded {deficit:.3e} of the norm; raise the cutoff",
            TruncationWarning,
            stacklevel=3,
        )


def make_coherent(cutoff, p: CoherentParams) -> PureState:
    """Product of truncated coherent states, renormalized.

    The norm lost to truncation is stored on ``truncation_deficit`` and a
    :class:`TruncationWarning` is issued when it exceeds 1e-8.
    """
    cutoff = _as_cutoff(cutoff)
    if len(p.amplitudes) != cutoff.n_modes:
        raise DimensionError("one coherent amplitude per mode is required")
    vec = _product_vector([coherent_vector(d, a) for d, a in zip(cutoff.dims, p.amplitudes)])
    deficit = float(1.0 - np.vdot(vec, vec).real)
    _warn_deficit(deficit, "coherent state")
    return PureState.from_vector(cutoff, vec, truncation_deficit=max(deficit, 0.0))


def cat_normalization(amplitudes: Sequence[complex], sign: int = -1) -> float:
    """Closed-form normalization of the untruncated cat state."""
    s = sum(abs(a) ** 2 for a in amplitudes)
    return float((2.0 * (1.0 + sign * np.exp(-2.0 * s))) ** -0.5)


def make_cat(cutoff, p: CatParams) -> PureState:
    """Normalized ``|alpha, beta, ...> + sign |-alpha, -beta, ...>``.

    With ``sign = -1`` only odd total occupations survive; even entries are
    set to exactly zero.
    """
    cutoff = _as_cutoff(cutoff)
    if len(p.amplitudes) != cutoff.n_modes:
        raise DimensionError("one cat amplitude per mode is required")
    if p.sign == -1 and all(a == 0 for a in p.amplitudes):
        raise DegenerateStateError("odd cat state with all-zero amplitudes vanishes")
    plus = _product_vector([coherent_vector(d, a) for d, a in zip(cutoff.dims, p.amplitudes)])
    minus = _product_vector([coherent_vector(d, -a) for d, a in zip(cutoff.dims, p.amplitudes)])
    vec = plus + p.sign * minus
    parity = cutoff.occupation_grid().sum(axis=1) % 2
    vec[parity == (0 if p.sign == -1 else 1)] = 0.0
    target = cat_normalization(p.amplitudes, p.sign) ** -2
    norm2 = float(np.vdot(vec, vec).real)
    deficit = max(1.0 - norm2 / target, 0.0)
    _warn_deficit(deficit, "cat state")
    return PureState.from_vector(cutoff, vec, truncation_deficit=deficit)


def make_product(states: Sequence[PureState]) -> PureState:
    """Tensor product of pure states, modes concatenated in order."""
    if len(states) < 2:
        raise ValueError("a product needs at least two factors")
    dims = tuple(d for s in states for d in s.cutoff.dims)
    return PureState.from_vector(CutoffSpec(dims), _product_vector([s.amplitudes for s in states]))


def validate_partition(partition, n_modes: int) -> list[list[int]]:
    groups = [sorted(int(i) for i in g) for g in partition]
    flat = sorted(i for g in groups for i in g)
    if any(not g for g in groups) or flat != list(range(n_modes)):
        raise ValueError(f"partition {partition} must cover modes 0..{n_modes - 1} disjointly")
    return groups


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _gaussian_vector(rng, dim: int) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_pure(cutoff, seed=None) -> PureState:
    """Haar-random pure state (normalized complex Gaussian amplitudes)."""
    cutoff = _as_cutoff(cutoff)
    return PureState.from_vector(cutoff, _gaussian_vector(_rng(seed), cutoff.total_dim))


def random_product(cutoff, seed=None, partition=None) -> PureState:
    """Independent random pure state on each group of ``partition``, tensored.

    ``partition`` defaults to single modes (a fully separable pure state).
    """
    cutoff = _as_cutoff(cutoff)
    n = cutoff.n_modes
    groups = validate_partition(partition if partition is not None else [[i] for i in range(n)], n)
    rng = _rng(seed)
    factors = []
    for g in groups:
        dim = int(np.prod([cutoff.dims[i] for i in g]))
        factors.append(_gaussian_vector(rng, dim))
    order = [i for g in groups for i in g]
    t = _product_vector(factors).reshape([cutoff.dims[i] for i in order])
    t = np.transpose(t, np.argsort(order))
    return PureState.from_vector(cutoff, t.ravel())


def random_separable_mixture(cutoff, k: int = 4, partition=None, seed=None) -> Ensemble:
    """Mixture of ``k`` random products over ``partition`` with uniform-then-normalized weights."""
    if k < 1:
        raise ValueError("k must be >= 1")
    cutoff = _as_cutoff(cutoff)
    rng = _rng(seed)
    states = [random_product(cutoff, rng, partition) for _ in range(k)]
    w = rng.uniform(size=k)
    w = w / w.sum()
    return Ensemble(tuple(zip(w, states)))
