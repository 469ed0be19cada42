"""Moment- and variance-based entanglement criteria and the battery runner.

Every criterion is a necessary condition for some separability class;
a strict violation (``margin > tolerance``) certifies entanglement across
the concluded cut, or full entanglement for the ``full_variance`` and
``pure_full`` families. ``margin`` is sign-normalized so that a positive
value always means violation.

Moments of normal-ordered monomials are exact for the state as given.
Variance criteria also involve anti-normal products such as ``a a^dag``,
which hard truncation underestimates on states with weight on the top
level. Their ``truncation`` argument selects ``"hard"`` (truncated
operators) or ``"exact"`` (state embedded with one level of headroom, so
the operators act as in the untruncated space).
"""

from __future__ import annotations

import itertools
import string
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from fockwit.exceptions import PreconditionError, UnsupportedStateError
from fockwit.fock import (
    BalancedForm,
    DensityMatrix,
    Ensemble,
    ModeMonomial,
    PureState,
    boundary_weight,
    embed,
    expectation,
    second_moments,
    variance,
)

DEFAULT_TOL = 1e-9
BOUNDARY_TOL = 1e-12
TRUNCATION_MODES = ("hard", "exact")

CRITERIA = (
    "variance_pair",
    "moment",
    "sqrt_moment",
    "full_variance",
    "pure_full",
    "nmode_conjugate",
    "nmode_plain",
)

INEQUALITIES = {
    "variance_pair": "Var(X1)+Var(X2) >= 2(<NaNb>+<NbNc>+<NaNc>+<N_k>) with X1,X2 the Hermitian parts of a mixed raise/lower product",
    "moment": "|<product with one mode daggered>|^2 <= <prod (a_i^dag)^k_i a_i^k_i>",
    "sqrt_moment": "|<a^m b^n c^l>| <= sqrt(<group number-power> <complement number-power>)",
    "full_variance": "min_phi Var(e^{i phi} P^dag + e^{-i phi} P) >= 1 with P the product of all lowering operators",
    "pure_full": "|<a^m b^n c^l>| > sqrt(<a^dag^m a^m><b^dag^n b^n><c^dag^l c^l>) with all three factorized cut moments below the same bound (pure states)",
    "nmode_conjugate": "|<prod_S a_i^l_i prod_notS (a_j^dag)^l_j>|^2 <= <prod_i (a_i^dag)^l_i a_i^l_i>",
    "nmode_plain": "|<prod_i a_i^l_i>|^2 <= <group number-power><complement number-power>",
}


@dataclass(frozen=True)
class Bipartition:
    """A cut of ``n_modes`` modes into ``group`` and its complement.

    Stored canonically with the last mode on the complement side, so the
    three-mode cuts are A|BC = {0}, B|AC = {1} and AB|C = {0, 1}.
    """

    group: frozenset
    n_modes: int

    def __post_init__(self):
        g = frozenset(int(i) for i in self.group)
        n = int(self.n_modes)
        if not g or len(g) >= n or min(g) < 0 or max(g) >= n:
            raise ValueError(f"{sorted(g)} is not a nonempty proper subset of {n} modes")
        if n - 1 in g:
            g = frozenset(range(n)) - g
        object.__setattr__(self, "group", g)
        object.__setattr__(self, "n_modes", n)

    @property
    def complement(self) -> frozenset:
        return frozenset(range(self.n_modes)) - self.group

    @property
    def label(self) -> str:
        if self.n_modes <= 26:
            name = lambda g: "".join(string.ascii_uppercase[i] for i in sorted(g))
            return f"{name(self.group)}|{name(self.complement)}"
        name = lambda g: ",".join(str(i) for i in sorted(g))
        return f"{name(self.group)}|{name(self.complement)}"

    @classmethod
    def parse(cls, text: str, n_modes: int) -> Bipartition:
        left = text.split("|")[0].strip()
        if "," in left or left.isdigit():
            group = [int(x) for x in left.split(",")]
        else:
            group = [string.ascii_uppercase.index(ch) for ch in left.upper()]
        return cls(frozenset(group), n_modes)

    def __str__(self):
        return self.label

    def sort_key(self):
        return (len(self.group), sorted(self.group))


A_BC = Bipartition(frozenset({0}), 3)
B_AC = Bipartition(frozenset({1}), 3)
AB_C = Bipartition(frozenset({0, 1}), 3)

#: cut concluded when the named mode is the one singled out
SINGLED_OUT_CUT = {0: A_BC, 1: B_AC, 2: AB_C}


def all_cuts(n_modes: int) -> list[Bipartition]:
    cuts = []
    for size in range(1, n_modes):
        for g in itertools.combinations(range(n_modes - 1), size):
            cuts.append(Bipartition(frozenset(g), n_modes))
    return sorted(cuts, key=Bipartition.sort_key)


@dataclass
class CriterionResult:
    criterion: str
    cut: Optional[Bipartition]
    params: dict
    lhs: float
    rhs: float
    margin: float
    fired: bool
    truncation_warning: bool = False
    details: dict = field(default_factory=dict)
    error: Optional[str] = None

    @property
    def verdict(self) -> str:
        if self.error is not None:
            return "error"
        return "fired" if self.fired else "not_fired"

    @property
    def conclusion(self) -> str:
        return "full" if self.cut is None else self.cut.label

    @property
    def inequality(self) -> str:
        return INEQUALITIES[self.criterion]


class _Moments:
    """Memoized monomial expectations of one state."""

    def __init__(self, state):
        if isinstance(state, _Moments):
            state = state.state
        if isinstance(state, Ensemble):
            state = state.to_density()
        if not isinstance(state, (PureState, DensityMatrix)):
            raise TypeError(f"expected a state, got {type(state).__name__}")
        self.state = state
        self._cache = {}

    @property
    def n_modes(self) -> int:
        return self.state.n_modes

    @property
    def dims(self) -> tuple:
        return self.state.cutoff.dims

    @property
    def is_pure(self) -> bool:
        return isinstance(self.state, PureState)

    def __call__(self, m: ModeMonomial) -> complex:
        val = self._cache.get(m)
        if val is None:
            val = self._cache[m] = expectation(m, self.state)
        return val

    def number_power(self, powers: Sequence[int]) -> float:
        return self(ModeMonomial.number_power(tuple(powers))).real

    def _boundary(self) -> float:
        key = "boundary"
        if key not in self._cache:
            self._cache[key] = boundary_weight(self.state)
        return self._cache[key]


def _ctx(s) -> _Moments:
    return s if isinstance(s, _Moments) else _Moments(s)


def _require_three(ctx: _Moments, what: str) -> None:
    if ctx.n_modes != 3:
        raise UnsupportedStateError(f"{what} is defined for three-mode states, got {ctx.n_modes}")


def _check_degrees(degrees: Sequence[int], n: int) -> tuple:
    degrees = tuple(int(k) for k in degrees)
    if len(degrees) != n:
        raise ValueError(f"expected {n} degrees, got {len(degrees)}")
    if any(k < 1 for k in degrees):
        raise ValueError(f"degrees must be positive integers, got {degrees}")
    return degrees


def _degree_overflow(ctx: _Moments, degrees: Sequence[int]) -> bool:
    # a^k annihilates the whole window once k >= d: both sides vanish trivially
    return any(k >= d for k, d in zip(degrees, ctx.dims))


def _check_truncation(mode: str) -> None:
    if mode not in TRUNCATION_MODES:
        raise ValueError(f"truncation must be one of {TRUNCATION_MODES}, got {mode!r}")


def _fires(margin: float, tol: float) -> bool:
    return bool(margin > tol)


# bases whose Hermitian parts form the variance pair, keyed by the singled-out mode
_PAIR_BASES = {
    2: ModeMonomial((0, 0, 1), (1, 1, 0)),  # a b c^dag
    0: ModeMonomial((1, 0, 0), (0, 1, 1)),  # a^dag b c
    1: ModeMonomial((0, 1, 0), (1, 0, 1)),  # a b^dag c
}


def variance_pair_criterion(s, distinguished: int, tolerance: float = DEFAULT_TOL,
                            truncation: str = "exact") -> CriterionResult:
    """Sum-uncertainty test for the cut isolating mode ``distinguished``.

    For ``distinguished = 2`` the pair is ``L1 = abc^dag + a^dag b^dag c`` and
    ``L2 = i(abc^dag - a^dag b^dag c)``; modes 0 and 1 use ``a^dag bc`` and
    ``ab^dag c`` as base. Fires when
    ``Var(L1) + Var(L2) < 2(<NaNb> + <NbNc> + <NaNc> + <N_distinguished>)``.
    """
    ctx = _ctx(s)
    _require_three(ctx, "variance_pair")
    _check_truncation(truncation)
    if distinguished not in _PAIR_BASES:
        raise ValueError("distinguished mode must be 0, 1 or 2")
    base = _PAIR_BASES[distinguished]
    target = embed(ctx.state, 1) if truncation == "exact" else ctx.state
    lhs = (variance(BalancedForm(base, 0.0), target)
           + variance(BalancedForm(base, -np.pi / 2), target))
    tail = [0, 0, 0]
    tail[distinguished] = 1
    rhs = 2.0 * (ctx.number_power((1, 1, 0)) + ctx.number_power((0, 1, 1))
                 + ctx.number_power((1, 0, 1)) + ctx.number_power(tail))
    margin = rhs - lhs
    warn = truncation == "hard" and ctx._boundary() > BOUNDARY_TOL
    return CriterionResult(
        "variance_pair", SINGLED_OUT_CUT[distinguished],
        {"distinguished": distinguished, "truncation": truncation},
        lhs, rhs, margin, _fires(margin, tolerance), warn,
    )


def moment_criterion(s, daggered_mode: int, degrees: Sequence[int],
                     tolerance: float = DEFAULT_TOL) -> CriterionResult:
    """``|<a^m b^n c^l>|^2`` with one mode daggered against the number-power moment.

    Daggering mode 2 concludes AB|C, mode 0 concludes A|BC, mode 1 B|AC.
    """
    ctx = _ctx(s)
    _require_three(ctx, "moment")
    degrees = _check_degrees(degrees, 3)
    if daggered_mode not in (0, 1, 2):
        raise ValueError("daggered mode must be 0, 1 or 2")
    raise_ = [0, 0, 0]
    lower = list(degrees)
    raise_[daggered_mode], lower[daggered_mode] = degrees[daggered_mode], 0
    lhs = abs(ctx(ModeMonomial(tuple(raise_), tuple(lower)))) ** 2
    rhs = ctx.number_power(degrees)
    margin = lhs - rhs
    return CriterionResult(
        "moment", SINGLED_OUT_CUT[daggered_mode],
        {"daggered_mode": daggered_mode, "degrees": list(degrees)},
        lhs, rhs, margin, _fires(margin, tolerance), _degree_overflow(ctx, degrees),
    )


def _group_powers(degrees: Sequence[int], group: Iterable[int]) -> tuple:
    g = set(group)
    return tuple(k if i in g else 0 for i, k in enumerate(degrees))


def sqrt_criterion(s, cut: Bipartition, degrees: Sequence[int],
                   tolerance: float = DEFAULT_TOL) -> CriterionResult:
    """``|<a^m b^n c^l>|`` against the geometric mean of the two group moments."""
    ctx = _ctx(s)
    _require_three(ctx, "sqrt_moment")
    degrees = _check_degrees(degrees, 3)
    if cut.n_modes != 3:
        raise ValueError("cut must split three modes")
    lhs = abs(ctx(ModeMonomial.lowering(degrees)))
    left = ctx.number_power(_group_powers(degrees, cut.group))
    right = ctx.number_power(_group_powers(degrees, cut.complement))
    rhs = float(np.sqrt(max(left * right, 0.0)))
    margin = lhs - rhs
    return CriterionResult(
        "sqrt_moment", cut, {"degrees": list(degrees)},
        lhs, rhs, margin, _fires(margin, tolerance), _degree_overflow(ctx, degrees),
    )


def optimal_phase(square_minus_mean2: complex) -> float:
    """Phase in ``[0, pi)`` minimizing ``2 Re(e^{-2i phi} B)``."""
    return float(((np.angle(square_minus_mean2) + np.pi) / 2.0) % np.pi)


def full_variance_criterion(s, tolerance: float = DEFAULT_TOL,
                            truncation: str = "hard") -> CriterionResult:
    """Phase-optimized variance of ``K(phi) = e^{i phi} P^dag + e^{-i phi} P``.

    ``P`` is the product of all lowering operators. The variance is
    ``A + 2 Re(e^{-2i phi} B)`` with ``A = <P^dag P> + <P P^dag> - 2|<P>|^2`` and
    ``B = <P^2> - <P>^2``; its minimum over phi is ``A - 2|B|``. A minimum below
    1 certifies full entanglement.

    With ``truncation="hard"`` the value depends on the cutoff for states
    with weight on the top level: the GHZ state gives 0 at cutoff 2 but 4 at
    any cutoff >= 3 (and with ``truncation="exact"``).
    """
    ctx = _ctx(s)
    if ctx.n_modes < 2:
        raise UnsupportedStateError("full_variance needs at least two modes")
    _check_truncation(truncation)
    target = embed(ctx.state, 1) if truncation == "exact" else ctx.state
    sm = second_moments(ModeMonomial.lowering((1,) * ctx.n_modes), target)
    a = sm.dag_m + sm.m_dag - 2.0 * abs(sm.mean) ** 2
    b = sm.square - sm.mean**2
    lhs = float(a - 2.0 * abs(b))
    phase = optimal_phase(b)
    margin = 1.0 - lhs
    warn = truncation == "hard" and ctx._boundary() > BOUNDARY_TOL
    return CriterionResult(
        "full_variance", None, {"phase": phase, "truncation": truncation},
        lhs, 1.0, margin, _fires(margin, tolerance), warn,
        details={"A": float(a), "B": [float(b.real), float(b.imag)]},
    )


_CUT_FACTORS = (
    ("AB|C", (0, 1), (2,)),
    ("A|BC", (0,), (1, 2)),
    ("B|AC", (1,), (0, 2)),
)


def pure_full_criterion(s, degrees: Sequence[int],
                        tolerance: float = DEFAULT_TOL) -> CriterionResult:
    """Full-entanglement test for pure three-mode states.

    Fires when ``|<a^m b^n c^l>|`` strictly exceeds
    ``sqrt(<a^dag^m a^m><b^dag^n b^n><c^dag^l c^l>)`` while each factorized cut
    moment ``|<x><y>|^2`` stays at or below the squared bound.
    """
    ctx = _ctx(s)
    if not ctx.is_pure:
        raise PreconditionError("pure_full is valid for pure states only")
    _require_three(ctx, "pure_full")
    degrees = _check_degrees(degrees, 3)
    single = [ctx.number_power(_group_powers(degrees, [i])) for i in range(3)]
    bound2 = single[0] * single[1] * single[2]
    lhs = abs(ctx(ModeMonomial.lowering(degrees)))
    rhs = float(np.sqrt(max(bound2, 0.0)))
    margin = lhs - rhs
    companions = {}
    ok = True
    for label, g1, g2 in _CUT_FACTORS:
        x = ctx(ModeMonomial.lowering(_group_powers(degrees, g1)))
        y = ctx(ModeMonomial.lowering(_group_powers(degrees, g2)))
        c_lhs = abs(x * y) ** 2
        companions[label] = {"lhs": c_lhs, "rhs": bound2}
        ok = ok and c_lhs <= bound2 + tolerance
    return CriterionResult(
        "pure_full", None, {"degrees": list(degrees)},
        lhs, rhs, margin, _fires(margin, tolerance) and ok, _degree_overflow(ctx, degrees),
        details={"companions": companions, "companions_hold": ok},
    )


def nmode_moment_criterion(s, cut: Bipartition, degrees: Sequence[int],
                           conjugate_complement: bool,
                           tolerance: float = DEFAULT_TOL) -> CriterionResult:
    """Moment tests for an arbitrary cut of an n-mode state.

    ``conjugate_complement=True`` daggers every complement mode and bounds the
    squared modulus by the full number-power moment; ``False`` keeps every mode
    lowered and bounds it by the product of the two group moments.
    """
    ctx = _ctx(s)
    n = ctx.n_modes
    if cut.n_modes != n:
        raise ValueError(f"cut splits {cut.n_modes} modes, state has {n}")
    degrees = _check_degrees(degrees, n)
    if conjugate_complement:
        comp = cut.complement
        raise_ = tuple(k if i in comp else 0 for i, k in enumerate(degrees))
        lower = tuple(0 if i in comp else k for i, k in enumerate(degrees))
        lhs = abs(ctx(ModeMonomial(raise_, lower))) ** 2
        rhs = ctx.number_power(degrees)
        name = "nmode_conjugate"
    else:
        lhs = abs(ctx(ModeMonomial.lowering(degrees))) ** 2
        rhs = (ctx.number_power(_group_powers(degrees, cut.group))
               * ctx.number_power(_group_powers(degrees, cut.complement)))
        name = "nmode_plain"
    margin = lhs - rhs
    return CriterionResult(
        name, cut, {"degrees": list(degrees)},
        lhs, rhs, margin, _fires(margin, tolerance), _degree_overflow(ctx, degrees),
    )


@dataclass(frozen=True)
class BatteryConfig:
    max_degree: int = 3
    tolerance: float = DEFAULT_TOL
    criteria: Optional[tuple] = None  # None selects every applicable family
    pair_truncation: str = "exact"
    full_truncation: str = "hard"

    def __post_init__(self):
        if self.max_degree < 1:
            raise ValueError("max_degree must be >= 1")
        if self.criteria is not None:
            unknown = set(self.criteria) - set(CRITERIA)
            if unknown:
                raise ValueError(f"unknown criteria {sorted(unknown)}; choose from {CRITERIA}")
            object.__setattr__(self, "criteria", tuple(self.criteria))
        _check_truncation(self.pair_truncation)
        _check_truncation(self.full_truncation)


@dataclass
class BatteryReport:
    results: list
    n_modes: int
    is_pure: bool
    entangled_cuts: list
    fully_entangled_via_theorem8: bool
    fully_entangled_via_all_cuts: bool
    pure_full_via_theorem9: bool

    @property
    def fired(self) -> list:
        return [r for r in self.results if r.fired]

    @property
    def any_fired(self) -> bool:
        return any(r.fired for r in self.results)

    @property
    def truncation_warnings(self) -> list:
        return [r for r in self.results if r.truncation_warning]


def _selected(config: BatteryConfig, n_modes: int, is_pure: bool) -> list:
    if config.criteria is not None:
        return list(config.criteria)
    if n_modes == 3:
        chosen = ["variance_pair", "moment", "sqrt_moment", "full_variance"]
        if is_pure:
            chosen.append("pure_full")
        return chosen
    if n_modes >= 2:
        return ["full_variance", "nmode_conjugate", "nmode_plain"]
    return []


def _jobs(name: str, ctx: _Moments, config: BatteryConfig):
    n = ctx.n_modes
    tol = config.tolerance
    grid = list(itertools.product(range(1, config.max_degree + 1), repeat=max(n, 1)))
    if name == "variance_pair":
        for k in (0, 1, 2):
            yield lambda k=k: variance_pair_criterion(ctx, k, tol, config.pair_truncation)
    elif name == "moment":
        for k in (0, 1, 2):
            for deg in grid:
                yield lambda k=k, deg=deg: moment_criterion(ctx, k, deg, tol)
    elif name == "sqrt_moment":
        for cut in all_cuts(3):
            for deg in grid:
                yield lambda cut=cut, deg=deg: sqrt_criterion(ctx, cut, deg, tol)
    elif name == "full_variance":
        yield lambda: full_variance_criterion(ctx, tol, config.full_truncation)
    elif name == "pure_full":
        for deg in grid:
            yield lambda deg=deg: pure_full_criterion(ctx, deg, tol)
    elif name in ("nmode_conjugate", "nmode_plain"):
        conj = name == "nmode_conjugate"
        for cut in all_cuts(n) if n >= 2 else []:
            for deg in grid:
                yield lambda cut=cut, deg=deg: nmode_moment_criterion(ctx, cut, deg, conj, tol)


def _error_result(name: str, exc: Exception) -> CriterionResult:
    return CriterionResult(name, None, {}, float("nan"), float("nan"), float("nan"),
                           False, error=f"{type(exc).__name__}: {exc}")


def run_battery(s, config: Optional[BatteryConfig] = None) -> BatteryReport:
    """Evaluate every selected criterion over all cuts and degree vectors ``<= max_degree``.

    Results come back in a fixed order (family, then cut, then degrees).
    A criterion that raises becomes an error record; the battery continues.
    """
    config = config or BatteryConfig()
    ctx = _Moments(s)
    results = []
    for name in _selected(config, ctx.n_modes, ctx.is_pure):
        try:
            jobs = list(_jobs(name, ctx, config))
        except Exception as exc:  # noqa: BLE001
            results.append(_error_result(name, exc))
            continue
        if not jobs:
            continue
        for job in jobs:
            try:
                results.append(job())
            except Exception as exc:  # noqa: BLE001
                results.append(_error_result(name, exc))
                break  # the same precondition fails for every parameter
    cuts = {r.cut for r in results if r.fired and r.cut is not None}
    n = ctx.n_modes
    every_cut = n >= 2 and all(c in cuts for c in all_cuts(n))
    return BatteryReport(
        results=results,
        n_modes=n,
        is_pure=ctx.is_pure,
        entangled_cuts=sorted(cuts, key=Bipartition.sort_key),
        fully_entangled_via_theorem8=any(
            r.fired for r in results if r.criterion == "full_variance"),
        fully_entangled_via_all_cuts=ctx.is_pure and every_cut,
        pure_full_via_theorem9=any(r.fired for r in results if r.criterion == "pure_full"),
    )
