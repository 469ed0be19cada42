"""Acceptance gate: one test per criterion, tolerances and time budgets pinned."""

import json
import math
import time

import numpy as np
import pytest

from fockwit.cli import CUTOFF_NOTE, build_report
from fockwit.fock import BalancedForm, Ensemble, ModeMonomial, apply_monomial, expectation, variance
from fockwit.oracle import dense_monomial, schmidt_rank
from fockwit.states import (
    CatParams,
    make_cat,
    make_fock,
    make_four_term_psi,
    make_ghz,
    random_product,
    random_pure,
    random_separable_mixture,
)
from fockwit.witnesses import (
    AB_C,
    A_BC,
    B_AC,
    BatteryConfig,
    full_variance_criterion,
    run_battery,
    variance_pair_criterion,
)

from conftest import headroom_state

ABC_DAG = ModeMonomial((0, 0, 1), (1, 1, 0))
PARTITIONS = {A_BC: [[0], [1, 2]], B_AC: [[1], [0, 2]], AB_C: [[0, 1], [2]]}


class Budget:
    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0
        if exc[0] is None:
            assert self.elapsed < self.seconds, f"took {self.elapsed:.2f} s, budget {self.seconds} s"


def dense_var(op, v):
    f = op @ v
    return np.vdot(f, f).real - np.vdot(v, f).real ** 2


def test_ac01_four_term_state_variance_pair():
    with Budget(1.0):
        psi = make_four_term_psi((3, 3, 3))
        m = dense_monomial(psi.cutoff, ABC_DAG).matrix
        n = lambda p: dense_monomial(psi.cutoff, ModeMonomial.number_power(p)).expectation(psi).real
        oracle_lhs = dense_var(m + m.T, psi.amplitudes) + dense_var(1j * (m - m.T), psi.amplitudes)
        oracle_rhs = 2 * (n((1, 1, 0)) + n((0, 1, 1)) + n((1, 0, 1)) + n((0, 0, 1)))
        r = variance_pair_criterion(psi, 2)
    assert abs(oracle_lhs - 1.75) < 1e-9 and abs(oracle_rhs - 2.0) < 1e-9
    assert abs(r.lhs - oracle_lhs) < 1e-9 and abs(r.rhs - oracle_rhs) < 1e-9
    assert r.fired and r.cut == AB_C


def test_ac02_ghz_full_variance_and_cutoff_note():
    with Budget(1.0):
        ghz2 = make_ghz((2, 2, 2))
        r2 = full_variance_criterion(ghz2)
        ghz4 = make_ghz((4, 4, 4))
        r4 = full_variance_criterion(ghz4)
        p = dense_monomial(ghz4.cutoff, ModeMonomial.lowering((1, 1, 1))).matrix
        oracle4 = dense_var(p + p.T, ghz4.amplitudes)  # B = 0 for GHZ, so every phase gives the minimum
        config = BatteryConfig()
        doc = build_report({}, ghz2, run_battery(ghz2, config), config, 0.0)
    assert abs(r2.lhs) < 1e-10 and r2.fired
    assert abs(oracle4 - 4.0) < 1e-9 and abs(r4.lhs - 4.0) < 1e-9
    assert doc["flags"]["fully_entangled_via_theorem8"] and CUTOFF_NOTE in doc["notes"]


def test_ac03_cat_state_closed_forms_and_battery():
    with Budget(5.0):
        cat = make_cat((16, 16, 16), CatParams([0.8, 0.8, 0.8], -1))
        m = abs(expectation(ModeMonomial((1, 0, 0), (0, 2, 1)), cat))
        r = math.sqrt(expectation(ModeMonomial.number_power((1, 2, 1)), cat).real)
        rep = run_battery(cat, BatteryConfig(max_degree=2))
    assert abs(m - 0.8 * 0.8**2 * 0.8 / math.tanh(3 * 0.64)) < 1e-6
    assert abs(r - 0.4096) < 1e-6
    assert set(rep.entangled_cuts) == {A_BC, B_AC, AB_C}
    assert rep.fully_entangled_via_all_cuts


def test_ac04_no_false_positives_on_separable_mixtures():
    offenders = []
    with Budget(60.0):
        config = BatteryConfig(max_degree=2, tolerance=1e-9)
        jobs = [(None, seed) for seed in range(500)]
        jobs += [(cut, 1000 * (i + 1) + seed) for i, cut in enumerate(PARTITIONS) for seed in range(500)]
        for cut, seed in jobs:
            k = 1 + seed % 6
            part = PARTITIONS[cut] if cut is not None else None
            rho = random_separable_mixture((4, 4, 4), k, part, seed)
            for res in run_battery(rho, config).results:
                applicable = cut is None or res.cut is None or res.cut == cut
                if applicable and (res.fired or res.error):
                    offenders.append((cut and cut.label, seed, res.criterion, res.params, res.margin))
    assert not offenders, offenders[:10]


def test_ac05_variance_concave_over_ensembles():
    worst = math.inf
    with Budget(10.0):
        for seed in range(200):
            rng = np.random.default_rng(seed)
            dims = (3, 3, 3)
            k = int(rng.integers(1, 7))
            w = rng.uniform(size=k)
            comps = tuple(zip(w / w.sum(), [random_pure(dims, rng) for _ in range(k)]))
            ens = Ensemble(comps)
            form = BalancedForm(
                ModeMonomial(tuple(rng.integers(0, 3, 3)), tuple(rng.integers(0, 3, 3))),
                float(rng.uniform(0, 2 * math.pi)),
            )
            gap = variance(form, ens.to_density()) - sum(p * variance(form, s) for p, s in comps)
            worst = min(worst, gap)
    assert worst >= -1e-10


def test_ac06_operator_identities_on_headroom_states():
    worst = 0.0
    with Budget(10.0):
        for seed in range(100):
            s = headroom_state(seed, d=6)
            e = lambda p: expectation(ModeMonomial.number_power(p), s).real
            up, down = apply_monomial(ABC_DAG.adjoint(), s), apply_monomial(ABC_DAG, s)
            l1, l2 = up + down, 1j * (down - up)
            comm = np.vdot(l1, l2) - np.vdot(l2, l1)
            eq1 = 2j * (e((1, 1, 0)) - e((1, 0, 1)) - e((0, 1, 1)) - e((0, 0, 1)))
            lhs = variance(BalancedForm(ABC_DAG, 0.0), s) + variance(BalancedForm(ABC_DAG, -math.pi / 2), s)
            eq2 = (4 * e((1, 1, 1)) - 4 * abs(expectation(ABC_DAG, s)) ** 2
                   + 2 * (e((1, 1, 0)) + e((0, 1, 1)) + e((1, 0, 1)) + e((0, 0, 1))))
            worst = max(worst, abs(comm - eq1), abs(lhs - eq2))
    assert worst < 1e-10


def _pure_sample(seed):
    # one in five is a Haar-random state; the rest are products over each
    # separability pattern, so every cut sees states it must stay silent on
    kind = seed % 5
    if kind == 0:
        return random_pure((3, 3, 3), seed)
    if kind == 1:
        return random_product((3, 3, 3), seed)
    return random_product((3, 3, 3), seed, list(PARTITIONS.values())[kind - 2])


def test_ac07_fired_cuts_confirmed_by_schmidt_rank():
    contradictions, fired = [], 0
    with Budget(30.0):
        for seed in range(300):
            s = _pure_sample(seed)
            rep = run_battery(s)
            for res in rep.fired:
                if res.cut is None:
                    continue
                fired += 1
                if schmidt_rank(s, res.cut)[0] < 2:
                    contradictions.append((seed, res.criterion, res.cut.label, res.params))
    assert fired > 0
    assert not contradictions, contradictions[:10]


def test_ac08_four_mode_full_variance():
    with Budget(2.0):
        ghz = full_variance_criterion(make_ghz((2, 2, 2, 2)))
        vac = full_variance_criterion(make_fock((2, 2, 2, 2), [0, 0, 0, 0]))
    assert abs(ghz.lhs) < 1e-10 and ghz.fired
    assert vac.lhs == 1.0 and not vac.fired


def _random_pair(rng, i):
    n = int(rng.integers(1, 5))
    if i < 4:  # a few at the oracle cap
        dims = {1: (4096,), 2: (64, 64), 3: (16, 16, 16), 4: (8, 8, 8, 8)}[n]
    else:
        dims = tuple(int(d) for d in rng.integers(2, 9, n))
        while np.prod(dims) > 4096:
            dims = dims[:-1] + (max(2, dims[-1] // 2),)
    degree = int(rng.integers(0, 7))
    split = np.bincount(rng.integers(0, 2 * n, degree), minlength=2 * n)
    m = ModeMonomial(tuple(int(x) for x in split[:n]), tuple(int(x) for x in split[n:]))
    state = random_pure(dims, rng)
    if i % 3 == 0 and np.prod(dims) <= 256:
        state = random_separable_mixture(dims, 3, seed=rng).to_density()
    return m, state


def test_ac09_dense_and_sparse_expectations_agree():
    worst, where = 0.0, None
    with Budget(30.0):
        rng = np.random.default_rng(2024)
        for i in range(200):
            m, s = _random_pair(rng, i)
            assert m.degree <= 6 and s.cutoff.total_dim <= 4096
            dense = dense_monomial(s.cutoff, m).expectation(s)
            err = abs(dense - expectation(m, s))
            if err > worst:
                worst, where = err, (s.cutoff.dims, m, abs(dense))
    assert worst < 1e-12, f"worst |dense - sparse| = {worst:.3e} at dims, monomial, |value| = {where}"


@pytest.mark.parametrize("dims, budget", [((10, 10, 10), 1.0), ((8, 8, 8, 8), 10.0)])
def test_ac10_battery_performance(dims, budget):
    s = random_pure(dims, 0)
    with Budget(budget):
        rep = run_battery(s, BatteryConfig(max_degree=2))
    assert rep.results and not any(r.error for r in rep.results)
    json.dumps([r.lhs for r in rep.results])
