"""Acceptance criteria, each at its stated tolerance.

A PASS/FAIL line per criterion is printed in the pytest terminal summary.
"""

import time

import numpy as np
import pytest

from siodistill.cli import main
from siodistill.distill import closed_form_distribution, closed_form_value, distill, inflate_level
from siodistill.fixtures import gap_io_pair, gap_state, path, worked_pure_state
from siodistill.formats import read_lp
from siodistill.lp import (
    build_distillation_lp,
    final_tableau_closed_form_check,
    simplex_solve,
    solve_lp,
    to_standard_form,
    vertex_enumeration_oracle,
)
from siodistill.majorization import check_pure_to_ensemble
from siodistill.measures import builtin_measure
from siodistill.quantum import (
    apply_channel,
    apply_instrument,
    completeness_defect,
    fidelity_with_pure,
    is_io_kraus,
    is_sio_kraus,
    maximally_coherent_state,
    pure_density,
)
from siodistill.subspace import find_maximal_subspaces, is_distillable, is_reversible, make_subspace

from generators import block_state, direct_sum_of_mcs, random_pure, wishart_state

MEASURES = ("l1", "relent")


def test_ac1_gap_fixture(criterion):
    criterion("AC1", "gap fixture: four singletons, nothing distillable by SIO, IO pair reaches psi^2")
    rho, (k1, k2) = gap_state(), gap_io_pair()
    start = time.perf_counter()
    dec = find_maximal_subspaces(rho)
    assert sorted(s.indices for s in dec.subspaces) == [(0,), (1,), (2,), (3,)]
    assert not is_distillable(rho)
    for name in MEASURES:
        assert distill(rho, builtin_measure(name, 4)).total_value == 0
    out = apply_channel(rho, [k1, k2])
    assert fidelity_with_pure(out, maximally_coherent_state(2, 4)) >= 1 - 1e-10
    assert not is_sio_kraus(k1) and not is_sio_kraus(k2)
    assert is_io_kraus(k1) and is_io_kraus(k2)
    elapsed = time.perf_counter() - start
    assert elapsed < 0.1, f"{elapsed:.3f} s"


def test_ac2_closed_form_lp_oracle(criterion):
    criterion("AC2", "closed form = simplex = vertex oracle within 1e-9 (200 states x d=2..8 x 2 measures)")
    rng = np.random.default_rng(20240602)
    start = time.perf_counter()
    worst_lp = worst_oracle = 0.0
    for d in range(2, 9):
        measures = [builtin_measure(name, d) for name in MEASURES]
        for _ in range(200):
            phi = random_pure(d, rng)
            sub = make_subspace(pure_density(phi), range(d))
            for measure in measures:
                lp = build_distillation_lp(phi, measure)
                simplex = solve_lp(lp).optimum
                worst_lp = max(worst_lp, abs(closed_form_value(sub, measure) - simplex))
                worst_oracle = max(worst_oracle, abs(simplex - vertex_enumeration_oracle(lp)))
    elapsed = time.perf_counter() - start
    assert worst_lp <= 1e-9 and worst_oracle <= 1e-9, (worst_lp, worst_oracle)
    assert elapsed < 30, f"{elapsed:.1f} s"


def test_ac3_instrument_validity(criterion):
    criterion("AC3", "optimal instrument is complete, SIO, hits psi^n, matches closed-form probabilities")
    rng = np.random.default_rng(7)
    for trial in range(100):
        d = int(rng.integers(1, 9))
        rho, _, _ = block_state(d, rng, null=int(rng.integers(0, 2)) if d > 1 else 0)
        measure = builtin_measure(MEASURES[trial % 2], d)
        plan = distill(rho, measure)
        kraus = plan.kraus_operators
        assert completeness_defect(kraus) <= 1e-10
        assert all(is_sio_kraus(k) for k in kraus)
        average = 0.0
        for sp in plan.subspaces:
            expected = sp.subspace.weight * closed_form_distribution(sp.subspace)
            for o in sp.outcomes:
                sims = apply_instrument(rho, o.kraus)
                prob = sum(s.probability for s in sims)
                if o.level is None:
                    assert prob <= 1e-10
                    continue
                assert abs(prob - expected[o.level - 1]) <= 1e-10
                if prob > 1e-12:
                    state = sum(s.probability * s.post_state.matrix for s in sims) / prob
                    target = maximally_coherent_state(o.level, d, o.support)
                    assert fidelity_with_pure(state, target) >= 1 - 1e-9
                average += prob * measure.level_value(o.level)
        assert abs(average - plan.total_value) <= 1e-9


def test_ac4_majorization_consistency(criterion):
    criterion("AC4", "plan distributions saturate the tail conditions; any 1e-3 inflation is infeasible")
    rng = np.random.default_rng(11)
    for trial in range(60):
        d = int(rng.integers(1, 8))
        rho, _, _ = block_state(d, rng)
        plan = distill(rho, builtin_measure(MEASURES[trial % 2], d))
        for sp in plan.subspaces:
            dm = sp.subspace.dim
            levels = [maximally_coherent_state(n, dm) for n in range(1, dm + 1)]
            chk = check_pure_to_ensemble(sp.subspace.coefficients, list(zip(sp.distribution, levels)))
            assert np.all(chk.slacks >= -1e-10)
            assert np.all(np.abs(chk.slacks) <= 1e-10)
            for n in range(1, dm + 1):
                bumped = inflate_level(sp.distribution, n, 1e-3)
                assert not check_pure_to_ensemble(sp.subspace.coefficients, list(zip(bumped, levels))).feasible


def test_ac5_pure_state_reduction(criterion):
    criterion("AC5", "f(n) = n-1 on pure states: closed-form p_n, psi^d -> d-1, worked state -> 1.4")
    rng = np.random.default_rng(5)
    for d in range(2, 9):
        l1 = builtin_measure("l1", d)
        for _ in range(20):
            phi = random_pure(d, rng)
            a = np.append(np.sort(np.abs(phi) ** 2)[::-1], 0)
            p = np.arange(1, d + 1) * (a[:-1] - a[1:])
            value = distill(pure_density(phi), l1).total_value
            assert value == pytest.approx(float(p @ np.arange(d)), abs=1e-12)
        psi = distill(pure_density(maximally_coherent_state(d, d)), l1)
        assert psi.total_value == pytest.approx(d - 1, abs=1e-12)
        assert psi.global_distribution[-1] == pytest.approx(1, abs=1e-12)
    plan = distill(worked_pure_state(), builtin_measure("l1", 3))
    assert plan.total_value == pytest.approx(1.4, abs=1e-12)
    assert np.allclose(plan.global_distribution, [0.2, 0.2, 0.6], atol=1e-12)
    lp = build_distillation_lp(np.sqrt([0.5, 0.3, 0.2]), builtin_measure("l1", 3))
    assert vertex_enumeration_oracle(lp) == pytest.approx(1.4, abs=1e-12)


def test_ac6_traced_tableau(criterion, capsys):
    criterion("AC6", "traced d=4 LP: first pivot gives objective 2 q_2; final tableau matches closed form")
    lp = read_lp(path("pivot_d4.lp"))
    q = lp.q
    assert q[0] >= 2 * q[1]
    assert main(["lp", "--input", str(path("pivot_d4.lp")), "--trace"]) == 0
    out = capsys.readouterr().out
    second = out.split("tableau 1\n")[1].split("\n\n")[0].splitlines()
    rows = {ln.split()[0]: float(ln.split()[-1]) for ln in second[1:]}
    assert rows["c"] == pytest.approx(2 * q[1], abs=1e-6)
    assert rows["p_5"] == pytest.approx(q[0] - 2 * q[1], abs=1e-6)
    assert rows["p_2"] == pytest.approx(2 * q[1], abs=1e-6)
    assert rows["p_7"] == pytest.approx(q[2], abs=1e-6)
    assert rows["p_8"] == pytest.approx(q[3], abs=1e-6)
    res = simplex_solve(to_standard_form(lp), record=True)
    assert res.history[1].objective == pytest.approx(2 * q[1], abs=1e-12)
    pops = q - np.append(q[1:], 0)
    check = final_tableau_closed_form_check(res.tableau, np.sqrt(pops), builtin_measure("l1", 4))
    assert check, check.diagnostic


def _random_input(rng, kind: int):
    d = int(rng.integers(1, 8))
    if kind == 0:
        return block_state(d, rng, null=int(rng.integers(0, 2)) if d > 1 else 0)[0]
    if kind == 1:
        return pure_density(random_pure(d, rng))
    return wishart_state(d, rng, rank=int(rng.integers(1, d + 1)))


def test_ac7_monotonicity_and_symmetry(criterion):
    criterion("AC7", "total value <= input coherence; invariant under phases and permutations")
    rng = np.random.default_rng(13)
    for trial in range(200):
        rho = _random_input(rng, trial % 3)
        d = rho.shape[0]
        measure = builtin_measure(MEASURES[trial % 2], d)
        value = distill(rho, measure).total_value
        assert value <= measure.state_measure(rho) + 1e-9
        u = np.exp(1j * rng.uniform(0, 2 * np.pi, d))
        phased = u[:, None] * rho * u.conj()[None, :]
        perm = rng.permutation(d)
        assert abs(distill(phased, measure).total_value - value) <= 1e-10
        assert abs(distill(rho[np.ix_(perm, perm)], measure).total_value - value) <= 1e-10


def test_ac8_irreversibility_classifier(criterion):
    criterion("AC8", "reversible exactly on direct sums of maximally coherent states")
    rng = np.random.default_rng(17)
    assert not is_reversible(worked_pure_state())
    assert not is_reversible(gap_state())
    for _ in range(50):
        d = int(rng.integers(1, 8))
        rho, _ = direct_sum_of_mcs(d, rng)
        assert is_reversible(rho)
        d = int(rng.integers(2, 8))
        rho, blocks, _ = block_state(d, rng)
        dec = find_maximal_subspaces(rho)
        if dec.consumed_l1 > 1e-6:
            assert not is_reversible(rho)
        assert not is_reversible(pure_density(random_pure(d, rng)))
