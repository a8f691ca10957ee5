import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from siodistill.errors import DimensionMismatch, IndexOutOfRange, NegativeEntry, ProjectorNotRankOne
from siodistill.fixtures import gap_state, worked_pure_state
from siodistill.majorization import (
    TargetEnsemble,
    check_pure_to_ensemble,
    check_state_to_ensemble,
    maximally_coherent_tail_bound,
    tail_profile,
)
from siodistill.quantum import maximally_coherent_state as mcs
from siodistill.subspace import find_maximal_subspaces

from generators import block_state, random_pure

PHI = np.sqrt([0.5, 0.3, 0.2])
OPTIMAL = [(0.2, mcs(1, 3)), (0.2, mcs(2, 3)), (0.6, mcs(3, 3))]


def test_tail_profile_examples():
    assert np.allclose(tail_profile([0.5, 0.3, 0.2]), [1, 0.5, 0.2])
    assert np.allclose(tail_profile([0.2, 0.5, 0.3]), [1, 0.5, 0.2])
    assert np.allclose(tail_profile(np.full(4, 0.25)), [1, 0.75, 0.5, 0.25])
    with pytest.raises(NegativeEntry):
        tail_profile([1.1, -0.1])


def test_tail_bound_examples():
    assert maximally_coherent_tail_bound([0.2, 0.2, 0.6], 1) == pytest.approx(1)
    assert maximally_coherent_tail_bound([0.2, 0.2, 0.6], 2) == pytest.approx(0.5)
    assert maximally_coherent_tail_bound([0, 0, 0, 0.4], 4) == pytest.approx(0.1)
    with pytest.raises(IndexOutOfRange):
        maximally_coherent_tail_bound([1.0], 2)


def test_pure_checks():
    same = check_pure_to_ensemble(PHI, [(1.0, PHI)])
    assert same.feasible and np.allclose(same.slacks, 0)
    up = check_pure_to_ensemble(mcs(2, 3), [(1.0, mcs(3, 3))])
    assert not up.feasible
    assert up.worst == (3, pytest.approx(-1 / 3))
    opt = check_pure_to_ensemble(PHI, OPTIMAL)
    assert opt.feasible and np.allclose(opt.slacks, 0, atol=1e-12)
    with pytest.raises(DimensionMismatch):
        check_pure_to_ensemble(PHI, [(1.0, mcs(2, 2))])


def test_ensemble_validation():
    with pytest.raises(ValueError):
        TargetEnsemble(((((0.5, PHI),),)), (1.0,))
    with pytest.raises(ValueError):
        TargetEnsemble((((1.0, PHI),),), (0.5,))
    ens = TargetEnsemble.from_joint([[(0.25, mcs(2, 4))], [(0.5, mcs(1, 4)), (0.25, mcs(2, 4))]])
    assert ens.weights == (0.25, 0.75)
    assert ens.groups[1][0][0] == pytest.approx(2 / 3)


def test_state_to_ensemble_pure():
    ens = TargetEnsemble((tuple(OPTIMAL),), (1.0,))
    res = check_state_to_ensemble(worked_pure_state(), ens)
    assert res.feasible and res.projectors == ((0, 1, 2),)
    explicit = check_state_to_ensemble(worked_pure_state(), ens, [(0, 1, 2)])
    assert explicit.feasible


def test_gap_state_cannot_reach_psi2():
    ens = TargetEnsemble((((0.3, mcs(2, 4)), (0.7, mcs(1, 4))),), (1.0,))
    res = check_state_to_ensemble(gap_state(), ens)
    assert not res.feasible and "rank-one" in res.reason
    with pytest.raises(ProjectorNotRankOne):
        check_state_to_ensemble(gap_state(), ens, [(0, 1, 2, 3)])


def test_two_block_identity():
    rho = np.zeros((4, 4))
    rho[:2, :2] = rho[2:, 2:] = 0.25
    lo = np.array([1, 1, 0, 0]) / np.sqrt(2)
    hi = np.array([0, 0, 1, 1]) / np.sqrt(2)
    ens = TargetEnsemble((((1.0, lo),), ((1.0, hi),)), (0.5, 0.5))
    res = check_state_to_ensemble(rho, ens)
    assert res.feasible and sorted(res.projectors) == [(0, 1), (2, 3)]
    assert check_state_to_ensemble(rho, ens, [(0, 1), (2, 3)]).feasible


def test_explicit_mode_validates_projectors():
    ens = TargetEnsemble((tuple(OPTIMAL),), (1.0,))
    with pytest.raises(ValueError):
        check_state_to_ensemble(worked_pure_state(), ens, [(0, 1)])
    with pytest.raises(ValueError):
        check_state_to_ensemble(worked_pure_state(), ens, [(0, 1, 2), (2,)])
    res = check_state_to_ensemble(worked_pure_state(), TargetEnsemble((((1.0, mcs(3, 3)),),), (1.0,)),
                                  [(0, 1, 2)])
    assert not res.feasible and res.violation[0] == 1


def test_violation_reported_for_upward_request():
    rho = np.zeros((3, 3))
    rho[:2, :2] = 0.5
    res = check_state_to_ensemble(rho, TargetEnsemble((((1.0, mcs(3, 3)),),), (1.0,)))
    assert not res.feasible
    group, k, lhs, rhs = res.violation
    assert (group, k) == (1, 3) and lhs == pytest.approx(0) and rhs == pytest.approx(1 / 3)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32 - 1), st.floats(0.01, 0.99))
def test_target_weakening_is_monotone(d, seed, frac):
    rng = np.random.default_rng(seed)
    phi = random_pure(d, rng)
    n = int(rng.integers(2, d + 1))
    p = rng.dirichlet(np.ones(d))
    targets = [(p[k], mcs(k + 1, d)) for k in range(d)]
    if not check_pure_to_ensemble(phi, targets).feasible:
        return
    q = p.copy()
    moved = frac * q[n - 1]
    q[n - 1] -= moved
    q[n - 2] += moved
    weaker = [(q[k], mcs(k + 1, d)) for k in range(d)]
    assert check_pure_to_ensemble(phi, weaker).feasible


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_explicit_agrees_with_search(d, seed):
    rng = np.random.default_rng(seed)
    rho, _, _ = block_state(d, rng)
    dec = find_maximal_subspaces(rho)
    # one group per maximal block, asking for a random split between psi^1 and psi^2
    groups, weights, projectors = [], [], []
    for s in dec.subspaces:
        t = rng.uniform()
        loc1 = np.zeros(d, dtype=complex)
        loc1[s.order[0]] = 1
        grp = [(1 - t, loc1)]
        if s.dim >= 2:
            loc2 = np.zeros(d, dtype=complex)
            loc2[list(s.order[:2])] = 2 ** -0.5
            grp.append((t, loc2))
        else:
            grp = [(1.0, loc1)]
        groups.append(tuple(grp))
        weights.append(s.weight)
        projectors.append(s.indices)
    w = np.array(weights)
    ens = TargetEnsemble(tuple(groups), tuple(w / w.sum()))
    explicit = check_state_to_ensemble(rho, ens, projectors)
    searched = check_state_to_ensemble(rho, ens)
    assert explicit.feasible == searched.feasible
