"""
Optimal probabilistic distillation into maximally coherent states.

Every maximal rank-one block mu (weight p_mu, sorted amplitudes c_1..c_dmu)
is distilled independently. For measures with convex n f(n) the optimum is
closed form,

    p_n = n (|c_n|^2 - |c_{n+1}|^2),   c_{dmu+1} := 0,

realised by the diagonal Kraus operators

    K_n = sqrt(p_n / n) sum_{i<=n} |i><i| / c_i.

Other tables go through the simplex solver. Such an optimum generally leaves
some constraint rows slack, in which case the block is first converted
deterministically (majorization, via a chain of T-transforms) into the pure
state whose closed-form distribution *is* the LP optimum, and then distilled
as above.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import MeasureError, NonConvexMeasure, ZeroAmplitude
from .lp import build_distillation_lp, solve_lp
from .majorization import SLACK_TOL, check_pure_to_ensemble
from .measures import CoherenceMeasure
from .quantum import (
    PROB_FLOOR,
    ZERO_TOL,
    apply_instrument,
    as_matrix,
    completeness_defect,
    fidelity_with_pure,
    is_sio_kraus,
    maximally_coherent_state,
)
from .subspace import DEFAULT_TOL, PureCoherentSubspace, SubspaceDecomposition, find_maximal_subspaces

COMPLETENESS_TOL = 1e-10
PROBABILITY_TOL = 1e-10
FIDELITY_TOL = 1e-9
VALUE_TOL = 1e-9
MONOTONE_TOL = 1e-9
RESIDUAL_FLOOR = 1e-14


def _padded_pops(sub: PureCoherentSubspace) -> np.ndarray:
    return np.append(sub.populations, 0.0)


def closed_form_distribution(subspace: PureCoherentSubspace) -> np.ndarray:
    a = _padded_pops(subspace)
    p = np.arange(1, subspace.dim + 1) * (a[:-1] - a[1:])
    p[(p < 0) & (p > -1e-12)] = 0.0
    return np.clip(p, 0.0, 1.0)


def closed_form_value(subspace: PureCoherentSubspace, measure: CoherenceMeasure) -> float:
    if not measure.nf_convex:
        raise NonConvexMeasure(f"n f(n) is not convex for measure {measure.name!r}; use the LP")
    return float(closed_form_distribution(subspace) @ measure.table(subspace.dim))


def _level_kraus(coeffs: np.ndarray, p: np.ndarray) -> dict[int, np.ndarray]:
    """Local (block-sized) Kraus operators keyed by level n, for p_n > PROB_FLOOR."""
    dm = coeffs.size
    out = {}
    for n in range(1, dm + 1):
        if p[n - 1] <= PROB_FLOOR:
            continue
        c = coeffs[:n]
        if np.any(np.abs(c) <= ZERO_TOL):
            raise ZeroAmplitude(f"amplitude below {ZERO_TOL} among the top {n} of the block")
        k = np.zeros((dm, dm), dtype=complex)
        k[np.arange(n), np.arange(n)] = np.sqrt(p[n - 1] / n) / c
        out[n] = k
    return out


def _embed(local: np.ndarray, order: Sequence[int], d: int) -> np.ndarray:
    k = np.zeros((d, d), dtype=complex)
    k[np.ix_(order, order)] = local
    return k


def build_kraus(subspace: PureCoherentSubspace, d: int | None = None) -> list[np.ndarray]:
    """Closed-form Kraus operators of the block, embedded in dimension ``d``."""
    d = d or max(subspace.order) + 1
    local = _level_kraus(subspace.coefficients, closed_form_distribution(subspace))
    return [_embed(k, subspace.order, d) for k in local.values()]


def t_transform_chain(x, y, tol: float = 1e-12) -> list[tuple[int, int, float]]:
    """T-transforms (j, k, t) with x = T_m ... T_1 y, for x majorized by y.

    Each T mixes entries j < k as ``(t y_j + (1-t) y_k, (1-t) y_j + t y_k)``.
    Both vectors must be sorted descending with equal sums.
    """
    x = np.asarray(x, dtype=float)
    y = np.array(y, dtype=float)
    steps = []
    for _ in range(2 * x.size):
        diff = y - x
        if np.max(np.abs(diff)) <= tol:
            break
        above = np.flatnonzero(diff > tol)
        if above.size == 0:
            break
        j = int(above[-1])
        later = np.flatnonzero(diff[j + 1:] < -tol)
        if later.size == 0:
            break
        k = j + 1 + int(later[0])
        delta = min(y[j] - x[j], x[k] - y[k])
        t = (y[j] - delta - y[k]) / (y[j] - y[k])
        steps.append((j, k, float(t)))
        y[j] -= delta
        y[k] += delta
    return steps


def _apply_t(v: np.ndarray, step) -> np.ndarray:
    j, k, t = step
    u = v.copy()
    u[j] = t * v[j] + (1 - t) * v[k]
    u[k] = (1 - t) * v[j] + t * v[k]
    return u


def _ratio(v_out: float, u_in: float) -> float:
    return 1.0 if u_in <= 0 else np.sqrt(max(v_out, 0.0) / u_in)


def conversion_kraus(coeffs: np.ndarray, target_pops: np.ndarray) -> list[np.ndarray]:
    """SIO Kraus set mapping the pure state ``coeffs`` to the real state sqrt(target_pops).

    Every branch outputs the target deterministically (up to weight), so the
    set implements a deterministic pure-state conversion; it exists because
    |coeffs|^2 is majorized by ``target_pops``.
    """
    dm = coeffs.size
    source = np.abs(coeffs) ** 2
    steps = t_transform_chain(source, target_pops)
    # populations along the chain, target first: v_0 = target, v_{s+1} = T_s v_s
    chain = [np.asarray(target_pops, dtype=float)]
    for s in steps:
        chain.append(_apply_t(chain[-1], s))
    ops = [np.eye(dm, dtype=complex)]
    phases = np.ones(dm, dtype=complex)
    nz = np.abs(coeffs) > 0
    phases[nz] = np.abs(coeffs[nz]) / coeffs[nz]
    # walk from the source (end of chain) back to the target
    for level in range(len(steps), 0, -1):
        j, k, t = steps[level - 1]
        v, u = chain[level - 1], chain[level]
        swap = np.arange(dm)
        swap[[j, k]] = [k, j]
        stage = []
        if t > 0:
            m1 = np.diag([np.sqrt(t) * _ratio(v[i], u[i]) for i in range(dm)]).astype(complex)
            stage.append(m1)
        if t < 1:
            m2 = np.zeros((dm, dm), dtype=complex)
            for i in range(dm):
                m2[i, swap[i]] = np.sqrt(1 - t) * _ratio(v[i], u[swap[i]])
            stage.append(m2)
        first = level == len(steps)
        if first:
            stage = [m @ np.diag(phases) for m in stage]
        ops = [m @ prev for prev in ops for m in stage] if not first else stage
    if not steps:
        ops = [np.diag(phases)]
    return ops


@dataclass(frozen=True, eq=False)
class Outcome:
    """One branch of the instrument.

    ``level`` is n for a branch that outputs psi^n on ``support`` (global,
    0-based, largest amplitudes first); ``None`` marks completion operators
    that never fire on the input state.
    """

    subspace: int | None
    level: int | None
    probability: float
    conditional: float
    support: tuple[int, ...]
    kraus: tuple[np.ndarray, ...]


@dataclass(frozen=True, eq=False)
class SubspacePlan:
    subspace: PureCoherentSubspace
    distribution: np.ndarray
    value: float
    method: str
    iterations: int
    outcomes: tuple[Outcome, ...]


@dataclass(frozen=True, eq=False)
class DistillationPlan:
    decomposition: SubspaceDecomposition
    measure: CoherenceMeasure
    subspaces: tuple[SubspacePlan, ...]
    null_kraus: np.ndarray | None
    total_value: float

    @property
    def dim(self) -> int:
        return self.decomposition.dim

    @property
    def outcomes(self) -> list[Outcome]:
        out = [o for sp in self.subspaces for o in sp.outcomes]
        if self.null_kraus is not None:
            out.append(Outcome(None, None, 0.0, 0.0, (), (self.null_kraus,)))
        return out

    @property
    def kraus_operators(self) -> list[np.ndarray]:
        return [k for o in self.outcomes for k in o.kraus]

    @property
    def global_distribution(self) -> np.ndarray:
        """p_n = sum_mu p_mu p_{n|mu}, for n = 1..d."""
        p = np.zeros(self.dim)
        for sp in self.subspaces:
            p[: sp.subspace.dim] += sp.subspace.weight * sp.distribution
        return p


def _lp_distribution(sub: PureCoherentSubspace, measure: CoherenceMeasure):
    res = solve_lp(build_distillation_lp(sub.coefficients, measure))
    p = np.clip(res.p, 0.0, None)
    # p_1 carries no value; fill it so row 1 is tight and the distribution is normalised
    p[0] += max(0.0, 1.0 - p.sum())
    return p, float(res.optimum), res.iterations


def _subspace_value(sub: PureCoherentSubspace, measure: CoherenceMeasure) -> float:
    if measure.nf_convex:
        return closed_form_value(sub, measure)
    return _lp_distribution(sub, measure)[1]


def _block_outcomes(mu: int, sub: PureCoherentSubspace, p: np.ndarray, d: int,
                    closed_form: bool) -> tuple[Outcome, ...]:
    dm = sub.dim
    if closed_form:
        stage2 = _level_kraus(sub.coefficients, p)
        grouped = {n: [k] for n, k in stage2.items()}
    else:
        n = np.arange(1, dm + 1)
        b = np.cumsum((p / n)[::-1])[::-1]
        stage1 = conversion_kraus(sub.coefficients, b)
        stage2 = _level_kraus(np.sqrt(b).astype(complex), p)
        grouped = {lv: [k @ m for m in stage1] for lv, k in stage2.items()}
    outcomes = []
    total = np.zeros((dm, dm), dtype=complex)
    for lv, ops in grouped.items():
        ops = [k for k in ops if np.max(np.abs(k)) > 0]
        for k in ops:
            total += k.conj().T @ k
        outcomes.append(Outcome(mu, lv, sub.weight * p[lv - 1], float(p[lv - 1]),
                                tuple(sub.order[:lv]), tuple(_embed(k, sub.order, d) for k in ops)))
    residual = np.real(np.diag(np.eye(dm) - total))
    if np.max(np.abs(residual)) > RESIDUAL_FLOOR:
        res_op = np.diag(np.sqrt(np.clip(residual, 0.0, None))).astype(complex)
        outcomes.append(Outcome(mu, None, 0.0, 0.0, (), (_embed(res_op, sub.order, d),)))
    return tuple(outcomes)


def distill(rho, measure: CoherenceMeasure, tol: float = DEFAULT_TOL) -> DistillationPlan:
    m = as_matrix(rho)
    d = m.shape[0]
    if measure.dim < d:
        raise MeasureError(f"measure table has {measure.dim} levels, state needs {d}")
    decomp = find_maximal_subspaces(m, tol, objective=lambda s: s.weight * _subspace_value(s, measure))
    plans = []
    for mu, sub in enumerate(decomp.subspaces):
        if measure.nf_convex:
            p = closed_form_distribution(sub)
            value, method, iters = float(p @ measure.table(sub.dim)), "closed_form", 0
        else:
            p, value, iters = _lp_distribution(sub, measure)
            method = "simplex"
        outcomes = _block_outcomes(mu, sub, p, d, measure.nf_convex)
        plans.append(SubspacePlan(sub, p, value, method, iters, outcomes))
    null_kraus = None
    if decomp.null_indices:
        null_kraus = np.zeros((d, d), dtype=complex)
        null_kraus[decomp.null_indices, decomp.null_indices] = 1.0
    total = float(sum(sp.subspace.weight * sp.value for sp in plans))
    return DistillationPlan(decomp, measure, tuple(plans), null_kraus, total)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: float
    tolerance: float

    def __post_init__(self):
        object.__setattr__(self, "passed", bool(self.passed))
        object.__setattr__(self, "value", float(self.value))


@dataclass(frozen=True)
class VerificationReport:
    checks: tuple[Check, ...]
    simulated_probabilities: tuple[float, ...] = field(default=(), repr=False)
    fidelities: tuple[float, ...] = field(default=(), repr=False)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def verify_plan(rho, plan: DistillationPlan) -> VerificationReport:
    """Simulate the plan's instrument on rho and check it against the plan."""
    m = as_matrix(rho)
    d = m.shape[0]
    measure = plan.measure
    checks = []
    defect = completeness_defect(plan.kraus_operators)
    checks.append(Check("completeness", defect <= COMPLETENESS_TOL, defect, COMPLETENESS_TOL))
    n_bad = sum(not is_sio_kraus(k) for k in plan.kraus_operators)
    checks.append(Check("sio_structure", n_bad == 0, float(n_bad), 0.0))
    prob_err = 0.0
    min_fid = 1.0
    stray = 0.0
    average = 0.0
    sim_probs, fids = [], []
    for o in plan.outcomes:
        sims = apply_instrument(m, o.kraus)
        prob = sum(s.probability for s in sims)
        sim_probs.append(prob)
        if o.level is None:
            stray += prob
            fids.append(float("nan"))
            continue
        prob_err = max(prob_err, abs(prob - o.probability))
        average += prob * measure.level_value(o.level)
        if prob >= PROB_FLOOR:
            state = sum(s.probability * s.post_state.matrix for s in sims if s.post_state is not None)
            target = maximally_coherent_state(o.level, d, o.support)
            fid = fidelity_with_pure(state / prob, target)
            min_fid = min(min_fid, fid)
            fids.append(fid)
        else:
            fids.append(float("nan"))
    checks.append(Check("probability_match", prob_err <= PROBABILITY_TOL, prob_err, PROBABILITY_TOL))
    checks.append(Check("completion_silent", stray <= PROBABILITY_TOL, stray, PROBABILITY_TOL))
    checks.append(Check("target_fidelity", 1 - min_fid <= FIDELITY_TOL, 1 - min_fid, FIDELITY_TOL))
    gap = abs(average - plan.total_value)
    checks.append(Check("average_coherence", gap <= VALUE_TOL, gap, VALUE_TOL))
    worst = 0.0
    for sp in plan.subspaces:
        dm = sp.subspace.dim
        targets = [(sp.distribution[n - 1], maximally_coherent_state(n, dm)) for n in range(1, dm + 1)]
        worst = min(worst, float(check_pure_to_ensemble(sp.subspace.coefficients, targets).slacks.min()))
    checks.append(Check("tail_conditions", worst >= -SLACK_TOL, worst, SLACK_TOL))
    if measure.state_measure is not None:
        excess = plan.total_value - measure.state_measure(m)
        checks.append(Check("monotonicity", excess <= MONOTONE_TOL, excess, MONOTONE_TOL))
    return VerificationReport(tuple(checks), tuple(sim_probs), tuple(fids))


def inflate_level(p, n: int, delta: float = 1e-3) -> np.ndarray:
    """Add ``delta`` to p_n (1-based), taking it from lower levels where available."""
    q = np.array(p, dtype=float)
    q[n - 1] += delta
    need = delta
    for i in range(n - 2, -1, -1):
        take = min(need, q[i])
        q[i] -= take
        need -= take
        if need <= 0:
            break
    return q


def perturbed(plan: DistillationPlan, outcome: int, delta: float) -> DistillationPlan:
    """Copy of ``plan`` with one outcome's recorded probability shifted (for testing checks)."""
    flat = [(i, j) for i, sp in enumerate(plan.subspaces) for j in range(len(sp.outcomes))]
    i, j = flat[outcome]
    sp = plan.subspaces[i]
    outs = list(sp.outcomes)
    outs[j] = replace(outs[j], probability=outs[j].probability + delta)
    subs = list(plan.subspaces)
    subs[i] = replace(sp, outcomes=tuple(outs))
    return replace(plan, subspaces=tuple(subs))
