"""
Tail-sum majorization and the mixed-state -> pure-ensemble feasibility test.

A pure state phi converts into the ensemble {p_n, phi_n} under SIO iff, with
C_k(x) the sum of the d-k+1 smallest entries of x,

    C_k(|phi|^2) >= sum_n p_n C_k(|phi_n|^2)    for k = 1..d.

A mixed state converts iff a complete set of incoherent projectors splits it
into pure blocks, one per group of the target ensemble, each satisfying the
pure-state condition above.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    IndexOutOfRange,
    NegativeEntry,
    ProjectorNotRankOne,
    SearchBudgetExceeded,
)
from .quantum import TRACE_TOL, ZERO_TOL, as_matrix
from .subspace import DEFAULT_TOL, PURITY_TOL, block_purity, find_maximal_subspaces

SLACK_TOL = 1e-10
WEIGHT_TOL = 1e-9
SEARCH_GUARD = 12
SEARCH_BUDGET = 100_000


def tail_profile(populations) -> np.ndarray:
    """Suffix sums of the descending-sorted vector: ``(C_1, ..., C_d)``."""
    x = np.asarray(populations, dtype=float)
    if np.any(x < 0):
        raise NegativeEntry(f"negative population {x.min()!r}")
    s = np.sort(x)[::-1]
    return np.cumsum(s[::-1])[::-1]


def maximally_coherent_tail_bound(p, l: int) -> float:
    """``sum_{n>=l} p_n (n-l+1)/n``: the tail of the ensemble {p_n, psi^n} at row l."""
    p = np.asarray(p, dtype=float)
    d = p.size
    if not 1 <= l <= d:
        raise IndexOutOfRange(f"row {l} outside 1..{d}")
    n = np.arange(l, d + 1)
    return float(np.sum(p[l - 1:] * (n - l + 1) / n))


@dataclass(frozen=True)
class PureCheck:
    feasible: bool
    slacks: np.ndarray = field(repr=False)

    @property
    def worst(self) -> tuple[int, float]:
        """1-based row with the smallest slack, and that slack."""
        k = int(np.argmin(self.slacks))
        return k + 1, float(self.slacks[k])


def check_pure_to_ensemble(phi, targets: Sequence[tuple[float, np.ndarray]]) -> PureCheck:
    phi = np.asarray(phi, dtype=complex)
    d = phi.size
    lhs = tail_profile(np.abs(phi) ** 2)
    rhs = np.zeros(d)
    for prob, target in targets:
        target = np.asarray(target, dtype=complex)
        if target.size != d:
            raise DimensionMismatch(f"target of dimension {target.size} for a {d}-level state")
        rhs += prob * tail_profile(np.abs(target) ** 2)
    slacks = lhs - rhs
    return PureCheck(bool(np.all(slacks >= -SLACK_TOL)), slacks)


@dataclass(frozen=True)
class TargetEnsemble:
    """Groups of (conditional probability, pure target), with group weights p_mu."""

    groups: tuple[tuple[tuple[float, np.ndarray], ...], ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if len(self.groups) != len(self.weights):
            raise ValueError("one weight per group required")
        for g in self.groups:
            if abs(sum(p for p, _ in g) - 1) > TRACE_TOL:
                raise ValueError("conditional probabilities of a group must sum to 1")
        if abs(sum(self.weights) - 1) > TRACE_TOL:
            raise ValueError("group weights must sum to 1")

    @classmethod
    def from_joint(cls, groups: Sequence[Sequence[tuple[float, np.ndarray]]]) -> "TargetEnsemble":
        """Build from joint probabilities p_{mu n}."""
        weights = tuple(float(sum(p for p, _ in g)) for g in groups)
        cond = tuple(
            tuple((p / w, np.asarray(t, dtype=complex)) for p, t in g) for g, w in zip(groups, weights)
        )
        return cls(cond, weights)


@dataclass(frozen=True)
class EnsembleCheck:
    feasible: bool
    projectors: tuple[tuple[int, ...], ...] | None = None
    slacks: tuple[np.ndarray, ...] = ()
    reason: str = ""
    violation: tuple[int, int, float, float] | None = None  # (group, k, lhs, rhs), 1-based


def _block_vector(m: np.ndarray, idx: Sequence[int]) -> np.ndarray:
    """Normalised pure state of the block on ``idx``, embedded in the full space."""
    d = m.shape[0]
    block = m[np.ix_(idx, idx)]
    vals, vecs = np.linalg.eigh((block + block.conj().T) / 2)
    out = np.zeros(d, dtype=complex)
    out[list(idx)] = vecs[:, -1]
    return out


def _group_check(m, idx, group) -> PureCheck:
    return check_pure_to_ensemble(_block_vector(m, idx), group)


def _violation(g: int, check: PureCheck, m, idx, group):
    k, slack = check.worst
    lhs = tail_profile(np.abs(_block_vector(m, idx)) ** 2)[k - 1]
    return (g + 1, k, float(lhs), float(lhs - slack))


def check_state_to_ensemble(rho, ensemble: TargetEnsemble,
                            projectors: Sequence[Sequence[int]] | None = None,
                            tol: float = DEFAULT_TOL) -> EnsembleCheck:
    """Decide whether rho converts into ``ensemble`` under SIO.

    With ``projectors`` (0-based index sets), group mu is matched to
    projector mu. Without them, sub-blocks of the maximal rank-one partition
    are searched for an assignment; the witness is returned on success.
    """
    m = as_matrix(rho)
    d = m.shape[0]
    diag = np.real(np.diag(m))
    for g in ensemble.groups:
        for _, t in g:
            if np.asarray(t).size != d:
                raise DimensionMismatch(f"target of dimension {np.asarray(t).size} for d={d}")
    if projectors is not None:
        return _check_explicit(m, ensemble, [tuple(p) for p in projectors])
    if d > SEARCH_GUARD:
        raise SearchBudgetExceeded(f"projector search guarded to d <= {SEARCH_GUARD}")
    decomp = find_maximal_subspaces(m, tol)
    blocks = [list(s.indices) for s in decomp.subspaces]
    budget = [SEARCH_BUDGET]
    order = sorted(range(len(ensemble.groups)), key=lambda g: -ensemble.weights[g])
    assignment: dict[int, tuple[int, ...]] = {}
    slacks: dict[int, np.ndarray] = {}
    first_failure: list = []
    live = [g for g in order if ensemble.weights[g] > WEIGHT_TOL]

    def candidates(free: list[list[int]], w: float):
        for b, pool in enumerate(free):
            for size in range(len(pool), 0, -1):
                for combo in itertools.combinations(pool, size):
                    if abs(diag[list(combo)].sum() - w) <= WEIGHT_TOL:
                        yield b, combo

    def search(pos: int, free: list[list[int]]) -> bool:
        budget[0] -= 1
        if budget[0] < 0:
            raise SearchBudgetExceeded("projector search exceeded its budget")
        if pos == len(live):
            return all(not pool for pool in free)
        g = live[pos]
        for b, combo in candidates(free, ensemble.weights[g]):
            chk = _group_check(m, combo, ensemble.groups[g])
            if not chk.feasible:
                if not first_failure:
                    first_failure.append(_violation(g, chk, m, combo, ensemble.groups[g]))
                continue
            rest = [list(p) for p in free]
            rest[b] = [j for j in rest[b] if j not in combo]
            assignment[g], slacks[g] = combo, chk.slacks
            if search(pos + 1, rest):
                return True
            del assignment[g], slacks[g]
        return False

    if not search(0, blocks):
        if first_failure:
            reason = ("no complete set of incoherent projectors splits the state into pure "
                      "blocks satisfying the tail conditions")
        else:
            largest = max((len(b) for b in blocks), default=0)
            reason = (f"no rank-one block of the state matches the group weights "
                      f"(largest rank-one block has dimension {largest})")
        return EnsembleCheck(False, reason=reason, violation=first_failure[0] if first_failure else None)
    witness = [tuple(assignment.get(g, ())) for g in range(len(ensemble.groups))]
    if decomp.null_indices:
        target = live[0] if live else 0
        witness[target] = tuple(sorted(witness[target] + decomp.null_indices))
    return EnsembleCheck(
        True,
        tuple(witness),
        tuple(slacks.get(g, np.zeros(d)) for g in range(len(ensemble.groups))),
    )


def _check_explicit(m, ensemble: TargetEnsemble, projectors) -> EnsembleCheck:
    d = m.shape[0]
    diag = np.real(np.diag(m))
    flat = [i for p in projectors for i in p]
    if len(set(flat)) != len(flat) or any(not 0 <= i < d for i in flat):
        raise ValueError("projectors must be disjoint index sets within the basis")
    support = {i for i in range(d) if diag[i] > ZERO_TOL}
    if not support <= set(flat):
        raise ValueError("projectors must cover the diagonal support")
    if len(projectors) != len(ensemble.groups):
        raise ValueError(f"{len(projectors)} projectors for {len(ensemble.groups)} ensemble groups")
    all_slacks = []
    for g, (idx, group, w) in enumerate(zip(projectors, ensemble.groups, ensemble.weights)):
        live = [i for i in idx if diag[i] > ZERO_TOL]
        weight = float(diag[list(live)].sum()) if live else 0.0
        if abs(weight - w) > WEIGHT_TOL:
            return EnsembleCheck(False, tuple(projectors), tuple(all_slacks),
                                 f"group {g + 1} has weight {w} but its projector carries {weight}")
        if not live:
            all_slacks.append(np.zeros(d))
            continue
        purity = block_purity(m, live)
        if purity < 1 - PURITY_TOL:
            raise ProjectorNotRankOne(idx, purity)
        chk = _group_check(m, live, group)
        all_slacks.append(chk.slacks)
        if not chk.feasible:
            return EnsembleCheck(False, tuple(projectors), tuple(all_slacks),
                                 f"tail condition fails for group {g + 1}",
                                 _violation(g, chk, m, live, group))
    return EnsembleCheck(True, tuple(projectors), tuple(all_slacks))
