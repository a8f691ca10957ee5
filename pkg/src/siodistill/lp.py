"""
The distillation linear program and a small dense simplex solver.

For a pure state with sorted populations a_1 >= ... >= a_d the optimal
ensemble {p_n, psi^n} solves

    maximise   sum_n f(n) p_n
    subject to sum_{n>=l} (n-l+1)/n p_n <= q_l = a_l + ... + a_d,   p >= 0.

The solver works on the standard-form tableau with slack variables
p_{d+1}..p_{2d} as the starting basis and Bland's smallest-index rule, which
matters here because the optimum is massively degenerate.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleStart, IterationLimit, SizeGuard, Unbounded
from .measures import CoherenceMeasure

REDCOST_TOL = 1e-10
PIVOT_TOL = 1e-12
RHS_CLAMP = 1e-12
ORACLE_GUARD = 10


def _cell(v: float) -> float:
    # round first so that -1e-17 does not print as -0.000000
    return round(float(v), 6) + 0.0


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """``max c.p`` subject to ``A p <= q`` and ``p >= 0``."""

    c: np.ndarray
    A: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        for name in ("c", "A", "q"):
            object.__setattr__(self, name, np.array(getattr(self, name), dtype=float))
        m, n = self.A.shape
        if self.c.shape != (n,) or self.q.shape != (m,):
            raise ValueError(f"inconsistent LP shapes c{self.c.shape} A{self.A.shape} q{self.q.shape}")

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape


def distillation_matrix(d: int) -> np.ndarray:
    """Row l, column n holds (n-l+1)/n for l <= n (1-based)."""
    l = np.arange(1, d + 1)[:, None]
    n = np.arange(1, d + 1)[None, :]
    return np.where(l <= n, (n - l + 1) / n, 0.0)


def build_distillation_lp(phi, measure: CoherenceMeasure) -> LinearProgram:
    pops = np.sort(np.abs(np.asarray(phi, dtype=complex)) ** 2)[::-1]
    d = pops.size
    q = np.cumsum(pops[::-1])[::-1]
    return LinearProgram(measure.table(d), distillation_matrix(d), q)


@dataclass(eq=False)
class Tableau:
    """Simplex tableau in the ``[B | q]`` over ``[z - c | objective]`` layout.

    ``basis[r]`` is the 0-based variable index basic in row r; variables
    ``n_original..`` are the slacks.
    """

    body: np.ndarray
    rhs: np.ndarray
    reduced: np.ndarray
    objective: float
    basis: list[int]
    n_original: int
    cost: np.ndarray = field(repr=False)

    def copy(self) -> "Tableau":
        return Tableau(self.body.copy(), self.rhs.copy(), self.reduced.copy(), self.objective,
                       list(self.basis), self.n_original, self.cost.copy())

    @property
    def shape(self) -> tuple[int, int]:
        return self.body.shape

    def pivot(self, row: int, col: int) -> None:
        piv = self.body[row, col]
        self.body[row] /= piv
        self.rhs[row] /= piv
        for r in range(self.body.shape[0]):
            if r != row and self.body[r, col] != 0.0:
                factor = self.body[r, col]
                self.body[r] -= factor * self.body[row]
                self.rhs[r] -= factor * self.rhs[row]
        factor = self.reduced[col]
        self.reduced -= factor * self.body[row]
        self.objective -= factor * self.rhs[row]
        self.basis[row] = col
        self.body[:, col] = 0.0
        self.body[row, col] = 1.0
        self.reduced[col] = 0.0
        self.rhs[(self.rhs < 0) & (self.rhs > -RHS_CLAMP)] = 0.0

    def solution(self) -> np.ndarray:
        x = np.zeros(self.body.shape[1])
        x[self.basis] = self.rhs
        return x

    def format(self) -> str:
        m, n = self.body.shape
        head = ["".ljust(8)] + [f"b_{j + 1}".rjust(10) for j in range(n)] + ["q".rjust(12)]
        lines = ["".join(head)]
        for r in range(m):
            cells = [f"p_{self.basis[r] + 1}".ljust(8)]
            cells += [f"{_cell(v):10.6f}" for v in self.body[r]]
            cells.append(f"{_cell(self.rhs[r]):12.6f}")
            lines.append("".join(cells))
        cells = ["c".ljust(8)] + [f"{_cell(v):10.6f}" for v in self.reduced] + [f"{_cell(self.objective):12.6f}"]
        lines.append("".join(cells))
        return "\n".join(lines)


def to_standard_form(lp: LinearProgram) -> Tableau:
    m, n = lp.shape
    if np.any(lp.q < 0):
        raise InfeasibleStart("slack basis needs q >= 0")
    body = np.hstack([lp.A, np.eye(m)])
    cost = np.concatenate([lp.c, np.zeros(m)])
    return Tableau(body, lp.q.copy(), -cost, 0.0, list(range(n, n + m)), n, cost)


@dataclass(frozen=True, eq=False)
class SimplexResult:
    optimum: float
    p: np.ndarray
    tableau: Tableau
    iterations: int
    history: tuple[Tableau, ...] = ()


def simplex_solve(tab: Tableau, record: bool = False, max_iter: int | None = None) -> SimplexResult:
    """Run primal simplex with Bland's rule from a feasible tableau.

    The input tableau is left untouched. With ``record`` every intermediate
    tableau (starting with the initial one) is kept in ``history``.
    """
    t = tab.copy()
    m, n = t.shape
    if max_iter is None:
        max_iter = math.comb(n, m)
    history = [t.copy()] if record else []
    it = 0
    while True:
        entering = np.flatnonzero(t.reduced < -REDCOST_TOL)
        if entering.size == 0:
            break
        if it >= max_iter:
            raise IterationLimit(f"no optimum after {it} pivots")
        col = int(entering[0])
        column = t.body[:, col]
        rows = np.flatnonzero(column > PIVOT_TOL)
        if rows.size == 0:
            raise Unbounded(f"variable p_{col + 1} can grow without bound")
        ratios = t.rhs[rows] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + PIVOT_TOL * (1 + abs(best))]
        row = int(min(ties, key=lambda r: t.basis[r]))
        t.pivot(row, col)
        it += 1
        if record:
            history.append(t.copy())
    x = t.solution()
    return SimplexResult(float(t.objective), x[: t.n_original], t, it, tuple(history))


def solve_lp(lp: LinearProgram, record: bool = False) -> SimplexResult:
    return simplex_solve(to_standard_form(lp), record=record)


@functools.lru_cache(maxsize=32)
def _basis_inverses(key: bytes, m: int, n: int):
    A = np.frombuffer(key, dtype=float).reshape(m, n)
    full = np.hstack([A, np.eye(m)])
    subsets = np.array(list(itertools.combinations(range(n + m), m)), dtype=int)
    mats = full[:, subsets].transpose(1, 0, 2)
    det = np.linalg.det(mats)
    ok = np.abs(det) > 1e-12
    return subsets[ok], np.linalg.inv(mats[ok])


def vertex_enumeration_oracle(lp: LinearProgram) -> float:
    """Best objective over all basic feasible solutions, by brute force."""
    m, n = lp.shape
    if max(m, n) > ORACLE_GUARD:
        raise SizeGuard(f"vertex enumeration guarded to size {ORACLE_GUARD}")
    subsets, invs = _basis_inverses(np.ascontiguousarray(lp.A).tobytes(), m, n)
    xb = invs @ lp.q
    feasible = np.all(xb >= -1e-9, axis=1)
    cost = np.concatenate([lp.c, np.zeros(m)])
    values = np.einsum("km,km->k", cost[subsets], xb)
    return float(values[feasible].max())


@dataclass(frozen=True)
class ClosedFormCheck:
    passed: bool
    diagnostic: str
    slack_reduced_costs: np.ndarray = field(default=None, repr=False)
    basic_values: np.ndarray = field(default=None, repr=False)

    def __bool__(self) -> bool:
        return self.passed


def slack_reduced_cost_identity(f) -> np.ndarray:
    """``(i-2) f(i-2) + i f(i) - 2(i-1) f(i-1)`` for i = 1..d, out-of-range terms zero."""
    f = np.asarray(f, dtype=float)
    nf = np.concatenate([[0.0, 0.0], np.arange(1, f.size + 1) * f])
    return nf[2:] - 2 * nf[1:-1] + nf[:-2]


def _canonicalise(t: Tableau, d: int) -> Tableau | None:
    """Exchange pivots that keep the vertex value, until p_1..p_d are all basic."""
    t = t.copy()
    for _ in range(d):
        missing = [j for j in range(d) if j not in t.basis]
        if not missing:
            return t
        j = missing[0]
        col = t.body[:, j]
        moved = False
        for r in range(t.shape[0]):
            if t.basis[r] < d or abs(col[r]) <= PIVOT_TOL:
                continue
            degenerate = abs(t.rhs[r]) <= RHS_CLAMP
            if not degenerate:
                pos = np.flatnonzero(col > PIVOT_TOL)
                ratio = t.rhs[r] / col[r]
                if col[r] < 0 or ratio > (t.rhs[pos] / col[pos]).min() + PIVOT_TOL:
                    continue
                if abs(t.reduced[j] * ratio) > REDCOST_TOL:
                    continue
            t.pivot(r, j)
            moved = True
            break
        if not moved:
            return None
    return t if all(j in t.basis for j in range(d)) else None


def final_tableau_closed_form_check(tab: Tableau, phi, measure: CoherenceMeasure) -> ClosedFormCheck:
    """Compare an optimal tableau against the closed-form basis {p_1..p_d}.

    Checks the slack reduced costs against the second-difference identity
    for n f(n) and the basic values against ``i (a_i - a_{i+1})``.
    """
    pops = np.sort(np.abs(np.asarray(phi, dtype=complex)) ** 2)[::-1]
    d = pops.size
    if tab.n_original != d or tab.shape[0] != d:
        return ClosedFormCheck(False, f"tableau shape {tab.shape} does not match d={d}")
    if np.any(tab.reduced < -REDCOST_TOL):
        return ClosedFormCheck(False, "tableau is not optimal (negative reduced cost)")
    t = _canonicalise(tab, d)
    if t is None:
        names = sorted(f"p_{b + 1}" for b in tab.basis)
        return ClosedFormCheck(False, f"final basis {names} cannot be exchanged to p_1..p_{d}")
    expected_costs = slack_reduced_cost_identity(measure.table(d))
    costs = t.reduced[d:]
    a = np.append(pops, 0.0)
    expected_q = np.arange(1, d + 1) * (a[:-1] - a[1:])
    values = np.zeros(d)
    for r, b in enumerate(t.basis):
        values[b] = t.rhs[r]
    problems = []
    if np.max(np.abs(costs - expected_costs)) > 1e-10:
        problems.append(f"slack reduced costs {costs} != {expected_costs}")
    if np.max(np.abs(values - expected_q)) > 1e-10:
        problems.append(f"basic values {values} != {expected_q}")
    if abs(t.objective - float(expected_q @ measure.table(d))) > 1e-10:
        problems.append(f"objective {t.objective} disagrees with the closed form")
    return ClosedFormCheck(not problems, "; ".join(problems) or "ok", costs, values)
