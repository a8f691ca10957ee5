"""
Maximal pure coherent-state subspaces.

A set S of basis indices carries a pure block of rho exactly when the
normalised modulus matrix

    A = (diag rho)^(-1/2) |rho| (diag rho)^(-1/2)

is all ones on S (Cauchy-Schwarz is saturated). For PSD input saturation is
transitive, so the maximal blocks are the connected components of the graph
``A_ij >= 1 - tol``. Each component is certified pure afterwards; a failing
component (only possible for near-degenerate floating point input) is
repartitioned through maximal-clique enumeration.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .errors import PurityVerificationFailed
from .measures import l1_coherence
from .quantum import ZERO_TOL, as_matrix

DEFAULT_TOL = 1e-7
PURITY_TOL = 1e-8
AMPL_TOL = 1e-8
PSD_SLACK = 1e-7
CLIQUE_GUARD = 24
PARTITION_BUDGET = 200_000


@dataclass(frozen=True, eq=False)
class PureCoherentSubspace:
    """One rank-one block of rho.

    ``order`` lists the global (0-based) indices by descending ``|c_i|``,
    ties broken by ascending index; ``coefficients`` follow that order.
    """

    order: tuple[int, ...]
    weight: float
    coefficients: np.ndarray
    purity: float = 1.0

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(sorted(self.order))

    @property
    def dim(self) -> int:
        return len(self.order)

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.coefficients) ** 2

    def state(self, d: int) -> np.ndarray:
        vec = np.zeros(d, dtype=complex)
        vec[list(self.order)] = self.coefficients
        return vec

    def projector(self, d: int) -> np.ndarray:
        p = np.zeros((d, d))
        p[self.indices, self.indices] = 1.0
        return p


@dataclass(frozen=True, eq=False)
class SubspaceDecomposition:
    subspaces: tuple[PureCoherentSubspace, ...]
    null_indices: tuple[int, ...]
    consumed_l1: float
    dim: int
    used_fallback: bool = False
    chi: np.ndarray = field(default=None, repr=False)

    def block_state(self) -> np.ndarray:
        """The block-diagonal pure part, i.e. rho with the consumed part removed."""
        return _block_state(self.subspaces, self.dim)


def _block_state(subs: Sequence[PureCoherentSubspace], d: int) -> np.ndarray:
    out = np.zeros((d, d), dtype=complex)
    for s in subs:
        v = s.state(d)
        out += s.weight * np.outer(v, v.conj())
    return out


def comparison_matrix(rho) -> np.ndarray:
    m = as_matrix(rho)
    diag = np.real(np.diag(m))
    inv_sqrt = np.zeros_like(diag)
    pos = diag > ZERO_TOL
    inv_sqrt[pos] = 1 / np.sqrt(diag[pos])
    return inv_sqrt[:, None] * np.abs(m) * inv_sqrt[None, :]


def block_purity(rho, indices: Sequence[int]) -> float:
    m = as_matrix(rho)
    idx = list(indices)
    block = m[np.ix_(idx, idx)]
    w = np.real(np.trace(block))
    return float(np.real(np.vdot(block, block)) / w**2)


def make_subspace(rho, indices: Iterable[int]) -> PureCoherentSubspace:
    """Build the block on ``indices`` assuming it is (close to) rank one.

    Moduli come from the diagonal, phases from the column of the largest
    population, so an exactly rank-one block is reproduced exactly.
    """
    m = as_matrix(rho)
    idx = sorted(indices)
    pops = np.real(np.diag(m))[idx]
    order = sorted(range(len(idx)), key=lambda k: (-pops[k], idx[k]))
    gorder = tuple(idx[k] for k in order)
    weight = float(pops.sum())
    ref = gorder[0]
    col = m[list(gorder), ref]
    phases = np.ones(len(gorder), dtype=complex)
    nz = np.abs(col) > 0
    phases[nz] = col[nz] / np.abs(col[nz])
    phases[0] = 1.0
    coeffs = np.sqrt(np.real(np.diag(m))[list(gorder)] / weight) * phases
    return PureCoherentSubspace(gorder, weight, coeffs, block_purity(m, idx))


def _components(adj: np.ndarray, nodes: Sequence[int]) -> list[list[int]]:
    seen: set[int] = set()
    comps = []
    for start in nodes:
        if start in seen:
            continue
        stack, comp = [start], []
        seen.add(start)
        while stack:
            i = stack.pop()
            comp.append(i)
            for j in nodes:
                if j not in seen and adj[i, j]:
                    seen.add(j)
                    stack.append(j)
        comps.append(sorted(comp))
    return comps


def maximal_cliques(adj: np.ndarray, nodes: Sequence[int]) -> list[tuple[int, ...]]:
    """Bron-Kerbosch with Tomita pivoting over the induced subgraph on ``nodes``."""
    if len(nodes) > CLIQUE_GUARD:
        raise ValueError(f"clique enumeration guarded to {CLIQUE_GUARD} vertices")
    nbrs = {i: {j for j in nodes if j != i and adj[i, j]} for i in nodes}
    out: list[tuple[int, ...]] = []

    def expand(r: set, p: set, x: set):
        if not p and not x:
            out.append(tuple(sorted(r)))
            return
        pivot = max(p | x, key=lambda u: len(nbrs[u] & p))
        for v in sorted(p - nbrs[pivot]):
            expand(r | {v}, p & nbrs[v], x & nbrs[v])
            p = p - {v}
            x = x | {v}

    expand(set(), set(nodes), set())
    return sorted(out)


def _l1_block_value(sub: PureCoherentSubspace) -> float:
    a = np.append(sub.populations, 0.0)
    n = np.arange(1, sub.dim + 1)
    return sub.weight * float(np.sum(n * (a[:-1] - a[1:]) * (n - 1)))


def _subsets_containing(first: int, pool: Sequence[int]) -> Iterator[tuple[int, ...]]:
    rest = [j for j in pool if j != first]
    # larger blocks first so the best partition tends to be found early
    for size in range(len(rest), -1, -1):
        for combo in itertools.combinations(rest, size):
            yield tuple(sorted((first,) + combo))


def _repartition(rho, comp, adj, objective) -> list[PureCoherentSubspace]:
    cliques = maximal_cliques(adj, comp)
    pure_cache: dict[tuple[int, ...], PureCoherentSubspace | None] = {}
    budget = [PARTITION_BUDGET]

    def pure_block(s):
        if s not in pure_cache:
            pure_cache[s] = (
                make_subspace(rho, s) if block_purity(rho, s) >= 1 - PURITY_TOL else None
            )
        return pure_cache[s]

    best: list = [-np.inf, None]

    def search(remaining: frozenset, chosen: list, score: float):
        budget[0] -= 1
        if budget[0] < 0:
            raise PurityVerificationFailed(comp, block_purity(rho, comp))
        if not remaining:
            if score > best[0] + 1e-15:
                best[0], best[1] = score, list(chosen)
            return
        first = min(remaining)
        tried: set = set()
        for clique in cliques:
            if first not in clique:
                continue
            pool = [j for j in clique if j in remaining]
            for s in _subsets_containing(first, pool):
                if s in tried:
                    continue
                tried.add(s)
                sub = pure_block(s)
                if sub is None:
                    continue
                chosen.append(sub)
                search(remaining - set(s), chosen, score + objective(sub))
                chosen.pop()

    search(frozenset(comp), [], 0.0)
    return best[1]


def find_maximal_subspaces(rho, tol: float = DEFAULT_TOL,
                           objective: Callable[[PureCoherentSubspace], float] | None = None,
                           fallback: bool = True) -> SubspaceDecomposition:
    """Partition the diagonal support of rho into maximal rank-one blocks.

    ``objective`` scores a candidate block (weight included) and is only used
    when a component fails purity certification and must be split; by default
    it is the block's weighted l1 distillation value.
    """
    m = as_matrix(rho)
    d = m.shape[0]
    diag = np.real(np.diag(m))
    support = [i for i in range(d) if diag[i] > ZERO_TOL]
    null = tuple(i for i in range(d) if diag[i] <= ZERO_TOL)
    adj = comparison_matrix(m) >= 1 - tol
    subs: list[PureCoherentSubspace] = []
    used_fallback = False
    for comp in _components(adj, support):
        purity = block_purity(m, comp)
        if purity >= 1 - PURITY_TOL:
            subs.append(make_subspace(m, comp))
            continue
        if not fallback or len(comp) > CLIQUE_GUARD:
            raise PurityVerificationFailed(comp, purity)
        warnings.warn(
            f"thresholded block {[i + 1 for i in comp]} is not rank one "
            f"(purity {purity:.10f}); splitting it by clique search",
            RuntimeWarning,
            stacklevel=2,
        )
        used_fallback = True
        subs.extend(_repartition(m, comp, adj, objective or _l1_block_value))
    subs.sort(key=lambda s: min(s.order))
    chi = m - _block_state(subs, d)
    return SubspaceDecomposition(tuple(subs), null, l1_coherence(chi), d, used_fallback, chi)


def is_distillable(rho, tol: float = DEFAULT_TOL) -> bool:
    return any(s.dim >= 2 for s in find_maximal_subspaces(rho, tol).subspaces)


def is_reversible(rho, tol: float = DEFAULT_TOL) -> bool:
    """True iff rho is a direct sum of weighted maximally coherent blocks."""
    decomp = find_maximal_subspaces(rho, tol)
    if decomp.consumed_l1 > ZERO_TOL:
        return False
    return all(np.all(np.abs(s.populations - 1 / s.dim) <= AMPL_TOL) for s in decomp.subspaces)
