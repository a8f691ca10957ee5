"""Random inputs shared by the test modules."""

from __future__ import annotations

import numpy as np


def random_unit(d: int, rng, real: bool = False) -> np.ndarray:
    v = rng.normal(size=d) if real else rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_pure(d: int, rng) -> np.ndarray:
    """Random pure-state amplitudes with no vanishing entry."""
    v = random_unit(d, rng)
    while np.min(np.abs(v)) < 1e-3:
        v = random_unit(d, rng)
    return v


def random_partition(d: int, rng, max_block: int | None = None) -> list[list[int]]:
    perm = list(rng.permutation(d))
    blocks = []
    while perm:
        size = int(rng.integers(1, min(len(perm), max_block or d) + 1))
        blocks.append(sorted(int(i) for i in perm[:size]))
        perm = perm[size:]
    return blocks


def block_state(d: int, rng, blocks=None, null: int = 0, coherent_gap: bool = True):
    """Density matrix whose maximal pure blocks are exactly ``blocks``.

    Built as D^{1/2} G D^{1/2} with G = V^dagger V for unit columns of V that are
    parallel (up to a phase) inside a block; with ``coherent_gap`` the blocks
    overlap so the consumed part is nonzero, otherwise the state is a direct sum.
    ``null`` extra indices get zero population.
    """
    live = d - null
    if blocks is None:
        blocks = random_partition(live, rng)
    k = len(blocks)
    dirs = np.array([random_unit(k + 1, rng) for _ in range(k)]) if coherent_gap else np.eye(k)
    v = np.zeros((dirs.shape[1], live), dtype=complex)
    for b, idx in enumerate(blocks):
        for i in idx:
            v[:, i] = dirs[b] * np.exp(1j * rng.uniform(0, 2 * np.pi))
    g = v.conj().T @ v
    pops = rng.dirichlet(np.ones(live))
    sq = np.sqrt(pops)
    rho = np.zeros((d, d), dtype=complex)
    order = rng.permutation(d)
    live_idx, null_idx = sorted(order[:live]), sorted(order[live:])
    sub = sq[:, None] * g * sq[None, :]
    rho[np.ix_(live_idx, live_idx)] = sub
    mapping = {i: int(live_idx[i]) for i in range(live)}
    return (rho + rho.conj().T) / 2, [[mapping[i] for i in b] for b in blocks], [int(i) for i in null_idx]


def direct_sum_of_mcs(d: int, rng):
    """A state of the form (+)_mu p_mu psi^{n_mu} on a random partition."""
    blocks = random_partition(d, rng)
    w = rng.dirichlet(np.ones(len(blocks)))
    rho = np.zeros((d, d), dtype=complex)
    for wt, idx in zip(w, blocks):
        phases = np.exp(1j * rng.uniform(0, 2 * np.pi, len(idx)))
        v = phases / np.sqrt(len(idx))
        rho[np.ix_(idx, idx)] = wt * np.outer(v, v.conj())
    return rho, blocks


def wishart_state(d: int, rng, rank: int | None = None) -> np.ndarray:
    g = rng.normal(size=(d, rank or d)) + 1j * rng.normal(size=(d, rank or d))
    m = g @ g.conj().T
    return m / np.trace(m).real
