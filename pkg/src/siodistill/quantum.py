"""
Dense density-matrix primitives.

States live in a fixed incoherent basis ``|0>, ..., |d-1>`` internally; every
user-facing surface (CLI, reports) shifts to 1-based labels. Kraus operators
and pure states are plain complex ``numpy`` arrays; only density matrices get
a wrapper, because validity is a property worth carrying around.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    LevelOutOfRange,
    NotHermitian,
    NotPositiveSemidefinite,
    TraceNotOne,
)

HERMITICITY_TOL = 1e-9
TRACE_TOL = 1e-9
PSD_TOL = 1e-9
NORM_TOL = 1e-9
ZERO_TOL = 1e-10
PROB_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A validated state. Use :func:`validate_density_matrix` to build one."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)


@dataclass(frozen=True, eq=False)
class InstrumentOutcome:
    probability: float
    post_state: DensityMatrix | None
    label: Hashable = None


def as_matrix(rho) -> np.ndarray:
    """Return the complex ndarray behind ``rho`` (a DensityMatrix or array-like)."""
    if isinstance(rho, DensityMatrix):
        return rho.matrix
    return np.asarray(rho, dtype=complex)


def validate_density_matrix(raw) -> DensityMatrix:
    """Check hermiticity, unit trace and positivity (in that order).

    Raises the first violated invariant, carrying its magnitude.
    """
    m = np.asarray(raw, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise DimensionMismatch(f"expected a non-empty square matrix, got shape {m.shape}")
    asym = float(np.max(np.abs(m - m.conj().T)))
    if asym > HERMITICITY_TOL:
        raise NotHermitian(asym)
    tr_err = abs(np.trace(m) - 1.0)
    if tr_err > TRACE_TOL:
        raise TraceNotOne(tr_err)
    herm = (m + m.conj().T) / 2
    lam_min = float(np.linalg.eigvalsh(herm)[0])
    if lam_min < -PSD_TOL:
        raise NotPositiveSemidefinite(-lam_min)
    return DensityMatrix(m)


def pure_density(phi) -> np.ndarray:
    phi = np.asarray(phi, dtype=complex)
    return np.outer(phi, phi.conj())


def dephase(rho) -> DensityMatrix:
    m = as_matrix(rho)
    return DensityMatrix(np.diag(np.diag(m)))


def maximally_coherent_state(n: int, d: int, support: Sequence[int] | None = None) -> np.ndarray:
    """The n-level maximally coherent state in dimension d.

    Amplitudes ``1/sqrt(n)`` sit on the first n basis states unless ``support``
    (0-based indices, length n) says otherwise.
    """
    if not 1 <= n <= d:
        raise LevelOutOfRange(f"level {n} outside 1..{d}")
    vec = np.zeros(d, dtype=complex)
    idx = np.arange(n) if support is None else np.asarray(support, dtype=int)
    if idx.shape != (n,):
        raise LevelOutOfRange(f"support of size {idx.size} for level {n}")
    vec[idx] = 1 / np.sqrt(n)
    return vec


def _check_dims(d: int, kraus) -> list[np.ndarray]:
    ops = [np.asarray(k, dtype=complex) for k in kraus]
    for k in ops:
        if k.shape != (d, d):
            raise DimensionMismatch(f"Kraus operator of shape {k.shape} for dimension {d}")
    return ops


def apply_instrument(rho, kraus, labels: Sequence[Hashable] | None = None) -> list[InstrumentOutcome]:
    """Apply each Kraus operator separately and return the outcome ensemble.

    Probabilities are ``Tr(K rho K^dag)`` exactly as computed; an incomplete
    set is not renormalised. Post-states are dropped below ``PROB_FLOOR``.
    """
    m = as_matrix(rho)
    ops = _check_dims(m.shape[0], kraus)
    out = []
    for i, k in enumerate(ops):
        sigma = k @ m @ k.conj().T
        prob = float(np.real(np.trace(sigma)))
        post = DensityMatrix(sigma / prob) if prob >= PROB_FLOOR else None
        out.append(InstrumentOutcome(prob, post, labels[i] if labels is not None else i))
    return out


def apply_channel(rho, kraus) -> np.ndarray:
    m = as_matrix(rho)
    ops = _check_dims(m.shape[0], kraus)
    return sum((k @ m @ k.conj().T for k in ops), np.zeros_like(m))


def is_sio_kraus(k) -> bool:
    mask = np.abs(np.asarray(k)) > ZERO_TOL
    return bool(mask.sum(axis=0).max(initial=0) <= 1 and mask.sum(axis=1).max(initial=0) <= 1)


def is_io_kraus(k) -> bool:
    mask = np.abs(np.asarray(k)) > ZERO_TOL
    return bool(mask.sum(axis=0).max(initial=0) <= 1)


def completeness_defect(kraus) -> float:
    ops = [np.asarray(k, dtype=complex) for k in kraus]
    if not ops:
        raise DimensionMismatch("empty Kraus set")
    d = ops[0].shape[0]
    ops = _check_dims(d, ops)
    total = sum(k.conj().T @ k for k in ops)
    return float(np.max(np.abs(total - np.eye(d))))


def fidelity_with_pure(rho, phi) -> float:
    m = as_matrix(rho)
    phi = np.asarray(phi, dtype=complex)
    if phi.shape != (m.shape[0],):
        raise DimensionMismatch(f"state of length {phi.shape} against dimension {m.shape[0]}")
    f = float(np.real(phi.conj() @ m @ phi))
    return min(max(f, 0.0), 1.0)
