"""Coherence measures and the level-value tables f(n) = C(psi^n)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import MeasureError, NonMonotoneLevelValue, NonzeroF1
from .quantum import ZERO_TOL, as_matrix

CONV_TOL = 1e-12


def l1_coherence(rho) -> float:
    m = as_matrix(rho)
    return float(np.abs(m).sum() - np.abs(np.diag(m)).sum())


def _entropy_bits(eigs: np.ndarray) -> float:
    eigs = eigs[eigs > ZERO_TOL]
    return float(-(eigs * np.log2(eigs)).sum())


def relative_entropy_coherence(rho) -> float:
    """``S(dephased rho) - S(rho)`` in bits, clipped at zero."""
    m = as_matrix(rho)
    herm = (m + m.conj().T) / 2
    diag = np.real(np.diag(herm))
    value = _entropy_bits(diag) - _entropy_bits(np.linalg.eigvalsh(herm))
    return max(value, 0.0)


def coherence_rank(phi) -> int:
    return int(np.count_nonzero(np.abs(np.asarray(phi)) > ZERO_TOL)) - 1


def nf_second_differences(values: Sequence[float]) -> np.ndarray:
    """``n f(n) - 2(n-1) f(n-1) + (n-2) f(n-2)`` for n = 3..d."""
    f = np.asarray(values, dtype=float)
    nf = np.arange(1, f.size + 1) * f
    if nf.size < 3:
        return np.zeros(0)
    return nf[2:] - 2 * nf[1:-1] + nf[:-2]


@dataclass(frozen=True)
class CoherenceMeasure:
    """A named table f(1..d) plus the convexity flag for n f(n).

    ``state_measure`` is the matching functional on density matrices when one
    exists (built-ins only); custom tables leave it ``None``.
    """

    name: str
    values: tuple[float, ...]
    nf_convex: bool
    state_measure: Callable | None = None

    @property
    def dim(self) -> int:
        return len(self.values)

    def level_value(self, n: int) -> float:
        return self.values[n - 1]

    def table(self, n: int | None = None) -> np.ndarray:
        return np.asarray(self.values[: n or len(self.values)], dtype=float)


def measure_from_table(values: Sequence[float], name: str = "custom",
                       state_measure: Callable | None = None) -> CoherenceMeasure:
    f = tuple(float(v) for v in values)
    if not f:
        raise MeasureError("empty level-value table")
    if f[0] != 0.0:
        raise NonzeroF1(f"f(1) must be exactly 0, got {f[0]!r}")
    for n in range(1, len(f)):
        if f[n] < f[n - 1]:
            raise NonMonotoneLevelValue(f"f({n + 1}) = {f[n]} < f({n}) = {f[n - 1]}")
    convex = bool(np.all(nf_second_differences(f) >= -CONV_TOL))
    return CoherenceMeasure(name, f, convex, state_measure)


_ALIASES = {"l1": "l1", "relent": "relative_entropy", "relative_entropy": "relative_entropy"}


def builtin_measure(name: str, d: int) -> CoherenceMeasure:
    """Built-in tables: ``l1`` (f(n) = n - 1) and ``relative_entropy``/``relent`` (log2 n)."""
    key = _ALIASES.get(name)
    n = np.arange(1, d + 1)
    if key == "l1":
        return measure_from_table(n - 1.0, "l1", l1_coherence)
    if key == "relative_entropy":
        return measure_from_table(np.log2(n), "relative_entropy", relative_entropy_coherence)
    raise MeasureError(f"unknown measure {name!r}; expected l1, relent or a custom table")
