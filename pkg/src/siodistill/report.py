"""Report assembly and the machine/text renderings used by the CLI."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .distill import DistillationPlan, VerificationReport
from .measures import l1_coherence, relative_entropy_coherence
from .quantum import as_matrix


@dataclass(frozen=True)
class Report:
    input: dict
    decomposition: dict
    plan: dict
    verification: dict | None
    solver: dict

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "Report":
        return cls(doc["input"], doc["decomposition"], doc["plan"], doc["verification"], doc["solver"])


def _cpair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _cmatrix(m: np.ndarray) -> list:
    return [[_cpair(z) for z in row] for row in np.asarray(m, dtype=complex)]


def _one_based(idx) -> list[int]:
    return [int(i) + 1 for i in idx]


def build_report(rho, plan: DistillationPlan, verification: VerificationReport | None = None) -> Report:
    m = as_matrix(rho)
    measure = plan.measure
    decomp = plan.decomposition
    inp = {
        "dim": int(m.shape[0]),
        "measure": {"name": measure.name, "values": [float(v) for v in measure.values],
                    "nf_convex": bool(measure.nf_convex)},
        "coherence": {"l1": l1_coherence(m), "relative_entropy": relative_entropy_coherence(m)},
    }
    dec = {
        "subspaces": [
            {"indices": _one_based(s.indices), "order": _one_based(s.order), "weight": float(s.weight),
             "coefficients": [_cpair(c) for c in s.coefficients]}
            for s in decomp.subspaces
        ],
        "null_indices": _one_based(decomp.null_indices),
        "consumed_l1": float(decomp.consumed_l1),
        "used_fallback": bool(decomp.used_fallback),
    }
    subplans = []
    for sp in plan.subspaces:
        subplans.append({
            "indices": _one_based(sp.subspace.indices),
            "distribution": [float(x) for x in sp.distribution],
            "value": float(sp.value),
            "method": sp.method,
            "outcomes": [
                {"level": o.level, "probability": float(o.probability), "conditional": float(o.conditional),
                 "support": _one_based(o.support), "kraus": [_cmatrix(k) for k in o.kraus]}
                for o in sp.outcomes
            ],
        })
    plan_doc = {
        "total_value": float(plan.total_value),
        "global_distribution": [float(x) for x in plan.global_distribution],
        "subspaces": subplans,
        "null_kraus": None if plan.null_kraus is None else _cmatrix(plan.null_kraus),
    }
    ver = None
    if verification is not None:
        ver = {
            "passed": verification.passed,
            "checks": [{"name": c.name, "passed": c.passed, "value": c.value, "tolerance": c.tolerance}
                       for c in verification.checks],
        }
    solver = {
        "closed_form": sum(sp.method == "closed_form" for sp in plan.subspaces),
        "simplex": sum(sp.method == "simplex" for sp in plan.subspaces),
        "iterations": sum(sp.iterations for sp in plan.subspaces),
        "per_subspace": [{"method": sp.method, "iterations": sp.iterations} for sp in plan.subspaces],
    }
    return Report(inp, dec, plan_doc, ver, solver)


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"non-finite value {x!r} cannot be serialised")
    s = format(x, ".17g")
    if not any(ch in s for ch in ".en"):
        s += ".0"
    return s


def dumps(obj, indent: int = 1, _level: int = 0) -> str:
    """JSON text with every real printed to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, bool, np.number)) or v is None for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def to_machine(report: Report) -> str:
    return dumps(report.to_dict()) + "\n"


def parse_report(text: str) -> Report:
    return Report.from_dict(json.loads(text))


def _fmt_c(pair) -> str:
    re, im = pair
    if abs(im) < 5e-7:
        return f"{re:.6f}"
    return f"{re:.6f}{im:+.6f}j"


def to_text(report: Report, verbose: bool = False) -> str:
    inp, dec, plan = report.input, report.decomposition, report.plan
    out = [
        f"dimension        {inp['dim']}",
        f"measure          {inp['measure']['name']} (n f(n) convex: {inp['measure']['nf_convex']})",
        f"input C_l1       {inp['coherence']['l1']:.6f}",
        f"input C_r        {inp['coherence']['relative_entropy']:.6f}",
        "",
        f"maximal pure coherent-state subspaces: {len(dec['subspaces'])}",
    ]
    for s in dec["subspaces"]:
        coeffs = ", ".join(_fmt_c(c) for c in s["coefficients"])
        out.append(f"  {{{', '.join(map(str, s['order']))}}}  weight {s['weight']:.6f}  c = ({coeffs})")
    if dec["null_indices"]:
        out.append(f"  null indices: {dec['null_indices']}")
    out.append(f"consumed part (l1)  {dec['consumed_l1']:.6f}")
    out.append("")
    out.append(f"maximal average distillable coherence  {plan['total_value']:.6f}")
    dist = ", ".join(f"{p:.6f}" for p in plan["global_distribution"])
    out.append(f"p_n (n = 1..{inp['dim']})  ({dist})")
    for sp, meta in zip(plan["subspaces"], report.solver["per_subspace"]):
        dist = ", ".join(f"{p:.6f}" for p in sp["distribution"])
        out.append(f"  block {sp['indices']}: p_n|mu = ({dist}), value {sp['value']:.6f} "
                   f"[{meta['method']}, {meta['iterations']} pivots]")
        if verbose:
            for o in sp["outcomes"]:
                label = f"psi^{o['level']} on {o['support']}" if o["level"] else "completion"
                out.append(f"    outcome {label}: probability {o['probability']:.6f}")
                for k in o["kraus"]:
                    for row in k:
                        out.append("      [" + "  ".join(_fmt_c(z).rjust(20) for z in row) + "]")
                    out.append("")
    if report.verification is not None:
        ver = report.verification
        out.append("")
        out.append(f"verification: {'PASS' if ver['passed'] else 'FAIL'}")
        for c in ver["checks"]:
            mark = "ok  " if c["passed"] else "FAIL"
            out.append(f"  {mark} {c['name']:<24} {c['value']:.3e} (tol {c['tolerance']:.0e})")
    return "\n".join(out) + "\n"
