"""Command-line interface: ``siodistill {distill,check,lp}``."""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import formats
from .distill import Check, distill, verify_plan
from .errors import DistillError, InputFormatError, InvalidStateError, MeasureError
from .lp import simplex_solve, to_standard_form
from .majorization import check_state_to_ensemble
from .measures import builtin_measure, measure_from_table
from .quantum import validate_density_matrix
from .report import build_report, dumps, to_machine, to_text
from .subspace import DEFAULT_TOL

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_VERIFY = 3
INVARIANCE_TOL = 1e-10


def _measure(choice: str, d: int):
    if choice.startswith("custom:"):
        table = formats.read_measure_table(choice.split(":", 1)[1])
        if len(table) < d:
            raise MeasureError(f"custom table has {len(table)} values, state needs {d}")
        return measure_from_table(table, "custom")
    return builtin_measure(choice, d)


def _load_state(path):
    return validate_density_matrix(formats.read_state(path))


def _invariance_checks(rho, plan, measure, seed: int, tol: float) -> list[Check]:
    rng = np.random.default_rng(seed)
    m = rho.matrix
    d = m.shape[0]
    u = np.exp(1j * rng.uniform(0, 2 * np.pi, d))
    phased = u[:, None] * m * u.conj()[None, :]
    perm = rng.permutation(d)
    permuted = m[np.ix_(perm, perm)]
    out = []
    for name, other in (("phase_invariance", phased), ("permutation_invariance", permuted)):
        gap = abs(distill(other, measure, tol).total_value - plan.total_value)
        out.append(Check(name, gap <= INVARIANCE_TOL, gap, INVARIANCE_TOL))
    return out


def _distill_one(path, args) -> tuple[int, str, object]:
    """Returns (exit code, rendered text, report-or-error) for one state file."""
    try:
        rho = _load_state(path)
        measure = _measure(args.measure, rho.dim)
        plan = distill(rho, measure, args.tol)
    except (InputFormatError, InvalidStateError, MeasureError) as err:
        return EXIT_INPUT, f"error: {err}\n", str(err)
    except DistillError as err:
        return EXIT_INPUT, f"error: {type(err).__name__}: {err}\n", str(err)
    verification = None
    if args.verify:
        verification = verify_plan(rho, plan)
        if args.seed is not None:
            extra = _invariance_checks(rho, plan, measure, args.seed, args.tol)
            verification = replace(verification, checks=verification.checks + tuple(extra))
    report = build_report(rho, plan, verification)
    if args.figures:
        from .plotting import render_figures

        for p in render_figures(rho, plan, args.figures, Path(path).stem):
            print(f"wrote {p}", file=sys.stderr)
    code = EXIT_VERIFY if verification is not None and not verification.passed else EXIT_OK
    text = to_machine(report) if args.format == "machine" else to_text(report, args.verbose)
    return code, text, report


def cmd_distill(args) -> int:
    if args.batch:
        files = sorted(Path(args.batch).glob("*.json"))
        if not files:
            print(f"error: no *.json state files in {args.batch}", file=sys.stderr)
            return EXIT_INPUT
        with ThreadPoolExecutor() as pool:
            results = list(pool.map(lambda f: _distill_one(f, args), files))
        if args.format == "machine":
            entries = []
            for f, (code, _, payload) in zip(files, results):
                entry = {"file": f.name, "exit_code": code}
                if isinstance(payload, str):
                    entry["error"] = payload
                else:
                    entry["report"] = payload.to_dict()
                entries.append(entry)
            sys.stdout.write(dumps({"reports": entries}) + "\n")
        else:
            for f, (code, text, _) in zip(files, results):
                sys.stdout.write(f"== {f.name} ==\n{text}\n")
        return max(code for code, _, _ in results)
    code, text, _ = _distill_one(args.input, args)
    (sys.stderr if code == EXIT_INPUT else sys.stdout).write(text)
    return code


def cmd_check(args) -> int:
    try:
        rho = _load_state(args.input)
        ensemble = formats.read_ensemble(args.ensemble, rho.dim)
        projectors = formats.read_projectors(args.projectors) if args.projectors else None
        result = check_state_to_ensemble(rho, ensemble, projectors, args.tol)
    except (InputFormatError, InvalidStateError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except DistillError as err:
        # a non-rank-one projector is a verdict, not an input error
        result = None
        reason = f"{type(err).__name__}: {err}"
    if result is None:
        doc = {"feasible": False, "reason": reason, "projectors": None, "violation": None, "slacks": None}
    else:
        doc = {
            "feasible": result.feasible,
            "reason": result.reason,
            "projectors": None if result.projectors is None
            else [[i + 1 for i in p] for p in result.projectors],
            "violation": None if result.violation is None else dict(
                zip(("group", "k", "lhs", "rhs"), result.violation)),
            "slacks": [[float(s) for s in sl] for sl in result.slacks],
        }
    if args.format == "machine":
        sys.stdout.write(dumps(doc) + "\n")
        return EXIT_OK
    lines = ["feasible" if doc["feasible"] else "infeasible"]
    if doc["reason"]:
        lines.append(f"  {doc['reason']}")
    if doc["projectors"] is not None and doc["feasible"]:
        lines.append("  projectors: " + "  ".join("{" + ",".join(map(str, p)) + "}" for p in doc["projectors"]))
    if doc["violation"]:
        v = doc["violation"]
        lines.append(f"  violated tail constraint: group {v['group']}, k = {v['k']}, "
                     f"lhs {v['lhs']:.6f} < rhs {v['rhs']:.6f}")
    if doc["slacks"] and doc["feasible"]:
        for g, sl in enumerate(doc["slacks"], 1):
            lines.append(f"  group {g} slacks: ({', '.join(f'{s:.6f}' for s in sl)})")
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_lp(args) -> int:
    try:
        lp = formats.read_lp(args.input)
        result = simplex_solve(to_standard_form(lp), record=args.trace)
    except (InputFormatError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except DistillError as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_INPUT
    if args.format == "machine":
        doc = {"optimum": result.optimum, "argmax": [float(x) for x in result.p],
               "iterations": result.iterations}
        if args.trace:
            doc["tableaux"] = [
                {"basis": [b + 1 for b in t.basis], "body": t.body.tolist(), "rhs": t.rhs.tolist(),
                 "reduced_costs": t.reduced.tolist(), "objective": t.objective}
                for t in result.history
            ]
        sys.stdout.write(dumps(doc) + "\n")
        return EXIT_OK
    out = []
    if args.trace:
        for i, t in enumerate(result.history):
            out.append(f"tableau {i}" + (" (initial)" if i == 0 else ""))
            out.append(t.format())
            out.append("")
    out.append(f"optimum     {result.optimum:.6f}")
    out.append("argmax      (" + ", ".join(f"{x:.6f}" for x in result.p) + ")")
    out.append(f"iterations  {result.iterations}")
    sys.stdout.write("\n".join(out) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="siodistill",
        description="Optimal probabilistic coherence distillation under strictly incoherent operations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    d = sub.add_parser("distill", help="distill a density matrix into maximally coherent states")
    src = d.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="state file (JSON)")
    src.add_argument("--batch", metavar="DIR", help="process every *.json state file in DIR")
    d.add_argument("--measure", default="l1", help="l1, relent or custom:PATH (default: l1)")
    d.add_argument("--tol", type=float, default=DEFAULT_TOL,
                   help="threshold for treating comparison-matrix entries as 1 (default: 1e-7)")
    d.add_argument("--format", choices=("text", "machine"), default="text")
    d.add_argument("--verify", action="store_true", help="simulate the instrument and check the plan")
    d.add_argument("--seed", type=int, help="seed for randomized invariance self-checks (with --verify)")
    d.add_argument("--verbose", action="store_true", help="print Kraus operators in text output")
    d.add_argument("--figures", metavar="DIR", help="write comparison-matrix and distribution figures")
    d.set_defaults(func=cmd_distill)

    c = sub.add_parser("check", help="test whether a state converts into a pure-state ensemble")
    c.add_argument("--input", required=True, help="state file (JSON)")
    c.add_argument("--ensemble", required=True, help="ensemble file")
    c.add_argument("--projectors", help="projector file; omit to search")
    c.add_argument("--tol", type=float, default=DEFAULT_TOL)
    c.add_argument("--format", choices=("text", "machine"), default="text")
    c.set_defaults(func=cmd_check)

    lp = sub.add_parser("lp", help="solve a max-form LP (A p <= q, p >= 0) by the simplex method")
    lp.add_argument("--input", required=True, help="LP text file")
    lp.add_argument("--trace", action="store_true", help="print every tableau")
    lp.add_argument("--format", choices=("text", "machine"), default="text")
    lp.set_defaults(func=cmd_lp)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


def run() -> None:
    sys.exit(main())
