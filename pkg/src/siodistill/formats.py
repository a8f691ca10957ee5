"""
Readers and writers for the on-disk formats.

State file (JSON)::

    {"dim": 2, "matrix": [[[0.5, 0], [0.5, 0]], [[0.5, 0], [0.5, 0]]]}

Ensemble file (text; ``#`` starts a comment)::

    group 1.0
    0.2  1 0 0
    0.2  0.7071067811865476 0.7071067811865476 0
    0.6  0.5773502691896258 0.5773502691896258 0.5773502691896258

Each ``group W`` line opens a group with weight W; each following line holds
a conditional probability and the d target amplitudes (Python complex
literals such as ``0.5-0.1j`` are accepted).

Projector file: one projector per line, as 1-based basis indices.
Measure file: the d values f(1)..f(d), whitespace separated.
LP file: d on the first line, then c, then q, then the d rows of A.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import InputFormatError
from .lp import LinearProgram
from .majorization import TargetEnsemble


def _read(path) -> str:
    try:
        return Path(path).read_text()
    except FileNotFoundError:
        raise InputFormatError(f"{path}: file not found") from None
    except OSError as err:
        raise InputFormatError(f"{path}: {err.strerror}") from None


def _content_lines(text: str):
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield no, line


def parse_state(text: str, source: str = "<state>") -> np.ndarray:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise InputFormatError(f"{source}:{err.lineno}:{err.colno}: {err.msg}") from None
    if not isinstance(doc, dict) or "matrix" not in doc:
        raise InputFormatError(f"{source}: expected an object with 'dim' and 'matrix'")
    rows = doc["matrix"]
    dim = doc.get("dim", len(rows) if isinstance(rows, list) else None)
    if not isinstance(dim, int) or dim < 1:
        raise InputFormatError(f"{source}: 'dim' must be a positive integer")
    if not isinstance(rows, list) or len(rows) != dim:
        raise InputFormatError(f"{source}: matrix must have {dim} rows")
    out = np.zeros((dim, dim), dtype=complex)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != dim:
            raise InputFormatError(f"{source}: matrix[{i}] must have {dim} entries")
        for j, entry in enumerate(row):
            if (not isinstance(entry, list) or len(entry) != 2
                    or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in entry)):
                raise InputFormatError(f"{source}: matrix[{i}][{j}] must be a [re, im] pair of numbers")
            out[i, j] = complex(entry[0], entry[1])
    return out


def read_state(path) -> np.ndarray:
    return parse_state(_read(path), str(path))


def state_document(matrix) -> dict:
    m = np.asarray(matrix, dtype=complex)
    return {"dim": m.shape[0],
            "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in m]}


def write_state(path, matrix) -> None:
    Path(path).write_text(json.dumps(state_document(matrix), indent=1) + "\n")


def _parse_complex(tok: str, where: str) -> complex:
    try:
        return complex(tok.replace("i", "j") if tok.endswith("i") else tok)
    except ValueError:
        raise InputFormatError(f"{where}: cannot parse amplitude {tok!r}") from None


def _parse_float(tok: str, where: str) -> float:
    try:
        return float(tok)
    except ValueError:
        raise InputFormatError(f"{where}: expected a number, got {tok!r}") from None


def parse_ensemble(text: str, source: str = "<ensemble>", dim: int | None = None) -> TargetEnsemble:
    groups: list[list] = []
    weights: list[float] = []
    for no, line in _content_lines(text):
        where = f"{source}:{no}"
        toks = line.split()
        if toks[0].lower() == "group":
            if len(toks) != 2:
                raise InputFormatError(f"{where}: expected 'group <weight>'")
            weights.append(_parse_float(toks[1], where))
            groups.append([])
            continue
        if not groups:
            raise InputFormatError(f"{where}: target line before any 'group' line")
        prob = _parse_float(toks[0], where)
        amps = np.array([_parse_complex(t, where) for t in toks[1:]])
        if dim is not None and amps.size != dim:
            raise InputFormatError(f"{where}: {amps.size} amplitudes for dimension {dim}")
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise InputFormatError(f"{where}: zero target vector")
        groups[-1].append((prob, amps / norm))
    if not groups:
        raise InputFormatError(f"{source}: no groups found")
    try:
        return TargetEnsemble(tuple(tuple(g) for g in groups), tuple(weights))
    except ValueError as err:
        raise InputFormatError(f"{source}: {err}") from None


def read_ensemble(path, dim: int | None = None) -> TargetEnsemble:
    return parse_ensemble(_read(path), str(path), dim)


def parse_projectors(text: str, source: str = "<projectors>") -> list[tuple[int, ...]]:
    out = []
    for no, line in _content_lines(text):
        try:
            idx = tuple(int(t) - 1 for t in line.replace(",", " ").split())
        except ValueError:
            raise InputFormatError(f"{source}:{no}: projector indices must be integers") from None
        if any(i < 0 for i in idx):
            raise InputFormatError(f"{source}:{no}: indices are 1-based")
        out.append(idx)
    return out


def read_projectors(path) -> list[tuple[int, ...]]:
    return parse_projectors(_read(path), str(path))


def parse_measure_table(text: str, source: str = "<measure>") -> list[float]:
    vals = []
    for no, line in _content_lines(text):
        vals.extend(_parse_float(t, f"{source}:{no}") for t in line.replace(",", " ").split())
    if not vals:
        raise InputFormatError(f"{source}: empty measure table")
    return vals


def read_measure_table(path) -> list[float]:
    return parse_measure_table(_read(path), str(path))


def parse_lp(text: str, source: str = "<lp>") -> LinearProgram:
    lines = list(_content_lines(text))
    if not lines:
        raise InputFormatError(f"{source}: empty LP file")
    no, first = lines[0]
    try:
        d = int(first)
    except ValueError:
        raise InputFormatError(f"{source}:{no}: first line must be the dimension d") from None
    if d < 1:
        raise InputFormatError(f"{source}:{no}: dimension must be positive")
    if len(lines) != 3 + d:
        raise InputFormatError(f"{source}: expected {3 + d} data lines (d, c, q, {d} rows of A), "
                               f"found {len(lines)}")
    rows = []
    for no, line in lines[1:]:
        vals = [_parse_float(t, f"{source}:{no}") for t in line.split()]
        if len(vals) != d:
            raise InputFormatError(f"{source}:{no}: expected {d} numbers, found {len(vals)}")
        rows.append(vals)
    return LinearProgram(np.array(rows[0]), np.array(rows[2:]), np.array(rows[1]))


def read_lp(path) -> LinearProgram:
    return parse_lp(_read(path), str(path))


def format_lp(lp: LinearProgram) -> str:
    def row(v):
        return " ".join(repr(float(x)) for x in v)

    lines = [str(lp.c.size), row(lp.c), row(lp.q)] + [row(r) for r in lp.A]
    return "\n".join(lines) + "\n"
