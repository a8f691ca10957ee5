"""Paths to the bundled fixture files."""

from __future__ import annotations

from pathlib import Path

import numpy as np

FIXTURES = Path(__file__).parent


def path(name: str) -> Path:
    p = FIXTURES / name
    if not p.exists():
        raise FileNotFoundError(f"no bundled fixture {name!r}")
    return p


def gap_state() -> np.ndarray:
    from ..formats import read_state

    return read_state(path("gap_state.json"))


def gap_io_pair() -> list[np.ndarray]:
    import json

    doc = json.loads(path("gap_io_pair.json").read_text())
    return [np.array([[complex(*z) for z in row] for row in k]) for k in doc["kraus"]]


def worked_pure_state() -> np.ndarray:
    from ..formats import read_state

    return read_state(path("worked_pure_d3.json"))
