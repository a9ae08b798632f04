"""File formats.

Kernel JSON:        {"labels": [...]?, "matrix": [[...], ...]}
Distribution JSON:  {"labels": [...]?, "mass": [...]}
Weights JSON:       {"labels": [...]?, "weights": [...]}  ("mass" accepted too)
Trace CSV:          "# seed=<u64>" comment, then header "step,state"
Curve CSV:          header "n,tv,bound"

Floats are written with ``repr`` so that a round trip is bit-exact.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import IO, Iterable

from .chain import Distribution, StateSpace, TransitionKernel, UnnormalizedWeights
from .convergence import ConvergenceCurve
from .errors import InvalidInput
from .samplers import ChainTrace


def _load_json(path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise InvalidInput(f"{path}: top-level value must be an object")
    return data


def _numbers(values, where: str) -> list[float]:
    if not isinstance(values, list):
        raise InvalidInput(f"{where} must be an array")
    out = []
    for i, x in enumerate(values):
        if isinstance(x, bool) or not isinstance(x, (int, float)):
            raise InvalidInput(f"{where}[{i}] is not a number: {x!r}")
        out.append(float(x))
    return out


def kernel_from_dict(data: dict) -> TransitionKernel:
    if "matrix" not in data:
        raise InvalidInput('kernel file needs a "matrix" field')
    raw = data["matrix"]
    if not isinstance(raw, list) or not raw:
        raise InvalidInput("matrix must be a non-empty array of rows")
    rows = [_numbers(r, f"matrix[{z}]") for z, r in enumerate(raw)]
    for z, r in enumerate(rows):
        if len(r) != len(rows):
            raise InvalidInput(f"matrix[{z}] has {len(r)} entries, expected {len(rows)}")
    return TransitionKernel(StateSpace(len(rows), data.get("labels")), rows)


def kernel_to_dict(k: TransitionKernel) -> dict:
    out: dict = {}
    if k.space.labels is not None:
        out["labels"] = list(k.space.labels)
    out["matrix"] = k.rows.tolist()
    return out


def load_kernel(path) -> TransitionKernel:
    try:
        return kernel_from_dict(_load_json(path))
    except InvalidInput as exc:
        raise InvalidInput(f"{path}: {exc}") from None


def save_kernel(k: TransitionKernel, path) -> None:
    Path(path).write_text(json.dumps(kernel_to_dict(k)) + "\n")


def load_distribution(path) -> Distribution:
    data = _load_json(path)
    if "mass" not in data:
        raise InvalidInput(f'{path}: distribution file needs a "mass" field')
    mass = _numbers(data["mass"], "mass")
    try:
        return Distribution(StateSpace(len(mass), data.get("labels")), mass)
    except InvalidInput as exc:
        raise InvalidInput(f"{path}: {exc}") from None


def distribution_to_dict(pi: Distribution) -> dict:
    out: dict = {}
    if pi.space.labels is not None:
        out["labels"] = list(pi.space.labels)
    out["mass"] = pi.mass.tolist()
    return out


def load_weights(path) -> UnnormalizedWeights:
    data = _load_json(path)
    key = "weights" if "weights" in data else "mass"
    if key not in data:
        raise InvalidInput(f'{path}: weights file needs a "weights" field')
    w = _numbers(data[key], key)
    try:
        return UnnormalizedWeights(StateSpace(len(w), data.get("labels")), w)
    except InvalidInput as exc:
        raise InvalidInput(f"{path}: {exc}") from None


def write_trace_csv(trace: ChainTrace, fh: IO[str], *, offset: int = 0) -> None:
    """Write ``trace``; ``offset`` is added to every state (1 for 1-based output)."""
    fh.write(f"# seed={trace.seed}\n")
    fh.write("step,state\n")
    for i, s in enumerate(trace.states.tolist()):
        fh.write(f"{i},{s + offset}\n")


def read_trace_csv(fh: Iterable[str], *, offset: int = 0) -> tuple[int, list[int]]:
    seed = None
    states = []
    for line in fh:
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition("=")
            if key.strip() == "seed":
                seed = int(val)
            continue
        if line == "step,state":
            continue
        _, s = line.split(",")
        states.append(int(s) - offset)
    if seed is None:
        raise InvalidInput("trace CSV lacks a '# seed=' line")
    return seed, states


def write_curve_csv(curve: ConvergenceCurve, fh: IO[str]) -> None:
    fh.write("n,tv,bound\n")
    for n, tv, b in curve.rows():
        fh.write(f"{n},{tv!r},{b!r}\n")
