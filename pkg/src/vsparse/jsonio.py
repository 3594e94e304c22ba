"""JSON wire formats with bit-exact rationals.

Rationals travel as strings "num/den"; the emitter always writes an explicit
denominator ("3/1", "1/2") so artifacts are byte-stable, while the parser
also accepts bare integer strings. All dumps are canonical: sorted keys,
two-space indent, trailing newline. Parse errors raise
:class:`JsonFormatError` carrying the path of the offending field.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Callable, Sequence

from .core import DemandSet, Metric, Pair, WeightedGraph


class JsonFormatError(ValueError):
    """A JSON document does not match the expected wire format."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


def format_fraction(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def parse_fraction(text: Any, path: str = "value") -> Fraction:
    if not isinstance(text, str):
        raise JsonFormatError(path, f"expected a rational string, got {type(text).__name__}")
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise JsonFormatError(path, f"bad rational {text!r}: {exc}") from None
    return value


def dump_canonical(data: Any) -> str:
    """Serialize to the canonical byte form used for every artifact."""
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise JsonFormatError(f"line {exc.lineno}, column {exc.colno}", exc.msg) from None


def _expect_int(value: Any, path: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise JsonFormatError(path, f"expected an integer, got {value!r}")
    return value


def _expect_list(value: Any, path: str) -> list:
    if not isinstance(value, list):
        raise JsonFormatError(path, f"expected a list, got {type(value).__name__}")
    return value


def _expect_object(value: Any, path: str, required: Sequence[str]) -> dict:
    if not isinstance(value, dict):
        raise JsonFormatError(path, f"expected an object, got {type(value).__name__}")
    for key in required:
        if key not in value:
            raise JsonFormatError(path, f"missing required key {key!r}")
    return value


# ---------------------------------------------------------------------------
# graphs


def graph_to_json(g: WeightedGraph) -> dict:
    return {
        "n": g.n,
        "terminals": list(g.terminals),
        "edges": [[i, j, format_fraction(w)] for i, j, w in g.edges()],
    }


def graph_from_json(data: Any, path: str = "graph") -> WeightedGraph:
    obj = _expect_object(data, path, ("n", "terminals", "edges"))
    n = _expect_int(obj["n"], f"{path}.n")
    terminals = [
        _expect_int(t, f"{path}.terminals[{a}]")
        for a, t in enumerate(_expect_list(obj["terminals"], f"{path}.terminals"))
    ]
    edges = []
    for a, entry in enumerate(_expect_list(obj["edges"], f"{path}.edges")):
        epath = f"{path}.edges[{a}]"
        row = _expect_list(entry, epath)
        if len(row) != 3:
            raise JsonFormatError(epath, f"expected [i, j, weight], got {len(row)} items")
        i = _expect_int(row[0], f"{epath}[0]")
        j = _expect_int(row[1], f"{epath}[1]")
        w = parse_fraction(row[2], f"{epath}[2]")
        edges.append((i, j, w))
    try:
        return WeightedGraph(n, terminals, edges)
    except ValueError as exc:
        raise JsonFormatError(path, str(exc)) from None


# ---------------------------------------------------------------------------
# demands


def demands_to_json(ds: DemandSet) -> dict:
    return {"demands": [[s, t, format_fraction(dem)] for s, t, dem in ds.demands]}


def demands_from_json(data: Any, path: str = "demands") -> DemandSet:
    obj = _expect_object(data, path, ("demands",))
    rows = []
    for a, entry in enumerate(_expect_list(obj["demands"], f"{path}.demands")):
        epath = f"{path}.demands[{a}]"
        row = _expect_list(entry, epath)
        if len(row) != 3:
            raise JsonFormatError(epath, f"expected [s, t, demand], got {len(row)} items")
        rows.append((
            _expect_int(row[0], f"{epath}[0]"),
            _expect_int(row[1], f"{epath}[1]"),
            parse_fraction(row[2], f"{epath}[2]"),
        ))
    try:
        return DemandSet(rows)
    except ValueError as exc:
        raise JsonFormatError(path, str(exc)) from None


# ---------------------------------------------------------------------------
# metrics (tables of rational strings)


def metric_to_json(d: Metric) -> list[list[str]]:
    return [[format_fraction(v) for v in row] for row in d.rows]


def metric_from_json(data: Any, path: str = "metric") -> Metric:
    rows = []
    for i, row in enumerate(_expect_list(data, path)):
        rows.append([
            parse_fraction(v, f"{path}[{i}][{j}]")
            for j, v in enumerate(_expect_list(row, f"{path}[{i}]"))
        ])
    try:
        return Metric(rows)
    except ValueError as exc:
        raise JsonFormatError(path, str(exc)) from None
