"""Model documents: JSON with every integer written as a decimal string.

Example (the full two-shift with every height equal to 1)::

    {
      "states": "2",
      "transitions": [["1", "1"], ["1", "1"]],
      "dim": "1",
      "twist": [["1"]],
      "heights": {"0->0": ["1"], "0->1": ["1"], "1->0": ["1"], "1->1": ["1"]}
    }

Plain JSON integers are accepted too; they are read exactly.
"""

from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Any

from .errors import NotInvertibleError, ParseError, ValidationError
from .intlat import IntMatrix
from .sft import Sft
from .skew.core import TwistedSkew

_INT = re.compile(r"^[+-]?[0-9]+$")
_EDGE = re.compile(r"^\s*([0-9]+)\s*->\s*([0-9]+)\s*$")


def _int(value: Any, where: str) -> int:
    if isinstance(value, bool):
        raise ValidationError(f"{where}: expected an integer, got a boolean")
    if isinstance(value, int):
        return value
    if isinstance(value, str) and _INT.match(value.strip()):
        return int(value.strip())
    raise ValidationError(f"{where}: expected an integer (decimal string), got {value!r}")


def _int_list(value: Any, n: int, where: str) -> list[int]:
    if not isinstance(value, list) or len(value) != n:
        raise ValidationError(f"{where}: expected a list of {n} integers")
    return [_int(x, f"{where}[{i}]") for i, x in enumerate(value)]


def from_document(doc: Any) -> TwistedSkew:
    if not isinstance(doc, dict):
        raise ValidationError("model must be a JSON object")
    for key in ("states", "transitions", "dim", "twist", "heights"):
        if key not in doc:
            raise ValidationError(f"missing field '{key}'")
    n = _int(doc["states"], "states")
    if n < 1:
        raise ValidationError("states: must be at least 1")
    trans = doc["transitions"]
    if not isinstance(trans, list) or len(trans) != n:
        raise ValidationError(f"transitions: expected {n} rows")
    rows = [_int_list(r, n, f"transitions[{i}]") for i, r in enumerate(trans)]
    for i, r in enumerate(rows):
        for j, x in enumerate(r):
            if x not in (0, 1):
                raise ValidationError(f"transitions[{i}][{j}]: entries must be 0 or 1")
    d = _int(doc["dim"], "dim")
    if d < 1:
        raise ValidationError("dim: must be at least 1")
    tw = doc["twist"]
    if not isinstance(tw, list) or len(tw) != d:
        raise ValidationError(f"twist: expected {d} rows")
    twist = IntMatrix.of([_int_list(r, d, f"twist[{i}]") for i, r in enumerate(tw)])
    det = twist.det()
    if det not in (1, -1):
        raise ValidationError(f"twist: determinant is {det}, must be 1 or -1")
    raw = doc["heights"]
    if not isinstance(raw, dict):
        raise ValidationError("heights: expected an object keyed by 'a->b'")
    base = Sft.of(rows)
    heights = {}
    for key, value in raw.items():
        m = _EDGE.match(key)
        if not m:
            raise ValidationError(f"heights: bad edge key {key!r}, expected 'a->b'")
        e = (int(m.group(1)), int(m.group(2)))
        if e[0] >= n or e[1] >= n or not base.allows(*e):
            raise ValidationError(f"heights: edge {key} is not an allowed transition")
        if e in heights:
            raise ValidationError(f"heights: edge {key} given twice")
        heights[e] = tuple(_int_list(value, d, f"heights[{key}]"))
    for a, b in base.edges():
        if (a, b) not in heights:
            raise ValidationError(f"heights: missing height for allowed edge {a}->{b}")
    try:
        return TwistedSkew(base, d, twist, heights)
    except NotInvertibleError as exc:  # pragma: no cover - det checked above
        raise ValidationError(str(exc)) from exc


def parse_model(text: str) -> TwistedSkew:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return from_document(doc)


def load_model(path: str | Path) -> TwistedSkew:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_model(text)


def to_document(tau: TwistedSkew) -> dict:
    n = tau.base.state_count
    return {
        "states": str(n),
        "transitions": [[str(x) for x in row] for row in tau.base.transitions.rows],
        "dim": str(tau.d),
        "twist": [[str(x) for x in row] for row in tau.twist.rows],
        "heights": {f"{a}->{b}": [str(x) for x in v] for (a, b), v in sorted(tau.heights.items())},
    }


def emit_model(tau: TwistedSkew) -> str:
    return json.dumps(to_document(tau), indent=2) + "\n"


# -- built-in examples over the full two-shift -------------------------------

_FULL2 = [[1, 1], [1, 1]]


def _full2(d: int, h00, h01, h10, h11) -> TwistedSkew:
    heights = {(0, 0): h00, (0, 1): h01, (1, 0): h10, (1, 1): h11}
    return TwistedSkew(Sft.of(_FULL2), d, IntMatrix.identity(d), heights)


def builtin(name: str) -> TwistedSkew:
    """Untwisted examples over the full two-shift.

    eta1: every height 1.  eta2: heights -2, 0, 0, 2 on 00, 01, 10, 11.
    eta3: heights -1, 0, 0, 1.  eta4 (Z^2): (1,0) on 00 and 01, (0,1) on 11 and 10.
    """
    table = {
        "eta1": lambda: _full2(1, (1,), (1,), (1,), (1,)),
        "eta2": lambda: _full2(1, (-2,), (0,), (0,), (2,)),
        "eta3": lambda: _full2(1, (-1,), (0,), (0,), (1,)),
        "eta4": lambda: _full2(2, (1, 0), (1, 0), (0, 1), (0, 1)),
    }
    if name not in table:
        raise ParseError(f"unknown built-in model {name!r} (known: {', '.join(sorted(table))})")
    return table[name]()


BUILTINS = ("eta1", "eta2", "eta3", "eta4")

# Expected properties of the built-ins, used by the `example` command.
EXPECTED = {
    "eta1": {"ftp": True, "transitive": False, "lattice_index": "1", "rotation_vertices": [["1"]]},
    "eta2": {"ftp": False, "transitive": False, "lattice_index": "2", "rotation_vertices": [["-2"], ["2"]]},
    "eta3": {"ftp": True, "transitive": True, "lattice_index": "1", "rotation_vertices": [["-1"], ["1"]]},
    "eta4": {"ftp": True, "transitive": False, "lattice_index": "1", "rotation_vertices": [["0", "1"], ["1", "0"]]},
}


def resolve(spec: str) -> TwistedSkew:
    """A built-in name or a path to a model file."""
    if spec in BUILTINS:
        return builtin(spec)
    return load_model(spec)
