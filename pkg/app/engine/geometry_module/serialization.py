"""
Text serialization of point and flat-pair sets.

    # ffincidence-set v1 q=<q> kind=<kind> dims=<d1>,<d2>[ multiset=1]

followed by one element per line as comma-separated integer encodings, with the
multiplicity appended as a last field when multiset=1. Line-pairs are written per line
as (vertical, slope_or_x0, intercept), hyperplane-pairs as normal coordinates then offset.
Headers without dims= are read with dimensions inferred from the first row.
"""

import io
import os
import re
from typing import List, TextIO, Tuple, Union

from app.engine.errors import GeometryError
from app.engine.gf_module import field_for_order
from app.engine.geometry_module.geometry import (
    Hyperplane, HyperplanePair, HyperplanePairSet, IncidenceSet, Line, LinePair, LinePairSet, PointSet,
)

HEADER_PREFIX = "# ffincidence-set v1"
_HEADER_RE = re.compile(
    r"^# ffincidence-set v1 q=(?P<q>\d+) kind=(?P<kind>\w+)"
    r"(?: dims=(?P<dims>\d+(?:,\d+)*))?(?P<multi> multiset=1)?$"
)


def _infer_dims(kind: str, rows: List[str], multiset: bool) -> Tuple[int, ...]:
    """Plane pairs unless the first row is wider; point rows of another width are single vectors."""
    if not rows:
        return 2, 2
    width = len(rows[0].split(",")) - (1 if multiset else 0)
    if kind == "points":
        return (2, 2) if width == 4 else (width,)
    if kind == "hyperplanepairs" and width >= 6:
        d1 = (width - 2) // 2
        return d1, width - 2 - d1
    return 2, 2


def _line_fields(line: Line) -> List[int]:
    if line.is_vertical:
        return [1, line.intercept, 0]
    return [0, line.slope, line.intercept]


def _element_fields(collection: IncidenceSet, element) -> List[int]:
    if isinstance(collection, PointSet):
        return [c for component in element for c in component]
    if isinstance(collection, LinePairSet):
        return _line_fields(element.first) + _line_fields(element.second)
    return [*element.first.normal, element.first.offset, *element.second.normal, element.second.offset]


def dumps_set(collection: IncidenceSet) -> str:
    """Render a set in the text format; element order is the support order."""
    dims = ",".join(str(d) for d in collection.dims)
    header = f"{HEADER_PREFIX} q={collection.spec.q} kind={collection.kind} dims={dims}"
    if collection.is_multiset:
        header += " multiset=1"
    lines = [header]
    for element, m in collection.items():
        fields = _element_fields(collection, element)
        if collection.is_multiset:
            fields.append(m)
        lines.append(",".join(str(int(f)) for f in fields))
    return "\n".join(lines) + "\n"


def dump_set(collection: IncidenceSet, target: Union[str, os.PathLike, TextIO]) -> None:
    text = dumps_set(collection)
    if hasattr(target, "write"):
        target.write(text)
        return
    with open(target, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)


def _parse_line(fields: List[int]) -> Line:
    vertical, a, b = fields
    if vertical not in (0, 1):
        raise GeometryError(f"line flag {vertical} must be 0 or 1")
    return Line.vertical(a) if vertical else Line.nonvertical(a, b)


def loads_set(text: str) -> IncidenceSet:
    """
    Parse the text format back into a PointSet, LinePairSet or HyperplanePairSet.

    Raises:
        GeometryError: On a malformed header, a wrong field count or out-of-range encodings.
        FieldError: If the header names an unsupported field order.
    """
    rows = [row.strip() for row in io.StringIO(text) if row.strip()]
    if not rows:
        raise GeometryError("empty set file")
    match = _HEADER_RE.match(rows[0])
    if not match:
        raise GeometryError(f"bad set header {rows[0]!r}")
    spec = field_for_order(int(match["q"]))
    kind = match["kind"]
    multiset = match["multi"] is not None
    if match["dims"]:
        dims = tuple(int(d) for d in match["dims"].split(","))
    else:
        dims = _infer_dims(kind, rows[1:], multiset)

    if kind == "points":
        width = sum(dims)
    elif kind == "linepairs":
        width = 6
    elif kind == "hyperplanepairs":
        if len(dims) != 2:
            raise GeometryError("hyperplane-pair sets need two dimensions")
        width = dims[0] + dims[1] + 2
    else:
        raise GeometryError(f"unknown set kind {kind!r}")

    elements, weights = [], []
    for number, row in enumerate(rows[1:], start=2):
        try:
            fields = [int(f) for f in row.split(",")]
        except ValueError as e:
            raise GeometryError(f"line {number}: non-integer field") from e
        if len(fields) != width + (1 if multiset else 0):
            raise GeometryError(f"line {number}: expected {width + multiset} fields, got {len(fields)}")
        if any(not 0 <= f < spec.q for f in fields[:width]):
            raise GeometryError(f"line {number}: encoding outside GF({spec.q})")
        weights.append(fields[width] if multiset else 1)
        body = fields[:width]
        if kind == "points":
            out, start = [], 0
            for d in dims:
                out.append(tuple(body[start:start + d]))
                start += d
            elements.append(tuple(out))
        elif kind == "linepairs":
            elements.append(LinePair(_parse_line(body[:3]), _parse_line(body[3:])))
        else:
            d1 = dims[0]
            first = Hyperplane.canonical(spec, body[:d1], body[d1])
            second = Hyperplane.canonical(spec, body[d1 + 1:-1], body[-1])
            elements.append(HyperplanePair(first, second))

    if kind == "points":
        return PointSet(spec, dims, elements, weights)
    if kind == "linepairs":
        return LinePairSet(spec, elements, weights)
    return HyperplanePairSet(spec, dims, elements, weights)


def load_set(source: Union[str, os.PathLike, TextIO]) -> IncidenceSet:
    if hasattr(source, "read"):
        return loads_set(source.read())
    with open(source, encoding="utf-8") as handle:
        return loads_set(handle.read())
