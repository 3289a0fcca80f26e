# DAL/codec.py
# Exact JSON encoding of values, range sets, spaces, vectors, telescopes and problems.
# Values travel as "p/q" or integer strings; floats are rejected.
from typing import Any, Dict, List, Optional
import csv
import io
import logging

from SERVICE.embed_service import UltraVector
from SERVICE.errors import MalformedMatrix
from SERVICE.space_service import INFINITY, FiniteUltrametricSpace, Infinity, validate
from SERVICE.telescope_service import BlockRule, RadiusRule, SequenceSpace, TelescopeSpace, offset_for, telescope_build
from SERVICE.values_service import AllRationals, ExplicitFinite, GeometricGrid, Lattice, RangeSet, as_value

logger = logging.getLogger(__name__)


def value_to_json(v) -> str:
    if isinstance(v, Infinity):
        return "inf"
    return str(v)


def value_from_json(raw, allow_inf: bool = False):
    if raw == "inf" and allow_inf:
        return INFINITY
    try:
        return as_value(raw)
    except (ValueError, ZeroDivisionError) as err:
        raise MalformedMatrix(str(err), {"value": raw}) from None


def range_set_to_json(S: RangeSet) -> Dict[str, Any]:
    if isinstance(S, ExplicitFinite):
        return {"kind": "finite", "values": [value_to_json(v) for v in S.values]}
    if isinstance(S, GeometricGrid):
        return {"kind": "grid", "ratio": value_to_json(S.ratio), "kmin": S.kmin, "kmax": S.kmax}
    if isinstance(S, Lattice):
        return {"kind": "lattice", "step": value_to_json(S.step)}
    return {"kind": "all"}


def range_set_from_json(obj: Dict[str, Any]) -> RangeSet:
    kind = obj["kind"]
    if kind == "finite":
        return ExplicitFinite(tuple(value_from_json(v) for v in obj["values"]))
    if kind == "grid":
        return GeometricGrid(value_from_json(obj["ratio"]), obj.get("kmin"), obj.get("kmax"))
    if kind == "lattice":
        return Lattice(value_from_json(obj["step"]))
    if kind == "all":
        return AllRationals()
    raise KeyError(f"unknown range set kind {kind!r}")


def _matrix(rows) -> List[List]:
    if not isinstance(rows, list) or any(not isinstance(r, list) for r in rows):
        raise MalformedMatrix("dist must be a list of rows")
    return [[value_from_json(v) for v in row] for row in rows]


def space_to_json(space: FiniteUltrametricSpace) -> Dict[str, Any]:
    return {
        "points": list(space.points),
        "dist": [[value_to_json(v) for v in row] for row in space.dist],
        "range_set": range_set_to_json(space.range_set),
    }


def space_from_json(obj: Dict[str, Any], range_set: Optional[RangeSet] = None, check: bool = True) -> FiniteUltrametricSpace:
    """An explicit `range_set` overrides the document's own; AllRationals when neither is given."""
    S = range_set or (range_set_from_json(obj["range_set"]) if "range_set" in obj else AllRationals())
    points = [str(p) for p in obj["points"]]
    dist = _matrix(obj["dist"])
    if check:
        return validate(points, dist, S)
    if len(dist) != len(points) or any(len(r) != len(points) for r in dist):
        raise MalformedMatrix(f"matrix is not {len(points)}x{len(points)}")
    return FiniteUltrametricSpace(tuple(points), dist, S)


def space_from_csv(text: str, range_set: Optional[RangeSet] = None, check: bool = True) -> FiniteUltrametricSpace:
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    if not rows:
        raise MalformedMatrix("empty CSV")
    header = [h.strip() for h in rows[0]]
    # tolerate a blank corner cell and a label column
    if header and header[0] == "":
        header = header[1:]
        body = [[c.strip() for c in r[1:]] for r in rows[1:]]
    else:
        body = [[c.strip() for c in r] for r in rows[1:]]
    return space_from_json({"points": header, "dist": body}, range_set or AllRationals(), check)


def vector_to_json(f: UltraVector) -> Dict[str, Any]:
    return {"segments": [{"upto": value_to_json(hi), "coeffs": coeffs} for _, hi, coeffs in f.segments()]}


def vector_from_json(obj: Dict[str, Any]) -> UltraVector:
    return UltraVector.from_segments(
        (value_from_json(seg["upto"]), {str(k): int(v) for k, v in seg["coeffs"].items()}) for seg in obj["segments"])


def radius_rule_from_json(obj: Dict[str, Any]) -> RadiusRule:
    kind = obj["kind"]
    if kind in ("grid", "geometric"):
        return RadiusRule.geometric(value_from_json(obj["ratio"]))
    if kind == "harmonic":
        return RadiusRule.harmonic()
    if kind == "range_set":
        return RadiusRule.from_range_set(range_set_from_json(obj["range_set"]))
    raise KeyError(f"unknown radius rule {kind!r}")


def block_rule_from_json(obj: Dict[str, Any]) -> BlockRule:
    kind = obj["kind"]
    if kind == "cycle":
        return BlockRule("cycle", spaces=tuple(space_from_json(sp) for sp in obj["spaces"]))
    return BlockRule(kind, start_size=int(obj.get("start_size", 2)), size=int(obj.get("size", 2)))


def telescope_from_json(obj: Dict[str, Any], range_set: Optional[RangeSet] = None) -> TelescopeSpace:
    """
    {"radii": {...}, "offset": N, "blocks": {...}}; "target_diameter" may replace "offset",
    in which case N is the least offset keeping every radius below it.
    """
    radii = radius_rule_from_json(obj["radii"])
    if "offset" in obj:
        offset = int(obj["offset"])
    elif "target_diameter" in obj:
        offset = offset_for(radii, value_from_json(obj["target_diameter"]))
    else:
        offset = 0
    S = range_set or (range_set_from_json(obj["range_set"]) if "range_set" in obj else None)
    return telescope_build(block_rule_from_json(obj["blocks"]), radii, offset, S)


def sequence_from_json(obj: Dict[str, Any], range_set: Optional[RangeSet] = None) -> SequenceSpace:
    return SequenceSpace(radius_rule_from_json(obj.get("radii", obj)), range_set)


def family_from_json(items: List[Dict[str, Any]], range_set: RangeSet):
    family = []
    for item in items:
        subset = [str(p) for p in item["subset"]]
        family.append((tuple(subset), validate(subset, _matrix(item["matrix"]), range_set)))
    return family
