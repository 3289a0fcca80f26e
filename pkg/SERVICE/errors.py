# SERVICE/errors.py
# Domain errors. Each carries a `witness` dict (labels / exact values as strings) that reports print verbatim.
from typing import Any, Dict, Optional


def _plain(value: Any) -> Any:
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if value is None or isinstance(value, (bool, int, str)):
        return value
    return str(value)


class UltrametricError(ValueError):
    """Base class for every failure raised by the services."""

    def __init__(self, message: str, witness: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.witness = _plain(witness or {})

    @property
    def name(self) -> str:
        return type(self).__name__


class MalformedMatrix(UltrametricError):
    pass


class TriangleViolation(UltrametricError):
    def __init__(self, x: str, y: str, z: str, dxy, dxz, dzy):
        super().__init__(
            f"strong triangle inequality fails: d({x},{y})={dxy} > d({x},{z}) v d({z},{y}) = {max(dxz, dzy)}",
            {"triple": [x, y, z], "d_xy": dxy, "d_xz": dxz, "d_zy": dzy},
        )
        self.triple = (x, y, z)


class NotInRangeSet(UltrametricError):
    def __init__(self, value, pair=None):
        where = f" at {pair[0]},{pair[1]}" if pair else ""
        super().__init__(f"value {value} is not in the range set{where}",
                         {"value": value, "pair": list(pair) if pair else None})
        self.value = value
        self.pair = pair


class ZeroOffDiagonal(UltrametricError):
    def __init__(self, x: str, y: str):
        super().__init__(f"distinct points {x},{y} at distance 0", {"pair": [x, y]})
        self.pair = (x, y)


class OutOfRange(UltrametricError):
    pass


class NoCoinitiality(UltrametricError):
    pass


class UnknownPoint(UltrametricError):
    pass


class DuplicateLabel(UltrametricError):
    pass


class HypothesisViolation(UltrametricError):
    def __init__(self, which: str, message: str, witness: Optional[Dict[str, Any]] = None):
        payload = {"which": which}
        payload.update(witness or {})
        super().__init__(message, payload)
        self.which = which


class BoundViolation(UltrametricError):
    pass


class EmptyPositivePart(UltrametricError):
    pass


class RankDeficient(UltrametricError):
    pass


class DisjointnessViolation(UltrametricError):
    pass


class DiameterViolation(UltrametricError):
    def __init__(self, block: int, diameter, budget):
        super().__init__(f"block {block} has diameter {diameter} above its radius {budget}",
                         {"block": block, "diameter": diameter, "radius": budget})
        self.block = block


class TooSmall(UltrametricError):
    pass


class NoWitnessFound(UltrametricError):
    pass


class ApproximationImpossible(UltrametricError):
    pass


class TailNotFound(UltrametricError):
    pass


class PostconditionFailure(UltrametricError):
    pass
