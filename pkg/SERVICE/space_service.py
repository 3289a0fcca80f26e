# SERVICE/space_service.py
# Finite S-valued ultrametric spaces, their validation and the metrics between ultrametrics.
import functools
import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from SERVICE.errors import (
    DuplicateLabel, MalformedMatrix, NotInRangeSet, TooSmall, TriangleViolation,
    UnknownPoint, ZeroOffDiagonal,
)
from SERVICE.values_service import ZERO, AllRationals, ExplicitFinite, RangeSet, as_value

logger = logging.getLogger(__name__)


@functools.total_ordering
class Infinity:
    """The value adjoined to S when scanning for the least admissible epsilon; encodes as "inf"."""
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __eq__(self, other):
        return isinstance(other, Infinity)

    def __lt__(self, other):
        return False

    def __hash__(self):
        return hash("inf")

    def __repr__(self):
        return "inf"

    __str__ = __repr__


INFINITY = Infinity()


@dataclass(frozen=True)
class FiniteUltrametricSpace:
    """Labelled points with a symmetric matrix of exact values. Build through `validate` for checked input."""
    points: Tuple[str, ...]
    dist: Tuple[Tuple[Fraction, ...], ...]
    range_set: RangeSet = field(default_factory=AllRationals)
    _index: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        object.__setattr__(self, "dist", tuple(tuple(row) for row in self.dist))
        object.__setattr__(self, "_index", {p: i for i, p in enumerate(self.points)})

    def __len__(self) -> int:
        return len(self.points)

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise UnknownPoint(f"unknown point {label!r}", {"label": label}) from None

    def d(self, a: str, b: str) -> Fraction:
        return self.dist[self.index(a)][self.index(b)]

    distance = d

    def pairs(self) -> Iterator[Tuple[int, int]]:
        return itertools.combinations(range(len(self.points)), 2)

    def label_pairs(self) -> Iterator[Tuple[str, str]]:
        return itertools.combinations(self.points, 2)


def _entry(raw) -> Fraction:
    try:
        return as_value(raw)
    except ValueError as err:
        raise MalformedMatrix(str(err), {"value": raw}) from None


def _check_shape(points: Sequence[str], dist) -> None:
    if len(set(points)) != len(points):
        seen = set()
        dup = next(p for p in points if p in seen or seen.add(p))
        raise DuplicateLabel(f"label {dup!r} appears twice", {"label": dup})
    n = len(points)
    if len(dist) != n or any(len(row) != n for row in dist):
        raise MalformedMatrix(f"matrix is not {n}x{n}", {"points": n})
    for i in range(n):
        if dist[i][i] != 0:
            raise MalformedMatrix(f"nonzero diagonal at {points[i]}", {"point": points[i], "value": dist[i][i]})
        for j in range(i + 1, n):
            if dist[i][j] != dist[j][i]:
                raise MalformedMatrix(f"asymmetric entry at {points[i]},{points[j]}",
                                      {"pair": [points[i], points[j]], "values": [dist[i][j], dist[j][i]]})
            if dist[i][j] < 0:
                raise MalformedMatrix(f"negative entry at {points[i]},{points[j]}",
                                      {"pair": [points[i], points[j]], "value": dist[i][j]})


def _rank_matrix(dist) -> List[List[int]]:
    ranks = {v: r for r, v in enumerate(sorted({v for row in dist for v in row}))}
    return [[ranks[v] for v in row] for row in dist]


def first_triangle_violation(points: Sequence[str], dist) -> Optional[Tuple[int, int, int]]:
    """Lexicographically first (i, j, k), i < j, with d(i,j) > d(i,k) v d(k,j)."""
    rank = _rank_matrix(dist)
    n = len(points)
    for i in range(n):
        ri = rank[i]
        for j in range(i + 1, n):
            dij = ri[j]
            if dij == 0:
                continue
            rj = rank[j]
            for k in range(n):
                if ri[k] < dij and rj[k] < dij:
                    return i, j, k
    return None


def validate(points: Sequence[str], dist, S: RangeSet) -> FiniteUltrametricSpace:
    """Checked constructor: shape, zero off-diagonal, range-set membership, strong triangle inequality."""
    points = tuple(points)
    matrix = tuple(tuple(_entry(v) for v in row) for row in dist)
    _check_shape(points, matrix)
    n = len(points)
    for i, j in itertools.combinations(range(n), 2):
        if matrix[i][j] == 0:
            raise ZeroOffDiagonal(points[i], points[j])
    membership: Dict[Fraction, bool] = {}
    for i, j in itertools.combinations(range(n), 2):
        v = matrix[i][j]
        if v not in membership:
            membership[v] = S.contains(v)
        if not membership[v]:
            raise NotInRangeSet(v, (points[i], points[j]))
    hit = first_triangle_violation(points, matrix)
    if hit is not None:
        i, j, k = hit
        raise TriangleViolation(points[i], points[j], points[k], matrix[i][j], matrix[i][k], matrix[k][j])
    return FiniteUltrametricSpace(points, matrix, S)


def revalidate(space: FiniteUltrametricSpace) -> FiniteUltrametricSpace:
    return validate(space.points, space.dist, space.range_set)


def build(points: Sequence[str], fn, S: RangeSet) -> FiniteUltrametricSpace:
    """Unchecked space from a distance function on index pairs (i < j)."""
    n = len(points)
    rows = [[ZERO] * n for _ in range(n)]
    for i, j in itertools.combinations(range(n), 2):
        rows[i][j] = rows[j][i] = fn(i, j)
    return FiniteUltrametricSpace(tuple(points), rows, S)


def equidistant(points: Sequence[str], value: Fraction, S: RangeSet) -> FiniteUltrametricSpace:
    return build(points, lambda i, j: value, S)


def singleton(label: str, S: RangeSet) -> FiniteUltrametricSpace:
    return FiniteUltrametricSpace((label,), ((ZERO,),), S)


def dlps_space(S: RangeSet) -> FiniteUltrametricSpace:
    """(S, x v y) on a finite range set: the canonical S-valued ultrametric on S itself."""
    if not isinstance(S, ExplicitFinite):
        raise ValueError("dlps_space needs an explicit finite range set")
    values = S.values
    return build([str(v) for v in values], lambda i, j: max(values[i], values[j]), S)


def diameter(X: FiniteUltrametricSpace) -> Fraction:
    return max((v for row in X.dist for v in row), default=ZERO)


def realized_values(X: FiniteUltrametricSpace) -> Tuple[Fraction, ...]:
    return tuple(sorted({X.dist[i][j] for i, j in X.pairs()}))


def distance(X: FiniteUltrametricSpace, a: str, b: str) -> Fraction:
    return X.d(a, b)


def truncate(X: FiniteUltrametricSpace, eps: Fraction) -> FiniteUltrametricSpace:
    """min(d, eps) for eps in S+."""
    if eps <= 0 or not X.range_set.contains(eps):
        raise NotInRangeSet(eps)
    return FiniteUltrametricSpace(X.points, [[min(v, eps) for v in row] for row in X.dist], X.range_set)


def sup_product(X: FiniteUltrametricSpace, Y: FiniteUltrametricSpace) -> FiniteUltrametricSpace:
    """Product with the max metric; points labelled "(x,y)"."""
    if X.range_set != Y.range_set:
        raise ValueError("sup_product needs both spaces over the same range set")
    coords = [(i, j) for i in range(len(X)) for j in range(len(Y))]
    labels = [f"({X.points[i]},{Y.points[j]})" for i, j in coords]
    return build(labels, lambda a, b: max(X.dist[coords[a][0]][coords[b][0]], Y.dist[coords[a][1]][coords[b][1]]),
                 X.range_set)


def restrict(X: FiniteUltrametricSpace, subset: Sequence[str]) -> FiniteUltrametricSpace:
    """Induced subspace, points in the order given."""
    subset = tuple(subset)
    if not subset:
        raise TooSmall("cannot restrict to an empty subset")
    if len(set(subset)) != len(subset):
        raise DuplicateLabel("subset lists a label twice", {"subset": list(subset)})
    idx = [X.index(p) for p in subset]
    return FiniteUltrametricSpace(subset, [[X.dist[i][j] for j in idx] for i in idx], X.range_set)


def relabel(X: FiniteUltrametricSpace, mapping: Dict[str, str]) -> FiniteUltrametricSpace:
    labels = tuple(mapping.get(p, p) for p in X.points)
    if len(set(labels)) != len(labels):
        raise DuplicateLabel("relabelling is not injective", {"labels": list(labels)})
    return FiniteUltrametricSpace(labels, X.dist, X.range_set)


@dataclass(frozen=True)
class UltrametricPair:
    """Two ultrametrics on the same labelled points; `e` is stored in the order of `d`."""
    d: FiniteUltrametricSpace
    e: FiniteUltrametricSpace

    @classmethod
    def of(cls, d: FiniteUltrametricSpace, e: FiniteUltrametricSpace) -> "UltrametricPair":
        if set(d.points) != set(e.points) or len(d) != len(e):
            raise UnknownPoint("pair members live on different point sets",
                               {"d": list(d.points), "e": list(e.points)})
        if d.range_set != e.range_set:
            raise ValueError("pair members use different range sets")
        return cls(d, restrict(e, d.points))

    def entries(self) -> Iterator[Tuple[str, str, Fraction, Fraction]]:
        for i, j in self.d.pairs():
            yield self.d.points[i], self.d.points[j], self.d.dist[i][j], self.e.dist[i][j]


def ud_distance(p: UltrametricPair) -> Fraction:
    """Max of d v e over the pairs where d and e disagree; 0 when d = e."""
    return max((max(a, b) for _, _, a, b in p.entries() if a != b), default=ZERO)


def ud_distance_scan(p: UltrametricPair):
    """Least eps in (realized values u {0, inf}) with d <= e v eps and e <= d v eps."""
    entries = list(p.entries())
    candidates = sorted({ZERO} | {v for _, _, a, b in entries for v in (a, b)})
    for eps in candidates + [INFINITY]:
        if all(a <= max(b, eps) and b <= max(a, eps) for _, _, a, b in entries):
            return eps
    return INFINITY


def d_distance(p: UltrametricPair) -> Fraction:
    return max((abs(a - b) for _, _, a, b in p.entries()), default=ZERO)


def u_s_distance(x: Fraction, y: Fraction) -> Fraction:
    return ZERO if x == y else max(x, y)


def pointwise_max(X: FiniteUltrametricSpace, Y: FiniteUltrametricSpace) -> FiniteUltrametricSpace:
    pair = UltrametricPair.of(X, Y)
    n = len(X)
    return FiniteUltrametricSpace(
        X.points, [[max(X.dist[i][j], pair.e.dist[i][j]) for j in range(n)] for i in range(n)], X.range_set)


def isosceles_witness(X: FiniteUltrametricSpace) -> Optional[Tuple[str, str, str]]:
    """First triple whose two largest sides differ, or None."""
    for i, j, k in itertools.combinations(range(len(X)), 3):
        sides = sorted((X.dist[i][j], X.dist[i][k], X.dist[j][k]))
        if sides[1] != sides[2]:
            return X.points[i], X.points[j], X.points[k]
    return None


def same_space(a: FiniteUltrametricSpace, b: FiniteUltrametricSpace) -> bool:
    """Equal up to point order."""
    if set(a.points) != set(b.points):
        return False
    return all(a.d(x, y) == b.d(x, y) for x, y in a.label_pairs())


def fresh_label(label: str, taken) -> str:
    candidate = label + "'"
    while candidate in taken:
        candidate += "'"
    return candidate
