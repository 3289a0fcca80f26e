# SERVICE/amalgam_service.py
# Amalgams of ultrametric spaces: disjoint unions with a separation constant, gluing over a
# shared subset, copies at a fixed distance, and the key amalgam used by interpolation.
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

from SERVICE.errors import (
    BoundViolation, DisjointnessViolation, DuplicateLabel, HypothesisViolation, NotInRangeSet,
    PostconditionFailure, UnknownPoint,
)
from SERVICE.space_service import (
    FiniteUltrametricSpace, UltrametricPair, build, fresh_label, restrict, singleton, ud_distance,
)

logger = logging.getLogger(__name__)

Family = Sequence[Tuple[Sequence[str], FiniteUltrametricSpace]]


@dataclass(frozen=True)
class AmalgamResult:
    space: FiniteUltrametricSpace
    embeddings: Dict[str, Dict[str, str]]
    copy_map: Dict[str, str] = field(default_factory=dict)


def _identity(space: FiniteUltrametricSpace) -> Dict[str, str]:
    return {p: p for p in space.points}


def _require_positive(S, value: Fraction) -> None:
    if value <= 0 or not S.contains(value):
        raise NotInRangeSet(value)


def _same_range(X: FiniteUltrametricSpace, Y: FiniteUltrametricSpace) -> None:
    if X.range_set != Y.range_set:
        raise ValueError("amalgams need both spaces over the same range set")


def amalgam_disjoint(X: FiniteUltrametricSpace, Y: FiniteUltrametricSpace, r: Fraction) -> AmalgamResult:
    """h(x, y) = r v dX(x, x0) v dY(y0, y) with x0, y0 the first points."""
    _same_range(X, Y)
    _require_positive(X.range_set, r)
    clash = sorted(set(X.points) & set(Y.points))
    if clash:
        raise DuplicateLabel("spaces share labels", {"labels": clash})
    n = len(X)

    def dist(i, j):
        if j < n:
            return X.dist[i][j]
        if i >= n:
            return Y.dist[i - n][j - n]
        return max(r, X.dist[i][0], Y.dist[0][j - n])

    space = build(X.points + Y.points, dist, X.range_set)
    return AmalgamResult(space, {"X": _identity(X), "Y": _identity(Y)})


def one_point_extend(X: FiniteUltrametricSpace, o: str, s: Fraction) -> AmalgamResult:
    """D(x, o) = s v d(x, x0)."""
    if o in X.points:
        raise DuplicateLabel(f"label {o!r} already used", {"label": o})
    return amalgam_disjoint(X, singleton(o, X.range_set), s)


def glue_over_intersection(X: FiniteUltrametricSpace, Y: FiniteUltrametricSpace, s: Fraction) -> AmalgamResult:
    """
    Amalgam of X and Y over Z = X n Y. Needs d_X = d_Y on Z and every x in X \\ Z at
    distance exactly s from Z; cross distance is min over z of dX(x,z) v dY(z,y).
    """
    _same_range(X, Y)
    _require_positive(X.range_set, s)
    shared = [p for p in X.points if p in set(Y.points)]
    if not shared:
        raise HypothesisViolation("nonempty", "the spaces share no points")
    for a_pos, a in enumerate(shared):
        for b in shared[a_pos + 1:]:
            if X.d(a, b) != Y.d(a, b):
                raise HypothesisViolation("agreement", f"spaces disagree on {a},{b}",
                                          {"pair": [a, b], "d_X": X.d(a, b), "d_Y": Y.d(a, b)})
    outside_x = [p for p in X.points if p not in set(shared)]
    for x in outside_x:
        gap = min(X.d(x, z) for z in shared)
        if gap != s:
            raise HypothesisViolation("equidistance", f"{x} is at distance {gap} from the shared part, not {s}",
                                      {"point": x, "distance": gap, "s": s})
    outside_y = [p for p in Y.points if p not in set(shared)]
    labels = X.points + tuple(outside_y)
    n = len(X)

    def dist(i, j):
        if j < n:
            return X.dist[i][j]
        y = labels[j]
        if i >= n:
            return Y.d(labels[i], y)
        x = labels[i]
        if x in shared:
            return Y.d(x, y)
        return min(max(X.d(x, z), Y.d(z, y)) for z in shared)

    space = build(labels, dist, X.range_set)
    return AmalgamResult(space, {"X": _identity(X), "Y": _identity(Y)})


def copy_amalgam(d: FiniteUltrametricSpace, e: FiniteUltrametricSpace, r: Fraction, taken=()) -> AmalgamResult:
    """
    X together with a relabelled copy carrying e, each point at distance r from its copy.
    Cross distance h(x, tau y) = min over a of d(x,a) v r v e(a, y). Needs UD(d, e) <= r.
    """
    pair = UltrametricPair.of(d, e)
    _require_positive(d.range_set, r)
    gap = ud_distance(pair)
    if gap > r:
        raise BoundViolation(f"UD(d, e) = {gap} exceeds r = {r}", {"ud": gap, "r": r})
    used = set(d.points) | set(taken)
    tau: Dict[str, str] = {}
    for p in d.points:
        tau[p] = fresh_label(p, used)
        used.add(tau[p])
    n = len(d)
    ee = pair.e

    def dist(i, j):
        if j < n:
            return d.dist[i][j]
        if i >= n:
            return ee.dist[i - n][j - n]
        return min(max(d.dist[i][a], r, ee.dist[a][j - n]) for a in range(n))

    space = build(d.points + tuple(tau[p] for p in d.points), dist, d.range_set)
    return AmalgamResult(space, {"X": _identity(d), "copy": dict(tau)}, tau)


def family_amalgam(spaces: Sequence[FiniteUltrametricSpace], s: Fraction) -> AmalgamResult:
    """Left fold of amalgam_disjoint at separation s."""
    if not spaces:
        raise ValueError("family_amalgam needs at least one space")
    current = spaces[0]
    for space in spaces[1:]:
        current = amalgam_disjoint(current, space, s).space
    return AmalgamResult(current, {str(i): _identity(sp) for i, sp in enumerate(spaces)})


def check_family(X: FiniteUltrametricSpace, family: Family) -> None:
    seen: Dict[str, int] = {}
    for i, (subset, e) in enumerate(family):
        for a in subset:
            X.index(a)
            if a in seen:
                raise DisjointnessViolation(f"point {a} lies in subsets {seen[a]} and {i}",
                                            {"point": a, "subsets": [seen[a], i]})
            seen[a] = i
        if set(subset) != set(e.points) or len(subset) != len(e):
            raise UnknownPoint(f"member {i} is not defined on its subset",
                               {"subset": list(subset), "points": list(e.points)})


def key_amalgam(X: FiniteUltrametricSpace, family: Family, eta: Fraction) -> AmalgamResult:
    """
    Space on X u (copies B_i of the A_i) with h|X = d, h|B_i = e_i, h(a, tau a) = eta.
    Each copy piece comes from copy_amalgam(d|A_i, e_i, eta) and is glued onto the
    running space along A_i at s = eta.
    """
    check_family(X, family)
    if not family:
        return AmalgamResult(X, {"X": _identity(X)})
    _require_positive(X.range_set, eta)
    current = X
    tau: Dict[str, str] = {}
    copies: List[str] = []
    for i, (subset, e) in enumerate(family):
        piece = copy_amalgam(restrict(X, subset), e, eta, taken=current.points)
        logger.debug("key amalgam: gluing copy of member %d (%d points)", i, len(subset))
        current = glue_over_intersection(piece.space, current, eta).space
        tau.update(piece.copy_map)
        copies.extend(piece.copy_map[a] for a in restrict(X, subset).points)
    result = restrict(current, X.points + tuple(copies))
    _check_key_amalgam(X, family, eta, result, tau)
    return AmalgamResult(result, {"X": _identity(X), "copy": dict(tau)}, tau)


def _check_key_amalgam(X, family: Family, eta, h: FiniteUltrametricSpace, tau: Dict[str, str]) -> None:
    for x, y in X.label_pairs():
        if h.d(x, y) != X.d(x, y):
            raise PostconditionFailure("key amalgam changed d", {"pair": [x, y]})
    union = [a for subset, _ in family for a in subset]
    for subset, e in family:
        for a, b in e.label_pairs():
            if h.d(tau[a], tau[b]) != e.d(a, b):
                raise PostconditionFailure("copy does not carry e", {"pair": [a, b]})
        for a in subset:
            if h.d(a, tau[a]) != eta:
                raise PostconditionFailure("copy distance differs from eta", {"point": a})
            if min(h.d(tau[a], z) for z in union) != eta:
                raise PostconditionFailure("copy is not eta-separated from the family", {"point": a})
