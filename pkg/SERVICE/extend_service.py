# SERVICE/extend_service.py
# Interpolation of a family of ultrametrics given on disjoint subsets, with the UD sandwich
# sup_i UD(e_i, d|A_i) <= UD(m, d) <= C * sup_i UD(e_i, d|A_i).
import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from config import RUN_CONFIG
from SERVICE.amalgam_service import Family, amalgam_disjoint, check_family, family_amalgam, key_amalgam
from SERVICE.embed_service import delta, embed_finite
from SERVICE.errors import PostconditionFailure, UltrametricError
from SERVICE.space_service import (
    FiniteUltrametricSpace, UltrametricPair, build, diameter, pointwise_max, restrict, revalidate, truncate,
    ud_distance,
)
from SERVICE.values_service import ZERO, ExplicitFinite

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class InterpolationProblem:
    ambient: FiniteUltrametricSpace
    family: Tuple[Tuple[Tuple[str, ...], FiniteUltrametricSpace], ...]

    @classmethod
    def of(cls, ambient: FiniteUltrametricSpace, family: Family) -> "InterpolationProblem":
        members = tuple((tuple(subset), e) for subset, e in family)
        check_family(ambient, members)
        for subset, e in members:
            if e.range_set != ambient.range_set:
                raise ValueError("family members must share the ambient range set")
        return cls(ambient, members)

    def local_gap(self) -> Fraction:
        """sup over members of UD(e_i, d|A_i)."""
        return max((ud_distance(UltrametricPair.of(restrict(self.ambient, subset), e))
                    for subset, e in self.family), default=ZERO)


@dataclass
class InterpolationResult:
    m: FiniteUltrametricSpace
    eta: Optional[Fraction]
    lower: Fraction
    upper: Fraction
    ratio: Optional[Fraction]
    achieved: Fraction = ZERO
    trace: List[str] = field(default_factory=list)
    verdicts: List[Tuple[str, bool, dict]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(ok for _, ok, _ in self.verdicts)


def _verdicts(problem: InterpolationProblem, m: FiniteUltrametricSpace, lower, upper, achieved, C):
    out = []
    try:
        revalidate(m)
        out.append(("valid", True, {}))
    except UltrametricError as err:
        out.append(("valid", False, {"error": err.name, **err.witness}))
    for i, (subset, e) in enumerate(problem.family):
        bad = next(([a, b] for a, b in e.label_pairs() if m.d(a, b) != e.d(a, b)), None)
        out.append((f"restriction_{i}", bad is None, {"pair": bad} if bad else {}))
    out.append(("lower_bound", lower <= achieved, {"lower": str(lower), "ud": str(achieved)}))
    out.append(("upper_bound", achieved <= upper and upper <= C * lower,
                {"ud": str(achieved), "eta": str(upper), "C": str(C)}))
    return out


def interpolate(problem: InterpolationProblem, crosscheck_limit: Optional[int] = None) -> InterpolationResult:
    """
    m(x, y) = h(tau x, tau y) v l(x, y) where h is the key amalgam at eta = round_up(sup),
    tau sends the family points to their copies, and l truncates at eta an ultrametric
    assembled from the e_i and the rest of d.
    """
    X = problem.ambient
    S = X.range_set
    C = S.quasi_completeness
    limit = RUN_CONFIG["embed_crosscheck_limit"] if crosscheck_limit is None else crosscheck_limit
    sup = problem.local_gap()
    if sup == 0:
        logger.debug("family already agrees with d; nothing to interpolate")
        result = InterpolationResult(X, None, ZERO, ZERO, None, ZERO, ["identity"])
        result.verdicts = _verdicts(problem, X, ZERO, ZERO, ZERO, C)
        return result

    eta = S.round_up(sup)
    trace = []
    h = key_amalgam(X, problem.family, eta)
    trace.append("key_amalgam")
    tau = {x: h.copy_map.get(x, x) for x in X.points}

    k = family_amalgam([e for _, e in problem.family], eta).space
    trace.append("family_amalgam")
    covered = {a for subset, _ in problem.family for a in subset}
    rest = [x for x in X.points if x not in covered]
    if rest:
        sep = S.round_up(max(eta, diameter(k), diameter(X)))
        r = amalgam_disjoint(k, restrict(X, rest), sep).space
        trace.append("amalgam_disjoint")
    else:
        r = k
    r = restrict(r, X.points)
    l = truncate(r, eta)
    trace.append("truncate")

    H = h.space
    selection = build(X.points, lambda i, j: H.d(tau[X.points[i]], tau[X.points[j]]), S)
    trace.append("selection")
    m = revalidate(pointwise_max(selection, l))
    achieved = ud_distance(UltrametricPair.of(X, m))
    result = InterpolationResult(m, eta, sup, eta, eta / sup, achieved, trace)
    result.verdicts = _verdicts(problem, m, sup, eta, achieved, C)

    if len(H) <= limit:
        cert = embed_finite(H)
        bad = next(([x, y] for x, y in X.label_pairs()
                    if delta(cert.images[tau[x]], cert.images[tau[y]], S) != H.d(tau[x], tau[y])), None)
        result.verdicts.append(("selection_matches_embedding", bad is None, {"pair": bad} if bad else {}))
        trace.append("embedding_crosscheck")

    failed = [name for name, ok, _ in result.verdicts if not ok]
    if failed:
        logger.warning("interpolation verdicts failed: %s", ", ".join(failed))
        raise PostconditionFailure("interpolation postconditions failed", {"failed": failed})
    return result


def extend_from_subset(X: FiniteUltrametricSpace, subset: Sequence[str], e: FiniteUltrametricSpace) -> FiniteUltrametricSpace:
    """Ultrametric on X that restricts to e on the subset (X itself when the subset is empty)."""
    if not subset:
        return X
    return interpolate(InterpolationProblem.of(X, [(tuple(subset), e)])).m


def minimal_extension_ud(problem: InterpolationProblem) -> Fraction:
    """
    Brute-force least UD(m', d) over every valid S-valued m' restricting to each e_i.
    Only for explicit finite range sets on a handful of points.
    """
    X = problem.ambient
    S = X.range_set
    if not isinstance(S, ExplicitFinite):
        raise ValueError("minimal_extension_ud enumerates explicit finite range sets only")
    fixed: Dict[Tuple[int, int], Fraction] = {}
    for subset, e in problem.family:
        for a, b in e.label_pairs():
            i, j = sorted((X.index(a), X.index(b)))
            fixed[(i, j)] = e.d(a, b)
    free = [p for p in X.pairs() if p not in fixed]
    positives = S.values[1:]
    best = None
    for choice in itertools.product(positives, repeat=len(free)):
        values = dict(fixed)
        values.update(zip(free, choice))
        candidate = build(X.points, lambda i, j: values[(i, j)], S)
        try:
            revalidate(candidate)
        except UltrametricError:
            continue
        gap = ud_distance(UltrametricPair.of(X, candidate))
        if best is None or gap < best:
            best = gap
    if best is None:
        raise PostconditionFailure("no valid extension exists", {})
    return best
