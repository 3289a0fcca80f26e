# SERVICE/generic_service.py
# Doubling checks, anti-doubling witnesses, approximation by a denser range set and the
# perturbation of a telescope into an anti-doubling one within UD distance eps.
import bisect
import itertools
import logging
import math
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from config import RUN_CONFIG
from SERVICE.errors import (
    ApproximationImpossible, NoWitnessFound, PostconditionFailure, TailNotFound, TooSmall, UltrametricError,
)
from SERVICE.space_service import (
    FiniteUltrametricSpace, UltrametricPair, realized_values, revalidate, ud_distance,
)
from SERVICE.telescope_service import SEARCH_LIMIT, TelescopeSpace, finite_prefix
from SERVICE.values_service import ZERO, RangeSet, as_value

logger = logging.getLogger(__name__)


class FinitePredicate(ABC):
    """Property decided on finite point configurations of a space exposing `distance(a, b)`."""

    @abstractmethod
    def __call__(self, points: Sequence[str], space) -> bool:
        ...


@dataclass(frozen=True)
class DoublingCheck(FinitePredicate):
    """card(A) <= C * (delta(A) / alpha(A)) ** alpha for every finite A with two or more points."""
    C: Fraction
    alpha: Fraction

    def __post_init__(self):
        object.__setattr__(self, "C", as_value(self.C))
        object.__setattr__(self, "alpha", as_value(self.alpha))
        if self.C <= 0 or self.alpha <= 0:
            raise ValueError("doubling parameters must be positive")

    def violated(self, card: int, alpha_d: Fraction, delta_d: Fraction) -> bool:
        # raise both sides to the denominator of alpha to stay in exact arithmetic
        p, q = self.alpha.numerator, self.alpha.denominator
        return Fraction(card) ** q > self.C ** q * (delta_d / alpha_d) ** p

    def __call__(self, points: Sequence[str], space) -> bool:
        a, d = alpha_delta(space, points)
        return not self.violated(len(points), a, d)

    def label(self) -> str:
        return f"C={self.C},alpha={self.alpha}"


@dataclass(frozen=True)
class TransmissibleVerdict:
    parameter: DoublingCheck
    witness: Optional[Tuple[str, ...]]
    holds: bool
    exhaustive: bool
    values: Dict[str, Fraction] = field(default_factory=dict)


def alpha_delta(X, subset: Sequence[str]) -> Tuple[Fraction, Fraction]:
    """(least positive, largest) pairwise distance over the subset."""
    if len(subset) < 2:
        raise TooSmall("alpha and delta need at least two points", {"subset": list(subset)})
    values = [X.distance(a, b) for a, b in itertools.combinations(subset, 2)]
    return min(v for v in values if v > 0), max(values)


def _violation(X: FiniteUltrametricSpace, q: DoublingCheck, idx: Tuple[int, ...]):
    values = [X.dist[i][j] for i, j in itertools.combinations(idx, 2)]
    a, d = min(values), max(values)
    return (a, d) if q.violated(len(idx), a, d) else None


def _level_sets(X: FiniteUltrametricSpace) -> List[Tuple[int, ...]]:
    """Closed balls and maximal equidistant sets inside them, one per centre and radius."""
    out = set()
    n = len(X)
    for c in range(n):
        for r in sorted(set(X.dist[c]) - {0}):
            ball = [y for y in range(n) if X.dist[c][y] <= r]
            if len(ball) >= 2:
                out.add(tuple(ball))
            reps: List[int] = []
            for y in ball:
                if all(X.dist[y][z] == r for z in reps):
                    reps.append(y)
            if len(reps) >= 2:
                out.add(tuple(reps))
    return sorted(out, key=lambda t: (len(t), t))


def doubling_check(X: FiniteUltrametricSpace, q: DoublingCheck, exhaustive: Optional[bool] = None,
                   limit: Optional[int] = None) -> TransmissibleVerdict:
    """
    Search subsets for card(A) > C (delta/alpha)^alpha. Exhaustive (smallest, then
    lexicographically first witness) up to `limit` points, level-set heuristic above.
    """
    limit = RUN_CONFIG["exhaustive_limit"] if limit is None else limit
    n = len(X)
    full = (n <= limit) if exhaustive is None else exhaustive
    if full:
        candidates = (c for size in range(2, n + 1) for c in itertools.combinations(range(n), size))
    else:
        logger.debug("doubling check on %d points uses the level-set search", n)
        candidates = iter(_level_sets(X))
    for idx in candidates:
        hit = _violation(X, q, idx)
        if hit is not None:
            witness = tuple(X.points[i] for i in idx)
            return TransmissibleVerdict(q, witness, False, full,
                                        {"card": Fraction(len(idx)), "alpha": hit[0], "delta": hit[1]})
    return TransmissibleVerdict(q, None, True, full)


def verify_witness(space, labels: Sequence[str], q: DoublingCheck) -> bool:
    """Recompute alpha and delta by distance queries and confirm the bound fails."""
    return not q(labels, space)


def anti_doubling_witness(target, grid: Sequence[DoublingCheck],
                          block_limit: Optional[int] = None) -> Dict[DoublingCheck, Tuple[str, ...]]:
    """
    For every parameter a finite subset violating its bound. Finite spaces are searched
    with doubling_check; telescopes use the first equidistant block with card > C + 1.
    """
    block_limit = RUN_CONFIG["witness_block_limit"] if block_limit is None else block_limit
    out: Dict[DoublingCheck, Tuple[str, ...]] = {}
    for q in grid:
        if isinstance(target, FiniteUltrametricSpace):
            verdict = doubling_check(target, q)
            if verdict.holds:
                raise NoWitnessFound(f"no subset violates {q.label()}", {"C": q.C, "alpha": q.alpha})
            labels = verdict.witness
        else:
            labels = next((g for g, _ in target.equidistant_groups(block_limit) if len(g) > q.C + 1), None)
            if labels is None:
                raise NoWitnessFound(f"no block within {block_limit} violates {q.label()}",
                                     {"C": q.C, "alpha": q.alpha, "blocks": block_limit})
        if not verify_witness(target, labels, q):
            raise PostconditionFailure("witness does not re-verify", {"C": q.C, "alpha": q.alpha})
        out[q] = tuple(labels)
    return out


def t_approx(X: FiniteUltrametricSpace, T: RangeSet, eps: Fraction) -> FiniteUltrametricSpace:
    """
    T-valued e with |d - e| < eps and the same value order: realized values a_1 < ... < a_m
    go to q_1 < ... < q_m in T. A backward pass caps each q_i by the largest admissible choice
    that leaves room for the values above it; the forward pass then takes the element nearest
    a_i under that cap, ties going down.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    values = [v for v in realized_values(X) if v > 0]
    if all(T.contains(v) for v in values):
        return FiniteUltrametricSpace(X.points, X.dist, T)

    caps: List[Optional[Fraction]] = [None] * len(values)
    cap: Optional[Fraction] = None
    for i in reversed(range(len(values))):
        a = values[i]
        top = T.next_below(a + eps)
        if cap is not None:
            below = T.next_below(cap)
            top = None if top is None or below is None else min(top, below)
        if top is None or top <= 0 or top <= a - eps:
            raise ApproximationImpossible(f"no order-preserving choice in the target within {eps} of {a}",
                                          {"value": a, "eps": eps})
        caps[i] = cap = top

    chosen: Dict[Fraction, Fraction] = {ZERO: ZERO}
    prev = ZERO
    for a, top in zip(values, caps):
        lo = max(prev, a - eps)
        options = [top, T.floor_in(a), T.ceil_in(a), T.next_above(lo)]
        options = [c for c in options if c is not None and lo < c <= top]
        prev = chosen[a] = min(options, key=lambda c: (abs(c - a), c))
    n = len(X)
    e = FiniteUltrametricSpace(X.points, [[chosen[X.dist[i][j]] for j in range(n)] for i in range(n)], T)
    return revalidate(e)


# ---------------- perturbation of telescopes ----------------
class PatchedTelescope:
    """
    The telescope t with its tail L (blocks >= start plus "inf") re-metrised: tail points,
    in order, form groups of 2, 3, 4, ... points; group g is equidistant at r(N + start + g - 1).
    Distances touching the complement of L are those of t.
    """

    def __init__(self, base: TelescopeSpace, start: int):
        self.base = base
        self.start = start
        self.range_set = base.range_set
        self._lock = threading.RLock()
        self._cum: List[int] = [0]

    def _cum_upto(self, k: int) -> int:
        """Number of tail points in blocks start .. start + k - 1."""
        with self._lock:
            while len(self._cum) <= k:
                i = self.start + len(self._cum) - 1
                self._cum.append(self._cum[-1] + len(self.base.block_labels(i)))
            return self._cum[k]

    @staticmethod
    def _group_start(g: int) -> int:
        return (g - 1) * (g + 2) // 2

    def _group(self, pos: int) -> int:
        g = max(1, math.isqrt(2 * pos))
        while g > 1 and self._group_start(g) > pos:
            g -= 1
        while self._group_start(g + 1) <= pos:
            g += 1
        return g

    def group_radius(self, g: int) -> Fraction:
        return self.base.radius(self.start + g - 1)

    def _position(self, label: str) -> Optional[int]:
        i, j = self.base.parse(label)
        if i is None or i < self.start:
            return None
        return self._cum_upto(i - self.start) + j

    def _label_at(self, pos: int) -> str:
        with self._lock:
            while self._cum[-1] <= pos:
                self._cum_upto(len(self._cum))
            k = bisect.bisect_right(self._cum, pos)
            return self.base.block_labels(self.start + k - 1)[pos - self._cum[k - 1]]

    def distance(self, a: str, b: str) -> Fraction:
        if a == b:
            return self.base.distance(a, b)
        in_a = a == "inf" or self._position(a) is not None
        in_b = b == "inf" or self._position(b) is not None
        if not (in_a and in_b):
            return self.base.distance(a, b)
        if a == "inf":
            return self.group_radius(self._group(self._position(b)))
        if b == "inf":
            return self.group_radius(self._group(self._position(a)))
        return max(self.group_radius(self._group(self._position(a))),
                   self.group_radius(self._group(self._position(b))))

    def prefix_labels(self, k: int) -> Tuple[str, ...]:
        return self.base.prefix_labels(k)

    def equidistant_groups(self, limit: int) -> Iterator[Tuple[Tuple[str, ...], Fraction]]:
        for g in range(1, limit + 1):
            first = self._group_start(g)
            yield tuple(self._label_at(p) for p in range(first, first + g + 1)), self.group_radius(g)


@dataclass
class PerturbationResult:
    patched: PatchedTelescope
    eps: Fraction
    start_block: int
    prefixes: List[Tuple[int, Fraction, bool]] = field(default_factory=list)
    witnesses: Dict[DoublingCheck, Tuple[str, ...]] = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return all(ok and ud <= self.eps for _, ud, ok in self.prefixes) and bool(self.witnesses)


def genericity_perturb(t: TelescopeSpace, eps: Fraction, grid: Sequence[DoublingCheck],
                       prefixes: Optional[int] = None) -> PerturbationResult:
    """Anti-doubling telescope m with UD(d, m) <= eps on every checked prefix."""
    prefixes = RUN_CONFIG["perturb_prefixes"] if prefixes is None else prefixes
    if eps <= 0 or not t.range_set.contains(eps):
        raise ValueError(f"eps {eps} must be a positive element of the range set")
    start = next((i for i in range(1, SEARCH_LIMIT) if t.radius(i) <= eps), None)
    if start is None:
        raise TailNotFound(f"radii never drop to {eps}", {"eps": eps})
    patched = PatchedTelescope(t, start)
    result = PerturbationResult(patched, eps, start)
    for k in range(1, max(prefixes, start + 1) + 1):
        m_k = finite_prefix(patched, k)
        try:
            revalidate(m_k)
            ok = True
        except UltrametricError:
            logger.exception("patched prefix %d is not a valid ultrametric", k)
            ok = False
        ud = ud_distance(UltrametricPair.of(finite_prefix(t, k), m_k))
        result.prefixes.append((k, ud, ok))
    result.witnesses = anti_doubling_witness(patched, grid)
    logger.debug("perturbation at eps=%s starts at block %d", eps, start)
    return result


def density_experiment(t: TelescopeSpace, eps_list: Sequence[Fraction],
                       grid: Sequence[DoublingCheck]) -> List[PerturbationResult]:
    return [genericity_perturb(t, eps, grid) for eps in eps_list]
