# SERVICE/telescope_service.py
# Countable ultrametric spaces given by rules: null sequences of radii, the sequence space
# on positive integers, and telescopes of finite blocks converging to a single point "inf".
import itertools
import logging
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Tuple

from SERVICE.errors import DiameterViolation, NotInRangeSet, TailNotFound, UnknownPoint
from SERVICE.space_service import FiniteUltrametricSpace, build, diameter
from SERVICE.values_service import ZERO, AllRationals, GeometricGrid, RangeSet, as_value

logger = logging.getLogger(__name__)

INF_LABEL = "inf"
SEARCH_LIMIT = 100_000


@dataclass(frozen=True)
class RadiusRule:
    """Strictly decreasing null sequence r(1) > r(2) > ... of positive values."""
    kind: str
    ratio: Optional[Fraction] = None
    range_set: Optional[RangeSet] = None

    def __post_init__(self):
        if self.kind == "geometric":
            ratio = as_value(self.ratio)
            if not 0 < ratio < 1:
                raise ValueError(f"geometric radii need 0 < ratio < 1, got {ratio}")
            object.__setattr__(self, "ratio", ratio)
        elif self.kind == "range_set":
            if self.range_set is None:
                raise ValueError("range_set radii need a range set")
            self.range_set.coinitial_sequence(1)
        elif self.kind != "harmonic":
            raise ValueError(f"unknown radius rule {self.kind!r}")

    @classmethod
    def geometric(cls, ratio) -> "RadiusRule":
        return cls("geometric", ratio=ratio)

    @classmethod
    def harmonic(cls) -> "RadiusRule":
        return cls("harmonic")

    @classmethod
    def from_range_set(cls, S: RangeSet) -> "RadiusRule":
        return cls("range_set", range_set=S)

    def radius(self, n: int) -> Fraction:
        if n < 1:
            raise ValueError("radii are indexed from 1")
        if self.kind == "geometric":
            return self.ratio ** n
        if self.kind == "harmonic":
            return Fraction(1, n)
        return self.range_set._coinitial_term(n)

    def natural_range_set(self) -> RangeSet:
        if self.kind == "geometric":
            return GeometricGrid(1 / self.ratio)
        if self.kind == "range_set":
            return self.range_set
        return AllRationals()


def offset_for(radii: RadiusRule, eps: Fraction) -> int:
    """Least N >= 0 with r(n) < eps for every n > N."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    for n in range(1, SEARCH_LIMIT):
        if radii.radius(n) < eps:
            return n - 1
    raise TailNotFound(f"radii stay above {eps} for {SEARCH_LIMIT} terms", {"eps": eps})


# ---------------- the sequence space ----------------
@dataclass(frozen=True)
class SequenceSpace:
    """Points 1, 2, 3, ... with d(n, m) = r(min(n, m)) for n != m."""
    radii: RadiusRule
    range_set: RangeSet = None

    def __post_init__(self):
        if self.range_set is None:
            object.__setattr__(self, "range_set", self.radii.natural_range_set())


def seq_distance(sp: SequenceSpace, n: int, m: int) -> Fraction:
    if n < 1 or m < 1:
        raise UnknownPoint("sequence points are positive integers", {"n": n, "m": m})
    if n == m:
        return ZERO
    value = sp.radii.radius(min(n, m))
    if not sp.range_set.contains(value):
        raise NotInRangeSet(value, (str(n), str(m)))
    return value


def seq_window(sp: SequenceSpace, lo: int, hi: int) -> FiniteUltrametricSpace:
    indices = list(range(lo, hi + 1))
    return build([str(n) for n in indices], lambda i, j: seq_distance(sp, indices[i], indices[j]), sp.range_set)


@dataclass
class CauchyReport:
    tol: Fraction
    index: int
    tail_diameter: Fraction
    infima: List[Tuple[int, Fraction]] = field(default_factory=list)
    cauchy: bool = False
    no_limit: bool = False


def cauchy_no_limit_witness(sp: SequenceSpace, tol: Fraction) -> CauchyReport:
    """
    Least N with every distance among points >= N below tol, plus the positive infimum
    inf_n d(k, n) = r(k) for each k <= N. The sequence is Cauchy and has no limit point.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    N = offset_for(sp.radii, tol) + 1
    tail = sp.radii.radius(N)
    report = CauchyReport(tol, N, tail)
    report.cauchy = tail < tol and seq_distance(sp, N, N + 1) == tail
    for k in range(1, N + 1):
        # for n > k the distance is r(k); for n < k it is larger
        inf_k = min(seq_distance(sp, k, n) for n in range(1, N + 2) if n != k)
        report.infima.append((k, inf_k))
    report.no_limit = all(v > 0 and v == sp.radii.radius(k) for k, v in report.infima)
    return report


# ---------------- telescopes ----------------
@dataclass(frozen=True)
class BlockRule:
    """
    Finite block i of a telescope. "equidistant-growing": block i has start_size + i - 1
    points pairwise at the block radius; "constant": `size` points at the block radius;
    "cycle": the user spaces in turn.
    """
    kind: str
    start_size: int = 2
    size: int = 2
    spaces: Tuple[FiniteUltrametricSpace, ...] = ()

    def __post_init__(self):
        if self.kind not in ("equidistant-growing", "constant", "cycle"):
            raise ValueError(f"unknown block rule {self.kind!r}")
        if self.kind == "cycle" and not self.spaces:
            raise ValueError("a cycle block rule needs at least one space")
        object.__setattr__(self, "spaces", tuple(self.spaces))

    def block_size(self, i: int) -> int:
        if self.kind == "equidistant-growing":
            return self.start_size + i - 1
        if self.kind == "constant":
            return self.size
        return len(self.spaces[(i - 1) % len(self.spaces)])

    def local_labels(self, i: int) -> Tuple[str, ...]:
        if self.kind == "cycle":
            return self.spaces[(i - 1) % len(self.spaces)].points
        return tuple(str(j) for j in range(self.block_size(i)))

    def local_distance(self, i: int, a: int, b: int, radius: Fraction) -> Fraction:
        if a == b:
            return ZERO
        if self.kind == "cycle":
            return self.spaces[(i - 1) % len(self.spaces)].dist[a][b]
        return radius

    def block_diameter(self, i: int, radius: Fraction) -> Fraction:
        if self.kind == "cycle":
            return diameter(self.spaces[(i - 1) % len(self.spaces)])
        return radius if self.block_size(i) > 1 else ZERO

    def is_equidistant(self, i: int) -> bool:
        return self.kind != "cycle"


class TelescopeSpace:
    """
    Blocks R_1, R_2, ... plus the point "inf". Inside block i the block metric (diameter at
    most r(N+i)); across blocks i, j the value r(N+i) v r(N+j); to "inf" r(N+i).
    Point labels are "i.j" with j the local label in block i.
    """

    def __init__(self, blocks: BlockRule, radii: RadiusRule, offset: int = 0, range_set: Optional[RangeSet] = None):
        if offset < 0:
            raise ValueError("offset must be nonnegative")
        self.blocks = blocks
        self.radii = radii
        self.offset = offset
        self.range_set = range_set or radii.natural_range_set()
        self._lock = threading.RLock()
        self._checked: Dict[int, Tuple[str, ...]] = {}
        self._local: Dict[int, Dict[str, int]] = {}

    def radius(self, i: int) -> Fraction:
        return self.radii.radius(self.offset + i)

    def block_labels(self, i: int) -> Tuple[str, ...]:
        with self._lock:
            if i not in self._checked:
                self._check_block(i)
                local = self.blocks.local_labels(i)
                self._local[i] = {lab: j for j, lab in enumerate(local)}
                self._checked[i] = tuple(f"{i}.{lab}" for lab in local)
            return self._checked[i]

    def _check_block(self, i: int) -> None:
        radius = self.radius(i)
        if i > 1 and radius >= self.radius(i - 1):
            raise ValueError(f"radii are not strictly decreasing at block {i}")
        if not self.range_set.contains(radius):
            raise NotInRangeSet(radius, (f"block {i}", INF_LABEL))
        diam = self.blocks.block_diameter(i, radius)
        if diam > radius:
            raise DiameterViolation(i, diam, radius)
        if self.blocks.kind == "cycle":
            sp = self.blocks.spaces[(i - 1) % len(self.blocks.spaces)]
            bad = next((v for row in sp.dist for v in row if not self.range_set.contains(v)), None)
            if bad is not None:
                raise NotInRangeSet(bad, (f"block {i}", f"block {i}"))

    def parse(self, label: str) -> Tuple[Optional[int], Optional[int]]:
        if label == INF_LABEL:
            return None, None
        head, sep, local = label.partition(".")
        if not sep or not head.isdigit() or int(head) < 1:
            raise UnknownPoint(f"not a telescope label: {label!r}", {"label": label})
        i = int(head)
        self.block_labels(i)
        try:
            return i, self._local[i][local]
        except KeyError:
            raise UnknownPoint(f"block {i} has no point {local!r}", {"label": label}) from None

    def distance(self, a: str, b: str) -> Fraction:
        if a == b:
            self.parse(a)
            return ZERO
        (i, ja), (k, jb) = self.parse(a), self.parse(b)
        if i is None:
            return self.radius(k)
        if k is None:
            return self.radius(i)
        if i == k:
            return self.blocks.local_distance(i, ja, jb, self.radius(i))
        return max(self.radius(i), self.radius(k))

    def diameter(self) -> Fraction:
        return self.radius(1)

    def prefix_labels(self, k: int) -> Tuple[str, ...]:
        return tuple(itertools.chain.from_iterable(self.block_labels(i) for i in range(1, k + 1))) + (INF_LABEL,)

    def equidistant_groups(self, limit: int) -> Iterator[Tuple[Tuple[str, ...], Fraction]]:
        for i in range(1, limit + 1):
            if self.blocks.is_equidistant(i):
                yield self.block_labels(i), self.radius(i)


def telescope_build(blocks: BlockRule, radii: RadiusRule, offset: int = 0,
                    range_set: Optional[RangeSet] = None, eager_blocks: int = 1) -> TelescopeSpace:
    """Build the rule and check its first `eager_blocks` blocks; later blocks are checked on first use."""
    t = TelescopeSpace(blocks, radii, offset, range_set)
    for i in range(1, eager_blocks + 1):
        t.block_labels(i)
    logger.debug("telescope built: %s blocks, offset %d", blocks.kind, offset)
    return t


def finite_prefix(t, k: int) -> FiniteUltrametricSpace:
    """Blocks 1..k plus "inf" as a finite space (works for any telescope-like rule)."""
    if k < 1:
        raise ValueError("prefix length must be at least 1")
    labels = t.prefix_labels(k)
    return build(labels, lambda i, j: t.distance(labels[i], labels[j]), t.range_set)


def distance(t, a: str, b: str) -> Fraction:
    return t.distance(a, b)
