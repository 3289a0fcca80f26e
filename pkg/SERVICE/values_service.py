# SERVICE/values_service.py
# Exact distance values, range sets S and the step functions psi applied to ultrametrics.
"""
Every distance in the toolkit is a ``fractions.Fraction``. A range set is an
immutable object answering membership, nearest-element and interval-sup
queries exactly; rounding up into S (``round_up``) is what the interpolation
pipeline uses to pick its separation constant.
"""
import bisect
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

from SERVICE.errors import NoCoinitiality, OutOfRange, TooSmall

logger = logging.getLogger(__name__)

Value = Fraction
ZERO = Fraction(0)
ONE = Fraction(1)


def as_value(raw: Union[str, int, Fraction]) -> Fraction:
    """Parse "p/q", an integer string, an int or a Fraction. Floats are refused."""
    if isinstance(raw, bool) or isinstance(raw, float):
        raise ValueError(f"refusing inexact value {raw!r}")
    if isinstance(raw, Fraction):
        value = raw
    elif isinstance(raw, int):
        value = Fraction(raw)
    elif isinstance(raw, str):
        text = raw.strip()
        if not text or "." in text or "e" in text.lower():
            raise ValueError(f"value {raw!r} must be an integer or p/q string")
        value = Fraction(text)
    else:
        raise ValueError(f"cannot read a value from {raw!r}")
    if value < 0:
        raise ValueError(f"distance values are nonnegative, got {value}")
    return value


def join(*values: Fraction) -> Fraction:
    return max(values) if values else ZERO


def _log_ratio(x: Fraction, base: Fraction) -> float:
    # float estimate only; callers correct it exactly
    return (math.log(x.numerator) - math.log(x.denominator)) / (math.log(base.numerator) - math.log(base.denominator))


class RangeSet(ABC):
    """A set S of admissible distances, 0 in S."""

    kind = "abstract"

    @property
    @abstractmethod
    def quasi_completeness(self) -> Fraction:
        ...

    @abstractmethod
    def contains(self, x: Fraction) -> bool:
        ...

    @abstractmethod
    def floor_in(self, x: Fraction) -> Fraction:
        """Largest element of S that is <= x (0 at worst)."""

    @abstractmethod
    def ceil_in(self, x: Fraction) -> Optional[Fraction]:
        """Smallest element of S that is >= x, None when S has nothing that large."""

    @abstractmethod
    def next_above(self, x: Fraction) -> Optional[Fraction]:
        """Smallest element strictly above x; None when there is none or S is dense there."""

    @abstractmethod
    def next_below(self, x: Fraction) -> Optional[Fraction]:
        """Largest element strictly below x; None when there is none or S is dense there."""

    @abstractmethod
    def has_coinitiality(self) -> bool:
        ...

    @abstractmethod
    def _coinitial_term(self, i: int) -> Fraction:
        ...

    def has_positive(self) -> bool:
        return self.has_coinitiality() or self.next_above(ZERO) is not None

    def max_element(self) -> Optional[Fraction]:
        return None

    def interval_sup(self, a: Fraction, b: Fraction) -> Optional[Fraction]:
        if b <= a:
            return None
        s = self.floor_in(b)
        return s if s > a else None

    def round_up(self, x: Fraction) -> Fraction:
        if x <= 0:
            raise ValueError(f"round_up needs a positive value, got {x}")
        s = self.ceil_in(x)
        if s is None:
            raise OutOfRange(f"{x} exceeds every element of the range set",
                             {"value": x, "max": self.max_element()})
        return s

    def coinitial_sequence(self, n: int) -> List[Fraction]:
        if not self.has_coinitiality():
            raise NoCoinitiality("range set has a positive lower bound on its positive part",
                                 {"range_set": self.kind})
        return [self._coinitial_term(i) for i in range(1, n + 1)]

    def default_positive(self) -> Fraction:
        """Smallest positive element when one exists, else the first coinitial term."""
        if self.has_coinitiality():
            return self._coinitial_term(1)
        s = self.next_above(ZERO)
        if s is None:
            raise TooSmall("range set has no positive element", {"range_set": self.kind})
        return s


@dataclass(frozen=True)
class ExplicitFinite(RangeSet):
    values: Tuple[Fraction, ...]
    kind = "finite"

    def __post_init__(self):
        normalized = sorted({as_value(v) for v in self.values} | {ZERO})
        object.__setattr__(self, "values", tuple(normalized))

    @property
    def quasi_completeness(self) -> Fraction:
        return ONE

    def contains(self, x: Fraction) -> bool:
        i = bisect.bisect_left(self.values, x)
        return i < len(self.values) and self.values[i] == x

    def floor_in(self, x: Fraction) -> Fraction:
        i = bisect.bisect_right(self.values, x)
        return self.values[i - 1]

    def ceil_in(self, x: Fraction) -> Optional[Fraction]:
        i = bisect.bisect_left(self.values, x)
        return self.values[i] if i < len(self.values) else None

    def next_above(self, x: Fraction) -> Optional[Fraction]:
        i = bisect.bisect_right(self.values, x)
        return self.values[i] if i < len(self.values) else None

    def next_below(self, x: Fraction) -> Optional[Fraction]:
        i = bisect.bisect_left(self.values, x)
        return self.values[i - 1] if i > 0 else None

    def has_positive(self) -> bool:
        return len(self.values) > 1

    def max_element(self) -> Optional[Fraction]:
        return self.values[-1]

    def has_coinitiality(self) -> bool:
        return False

    def _coinitial_term(self, i: int) -> Fraction:
        raise NoCoinitiality("finite range sets have no coinitial sequence")


@dataclass(frozen=True)
class GeometricGrid(RangeSet):
    """{0} u {ratio**k : kmin <= k <= kmax}; None for kmin / kmax means unbounded."""
    ratio: Fraction
    kmin: Optional[int] = None
    kmax: Optional[int] = None
    kind = "grid"

    def __post_init__(self):
        object.__setattr__(self, "ratio", as_value(self.ratio))
        if self.ratio <= 1:
            raise ValueError(f"grid ratio must exceed 1, got {self.ratio}")
        if self.kmin is not None and self.kmax is not None and self.kmin > self.kmax:
            raise ValueError(f"empty exponent range [{self.kmin}, {self.kmax}]")

    @property
    def quasi_completeness(self) -> Fraction:
        return self.ratio

    def power(self, k: int) -> Fraction:
        return self.ratio ** k

    def _in_bounds(self, k: int) -> bool:
        return (self.kmin is None or k >= self.kmin) and (self.kmax is None or k <= self.kmax)

    def _floor_exponent(self, x: Fraction) -> int:
        k = math.floor(_log_ratio(x, self.ratio))
        while self.power(k + 1) <= x:
            k += 1
        while self.power(k) > x:
            k -= 1
        return k

    def contains(self, x: Fraction) -> bool:
        if x == 0:
            return True
        if x < 0:
            return False
        k = self._floor_exponent(x)
        return self.power(k) == x and self._in_bounds(k)

    def floor_in(self, x: Fraction) -> Fraction:
        if x <= 0:
            return ZERO
        k = self._floor_exponent(x)
        if self.kmax is not None and k > self.kmax:
            k = self.kmax
        if self.kmin is not None and k < self.kmin:
            return ZERO
        return self.power(k)

    def ceil_in(self, x: Fraction) -> Optional[Fraction]:
        if x <= 0:
            return ZERO
        k = self._floor_exponent(x)
        if self.power(k) < x:
            k += 1
        if self.kmin is not None and k < self.kmin:
            k = self.kmin
        if self.kmax is not None and k > self.kmax:
            return None
        return self.power(k)

    def next_above(self, x: Fraction) -> Optional[Fraction]:
        if x < 0:
            return ZERO
        if x == 0:
            return None if self.kmin is None else self.power(self.kmin)
        s = self.ceil_in(x)
        if s is not None and s == x:
            s = self.ceil_in(x * self.ratio)
        return s

    def next_below(self, x: Fraction) -> Optional[Fraction]:
        if x <= 0:
            return None
        s = self.floor_in(x)
        if s == x:
            s = self.floor_in(x / self.ratio)
        return s

    def round_up(self, x: Fraction) -> Fraction:
        if self.kmin is not None and 0 < x < self.power(self.kmin - 1):
            raise OutOfRange(f"{x} lies more than a factor {self.ratio} below the bottom of the grid",
                             {"value": x, "min": self.power(self.kmin)})
        return super().round_up(x)

    def has_positive(self) -> bool:
        return True

    def max_element(self) -> Optional[Fraction]:
        return None if self.kmax is None else self.power(self.kmax)

    def has_coinitiality(self) -> bool:
        return self.kmin is None

    def _coinitial_term(self, i: int) -> Fraction:
        top = -1 if self.kmax is None else min(self.kmax, -1)
        return self.power(top - (i - 1))


@dataclass(frozen=True)
class AllRationals(RangeSet):
    kind = "all"

    @property
    def quasi_completeness(self) -> Fraction:
        return ONE

    def contains(self, x: Fraction) -> bool:
        return x >= 0

    def floor_in(self, x: Fraction) -> Fraction:
        return max(x, ZERO)

    def ceil_in(self, x: Fraction) -> Optional[Fraction]:
        return max(x, ZERO)

    def next_above(self, x: Fraction) -> Optional[Fraction]:
        return None

    def next_below(self, x: Fraction) -> Optional[Fraction]:
        return None

    def has_positive(self) -> bool:
        return True

    def has_coinitiality(self) -> bool:
        return True

    def _coinitial_term(self, i: int) -> Fraction:
        return Fraction(1, i)


@dataclass(frozen=True)
class Lattice(RangeSet):
    """All nonnegative multiples of a fixed step, e.g. the dyadic grid with step 1/64."""
    step: Fraction
    kind = "lattice"

    def __post_init__(self):
        object.__setattr__(self, "step", as_value(self.step))
        if self.step <= 0:
            raise ValueError("lattice step must be positive")

    @property
    def quasi_completeness(self) -> Fraction:
        return ONE

    def contains(self, x: Fraction) -> bool:
        return x >= 0 and (x / self.step).denominator == 1

    def floor_in(self, x: Fraction) -> Fraction:
        if x <= 0:
            return ZERO
        return math.floor(x / self.step) * self.step

    def ceil_in(self, x: Fraction) -> Optional[Fraction]:
        if x <= 0:
            return ZERO
        return math.ceil(x / self.step) * self.step

    def next_above(self, x: Fraction) -> Optional[Fraction]:
        if x < 0:
            return ZERO
        return (math.floor(x / self.step) + 1) * self.step

    def next_below(self, x: Fraction) -> Optional[Fraction]:
        if x <= 0:
            return None
        return (math.ceil(x / self.step) - 1) * self.step

    def has_positive(self) -> bool:
        return True

    def has_coinitiality(self) -> bool:
        return False

    def _coinitial_term(self, i: int) -> Fraction:
        raise NoCoinitiality("a lattice has a smallest positive element")


# ---------------- module-level helpers ----------------
def contains(S: RangeSet, x: Fraction) -> bool:
    return S.contains(x)


def round_up(S: RangeSet, x: Fraction) -> Fraction:
    return S.round_up(x)


def round_up_ratio(S: RangeSet, x: Fraction) -> Fraction:
    return S.round_up(x) / x


def coinitial_sequence(S: RangeSet, n: int) -> List[Fraction]:
    return S.coinitial_sequence(n)


def interval_sup(S: RangeSet, a: Fraction, b: Fraction) -> Optional[Fraction]:
    return S.interval_sup(a, b)


# ---------------- step functions psi ----------------
@dataclass(frozen=True)
class Piece:
    """psi(x) = slope * x + intercept on (previous upper bound, upto]; upto None means unbounded."""
    upto: Optional[Fraction]
    slope: Fraction = ZERO
    intercept: Fraction = ZERO

    def at(self, x: Fraction) -> Fraction:
        return self.slope * x + self.intercept


@dataclass(frozen=True)
class StepFunction:
    """
    Piecewise-affine map on [0, B] with right-closed pieces and psi(0) = 0.
    When `tail` is given, psi(x) = round_up(tail, x) on (0, start]; this is how the
    grid-rounding function keeps infinitely many steps near 0 with a finite description.
    """
    pieces: Tuple[Piece, ...]
    start: Fraction = ZERO
    tail: Optional[RangeSet] = None

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple(self.pieces))
        object.__setattr__(self, "start", Fraction(self.start))
        if self.tail is None and self.start != 0:
            raise ValueError("a step function without a tail must start at 0")
        lo = self.start
        for idx, piece in enumerate(self.pieces):
            if piece.upto is None:
                if idx != len(self.pieces) - 1:
                    raise ValueError("only the last piece may be unbounded")
                continue
            if piece.upto <= lo:
                raise ValueError(f"piece bounds must increase, got {piece.upto} after {lo}")
            lo = piece.upto

    @classmethod
    def steps(cls, steps: Sequence[Tuple[Optional[Fraction], Fraction]], start=ZERO, tail=None) -> "StepFunction":
        return cls(tuple(Piece(upto, ZERO, Fraction(value)) for upto, value in steps), start, tail)

    @classmethod
    def identity(cls) -> "StepFunction":
        return cls((Piece(None, ONE, ZERO),))

    @classmethod
    def truncation(cls, cap: Fraction) -> "StepFunction":
        """min(x, cap)"""
        return cls((Piece(Fraction(cap), ONE, ZERO), Piece(None, ZERO, Fraction(cap))))

    def bounds(self) -> List[Tuple[Fraction, Optional[Fraction], Piece]]:
        out = []
        lo = self.start
        for piece in self.pieces:
            out.append((lo, piece.upto, piece))
            if piece.upto is not None:
                lo = piece.upto
        return out

    def __call__(self, x: Fraction) -> Fraction:
        if x == 0:
            return ZERO
        if self.tail is not None and x <= self.start:
            return self.tail.round_up(x)
        for lo, hi, piece in self.bounds():
            if x > lo and (hi is None or x <= hi):
                return piece.at(x)
        raise OutOfRange(f"{x} lies outside the domain of the step function", {"value": x})


def _psi_defects(psi: StepFunction) -> List[str]:
    defects = []
    parts = psi.bounds()
    if psi.tail is not None:
        if not psi.tail.has_coinitiality():
            defects.append("continuity_at_zero")
        if parts:
            lo, _, first = parts[0]
            if psi.tail.round_up(psi.start) > first.at(lo):
                defects.append("increasing")
    elif parts:
        first = parts[0][2]
        if first.intercept != 0:
            defects.append("continuity_at_zero")
        if first.intercept < 0 or (first.intercept == 0 and first.slope <= 0):
            defects.append("amenable")
    for idx, (lo, hi, piece) in enumerate(parts):
        if piece.slope < 0:
            defects.append("increasing")
        if piece.at(lo) < 0:
            defects.append("nonnegative")
        if hi is not None and idx + 1 < len(parts):
            if piece.at(hi) > parts[idx + 1][2].at(hi):
                defects.append("increasing")
    # keep first occurrence order
    return list(dict.fromkeys(defects))


def psi_validate(psi: StepFunction) -> bool:
    """True iff psi is increasing, amenable and continuous at 0."""
    defects = _psi_defects(psi)
    if defects:
        logger.debug("step function rejected: %s", ", ".join(defects))
    return not defects


def grid_psi(radii: Sequence[Fraction], tail: Optional[RangeSet] = None) -> StepFunction:
    """
    x > r1 -> r1, (r(n+1), r(n)] -> r(n); below the last radius the steps continue
    geometrically (ratio r(m-1)/r(m)) unless another tail is supplied.
    """
    rs = [as_value(r) for r in radii]
    if not rs or any(b >= a for a, b in zip(rs, rs[1:])) or rs[-1] <= 0:
        raise ValueError("radii must be positive and strictly decreasing")
    if tail is None:
        if len(rs) < 2:
            raise ValueError("a single radius needs an explicit tail")
        ratio = rs[-2] / rs[-1]
        grid = GeometricGrid(ratio)
        if not grid.contains(rs[-1]):
            raise ValueError(f"last radius {rs[-1]} is not a power of {ratio}; pass a tail")
        tail = GeometricGrid(ratio, None, grid._floor_exponent(rs[-1]))
    steps: List[Tuple[Optional[Fraction], Fraction]] = []
    for n in range(len(rs) - 1, 0, -1):
        steps.append((rs[n - 1], rs[n - 1]))
    steps.append((None, rs[0]))
    return StepFunction.steps(steps, start=rs[-1], tail=tail)


def _descent_pair(psi: StepFunction) -> Optional[Tuple[Fraction, Fraction]]:
    parts = psi.bounds()
    for idx, (lo, hi, piece) in enumerate(parts):
        width = (hi - lo) if hi is not None else ONE
        if piece.slope < 0:
            return lo + width / 3, lo + 2 * width / 3
        left_value = None
        if idx == 0 and psi.tail is not None:
            left_value = psi.tail.round_up(psi.start)
        elif idx > 0:
            prev_lo, prev_hi, prev = parts[idx - 1]
            left_value = prev.at(prev_hi)
        if left_value is None or lo == 0:
            continue
        limit = piece.at(lo)
        if left_value > limit:
            delta = width / 2
            if piece.slope > 0:
                delta = min(delta, (left_value - limit) / (2 * piece.slope))
            return lo, lo + delta
    return None


def _zero_point(psi: StepFunction) -> Optional[Fraction]:
    if psi.tail is not None:
        return None
    for lo, hi, piece in psi.bounds():
        width = (hi - lo) if hi is not None else ONE
        candidates = [lo + width / 2]
        if hi is not None:
            candidates.append(hi)
        if piece.slope != 0:
            root = -piece.intercept / piece.slope
            if root > lo and (hi is None or root <= hi):
                candidates.append(root)
        for c in candidates:
            if c > 0 and piece.at(c) <= 0:
                return c
    return None


def psi_counterexample(psi: StepFunction, range_set: Optional[RangeSet] = None):
    """
    Three-point ultrametric space on which psi o d is not an ultrametric, or None when
    psi is increasing and amenable. Uses an isosceles triangle with base a and legs b when
    psi(a) > psi(b) for some a < b, and an equilateral one at c when psi(c) <= 0.
    """
    from SERVICE.space_service import FiniteUltrametricSpace

    S = range_set or AllRationals()
    pair = _descent_pair(psi)
    if pair is not None:
        a, b = pair
        return FiniteUltrametricSpace(("x", "y", "z"), ((ZERO, a, b), (a, ZERO, b), (b, b, ZERO)), S)
    c = _zero_point(psi)
    if c is not None:
        return FiniteUltrametricSpace(("x", "y", "z"), ((ZERO, c, c), (c, ZERO, c), (c, c, ZERO)), S)
    return None


def psi_apply(psi: StepFunction, space, target: Optional[RangeSet] = None):
    """(X, psi o d), validated against `target` (defaults to the space's range set)."""
    from SERVICE.space_service import validate

    S = target or space.range_set
    n = len(space.points)
    dist = [[psi(space.dist[i][j]) if i != j else ZERO for j in range(n)] for i in range(n)]
    return validate(space.points, dist, S)
