# SERVICE/embed_service.py
# Isometric embedding of a finite S-valued ultrametric space into step functions with
# integer coefficients (ultra-normed free module), plus the certificates that check it.
import bisect
import itertools
import logging
import random
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Mapping, Sequence, Tuple

from SERVICE.amalgam_service import one_point_extend
from SERVICE.errors import EmptyPositivePart, PostconditionFailure, RankDeficient
from SERVICE.space_service import FiniteUltrametricSpace, diameter, fresh_label, restrict
from SERVICE.values_service import ZERO, RangeSet

logger = logging.getLogger(__name__)

Coeffs = Tuple[Tuple[str, int], ...]


def _coeffs(mapping: Mapping[str, int]) -> Coeffs:
    return tuple(sorted((k, v) for k, v in mapping.items() if v != 0))


@dataclass(frozen=True)
class UltraVector:
    """
    Eventually-zero step function from (0, inf) to the free abelian group on labels.
    Segment j is (breakpoints[j-1], breakpoints[j]] with breakpoints[-1] read as 0;
    beyond the last breakpoint the value is 0. Always kept canonical.
    """
    breakpoints: Tuple[Fraction, ...] = ()
    coefficients: Tuple[Coeffs, ...] = ()

    @classmethod
    def zero(cls) -> "UltraVector":
        return cls()

    @classmethod
    def basis_step(cls, label: str, upto: Fraction, coeff: int = 1) -> "UltraVector":
        return cls.from_segments([(upto, {label: coeff})])

    @classmethod
    def from_segments(cls, segments: Iterable[Tuple[Fraction, Mapping[str, int]]]) -> "UltraVector":
        uptos: List[Fraction] = []
        maps: List[Coeffs] = []
        for upto, mapping in segments:
            upto = Fraction(upto)
            if upto <= 0 or (uptos and upto <= uptos[-1]):
                raise ValueError("segment ends must be positive and increasing")
            coeffs = _coeffs(mapping)
            if maps and maps[-1] == coeffs:
                uptos[-1] = upto
            else:
                uptos.append(upto)
                maps.append(coeffs)
        while maps and not maps[-1]:
            maps.pop()
            uptos.pop()
        return cls(tuple(uptos), tuple(maps))

    def segments(self) -> Iterator[Tuple[Fraction, Fraction, Dict[str, int]]]:
        lo = ZERO
        for hi, coeffs in zip(self.breakpoints, self.coefficients):
            yield lo, hi, dict(coeffs)
            lo = hi

    def __call__(self, q: Fraction) -> Dict[str, int]:
        if q <= 0:
            raise ValueError("vectors are evaluated at positive arguments")
        i = bisect.bisect_left(self.breakpoints, q)
        return dict(self.coefficients[i]) if i < len(self.coefficients) else {}

    def is_zero(self) -> bool:
        return not self.breakpoints

    def _combine(self, other: "UltraVector", sign: int) -> "UltraVector":
        cuts = sorted(set(self.breakpoints) | set(other.breakpoints))
        out = []
        for b in cuts:
            acc = Counter(self(b))
            for k, v in other(b).items():
                acc[k] += sign * v
            out.append((b, acc))
        return UltraVector.from_segments(out)

    def __add__(self, other: "UltraVector") -> "UltraVector":
        return self._combine(other, 1)

    def __sub__(self, other: "UltraVector") -> "UltraVector":
        return self._combine(other, -1)

    def __neg__(self) -> "UltraVector":
        return self * -1

    def __mul__(self, n: int) -> "UltraVector":
        return UltraVector.from_segments(
            (hi, {k: n * v for k, v in coeffs}) for hi, coeffs in zip(self.breakpoints, self.coefficients))

    __rmul__ = __mul__


def vec_add(f: UltraVector, g: UltraVector) -> UltraVector:
    return f + g


def vec_neg(f: UltraVector) -> UltraVector:
    return -f


def vec_scale(n: int, f: UltraVector) -> UltraVector:
    return f * n


def evaluate(f: UltraVector, q: Fraction) -> Dict[str, int]:
    return f(q)


def delta(f: UltraVector, g: UltraVector, S: RangeSet) -> Fraction:
    """sup of {q in S+ : f(q) != g(q)}, 0 when they agree on S+."""
    best = ZERO
    for lo, hi, coeffs in (f - g).segments():
        if coeffs:
            s = S.interval_sup(lo, hi)
            if s is not None and s > best:
                best = s
    return best


@dataclass(frozen=True)
class EmbeddingCertificate:
    space: FiniteUltrametricSpace
    extended: FiniteUltrametricSpace
    base: str
    images: Dict[str, UltraVector]
    critical_value: Fraction = ZERO
    independence_rank: int = 0

    @property
    def range_set(self) -> RangeSet:
        return self.space.range_set


def embed_finite(X: FiniteUltrametricSpace) -> EmbeddingCertificate:
    """
    Adjoin a base point o at s = round_up(diameter), order o first, then give x_g the basis
    step on (0, D_g] followed by the image of its nearest earlier point x_b (smallest index wins).
    """
    S = X.range_set
    if not S.has_positive():
        raise EmptyPositivePart("range set has no positive element")
    base = fresh_label("o", X.points) if "o" in X.points else "o"
    s = S.default_positive() if len(X) == 1 else S.round_up(diameter(X))
    ext = one_point_extend(X, base, s).space
    ext = restrict(ext, (base,) + X.points)
    images: Dict[str, UltraVector] = {base: UltraVector.zero()}
    for g in range(1, len(ext)):
        row = ext.dist[g]
        d_g = min(row[:g])
        beta = row.index(d_g)
        if d_g <= 0:
            raise PostconditionFailure("zero distance inside the extended space", {"point": ext.points[g]})
        parent = images[ext.points[beta]]
        segs = [(d_g, {ext.points[g]: 1})]
        segs.extend((hi, coeffs) for _, hi, coeffs in parent.segments() if hi > d_g)
        images[ext.points[g]] = UltraVector.from_segments(segs)
    cert = EmbeddingCertificate(X, ext, base, images)
    broken = isometry_defects(cert)
    if broken:
        x, y = broken[0]
        raise PostconditionFailure(f"embedding distorts {x},{y}", {"pairs": [list(p) for p in broken]})
    c, rank = _independence(cert)
    logger.debug("embedded %d points, critical value %s", len(X), c)
    return EmbeddingCertificate(X, ext, base, images, c, rank)


def _rank(rows: List[List[Fraction]]) -> int:
    rows = [list(r) for r in rows]
    rank = 0
    cols = len(rows[0]) if rows else 0
    for col in range(cols):
        pivot = next((r for r in range(rank, len(rows)) if rows[r][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        for r in range(len(rows)):
            if r != rank and rows[r][col] != 0:
                factor = rows[r][col] / rows[rank][col]
                rows[r] = [a - factor * b for a, b in zip(rows[r], rows[rank])]
        rank += 1
    return rank


def _independence(cert: EmbeddingCertificate) -> Tuple[Fraction, int]:
    S = cert.range_set
    vectors = [cert.images[p] for p in cert.space.points]
    pool = vectors + [UltraVector.zero()]
    c = min(delta(f, g, S) for f, g in itertools.combinations(pool, 2))
    values = [f(c) for f in vectors]
    labels = sorted({k for v in values for k in v})
    basis_like = all(len(v) == 1 and abs(next(iter(v.values()))) == 1 for v in values)
    distinct = len({next(iter(v)) for v in values if v}) == len(values)
    rank = _rank([[Fraction(v.get(k, 0)) for k in labels] for v in values]) if labels else 0
    if not (basis_like and distinct) or rank != len(vectors):
        raise RankDeficient(f"images evaluated at {c} have rank {rank} < {len(vectors)}",
                            {"critical_value": c, "rank": rank, "points": len(vectors)})
    return c, rank


def independence_check(cert: EmbeddingCertificate) -> Tuple[bool, Fraction]:
    c, rank = _independence(cert)
    if c != cert.critical_value or rank != cert.independence_rank:
        raise PostconditionFailure("certificate disagrees with recomputed independence",
                                   {"critical_value": c, "rank": rank})
    return True, c


def isometry_defects(cert: EmbeddingCertificate) -> List[Tuple[str, str]]:
    """Pairs of the extended space whose images sit at a Delta distance other than d."""
    S = cert.range_set
    ext = cert.extended
    return [(x, y) for x, y in ext.label_pairs() if delta(cert.images[x], cert.images[y], S) != ext.d(x, y)]


def support_condition(cert: EmbeddingCertificate) -> List[Tuple[str, str]]:
    """
    Pairs where {q in S+ : L(x)(q) != L(y)(q)} is not (0, d(x,y)] n S+, checked per segment
    of L(x) - L(y). Empty list means the condition holds everywhere.
    """
    S = cert.range_set
    bad = []
    for x, y in cert.space.label_pairs():
        d = cert.space.d(x, y)
        diff = cert.images[x] - cert.images[y]
        ok = True
        end = ZERO
        for lo, hi, coeffs in diff.segments():
            if coeffs and hi > d:
                ok = ok and S.interval_sup(max(lo, d), hi) is None
            if not coeffs and lo < d:
                ok = ok and S.interval_sup(lo, min(hi, d)) is None
            end = hi
        # past the last segment the difference is zero
        if end < d:
            ok = ok and S.interval_sup(end, d) is None
        if not ok:
            bad.append((x, y))
    return bad


@dataclass
class SubmoduleReport:
    trials: int
    norms: Counter = field(default_factory=Counter)
    violations: List[Tuple[Tuple[int, ...], Fraction]] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return not self.violations


def _combination(cert: EmbeddingCertificate, coeffs: Sequence[int]) -> UltraVector:
    total = UltraVector.zero()
    for n, p in zip(coeffs, cert.space.points):
        if n:
            total = total + cert.images[p] * n
    return total


def _record(report: SubmoduleReport, cert: EmbeddingCertificate, coeffs: Tuple[int, ...]) -> None:
    S = cert.range_set
    norm = delta(_combination(cert, coeffs), UltraVector.zero(), S)
    report.norms[norm] += 1
    if not S.contains(norm):
        logger.warning("combination %s has norm %s outside the range set", coeffs, norm)
        report.violations.append((coeffs, norm))


def submodule_svalued_sample(cert: EmbeddingCertificate, trials: int, coeff_bound: int,
                             rng: random.Random) -> SubmoduleReport:
    report = SubmoduleReport(trials)
    n = len(cert.space)
    for _ in range(trials):
        coeffs = tuple(rng.randint(-coeff_bound, coeff_bound) for _ in range(n))
        while not any(coeffs):
            coeffs = tuple(rng.randint(-coeff_bound, coeff_bound) for _ in range(n))
        _record(report, cert, coeffs)
    return report


def submodule_svalued_exhaustive(cert: EmbeddingCertificate, coeff_bound: int) -> SubmoduleReport:
    n = len(cert.space)
    report = SubmoduleReport(0)
    for coeffs in itertools.product(range(-coeff_bound, coeff_bound + 1), repeat=n):
        if any(coeffs):
            report.trials += 1
            _record(report, cert, coeffs)
    return report
