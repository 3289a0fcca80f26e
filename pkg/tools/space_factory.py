# tools/space_factory.py
# Random instances for property runs and demos: range sets, ultrametric spaces built by
# merging clusters at nondecreasing heights (cophenetic distances), raw symmetric matrices,
# interpolation families and step functions.
import random
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from SERVICE.space_service import FiniteUltrametricSpace
from SERVICE.values_service import (
    ZERO, AllRationals, ExplicitFinite, GeometricGrid, Lattice, Piece, RangeSet, StepFunction,
)


def random_range_set(rng: random.Random) -> RangeSet:
    kind = rng.choice(["finite", "grid", "grid_open", "all", "lattice"])
    if kind == "finite":
        values = {Fraction(rng.randint(1, 40), rng.choice([1, 2, 3, 4])) for _ in range(rng.randint(2, 6))}
        return ExplicitFinite(tuple(values))
    if kind == "grid":
        return GeometricGrid(rng.choice([Fraction(2), Fraction(3), Fraction(3, 2), Fraction(5, 2)]), -6, 6)
    if kind == "grid_open":
        return GeometricGrid(Fraction(2), None, rng.choice([None, 3]))
    if kind == "lattice":
        return Lattice(Fraction(1, rng.choice([1, 2, 4, 8])))
    return AllRationals()


def sample_values(rng: random.Random, S: RangeSet, k: int) -> List[Fraction]:
    """k positive elements of S, with repetitions."""
    if isinstance(S, ExplicitFinite):
        return [rng.choice(S.values[1:]) for _ in range(k)]
    if isinstance(S, GeometricGrid):
        lo = -5 if S.kmin is None else max(S.kmin, -5)
        hi = 5 if S.kmax is None else min(S.kmax, 5)
        lo = min(lo, hi)
        return [S.power(rng.randint(lo, hi)) for _ in range(k)]
    if isinstance(S, Lattice):
        return [S.step * rng.randint(1, 24) for _ in range(k)]
    return [Fraction(rng.randint(1, 40), rng.randint(1, 12)) for _ in range(k)]


def random_ultrametric(rng: random.Random, n: int, S: RangeSet, prefix: str = "p",
                       labels: Optional[Sequence[str]] = None) -> FiniteUltrametricSpace:
    """Merge random clusters at sorted heights drawn from S; d is the merge height."""
    labels = list(labels) if labels is not None else [f"{prefix}{i}" for i in range(n)]
    n = len(labels)
    heights = sorted(sample_values(rng, S, max(n - 1, 0)))
    dist = [[ZERO] * n for _ in range(n)]
    clusters = [[i] for i in range(n)]
    for h in heights:
        a, b = rng.sample(range(len(clusters)), 2)
        for i in clusters[a]:
            for j in clusters[b]:
                dist[i][j] = dist[j][i] = h
        clusters[a].extend(clusters[b])
        clusters.pop(b)
    return FiniteUltrametricSpace(tuple(labels), dist, S)


def random_symmetric(rng: random.Random, n: int, S: RangeSet, prefix: str = "p") -> FiniteUltrametricSpace:
    """Unchecked symmetric matrix; about half the time a valid ultrametric with a few entries bumped."""
    if rng.random() < 0.5:
        base = random_ultrametric(rng, n, S, prefix)
        dist = [list(r) for r in base.dist]
        for _ in range(rng.randint(0, 2)):
            if n >= 2:
                i, j = rng.sample(range(n), 2)
                dist[i][j] = dist[j][i] = sample_values(rng, S, 1)[0]
        return FiniteUltrametricSpace(base.points, dist, S)
    dist = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            dist[i][j] = dist[j][i] = sample_values(rng, S, 1)[0]
    return FiniteUltrametricSpace(tuple(f"{prefix}{i}" for i in range(n)), dist, S)


def random_family(rng: random.Random, X: FiniteUltrametricSpace,
                  max_parts: int = 3) -> List[Tuple[Tuple[str, ...], FiniteUltrametricSpace]]:
    """Disjoint subsets of X, each carrying a fresh random ultrametric over the same range set."""
    points = list(X.points)
    rng.shuffle(points)
    family = []
    for _ in range(rng.randint(1, max_parts)):
        if not points:
            break
        size = rng.randint(1, max(1, min(len(points), 4)))
        subset, points = points[:size], points[size:]
        subset = tuple(p for p in X.points if p in subset)
        family.append((subset, random_ultrametric(rng, len(subset), X.range_set, labels=subset)))
    return family


def random_increasing_psi(rng: random.Random) -> StepFunction:
    """Increasing, amenable, continuous at 0: identity near 0, then constant and affine pieces."""
    upto = Fraction(rng.randint(1, 4), 2)
    pieces = [Piece(upto, Fraction(1), ZERO)]
    level = upto
    for _ in range(rng.randint(0, 3)):
        lo, upto = upto, upto + Fraction(rng.randint(1, 6), 2)
        level = level + Fraction(rng.randint(0, 3), 2)
        if rng.random() < 0.5:
            pieces.append(Piece(upto, ZERO, level))
        else:
            slope = Fraction(rng.randint(1, 3), rng.randint(1, 3))
            pieces.append(Piece(upto, slope, level - slope * lo))
            level = level + slope * (upto - lo)
    pieces.append(Piece(None, ZERO, level + rng.randint(0, 2)))
    return StepFunction(tuple(pieces))


def random_descending_psi(rng: random.Random) -> StepFunction:
    """A step function with a drop: value v on (0, b], then a smaller positive value."""
    b = Fraction(rng.randint(1, 6), rng.randint(1, 3))
    high = Fraction(rng.randint(3, 9))
    low = high - Fraction(rng.randint(1, 2))
    return StepFunction((Piece(b, ZERO, high), Piece(None, ZERO, low)))
