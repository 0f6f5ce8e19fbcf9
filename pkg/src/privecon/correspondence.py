"""Set-valued maps on finite domains.

Semicontinuity is read off a finite metric grid through containment: ``F`` is
upper semicontinuous at resolution ``delta`` when every ``x'`` closer than
``delta`` to ``x`` has ``F(x') <= F(x)``, lower semicontinuous when
``F(x) <= F(x')``. With a discrete codomain these are the neighbourhood
definitions with neighbourhoods taken to be open ``delta``-balls.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np


class CorrespondenceError(ValueError):
    pass


@dataclass(frozen=True)
class MetricGrid:
    """Finite metric space given by an explicit distance table."""

    points: tuple
    dist: np.ndarray

    def __post_init__(self):
        points = tuple(self.points)
        dist = np.asarray(self.dist, dtype=float)
        n = len(points)
        if dist.shape != (n, n):
            raise CorrespondenceError("distance table shape does not match points")
        if len(set(points)) != n:
            raise CorrespondenceError("grid points must be unique")
        if (dist < 0).any() or not np.allclose(dist, dist.T, atol=1e-12, rtol=0):
            raise CorrespondenceError("distances must be symmetric and nonnegative")
        if np.abs(np.diag(dist)).max(initial=0.0) > 0:
            raise CorrespondenceError("distance table needs a zero diagonal")
        # O(n^3); large grids come from from_metric with a trusted metric
        if n <= 150 and n:
            via = dist[:, :, None] + dist[None, :, :]
            if (dist[:, None, :] > via + 1e-9).any():
                raise CorrespondenceError("distance table violates the triangle inequality")
        dist.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "dist", dist)

    @classmethod
    def from_metric(cls, points: Sequence, metric: Callable) -> "MetricGrid":
        points = tuple(points)
        n = len(points)
        dist = np.zeros((n, n))
        for i, j in itertools.combinations(range(n), 2):
            dist[i, j] = dist[j, i] = metric(points[i], points[j])
        return cls(points, dist)

    @classmethod
    def on_line(cls, coords: Sequence[float]) -> "MetricGrid":
        x = np.asarray(coords, dtype=float)
        return cls(tuple(float(c) for c in x), np.abs(x[:, None] - x[None, :]))

    def index(self, x) -> int:
        return self.points.index(x)

    def distinct_distances(self) -> list:
        d = self.dist[np.triu_indices(len(self.points), k=1)]
        return sorted(set(d.tolist()))

    def close_pairs(self, delta: float):
        """Ordered index pairs (i, j), i != j, with dist < delta."""
        ii, jj = np.nonzero(self.dist < delta)
        return [(i, j) for i, j in zip(ii.tolist(), jj.tolist()) if i != j]

    def separation(self, subset) -> float:
        """Smallest distance between ``subset`` and its complement."""
        inside = np.array([p in subset for p in self.points])
        if inside.all() or not inside.any():
            return math.inf
        return float(self.dist[np.ix_(inside, ~inside)].min())


@dataclass(frozen=True)
class Correspondence:
    """``F: X -> 2^Y`` on a finite domain, stored as a table of frozensets.

    ``metric`` (a :class:`MetricGrid` over the domain) and ``sigma`` (a
    partition of the domain) are optional structure needed by the
    semicontinuity and measurability tests respectively.
    """

    domain: tuple
    codomain: tuple
    values: Mapping
    metric: MetricGrid | None = None
    sigma: tuple | None = None
    allow_empty: bool = True

    def __post_init__(self):
        domain, codomain = tuple(self.domain), tuple(self.codomain)
        values = {}
        for x in domain:
            if x not in self.values:
                raise CorrespondenceError(f"no value at domain point {x!r}")
            v = frozenset(self.values[x])
            if not v <= set(codomain):
                raise CorrespondenceError(f"value at {x!r} leaves the codomain")
            if not v and not self.allow_empty:
                raise CorrespondenceError(f"empty value at {x!r}")
            values[x] = v
        if set(self.values) - set(domain):
            raise CorrespondenceError("values given outside the domain")
        if self.metric is not None and set(self.metric.points) != set(domain):
            raise CorrespondenceError("metric points must equal the domain")
        if self.sigma is not None:
            sigma = tuple(tuple(c) for c in self.sigma)
            flat = [x for c in sigma for x in c]
            if set(flat) != set(domain) or len(flat) != len(domain):
                raise CorrespondenceError("sigma must partition the domain")
            object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "codomain", codomain)
        object.__setattr__(self, "values", values)

    def __call__(self, x) -> frozenset:
        return self.values[x]

    def ordered(self, x) -> list:
        """Value at ``x`` in codomain order."""
        v = self.values[x]
        return [y for y in self.codomain if y in v]

    def replace(self, values: Mapping) -> "Correspondence":
        return Correspondence(self.domain, self.codomain, values, self.metric, self.sigma, self.allow_empty)

    def _subset(self, A) -> frozenset:
        A = frozenset(A)
        if not A <= set(self.codomain):
            raise CorrespondenceError("set is not a subset of the codomain")
        return A


def upper_inverse(F: Correspondence, A) -> frozenset:
    A = F._subset(A)
    return frozenset(x for x in F.domain if F(x) <= A)


def lower_inverse(F: Correspondence, A) -> frozenset:
    A = F._subset(A)
    return frozenset(x for x in F.domain if F(x) & A)


def is_measurable(F: Correspondence) -> bool:
    """True iff every ``{t : y in F(t)}`` is a union of sigma cells."""
    if F.sigma is None:
        raise CorrespondenceError("correspondence carries no sigma partition")
    return all(len({F(x) for x in cell}) == 1 for cell in F.sigma)


def _check_delta(delta: float) -> None:
    if not delta > 0:
        raise CorrespondenceError("delta must be positive")


def _metric(F: Correspondence) -> MetricGrid:
    if F.metric is None:
        raise CorrespondenceError("correspondence carries no metric")
    return F.metric


def usc_modulus(F: Correspondence, delta: float) -> bool:
    _check_delta(delta)
    g = _metric(F)
    pts = g.points
    return all(F(pts[j]) <= F(pts[i]) for i, j in g.close_pairs(delta))


def lsc_modulus(F: Correspondence, delta: float) -> bool:
    _check_delta(delta)
    g = _metric(F)
    pts = g.points
    return all(F(pts[i]) <= F(pts[j]) for i, j in g.close_pairs(delta))


def _max_modulus(F: Correspondence, test) -> float:
    ds = _metric(F).distinct_distances()
    if not ds:
        return math.inf
    best = 0.0
    for d in ds:
        if not test(F, d):
            break
        best = d
    return best


def max_usc_modulus(F: Correspondence) -> float:
    """Largest listed pairwise distance at which :func:`usc_modulus` holds.

    ``inf`` on a single-point domain.
    """
    return _max_modulus(F, usc_modulus)


def max_lsc_modulus(F: Correspondence) -> float:
    return _max_modulus(F, lsc_modulus)


def glue(F1: Correspondence, F2: Correspondence, A, closed_flag: bool = True) -> Correspondence:
    """``F2`` on ``A`` and ``F1`` elsewhere; requires ``F2 <= F1`` on ``A``.

    ``closed_flag`` only records whether ``A`` is meant as a closed set
    (lower semicontinuous gluing) or an open one (upper semicontinuous).
    """
    if F1.domain != F2.domain or F1.codomain != F2.codomain:
        raise CorrespondenceError("glued correspondences must share domain and codomain")
    A = frozenset(A)
    if not A <= set(F1.domain):
        raise CorrespondenceError("gluing set leaves the domain")
    bad = [x for x in F1.domain if x in A and not F2(x) <= F1(x)]
    if bad:
        raise CorrespondenceError(f"F2 is not contained in F1 at {bad[0]!r}")
    return F1.replace({x: F2(x) if x in A else F1(x) for x in F1.domain})


def glue_modulus(F1: Correspondence, A, delta: float) -> float:
    """Resolution at which the glued map inherits a modulus ``delta`` of its parts."""
    return min(delta, _metric(F1).separation(frozenset(A)))


def is_delta_closed(grid: MetricGrid, A, delta: float) -> bool:
    """No point outside ``A`` has a point of ``A`` within ``delta``."""
    A = frozenset(A)
    pts = grid.points
    return all(not (pts[i] not in A and pts[j] in A) for i, j in grid.close_pairs(delta))


def _same_shape(F: Correspondence, G: Correspondence) -> None:
    if F.domain != G.domain or F.codomain != G.codomain:
        raise CorrespondenceError("correspondences differ in domain or codomain")


def intersect(F: Correspondence, G: Correspondence) -> Correspondence:
    _same_shape(F, G)
    return Correspondence(F.domain, F.codomain, {x: F(x) & G(x) for x in F.domain},
                          F.metric, F.sigma, allow_empty=True)


def union(F: Correspondence, G: Correspondence) -> Correspondence:
    _same_shape(F, G)
    return F.replace({x: F(x) | G(x) for x in F.domain})


def close_values(F: Correspondence) -> Correspondence:
    # finite codomain points are closed
    return F


def hull_values(F: Correspondence, embedding: Mapping | None) -> Correspondence:
    """Codomain points whose embedding lies in the convex hull of the
    embedded value."""
    if embedding is None:
        raise CorrespondenceError("convex hull needs an embedding of the codomain")
    from .geometry import in_hull

    vec = {y: np.asarray(embedding[y], dtype=float) for y in F.codomain}
    out = {}
    for x in F.domain:
        pts = [vec[y] for y in F.ordered(x)]
        out[x] = {y for y in F.codomain if pts and in_hull(vec[y], pts)}
    return F.replace(out)
