"""Discrete 1+1D Minkowski lattice, point-set regions and causal predicates.

The lattice has ``n_t`` time slices and ``n_x`` spatial sites with spacings
``dt`` and ``dx``.  The signal speed is 1, so a point ``(t1, x1)`` lies in the
causal future of ``(t0, x0)`` iff ``t1 >= t0`` and
``site_distance(x0, x1) * dx <= (t1 - t0) * dt``.  With the default choice
``dt == dx`` this cone coincides with the domain of dependence of the leapfrog
field solver, which is what makes the support statements in the rest of the
package exact rather than approximate.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import GeometryError

PERIODIC = "periodic"
REFLECTING = "reflecting"


@dataclass(frozen=True)
class LatticeSpec:
    """Geometry of the discrete spacetime grid."""

    n_t: int
    n_x: int
    dx: float = 1.0
    dt: float = 1.0
    boundary: str = PERIODIC

    def __post_init__(self):
        if self.n_t < 2 or self.n_x < 2:
            raise GeometryError(f"grid must be at least 2x2, got {self.n_t}x{self.n_x}")
        if self.dx <= 0 or self.dt <= 0:
            raise GeometryError("spacings must be positive")
        if self.dt > self.dx * (1 + 1e-12):
            raise GeometryError(f"CFL bound violated: dt={self.dt} > dx={self.dx}")
        if self.boundary not in (PERIODIC, REFLECTING):
            raise GeometryError(f"unknown boundary condition {self.boundary!r}")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_t, self.n_x)

    def site_distance(self, x0: int, x1: int) -> int:
        """Minimal number of spatial hops between two sites."""
        d = abs(int(x1) - int(x0))
        if self.boundary == PERIODIC:
            return min(d, self.n_x - d)
        return d

    def site_distances(self, x0: int) -> np.ndarray:
        """Vector of ``site_distance(x0, x)`` for all sites x."""
        d = np.abs(np.arange(self.n_x) - int(x0))
        if self.boundary == PERIODIC:
            d = np.minimum(d, self.n_x - d)
        return d

    def check_point(self, t: int, x: int) -> None:
        if not (0 <= t < self.n_t and 0 <= x < self.n_x):
            raise GeometryError(f"point ({t}, {x}) outside {self.n_t}x{self.n_x} grid")


class LatticePoint(NamedTuple):
    t: int
    x: int


@dataclass(frozen=True)
class Region:
    """A finite, deduplicated set of lattice points."""

    spec: LatticeSpec
    points: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        pts = frozenset(LatticePoint(int(t), int(x)) for (t, x) in self.points)
        for p in pts:
            self.spec.check_point(p.t, p.x)
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_points(cls, spec: LatticeSpec, points: Iterable[tuple[int, int]]) -> "Region":
        return cls(spec, frozenset(points))

    @classmethod
    def from_rect(cls, spec: LatticeSpec, t0: int, t1: int, x0: int, x1: int) -> "Region":
        """Closed rectangle t0..t1, x0..x1 (inclusive)."""
        if t1 < t0 or x1 < x0:
            raise GeometryError(f"degenerate rectangle ({t0},{t1},{x0},{x1})")
        pts = [(t, x) for t in range(t0, t1 + 1) for x in range(x0, x1 + 1)]
        return cls.from_points(spec, pts)

    @classmethod
    def from_mask(cls, spec: LatticeSpec, mask: np.ndarray) -> "Region":
        if mask.shape != spec.shape:
            raise GeometryError("mask shape does not match lattice")
        ts, xs = np.nonzero(mask)
        return cls.from_points(spec, zip(ts.tolist(), xs.tolist()))

    def mask(self) -> np.ndarray:
        m = np.zeros(self.spec.shape, dtype=bool)
        for p in self.points:
            m[p.t, p.x] = True
        return m

    def union(self, other: "Region") -> "Region":
        if other.spec != self.spec:
            raise GeometryError("regions live on different lattices")
        return Region(self.spec, self.points | other.points)

    def __len__(self) -> int:
        return len(self.points)

    def __contains__(self, point) -> bool:
        t, x = point
        return LatticePoint(int(t), int(x)) in self.points

    def is_empty(self) -> bool:
        return not self.points

    def time_range(self) -> tuple[int, int]:
        if not self.points:
            raise GeometryError("empty region has no time range")
        ts = [p.t for p in self.points]
        return min(ts), max(ts)


@dataclass(frozen=True)
class CouplingZone:
    """Compact region where a system-probe interaction is switched on."""

    region: Region

    def __post_init__(self):
        if self.region.is_empty():
            raise GeometryError("coupling zone must be nonempty")


def _cone_mask(spec: LatticeSpec, t0: int, x0: int, future: bool) -> np.ndarray:
    """Boolean grid of the causal future (or past) of a single point."""
    steps = np.arange(spec.n_t) - t0
    if not future:
        steps = -steps
    reach = steps[:, None] * spec.dt - spec.site_distances(x0)[None, :] * spec.dx
    return (steps[:, None] >= 0) & (reach >= -1e-12 * spec.dx)


def causal_future(S: Region) -> Region:
    """J+(S): every point reachable from S along a causal curve, including S."""
    if S.is_empty():
        return S
    m = np.zeros(S.spec.shape, dtype=bool)
    for p in S.points:
        m |= _cone_mask(S.spec, p.t, p.x, future=True)
    return Region.from_mask(S.spec, m)


def causal_past(S: Region) -> Region:
    """J-(S), the time reflection of causal_future."""
    if S.is_empty():
        return S
    m = np.zeros(S.spec.shape, dtype=bool)
    for p in S.points:
        m |= _cone_mask(S.spec, p.t, p.x, future=False)
    return Region.from_mask(S.spec, m)


def causal_complement(K: Region) -> Region:
    """K-perp = M minus (J+(K) union J-(K))."""
    if K.is_empty():
        raise GeometryError("causal complement of an empty region is undefined")
    m = np.zeros(K.spec.shape, dtype=bool)
    for p in K.points:
        m |= _cone_mask(K.spec, p.t, p.x, future=True)
        m |= _cone_mask(K.spec, p.t, p.x, future=False)
    return Region.from_mask(K.spec, ~m)


def causally_disjoint(A: Region, B: Region) -> bool:
    """True iff no causal curve connects A and B."""
    if A.is_empty() or B.is_empty():
        return True
    comp = causal_complement(A)
    return all(p in comp.points for p in B.points)


def _interval_mask(spec: LatticeSpec, p: LatticePoint, q: LatticePoint) -> np.ndarray:
    """J+(p) intersect J-(q)."""
    return _cone_mask(spec, p.t, p.x, future=True) & _cone_mask(spec, q.t, q.x, future=False)


def is_causally_convex(O: Region) -> bool:
    """True iff every causal interval between points of O stays inside O."""
    pts = sorted(O.points)
    inside = O.mask()
    for p in pts:
        for q in pts:
            if q.t < p.t:
                continue
            between = _interval_mask(O.spec, p, q)
            if np.any(between & ~inside):
                return False
    return True


def causal_hull(S: Region) -> Region:
    """J+(S) intersect J-(S): the smallest causally convex superset."""
    if S.is_empty():
        raise GeometryError("causal hull of an empty region is undefined")
    fut = causal_future(S).mask()
    past = causal_past(S).mask()
    return Region.from_mask(S.spec, fut & past)


def precedes(K1: CouplingZone, K2: CouplingZone) -> bool:
    """True iff J-(K1) and J+(K2) do not intersect, admitting the order K1 < K2.

    On a flat lattice this is equivalent to the existence of a Cauchy slice
    with K1 strictly to its past and K2 strictly to its future.
    """
    past = causal_past(K1.region).mask()
    fut = causal_future(K2.region).mask()
    return not np.any(past & fut)


def enumerate_causal_orders(zones: Sequence[CouplingZone]) -> list[tuple[int, ...]]:
    """All total orders (as index permutations) consistent with ``precedes``.

    An empty list means the zones are not causally orderable.
    """
    n = len(zones)
    ok = np.zeros((n, n), dtype=bool)
    for i in range(n):
        for j in range(n):
            if i != j:
                ok[i, j] = precedes(zones[i], zones[j])
    orders = []
    for perm in itertools.permutations(range(n)):
        if all(ok[perm[a], perm[b]] for a in range(n) for b in range(a + 1, n)):
            orders.append(perm)
    return orders


def cone_self_intersects(S: Region, steps: int | None = None) -> bool:
    """Check whether the cone of S wraps all the way around a periodic lattice.

    Acceptance scenarios should use regions for which this is False, so the
    periodic cone agrees with the infinite-lattice cone.
    """
    if S.spec.boundary != PERIODIC or S.is_empty():
        return False
    if steps is None:
        t_min, t_max = S.time_range()
        steps = max(t_max, S.spec.n_t - 1 - t_min)
    xs = sorted({p.x for p in S.points})
    width = max(xs) - min(xs) if xs else 0
    reach = 2 * steps * S.spec.dt / S.spec.dx + width
    return reach >= S.spec.n_x
