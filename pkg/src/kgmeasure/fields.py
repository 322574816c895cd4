"""Discrete Klein-Gordon dynamics: Green operators and the commutator form.

The wave operator is discretized with second-order central differences in both
directions.  Retarded solutions are produced by the explicit leapfrog update

    u[t+1] = 2 u[t] - u[t-1] + dt^2 (Dxx u[t] - m^2 u[t] + f[t])

so the source on slice t enters the update of slice t+1 with weight dt^2.
This fixes the discrete Green operators bit-for-bit, and the commutator form

    E(f, g) = sum f * (E_adv g - E_ret g) * dt * dx

inherits exact antisymmetry and the exact causal support property from the
summation-by-parts identity of the stencil.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError, SolverError
from .lattice import PERIODIC, LatticeSpec, Region

RETARDED = "retarded"
ADVANCED = "advanced"


@dataclass(frozen=True)
class FieldParams:
    """Mass and grid of one scalar field."""

    mass: float
    spec: LatticeSpec

    def __post_init__(self):
        if self.mass < 0:
            raise SolverError("mass must be nonnegative")


@dataclass(frozen=True)
class TestFunction:
    """Real function on the lattice with finite support.

    ``values`` covers the whole grid; ``support`` is the set of nonzero points.
    """

    spec: LatticeSpec
    values: np.ndarray
    support: Region = field(init=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.spec.shape:
            raise GeometryError(
                f"values shape {v.shape} does not match grid {self.spec.shape}"
            )
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "support", Region.from_mask(self.spec, v != 0.0))

    @classmethod
    def zero(cls, spec: LatticeSpec) -> "TestFunction":
        return cls(spec, np.zeros(spec.shape))

    @classmethod
    def point(cls, spec: LatticeSpec, t: int, x: int, amplitude: float = 1.0) -> "TestFunction":
        spec.check_point(t, x)
        v = np.zeros(spec.shape)
        v[t, x] = amplitude
        return cls(spec, v)

    @classmethod
    def gaussian_bump(
        cls,
        spec: LatticeSpec,
        t0: float,
        x0: float,
        sigma_t: float,
        sigma_x: float,
        amplitude: float = 1.0,
        support_box: tuple[int, int, int, int] | None = None,
    ) -> "TestFunction":
        """Gaussian profile truncated to zero outside ``support_box``.

        The box is (t_min, t_max, x_min, x_max), inclusive; it defaults to the
        3-sigma box around the center.  Spatial offsets honour periodicity.
        """
        if support_box is None:
            support_box = (
                max(0, int(np.floor(t0 - 3 * sigma_t))),
                min(spec.n_t - 1, int(np.ceil(t0 + 3 * sigma_t))),
                max(0, int(np.floor(x0 - 3 * sigma_x))),
                min(spec.n_x - 1, int(np.ceil(x0 + 3 * sigma_x))),
            )
        t_min, t_max, x_min, x_max = support_box
        ts = np.arange(spec.n_t)[:, None]
        xs = np.arange(spec.n_x)[None, :]
        dxs = np.abs(xs - x0)
        if spec.boundary == PERIODIC:
            dxs = np.minimum(dxs, spec.n_x - dxs)
        v = amplitude * np.exp(-0.5 * ((ts - t0) / sigma_t) ** 2 - 0.5 * (dxs / sigma_x) ** 2)
        box = (ts >= t_min) & (ts <= t_max) & (xs >= x_min) & (xs <= x_max)
        return cls(spec, np.where(box, v, 0.0))

    def __add__(self, other: "TestFunction") -> "TestFunction":
        if other.spec != self.spec:
            raise GeometryError("test functions live on different lattices")
        return TestFunction(self.spec, self.values + other.values)

    def __sub__(self, other: "TestFunction") -> "TestFunction":
        if other.spec != self.spec:
            raise GeometryError("test functions live on different lattices")
        return TestFunction(self.spec, self.values - other.values)

    def __rmul__(self, c: float) -> "TestFunction":
        return TestFunction(self.spec, float(c) * self.values)

    def __neg__(self) -> "TestFunction":
        return TestFunction(self.spec, -self.values)

    def time_support(self) -> tuple[int, int]:
        return self.support.time_range()


@dataclass(frozen=True)
class Solution:
    """A Green-operator solve, tagged with its source and kind."""

    values: np.ndarray
    source: TestFunction
    kind: str


def laplacian_x(u_slice: np.ndarray, spec: LatticeSpec) -> np.ndarray:
    """Second spatial difference of one (or a batch of) time slice(s).

    The spatial axis is axis 0, so extra trailing axes (solve batches) pass
    through unchanged.
    """
    if spec.boundary == PERIODIC:
        up = np.roll(u_slice, -1, axis=0)
        dn = np.roll(u_slice, 1, axis=0)
    else:
        # reflecting walls: mirror the neighbour back into the grid
        up = np.empty_like(u_slice)
        dn = np.empty_like(u_slice)
        up[:-1] = u_slice[1:]
        up[-1] = u_slice[-2]
        dn[1:] = u_slice[:-1]
        dn[0] = u_slice[1]
    return (up - 2.0 * u_slice + dn) / spec.dx**2


def apply_klein_gordon(u: np.ndarray, params: FieldParams) -> np.ndarray:
    """(box + m^2) u on interior slices; the first and last slice are zeroed.

    The wave operator needs both time neighbours, so the output on the
    boundary slices t=0 and t=n_t-1 is undefined and reported as 0.
    """
    spec = params.spec
    u = np.asarray(u, dtype=float)
    if u.shape != spec.shape:
        raise SolverError(f"array shape {u.shape} does not match grid {spec.shape}")
    out = np.zeros_like(u)
    dtt = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / spec.dt**2
    dxx = laplacian_x(u[1:-1].T, spec).T
    out[1:-1] = dtt - dxx + params.mass**2 * u[1:-1]
    return out


def _check_padding(f: TestFunction, kind: str) -> None:
    if f.support.is_empty():
        return
    t_min, t_max = f.time_support()
    n_t = f.spec.n_t
    if kind == RETARDED and (t_min < 1 or t_max > n_t - 3):
        raise SolverError(
            f"retarded solve needs source support within t in [1, {n_t - 3}], "
            f"got [{t_min}, {t_max}]"
        )
    if kind == ADVANCED and (t_min < 2 or t_max > n_t - 2):
        raise SolverError(
            f"advanced solve needs source support within t in [2, {n_t - 2}], "
            f"got [{t_min}, {t_max}]"
        )


def retarded(f: TestFunction, params: FieldParams) -> Solution:
    """E_ret f: leapfrog solution of (box + m^2) u = f vanishing before supp f."""
    _check_padding(f, RETARDED)
    spec = params.spec
    u = np.zeros(spec.shape)
    m2 = params.mass**2
    dt2 = spec.dt**2
    for t in range(1, spec.n_t - 1):
        u[t + 1] = 2.0 * u[t] - u[t - 1] + dt2 * (
            laplacian_x(u[t], spec) - m2 * u[t] + f.values[t]
        )
    return Solution(u, f, RETARDED)


def advanced(f: TestFunction, params: FieldParams) -> Solution:
    """E_adv f: time-reflected analogue of ``retarded``."""
    _check_padding(f, ADVANCED)
    spec = params.spec
    u = np.zeros(spec.shape)
    m2 = params.mass**2
    dt2 = spec.dt**2
    for t in range(spec.n_t - 2, 0, -1):
        u[t - 1] = 2.0 * u[t] - u[t + 1] + dt2 * (
            laplacian_x(u[t], spec) - m2 * u[t] + f.values[t]
        )
    return Solution(u, f, ADVANCED)


def pauli_jordan(f: TestFunction, params: FieldParams) -> np.ndarray:
    """E f = E_adv f - E_ret f, a homogeneous solution in the interior."""
    _check_padding(f, RETARDED)
    _check_padding(f, ADVANCED)
    return advanced(f, params).values - retarded(f, params).values


def commutator_form(f: TestFunction, g: TestFunction, params: FieldParams) -> float:
    """E(f, g) = sum f * (E g) * dvol with dvol = dt * dx."""
    if f.spec != params.spec or g.spec != params.spec:
        raise GeometryError("test functions do not live on the solver grid")
    _check_padding(f, RETARDED)
    _check_padding(f, ADVANCED)
    eg = pauli_jordan(g, params)
    return float(np.sum(f.values * eg) * params.spec.dt * params.spec.dx)


def admissible_time_window(spec: LatticeSpec) -> tuple[int, int]:
    """Time slices a source may occupy so that both Green solves fit."""
    return (2, spec.n_t - 3)
