"""Coupled system-probe dynamics and the induced scattering map.

The coupled model is a pair (or chain) of scalar fields with a bilinear
interaction switched on inside a compact coupling zone K:

    (box + m_sys^2)   phi = -lambda rho psi
    (box + m_probe^2) psi = -lambda rho phi

with rho a fixed nonnegative profile supported on K.  Because the interaction
is linear, comparing coupled and uncoupled dynamics between the bottom and top
of the grid yields a linear map T on combined Cauchy data ("free-forward,
coupled-backward") which is exactly symplectic for the staggered leapfrog
pairing.  The Weyl-algebra scattering automorphism is then W(F) -> W(T F).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GeometryError, SectorError, SolverError
from .fields import FieldParams, TestFunction, laplacian_x
from .lattice import CouplingZone
from .weyl import (
    AlgebraElement,
    CompositeSpace,
    PhaseSpace,
    QuasiFreeState,
    _same_space,
)


@dataclass(frozen=True)
class CouplingProfile:
    """Strength and spacetime profile of one bilinear coupling."""

    strength: float
    shape: TestFunction

    def __post_init__(self):
        if np.any(self.shape.values < 0):
            raise GeometryError("coupling profile must be nonnegative")
        if self.strength != 0 and not self.shape.support.is_empty():
            t_min, t_max = self.shape.time_support()
            n_t = self.shape.spec.n_t
            if t_min < 2 or t_max > n_t - 3:
                raise SolverError(
                    f"coupling zone needs 2 padding slices; support t in "
                    f"[{t_min}, {t_max}] does not fit [2, {n_t - 3}]"
                )

    @property
    def zone(self) -> CouplingZone:
        return CouplingZone(self.shape.support)

    def is_trivial(self) -> bool:
        return self.strength == 0 or self.shape.support.is_empty()


def _split_pairs(data: np.ndarray, fields) -> list[tuple[np.ndarray, np.ndarray]]:
    """Cut a (dim, m) data block into per-field (bottom, top) slice pairs."""
    if data.ndim == 1:
        data = data[:, None]
    pairs, start = [], 0
    for f in fields:
        n = f.spec.n_x
        pairs.append((data[start : start + n].copy(), data[start + n : start + 2 * n].copy()))
        start += 2 * n
    return pairs


def _join_pairs(pairs) -> np.ndarray:
    return np.concatenate([np.concatenate([a, b]) for a, b in pairs])


def _step_sources(fields, couplings, slices, t):
    """-lambda rho(t) (partner field) for each field, accumulated."""
    src = [np.zeros_like(s) for s in slices]
    for i, j, strength, shape in couplings:
        if strength == 0:
            continue
        rho_t = strength * shape.values[t][:, None]
        src[i] = src[i] - rho_t * slices[j]
        src[j] = src[j] - rho_t * slices[i]
    return src


def _evolve(pairs, fields, couplings, forward: bool):
    """Leapfrog all fields across the grid; returns the far-end slice pair.

    ``pairs`` holds (u[0], u[1]) per field when forward, (u[n_t-2], u[n_t-1])
    when backward.  All fields must share one grid.
    """
    spec = fields[0].spec
    dt2 = spec.dt**2
    if forward:
        prev = [a for a, _ in pairs]
        curr = [b for _, b in pairs]
        steps = range(1, spec.n_t - 1)
    else:
        curr = [a for a, _ in pairs]
        prev = [b for _, b in pairs]  # "prev" is the slice above when going down
        steps = range(spec.n_t - 2, 0, -1)
    for t in steps:
        src = _step_sources(fields, couplings, curr, t)
        for i, f in enumerate(fields):
            nxt = 2.0 * curr[i] - prev[i] + dt2 * (
                laplacian_x(curr[i], spec) - f.mass**2 * curr[i] + src[i]
            )
            prev[i] = curr[i]
            curr[i] = nxt
    if forward:
        return [(p, c) for p, c in zip(prev, curr)]
    return [(c, p) for p, c in zip(prev, curr)]


def free_solution(data: np.ndarray, params: FieldParams) -> np.ndarray:
    """Full-grid free solution generated by bottom-slice Cauchy data."""
    spec = params.spec
    n = spec.n_x
    u = np.zeros(spec.shape)
    u[0], u[1] = data[:n], data[n : 2 * n]
    dt2 = spec.dt**2
    for t in range(1, spec.n_t - 1):
        u[t + 1] = 2.0 * u[t] - u[t - 1] + dt2 * (
            laplacian_x(u[t], spec) - params.mass**2 * u[t]
        )
    return u


@dataclass(frozen=True)
class ScatteringMap:
    """Symplectic matrix of the scattering automorphism on combined data."""

    space: CompositeSpace
    matrix: np.ndarray
    couplings: tuple

    @property
    def zone(self) -> CouplingZone:
        regions = [c.shape.support for _, _, c in self.couplings if not c.is_trivial()]
        if not regions:
            raise GeometryError("trivial scattering map has no coupling zone")
        combined = regions[0]
        for r in regions[1:]:
            combined = combined.union(r)
        return CouplingZone(combined)

    def omega(self) -> np.ndarray:
        return self.space.omega_matrix()

    def symplectic_defect(self) -> float:
        omega = self.omega()
        return float(np.max(np.abs(self.matrix.T @ omega @ self.matrix - omega)))

    def apply(self, data: np.ndarray) -> np.ndarray:
        return self.matrix @ data


def _check_common_grid(fields) -> None:
    specs = {f.spec for f in fields}
    if len(specs) != 1:
        raise SolverError("all coupled fields must share one lattice")


def scattering_map_multi(fields, couplings) -> ScatteringMap:
    """Scattering map for several fields with bilinear pair couplings.

    ``fields`` is a list of FieldParams (field 0 is the system); ``couplings``
    is a list of (i, j, CouplingProfile) pairs.  The map sends Cauchy data of
    an observable through free evolution to the top of the grid and back down
    through the coupled dynamics, comparing the two dynamics exactly.
    """
    _check_common_grid([f for f in fields])
    coup = tuple((i, j, c) for i, j, c in couplings)
    flat = [(i, j, c.strength, c.shape) for i, j, c in coup]
    dim = sum(2 * f.spec.n_x for f in fields)
    basis = np.eye(dim)
    pairs = _split_pairs(basis, fields)
    top = _evolve(pairs, fields, [], forward=True)
    bottom = _evolve(top, fields, flat, forward=False)
    matrix = _join_pairs(bottom)
    names = ["system"] + [f"probe{i}" for i in range(1, len(fields))]
    space = CompositeSpace(tuple(PhaseSpace(f, n) for f, n in zip(fields, names)))
    return ScatteringMap(space, matrix, coup)


def scattering_map(
    coupling: CouplingProfile, sys: FieldParams, probe: FieldParams
) -> ScatteringMap:
    """Two-field system-probe scattering map."""
    return scattering_map_multi([sys, probe], [(0, 1, coupling)])


def coupled_evolve(
    data: np.ndarray,
    coupling: CouplingProfile,
    sys: FieldParams,
    probe: FieldParams,
) -> np.ndarray:
    """Evolve combined bottom-slice data to the top of the grid, coupled."""
    _check_common_grid([sys, probe])
    fields = [sys, probe]
    pairs = _split_pairs(np.asarray(data, dtype=float), fields)
    out = _evolve(pairs, fields, [(0, 1, coupling.strength, coupling.shape)], forward=True)
    joined = _join_pairs(out)
    return joined[:, 0] if np.asarray(data).ndim == 1 else joined


def free_evolve(data: np.ndarray, fields) -> np.ndarray:
    """Uncoupled counterpart of :func:`coupled_evolve` for any field list."""
    _check_common_grid(fields)
    pairs = _split_pairs(np.asarray(data, dtype=float), fields)
    out = _evolve(pairs, fields, [], forward=True)
    joined = _join_pairs(out)
    return joined[:, 0] if np.asarray(data).ndim == 1 else joined


def theta_on_weyl(smap: ScatteringMap, x):
    """Apply the scattering automorphism to a generator or algebra element."""
    if isinstance(x, AlgebraElement):
        _same_space(x.space, smap.space)
        return AlgebraElement(smap.space, [(c, smap.apply(d)) for c, d in x.items()])
    data = np.asarray(x, dtype=float)
    if data.shape != (smap.space.dim,):
        raise SectorError("data does not fit the combined phase space")
    return smap.apply(data)


def eta(sigma: QuasiFreeState, a: AlgebraElement, probe_index: int = -1) -> AlgebraElement:
    """Partial evaluation in the probe state: W(f + g) -> sigma(W(g)) W(f)."""
    space = a.space
    if not isinstance(space, CompositeSpace):
        raise SectorError("eta needs an element of a combined phase space")
    parts = list(space.parts)
    probe_index = probe_index % len(parts)
    _same_space(sigma.space, parts[probe_index])
    rest = [p for i, p in enumerate(parts) if i != probe_index]
    out_space = rest[0] if len(rest) == 1 else CompositeSpace(tuple(rest))
    out = AlgebraElement(out_space)
    for coeff, data in a.items():
        blocks = space.split(data)
        probe_data = blocks[probe_index]
        kept = [b for i, b in enumerate(blocks) if i != probe_index]
        weight = sigma.char_value(probe_data)
        out._add_term(coeff * weight, np.concatenate(kept))
    return out


def induced_observable(
    sigma: QuasiFreeState, smap: ScatteringMap, b: AlgebraElement, probe_index: int = -1
) -> AlgebraElement:
    """eps_sigma(B) = eta_sigma(Theta(1 (x) B)) as a system-sector element."""
    space = smap.space
    probe_index = probe_index % len(space.parts)
    _same_space(b.space, space.parts[probe_index])
    lifted = AlgebraElement(
        space, [(c, space.embed(probe_index, d)) for c, d in b.items()]
    )
    return eta(sigma, theta_on_weyl(smap, lifted), probe_index)


def locality_defect(smap: ScatteringMap, data: np.ndarray) -> float:
    """Max-norm of (S - 1) applied to one data vector."""
    return float(np.max(np.abs(smap.apply(data) - data)))
