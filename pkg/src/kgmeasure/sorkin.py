"""Superluminal-signaling diagnostics for a naive two-step intervention.

Three agents act on the field: an early kick by unitary W(f), a middle
quadratic kick generated by phi(g)^2, and a late readout of phi(h), with the
early and late regions spacelike separated.  Conjugation through the quadratic
kick shears the readout function,

    h  ->  h' = h + 2 E(g, h) g,

so the readout acquires a component with nonzero commutator against f and the
late expectation shifts by 2 E(g, h) E(f, g) when the early kick is applied.
The module computes this signaling gap along two independent routes: once from
Green-operator solves of the commutator form, and once from the Weyl/Gaussian
moment calculus.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError, SolverError
from .fields import FieldParams, TestFunction, commutator_form
from .lattice import causal_future, causal_past, causally_disjoint
from .weyl import PhaseSpace, field_moment, vacuum_state


@dataclass(frozen=True)
class SorkinConfig:
    """Early kick f, middle kick g, late readout h on a common field."""

    params: FieldParams
    f: TestFunction
    g: TestFunction
    h: TestFunction

    def __post_init__(self):
        spec = self.params.spec
        for name, fn in (("f", self.f), ("g", self.g), ("h", self.h)):
            if fn.spec != spec:
                raise GeometryError(f"{name} does not live on the field's lattice")
            if fn.support.is_empty():
                raise GeometryError(f"{name} must be nonzero")
        if not causally_disjoint(self.f.support, self.h.support):
            raise GeometryError(
                "early and late regions must be causally disjoint, otherwise "
                "a direct signal is unremarkable"
            )
        f_t = self.f.time_support()
        g_t = self.g.time_support()
        h_t = self.h.time_support()
        if not (f_t[1] <= g_t[0] and g_t[1] <= h_t[0]):
            raise GeometryError(
                "time supports must be ordered early kick < middle kick < readout"
            )

    def has_signaling_chain(self) -> bool:
        """True iff supp g meets both J+(supp f) and J-(supp h)."""
        fut = causal_future(self.f.support)
        past = causal_past(self.h.support)
        gm = self.g.support.mask()
        return bool(np.any(gm & fut.mask()) and np.any(gm & past.mask()))


def conjugate_weyl_by_quadratic(g: TestFunction, h: TestFunction, params: FieldParams) -> TestFunction:
    """h' = h + 2 E(g, h) g: the readout function conjugated through the kick.

    The quadratic kick acts on exponentiated fields by shearing the label
    function along g, with a coefficient proportional to the commutator form.
    """
    egh = commutator_form(g, h, params)
    return h + (2.0 * egh) * g


def sheared_readout(cfg: SorkinConfig) -> TestFunction:
    return conjugate_weyl_by_quadratic(cfg.g, cfg.h, cfg.params)


def signaling_gap_green(cfg: SorkinConfig) -> float:
    """Gap from commutator-form solves: 2 E(g, h) E(f, g)."""
    egh = commutator_form(cfg.g, cfg.h, cfg.params)
    efg = commutator_form(cfg.f, cfg.g, cfg.params)
    return 2.0 * egh * efg


def charlie_expectations(cfg: SorkinConfig, state=None) -> dict:
    """Late <phi(h')> with and without the early kick, by the moment calculus.

    Any Gaussian state functional works; the gap itself is state-independent.
    """
    space = PhaseSpace(cfg.params)
    if state is None:
        state = vacuum_state(cfg.params, space)
    base = state.as_functional() if hasattr(state, "as_functional") else state
    h_data = space.data_of(cfg.h)
    g_data = space.data_of(cfg.g)
    f_data = space.data_of(cfg.f)
    sheared = h_data + 2.0 * space.pairing(g_data, h_data) * g_data
    mean_b = field_moment(base, [sheared])
    kicked = base.displaced(f_data)
    mean_ba = field_moment(kicked, [sheared])
    return {
        "mean_B": float(np.real(mean_b)),
        "mean_BA": float(np.real(mean_ba)),
        "gap": float(np.real(mean_ba - mean_b)),
    }


def signaling_gap_phase_space(cfg: SorkinConfig, state=None) -> float:
    """Gap from the Weyl/Gaussian route; agrees with the Green route exactly."""
    return charlie_expectations(cfg, state)["gap"]


def find_signaling_g(
    params: FieldParams,
    f: TestFunction,
    h: TestFunction,
    middle_region,
    sigma: float = 1.5,
    amplitude: float = 1.0,
    threshold: float = 1e-6,
) -> TestFunction:
    """Scan bump centers in the middle region for one that carries a signal.

    Returns the first (deterministic scan order) Gaussian bump g supported in
    ``middle_region`` with |E(f, g)| and |E(g, h)| above ``threshold``.
    Raises GeometryError when the geometry supports no such chain -- in
    particular when neither the outgoing solution of f nor the incoming
    solution of h reaches the middle region at all.
    """
    from .fields import advanced, retarded

    spec = params.spec
    mask = middle_region.mask()
    ret_f = retarded(f, params).values
    adv_h = advanced(h, params).values
    if not (np.any(mask & (ret_f != 0.0)) and np.any(mask & (adv_h != 0.0))):
        raise GeometryError(
            "no signaling geometry: the middle region must meet both the "
            "outgoing solution of f and the incoming solution of h"
        )
    t_lo, t_hi = middle_region.time_range()
    xs_by_t = {t: np.nonzero(mask[t])[0] for t in range(t_lo, t_hi + 1)}
    all_x = sorted({p.x for p in middle_region.points})
    box = (t_lo, t_hi, min(all_x), max(all_x))
    width = max(all_x) - min(all_x) + 1
    height = t_hi - t_lo + 1
    # wide bumps first: a signal needs g to straddle both light cones at once
    widths = sorted({max(width / 2.0, sigma), max(width / 4.0, sigma), sigma}, reverse=True)
    t_step = max(1, height // 4)
    x_step = max(1, width // 8)
    for sigma_x in widths:
        for t in range(t_lo, t_hi + 1, t_step):
            for x in xs_by_t[t][::x_step]:
                g = TestFunction.gaussian_bump(
                    spec, t, int(x), max(height / 4.0, 1.0), sigma_x, amplitude, support_box=box
                )
                if g.support.is_empty():
                    continue
                try:
                    efg = commutator_form(f, g, params)
                    egh = commutator_form(g, h, params)
                except SolverError:
                    continue
                if abs(efg) > threshold and abs(egh) > threshold:
                    return g
    raise GeometryError("no signaling geometry: bump scan found no middle function")
