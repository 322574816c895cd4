"""Probe-mediated measurements: effects, induced instruments, state updates.

A measurement consists of a probe field prepared in a Gaussian state sigma,
coupled to the system inside a compact zone (giving a symplectic scattering
map), and a probe effect B read out afterwards.  Everything observable about
the scheme is carried by the pre-instrument

    I(B) : omega  ->  (omega x sigma)(Theta(. x B)),

an unnormalized system functional whose total weight is the outcome
probability and whose normalization is the selective post-measurement state.
Because Theta acts linearly on Cauchy data and all states are finite
displaced-Gaussian combinations, I(B) has a closed form and is evaluated
without any truncation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CompositionError, SectorError
from .lattice import enumerate_causal_orders
from .scattering import (
    CouplingProfile,
    ScatteringMap,
    induced_observable,
    scattering_map,
    scattering_map_multi,
)
from .weyl import (
    AlgebraElement,
    CompositeSpace,
    StateFunctional,
    _as_functional,
    _same_space,
    adjoint,
    evaluate,
    weyl_multiply,
)


def cosine_effect(space, g, theta: float = 0.0) -> AlgebraElement:
    """(1 + cos(phi(g) + theta)) / 2, a two-outcome effect in the Weyl algebra."""
    if not isinstance(g, np.ndarray):
        g = space.data_of(g)
    half = AlgebraElement.weyl(space, np.zeros(space.dim), 0.5)
    plus = AlgebraElement.weyl(space, g, 0.25 * np.exp(1j * theta))
    minus = AlgebraElement.weyl(space, -g, 0.25 * np.exp(-1j * theta))
    return half + plus + minus


def complement_effect(e: AlgebraElement) -> AlgebraElement:
    return AlgebraElement.unit(e.space) - e


def mix_effects(pairs) -> AlgebraElement:
    """Convex combination sum p_i E_i; weights must be a probability vector."""
    weights = [p for p, _ in pairs]
    if any(p < 0 for p in weights) or abs(sum(weights) - 1.0) > 1e-12:
        raise SectorError("mixture weights must be nonnegative and sum to 1")
    out = AlgebraElement(pairs[0][1].space)
    for p, e in pairs:
        out = out + p * e
    return out


def povm_defect(effects) -> float:
    """How far a family of effects is from resolving the identity."""
    total = effects[0]
    for e in effects[1:]:
        total = total + e
    diff = total - AlgebraElement.unit(total.space)
    return max((abs(c) for c, _ in diff.items()), default=0.0)


def noise_operator(e: AlgebraElement) -> AlgebraElement:
    """N(E) = E - E^2, the intrinsic unsharpness of an effect."""
    return e - weyl_multiply(e, e)


def noise_statistics(state, e: AlgebraElement) -> dict:
    """Outcome probability, binary variance, dispersion and intrinsic noise.

    variance = p - p^2 is the spread of the recorded yes/no outcome;
    dispersion_sq = <E^2> - <E>^2 is the spread of the effect itself; their
    difference <E - E^2> is the noise carried by the effect's unsharpness and
    is nonnegative for genuine effects.
    """
    p = float(np.real(evaluate(state, e)))
    e2 = float(np.real(evaluate(state, weyl_multiply(e, e))))
    noise = p - e2
    return {
        "probability": p,
        "variance": p - p * p,
        "dispersion_sq": e2 - p * p,
        "noise": noise,
    }


@dataclass(frozen=True)
class PreInstrument:
    """A probe preparation together with its scattering map."""

    sigma: object
    smap: ScatteringMap

    def __post_init__(self):
        _same_space(_as_functional(self.sigma).space, self.probe_space)

    @property
    def system_space(self):
        return self.smap.space.parts[0]

    @property
    def probe_space(self):
        rest = self.smap.space.parts[1:]
        return rest[0] if len(rest) == 1 else CompositeSpace(rest)

    def induced(self, b: AlgebraElement) -> AlgebraElement:
        """eps_sigma(B): the system observable measured by reading B."""
        sigma = _as_functional(self.sigma)
        if isinstance(self.probe_space, CompositeSpace):
            raise SectorError("induced observable needs a single-probe map")
        return induced_observable(sigma, self.smap, b, probe_index=1)


def apply_pre_instrument(omega, pre: PreInstrument, b: AlgebraElement) -> StateFunctional:
    """I(B) applied to omega, as an unnormalized system functional.

    The returned functional's total weight is the outcome probability
    omega(eps_sigma(B)); dividing by it gives the selective update, and
    b = unit gives the nonselective update directly.
    """
    omega_f = _as_functional(omega)
    sigma_f = _as_functional(pre.sigma)
    _same_space(omega_f.space, pre.system_space)
    _same_space(b.space, pre.probe_space)
    t = pre.smap.matrix
    n0 = pre.system_space.dim
    m_sys, m_probe = t[:, :n0], t[:, n0:]
    dim = pre.smap.space.dim
    g_comb = np.zeros((dim, dim))
    g_comb[:n0, :n0] = omega_f.covariance
    g_comb[n0:, n0:] = sigma_f.covariance
    new_cov = m_sys.T @ g_comb @ m_sys
    new_cov = 0.5 * (new_cov + new_cov.T)
    comps = []
    for w, lin in omega_f.components:
        for v, ell in sigma_f.components:
            lam = np.concatenate([lin, ell])
            for beta, g in b.items():
                c = m_probe @ g
                weight = w * v * beta * np.exp(lam @ c - 0.5 * (c @ g_comb @ c))
                comps.append((weight, m_sys.T @ (lam - g_comb @ c)))
    return StateFunctional(omega_f.space, new_cov, comps)


def outcome_probability(omega, pre: PreInstrument, b: AlgebraElement) -> float:
    return apply_pre_instrument(omega, pre, b).norm


def selective_update(omega, pre: PreInstrument, b: AlgebraElement) -> StateFunctional:
    """Post-measurement state conditioned on the effect b registering."""
    return apply_pre_instrument(omega, pre, b).normalized()


def nonselective_update(omega, pre: PreInstrument) -> StateFunctional:
    """Post-measurement state when the outcome is ignored."""
    return apply_pre_instrument(omega, pre, AlgebraElement.unit(pre.probe_space))


def conditional_probability(a: AlgebraElement, b: AlgebraElement, omega, pre: PreInstrument) -> float:
    """Probability of system effect a given that probe effect b registered."""
    from .errors import ConditioningError

    updated = apply_pre_instrument(omega, pre, b)
    if abs(updated.norm) <= 1e-12:
        raise ConditioningError("conditioning on an outcome of zero probability")
    return float(np.real(evaluate(updated, a)) / updated.norm)


def povm_decomposition_check(omega, pre: PreInstrument, effects, datas) -> float:
    """Defect of sum_i I(E_i)(omega) against I(1)(omega) on sampled generators."""
    parts = [apply_pre_instrument(omega, pre, e) for e in effects]
    whole = nonselective_update(omega, pre)
    defect = 0.0
    for d in datas:
        total = sum(p.char_value(d) for p in parts)
        defect = max(defect, abs(total - whole.char_value(d)))
    return defect


@dataclass(frozen=True)
class ProbeSetting:
    """One probe: field parameters, coupling to the system, preparation, readout."""

    params: object
    coupling: CouplingProfile
    sigma: object
    effect: AlgebraElement


def _sequential_order(settings) -> tuple[int, ...]:
    zones = [s.coupling.zone for s in settings]
    orders = enumerate_causal_orders(zones)
    if not orders:
        raise CompositionError("probe coupling zones cannot be causally ordered")
    return orders[0]


def compose_probes(omega, sys_params, settings, order=None) -> StateFunctional:
    """Sequential route: apply each probe's pre-instrument past-to-future.

    ``order`` overrides the automatic causal ordering of the coupling zones;
    an unorderable configuration raises CompositionError.
    """
    if order is None:
        order = _sequential_order(settings)
    state = _as_functional(omega)
    for idx in order:
        s = settings[idx]
        pre = PreInstrument(s.sigma, scattering_map(s.coupling, sys_params, s.params))
        state = apply_pre_instrument(state, pre, s.effect)
    return state


def compose_probes_joint(omega, sys_params, settings) -> StateFunctional:
    """Super-probe route: one combined map, product preparation, tensor effect."""
    from .weyl import product_state

    fields = [sys_params] + [s.params for s in settings]
    couplings = [(0, i + 1, s.coupling) for i, s in enumerate(settings)]
    smap = scattering_map_multi(fields, couplings)
    probe_space = CompositeSpace(smap.space.parts[1:])
    sigma = product_state(probe_space, [s.sigma for s in settings])
    b = AlgebraElement.unit(probe_space)
    for i, s in enumerate(settings):
        lifted = AlgebraElement(
            probe_space, [(c, probe_space.embed(i, d)) for c, d in s.effect.items()]
        )
        b = weyl_multiply(b, lifted)
    pre = PreInstrument(sigma, smap)
    return apply_pre_instrument(omega, pre, b)


def functional_distance(s1: StateFunctional, s2: StateFunctional, datas) -> float:
    """Max characteristic-functional gap over a family of probe data vectors."""
    return max(abs(s1.char_value(d) - s2.char_value(d)) for d in datas)


def expectation_gap(s1, s2, element: AlgebraElement) -> float:
    """|omega_1(A) - omega_2(A)| for one observable."""
    return abs(evaluate(s1, element) - evaluate(s2, element))


def is_effect_selfadjoint(e: AlgebraElement, tol: float = 1e-10) -> bool:
    diff = e - adjoint(e)
    return all(abs(c) <= tol for c, _ in diff.items())


def impossible_measurement_test(omega, alice: PreInstrument, bob: PreInstrument,
                                charlie: AlgebraElement, charlie_region) -> float:
    """Change of a late observable caused by toggling an early measurement.

    Alice measures nonselectively in an early zone, Bob in a middle zone, and
    the observable ``charlie`` is evaluated afterwards in a late region that
    is causally disjoint from Alice's zone.  The returned gap

        | <charlie> with Alice's coupling on  -  <charlie> with it off |

    vanishes up to round-off: every term of the updated late observable that
    differs from the uncoupled one is supported in the causal shadow of Bob's
    zone intersected with the readout's past, which cannot reach Alice.
    """
    from .lattice import causal_hull, causally_disjoint, precedes
    from .errors import GeometryError

    k1, k2 = alice.smap.zone, bob.smap.zone
    if not causally_disjoint(k1.region, charlie_region):
        raise GeometryError("violated predicate: causally_disjoint(K1, charlie region)")
    if not precedes(k1, k2):
        raise GeometryError("violated predicate: precedes(K1, K2)")
    from .lattice import CouplingZone

    hull = CouplingZone(causal_hull(charlie_region))
    if not precedes(k2, hull):
        raise GeometryError("violated predicate: precedes(K2, hull(charlie region))")
    with_alice = nonselective_update(nonselective_update(omega, alice), bob)
    without = nonselective_update(omega, bob)
    return float(abs(evaluate(with_alice, charlie) - evaluate(without, charlie)))


def signaling_contrast(sys_params, probe_params, f, g, h,
                       alice_strength=1.0, bob_strength=1.0) -> dict:
    """Headline demonstration: mediated measurements do not signal, kicks do.

    f, g, h are nonnegative bumps in the early, middle and late regions of a
    signaling geometry (f and h spacelike).  The mediated route couples probes
    through profiles f and g and toggles Alice's coupling; the naive route is
    the quadratic unitary kick generated by phi(g)^2 after the early kick
    W(f).  Returns both gaps; the first is round-off, the second generically
    above threshold.
    """
    from .sorkin import SorkinConfig, signaling_gap_green
    from .weyl import PhaseSpace, vacuum_state

    space = PhaseSpace(sys_params)
    omega = vacuum_state(sys_params, space)
    sigma = vacuum_state(probe_params)
    alice = PreInstrument(
        sigma, scattering_map(CouplingProfile(alice_strength, f), sys_params, probe_params)
    )
    bob = PreInstrument(
        sigma, scattering_map(CouplingProfile(bob_strength, g), sys_params, probe_params)
    )
    charlie = cosine_effect(space, h, 0.4)
    gap = impossible_measurement_test(omega, alice, bob, charlie, h.support)
    naive = signaling_gap_green(SorkinConfig(sys_params, f, g, h))
    return {"mediated_gap": gap, "naive_gap": float(naive)}
