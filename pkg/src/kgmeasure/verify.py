"""Randomized invariant suites with frozen tolerances.

Each suite draws its scenarios from a seeded generator and returns plain
result rows (scenario, quantity, value, tolerance, passed) so that the CLI
can emit them as CSV and the test suite can assert on them directly.  The
default lattice for the suites is 32 x 96 with dt = dx = 0.1 and unit system
mass: small enough to keep the whole battery under a couple of minutes,
large enough that every geometry of interest fits without cone wrap-around.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GeometryError
from .fields import (
    FieldParams,
    TestFunction,
    advanced,
    apply_klein_gordon,
    commutator_form,
    pauli_jordan,
    retarded,
)
from .instruments import (
    PreInstrument,
    apply_pre_instrument,
    cosine_effect,
    complement_effect,
    compose_probes,
    compose_probes_joint,
    impossible_measurement_test,
    noise_statistics,
    nonselective_update,
    povm_decomposition_check,
    ProbeSetting,
)
from .lattice import LatticeSpec, Region, causal_future, causal_past, causally_disjoint
from .scattering import (
    CouplingProfile,
    induced_observable,
    locality_defect,
    scattering_map,
)
from .sorkin import SorkinConfig, charlie_expectations, signaling_gap_green
from .weyl import (
    AlgebraElement,
    PhaseSpace,
    evaluate,
    vacuum_state,
)


@dataclass(frozen=True)
class Row:
    scenario: str
    quantity: str
    value: float
    tolerance: float
    passed: bool


def _leq_row(scenario, quantity, value, tol) -> Row:
    return Row(scenario, quantity, float(value), float(tol), bool(value <= tol))


def _geq_row(scenario, quantity, value, bound) -> Row:
    return Row(scenario, quantity, float(value), float(bound), bool(value >= bound))


def default_lattice() -> LatticeSpec:
    return LatticeSpec(32, 96, dx=0.1, dt=0.1)


def default_system(spec=None) -> FieldParams:
    return FieldParams(1.0, spec or default_lattice())


def _random_bump(rng, spec, t_lo, t_hi, x_lo, x_hi, amplitude=1.0, half_t=3, half_x=4):
    """Bump with random center in the given window, box-truncated."""
    t0 = int(rng.integers(t_lo, t_hi + 1))
    x0 = int(rng.integers(x_lo, x_hi + 1))
    box = (
        max(2, t0 - half_t),
        min(spec.n_t - 3, t0 + half_t),
        max(0, x0 - half_x),
        min(spec.n_x - 1, x0 + half_x),
    )
    sig_t = 0.5 + 1.0 * rng.random()
    sig_x = 0.5 + 1.5 * rng.random()
    return TestFunction.gaussian_bump(spec, t0, x0, sig_t, sig_x, amplitude, support_box=box)


def random_signaling_geometry(rng, spec=None, params=None, amplitude=30.0):
    """(f, g, h): early and late bumps spacelike, wide middle bump straddling.

    Rejection-samples until the naive kick gap 2 E(g,h) E(f,g) exceeds 1e-3,
    so every returned geometry genuinely signals under the naive update.
    """
    spec = spec or default_lattice()
    params = params or default_system(spec)
    for _ in range(200):
        f = _random_bump(rng, spec, 4, 6, 12, 38, amplitude, half_t=2)
        t_c = int(rng.integers(24, 28))
        # late bump placed so its box is spacelike to f's box, no cone wrap
        x_c = int(rng.integers(62, 84))
        h = TestFunction.gaussian_bump(
            spec, t_c, x_c, 0.5 + rng.random(), 0.5 + 1.5 * rng.random(), amplitude,
            support_box=(t_c - 3, min(spec.n_t - 3, t_c + 3), x_c - 4, x_c + 4),
        )
        if not causally_disjoint(f.support, h.support):
            continue
        t_b = int(rng.integers(13, 18))
        g = TestFunction.gaussian_bump(
            spec, t_b, 48, 1.5, 4.0 + 8.0 * rng.random(), amplitude,
            support_box=(t_b - 3, t_b + 3, 20, 72),
        )
        if g.time_support()[1] >= h.time_support()[0]:
            continue
        if f.time_support()[1] > g.time_support()[0]:
            continue
        if abs(signaling_gap_green(SorkinConfig(params, f, g, h))) > 1e-3:
            return f, g, h
    raise GeometryError("failed to sample a signaling geometry")


def _random_disjoint_pair(rng, spec, amplitude=1.0):
    for _ in range(500):
        f = _random_bump(rng, spec, 3, spec.n_t - 4, 0, spec.n_x - 1, amplitude)
        g = _random_bump(rng, spec, 3, spec.n_t - 4, 0, spec.n_x - 1, amplitude)
        if f.support.is_empty() or g.support.is_empty():
            continue
        if causally_disjoint(f.support, g.support):
            return f, g
    raise GeometryError("failed to sample a causally disjoint pair")


def suite_green(rng, n=20, scale=1.0) -> list[Row]:
    """Green-operator residuals and exact cone containment of solutions."""
    spec = default_lattice()
    params = default_system(spec)
    rows = []
    worst_res, worst_cone = 0.0, 0.0
    for _ in range(n):
        f = _random_bump(rng, spec, 3, spec.n_t - 4, 0, spec.n_x - 1, 1.0 + 4.0 * rng.random())
        for solve, cone in ((retarded, causal_future), (advanced, causal_past)):
            sol = solve(f, params)
            res = np.max(np.abs(apply_klein_gordon(sol.values, params) - f.values)[1:-1])
            worst_res = max(worst_res, float(res))
            allowed = cone(f.support).mask()
            leak = np.max(np.abs(np.where(allowed, 0.0, sol.values)))
            worst_cone = max(worst_cone, float(leak))
    rows.append(_leq_row("green", "wave_equation_residual", worst_res, 1e-10 * scale))
    rows.append(_leq_row("green", "cone_containment_leak", worst_cone, 0.0))
    return rows


def suite_commutator(rng, n=50, scale=1.0) -> list[Row]:
    """Causality and antisymmetry of the commutator form."""
    spec = default_lattice()
    params = default_system(spec)
    worst_disjoint = 0.0
    for _ in range(n):
        f, g = _random_disjoint_pair(rng, spec)
        worst_disjoint = max(worst_disjoint, abs(commutator_form(f, g, params)))
    worst_anti = 0.0
    for _ in range(n):
        f = _random_bump(rng, spec, 3, spec.n_t - 4, 0, spec.n_x - 1, 5.0)
        g = _random_bump(rng, spec, 3, spec.n_t - 4, 0, spec.n_x - 1, 5.0)
        worst_anti = max(
            worst_anti, abs(commutator_form(f, g, params) + commutator_form(g, f, params))
        )
    return [
        _leq_row("commutator", "spacelike_pairing", worst_disjoint, 1e-12 * scale),
        _leq_row("commutator", "antisymmetry_defect", worst_anti, 1e-10 * scale),
    ]


def bundled_sorkin_geometry(spec=None):
    """The fixed demonstration layout used by the `sorkin` subcommand."""
    spec = spec or default_lattice()
    f = TestFunction.gaussian_bump(spec, 5, 20, 1.2, 1.2, 30.0, support_box=(2, 8, 16, 24))
    g = TestFunction.gaussian_bump(spec, 15, 45, 1.5, 6.0, 30.0, support_box=(12, 18, 25, 65))
    h = TestFunction.gaussian_bump(spec, 26, 70, 1.2, 1.2, 30.0, support_box=(23, 29, 66, 74))
    return f, g, h


def suite_sorkin(rng, scale=1.0) -> list[Row]:
    """Two-route agreement and magnitude of the naive signaling gap."""
    params = default_system()
    f, g, h = bundled_sorkin_geometry(params.spec)
    cfg = SorkinConfig(params, f, g, h)
    green = signaling_gap_green(cfg)
    moment = charlie_expectations(cfg)["gap"]
    return [
        _leq_row("sorkin", "route_disagreement", abs(green - moment), 1e-10 * scale),
        _geq_row("sorkin", "gap_magnitude", abs(green), 1e-3),
    ]


def _random_zone_profile(rng, spec, strength=0.5):
    t0 = int(rng.integers(12, 18))
    x0 = int(rng.integers(30, 60))
    shape = TestFunction.gaussian_bump(
        spec, t0, x0, 1.0 + rng.random(), 1.0 + 2.0 * rng.random(), 1.0,
        support_box=(t0 - 3, t0 + 3, x0 - 5, x0 + 5),
    )
    return CouplingProfile(strength * (0.5 + rng.random()), shape)


def _perp_data(rng, spec, space, zone_region, amplitude=1.0):
    """Cauchy data of a solution staying spacelike to the zone (or None)."""
    from .lattice import causal_complement

    comp = causal_complement(zone_region)
    for _ in range(200):
        f = _random_bump(rng, spec, 3, spec.n_t - 4, 0, spec.n_x - 1, amplitude, half_t=2, half_x=2)
        if f.support.is_empty():
            continue
        sol_support = Region.from_mask(spec, pauli_jordan(f, space.params) != 0.0)
        if all(p in comp.points for p in sol_support.points):
            return space.data_of(f)
    return None


def suite_scattering(rng, n_loc=10, scale=1.0) -> list[Row]:
    """Symplecticity, locality and coupling-off identity of the scattering map."""
    spec = default_lattice()
    params = default_system(spec)
    probe = FieldParams(1.3, spec)
    space = PhaseSpace(params)
    coupling = _random_zone_profile(rng, spec)
    smap = scattering_map(coupling, params, probe)
    rows = [_leq_row("scattering", "symplectic_defect", smap.symplectic_defect(), 1e-8 * scale)]
    worst = 0.0
    found = 0
    while found < n_loc:
        d = _perp_data(rng, spec, space, coupling.zone.region)
        if d is None:
            continue
        found += 1
        comb = np.concatenate([d, np.zeros(2 * spec.n_x)])
        worst = max(worst, locality_defect(smap, comb))
    rows.append(_leq_row("scattering", "locality_defect", worst, 1e-9 * scale))
    off = scattering_map(CouplingProfile(0.0, coupling.shape), params, probe)
    ident = np.max(np.abs(off.matrix - np.eye(off.space.dim)))
    rows.append(_leq_row("scattering", "coupling_off_identity", ident, 1e-12 * scale))
    return rows


def _random_state(rng, space, vac):
    """Vacuum or a randomly displaced vacuum on the given space."""
    if rng.random() < 0.3:
        return vac.as_functional()
    d = rng.normal(scale=0.3, size=space.dim)
    return vac.as_functional().displaced(d)


def suite_induced(rng, n_states=10, n_pairs=20, scale=1.0) -> list[Row]:
    """Causality and expectation consistency of induced observables."""
    spec = default_lattice()
    params = default_system(spec)
    probe_params = FieldParams(1.3, spec)
    sys_space = PhaseSpace(params)
    probe_space = PhaseSpace(probe_params, "probe1")
    sigma = vacuum_state(probe_params)
    vac = vacuum_state(params, sys_space)
    coupling = _random_zone_profile(rng, spec)
    smap = scattering_map(coupling, params, probe_params)
    # probe readout localized spacelike to the coupling zone
    worst_causal = 0.0
    found = 0
    while found < 3:
        d = _perp_data(rng, spec, probe_space, coupling.zone.region)
        if d is None:
            continue
        found += 1
        b = cosine_effect(probe_space, d, float(rng.uniform(0, 2 * np.pi)))
        eps = induced_observable(sigma, smap, b)
        sb = evaluate(sigma, b)
        for _ in range(n_states):
            omega = _random_state(rng, sys_space, vac)
            worst_causal = max(worst_causal, abs(evaluate(omega, eps) - sb * omega.norm))
    rows = [_leq_row("induced", "spacelike_probe_defect", worst_causal, 1e-10 * scale)]
    worst_two = 0.0
    for _ in range(n_pairs):
        g = rng.normal(scale=0.4, size=probe_space.dim)
        omega = _random_state(rng, sys_space, vac)
        eps = induced_observable(sigma, smap, AlgebraElement.weyl(probe_space, g))
        route_a = evaluate(omega, eps)
        lifted = smap.apply(smap.space.embed(1, g))
        parts = smap.space.split(lifted)
        route_b = omega.char_value(parts[0]) * sigma.char_value(parts[1])
        worst_two = max(worst_two, abs(route_a - route_b))
    rows.append(_leq_row("induced", "expectation_consistency", worst_two, 1e-10 * scale))
    return rows


def _random_effect(rng, space, amplitude=0.6):
    g = rng.normal(scale=amplitude, size=space.dim)
    return cosine_effect(space, g, float(rng.uniform(0, 2 * np.pi)))


def suite_updates(rng, n_scenarios=20, scale=1.0) -> list[Row]:
    """POVM additivity, spacelike invariance, and two-probe composition laws."""
    spec = default_lattice()
    params = default_system(spec)
    sys_space = PhaseSpace(params)
    vac = vacuum_state(params, sys_space)
    probe_params = FieldParams(1.3, spec)
    probe_space = PhaseSpace(probe_params, "probe1")
    sigma = vacuum_state(probe_params)

    coupling = _random_zone_profile(rng, spec)
    pre = PreInstrument(sigma, scattering_map(coupling, params, probe_params))
    e = _random_effect(rng, probe_space)
    omega = vac.as_functional()
    datas = [rng.normal(scale=0.3, size=sys_space.dim) for _ in range(6)]
    povm_defect_val = povm_decomposition_check(omega, pre, [e, complement_effect(e)], datas)
    rows = [_leq_row("updates", "povm_additivity", povm_defect_val, 1e-10 * scale)]

    worst_ns = 0.0
    found = 0
    while found < 5:
        d = _perp_data(rng, spec, sys_space, coupling.zone.region)
        if d is None:
            continue
        found += 1
        a = AlgebraElement.weyl(sys_space, d)
        ns = nonselective_update(omega, pre)
        worst_ns = max(worst_ns, abs(evaluate(ns, a) - evaluate(omega, a)))
    rows.append(_leq_row("updates", "nonselective_spacelike_invariance", worst_ns, 1e-10 * scale))

    worst_seq, worst_swap = 0.0, 0.0
    probes = 0
    while probes < n_scenarios:
        # early and late zones, always orderable; sometimes also spacelike
        t1 = int(rng.integers(6, 10))
        t2 = int(rng.integers(20, 24))
        x1 = int(rng.integers(10, 40))
        x2 = int(rng.integers(55, 85))
        s1 = TestFunction.gaussian_bump(spec, t1, x1, 1.0, 1.5, 1.0,
                                        support_box=(t1 - 2, t1 + 2, x1 - 4, x1 + 4))
        s2 = TestFunction.gaussian_bump(spec, t2, x2, 1.0, 1.5, 1.0,
                                        support_box=(t2 - 2, t2 + 2, x2 - 4, x2 + 4))
        c1 = CouplingProfile(0.4 + 0.4 * rng.random(), s1)
        c2 = CouplingProfile(0.4 + 0.4 * rng.random(), s2)
        p2_params = FieldParams(float(rng.uniform(0.9, 1.6)), spec)
        set1 = ProbeSetting(probe_params, c1, vacuum_state(probe_params),
                            _random_effect(rng, probe_space, 0.4))
        set2 = ProbeSetting(p2_params, c2, vacuum_state(p2_params),
                            _random_effect(rng, PhaseSpace(p2_params, "probe2"), 0.4))
        omega_in = _random_state(rng, sys_space, vac)
        seq = compose_probes(omega_in, params, [set1, set2])
        joint = compose_probes_joint(omega_in, params, [set1, set2])
        probes += 1
        for d in datas:
            worst_seq = max(worst_seq, abs(seq.char_value(d) - joint.char_value(d)))
    for _ in range(5):
        # spacelike zones: both orders admissible and must agree
        t1 = int(rng.integers(13, 17))
        t2 = int(rng.integers(13, 17))
        x1 = int(rng.integers(10, 22))
        x2 = int(rng.integers(55, 67))
        s1 = TestFunction.gaussian_bump(spec, t1, x1, 1.0, 1.5, 1.0,
                                        support_box=(t1 - 2, t1 + 2, x1 - 4, x1 + 4))
        s2 = TestFunction.gaussian_bump(spec, t2, x2, 1.0, 1.5, 1.0,
                                        support_box=(t2 - 2, t2 + 2, x2 - 4, x2 + 4))
        assert causally_disjoint(s1.support, s2.support)
        set1 = ProbeSetting(probe_params, CouplingProfile(0.6, s1), vacuum_state(probe_params),
                            _random_effect(rng, probe_space, 0.4))
        p2_params = FieldParams(1.2, spec)
        set2 = ProbeSetting(p2_params, CouplingProfile(0.6, s2), vacuum_state(p2_params),
                            _random_effect(rng, PhaseSpace(p2_params, "probe2"), 0.4))
        omega_in = _random_state(rng, sys_space, vac)
        one = compose_probes(omega_in, params, [set1, set2], order=(0, 1))
        other = compose_probes(omega_in, params, [set1, set2], order=(1, 0))
        for d in datas:
            worst_swap = max(worst_swap, abs(one.char_value(d) - other.char_value(d)))
    rows.append(_leq_row("updates", "sequential_vs_joint", worst_seq, 1e-9 * scale))
    rows.append(_leq_row("updates", "spacelike_order_swap", worst_swap, 1e-9 * scale))
    return rows


def suite_impossible(rng, n=20, scale=1.0) -> list[Row]:
    """Mediated measurements never signal where naive kicks do."""
    spec = default_lattice()
    params = default_system(spec)
    probe_params = FieldParams(1.3, spec)
    sys_space = PhaseSpace(params)
    omega = vacuum_state(params, sys_space)
    sigma = vacuum_state(probe_params)
    worst_gap, weakest_naive = 0.0, np.inf
    for _ in range(n):
        f, g, h = random_signaling_geometry(rng, spec, params)
        naive = abs(signaling_gap_green(SorkinConfig(params, f, g, h)))
        weakest_naive = min(weakest_naive, naive)
        alice = PreInstrument(sigma, scattering_map(
            CouplingProfile(0.02, f), params, probe_params))
        bob = PreInstrument(sigma, scattering_map(
            CouplingProfile(0.02, g), params, probe_params))
        charlie = cosine_effect(sys_space, h, 0.3)
        gap = impossible_measurement_test(omega, alice, bob, charlie, h.support)
        worst_gap = max(worst_gap, gap)
    return [
        _leq_row("impossible", "mediated_signaling_gap", worst_gap, 1e-8 * scale),
        _geq_row("impossible", "weakest_naive_gap", float(weakest_naive), 1e-3),
    ]


def suite_unsharpness(rng, n=50, scale=1.0) -> list[Row]:
    """Noise nonnegativity and outcome-vs-effect variance ordering."""
    spec = default_lattice()
    params = default_system(spec)
    space = PhaseSpace(params)
    vac = vacuum_state(params, space)
    min_noise = np.inf
    min_margin = np.inf
    for _ in range(n):
        e = _random_effect(rng, space)
        omega = _random_state(rng, space, vac)
        stats = noise_statistics(omega, e)
        min_noise = min(min_noise, stats["noise"])
        min_margin = min(min_margin, stats["variance"] - stats["dispersion_sq"])
    return [
        _geq_row("unsharpness", "min_noise", float(min_noise), -1e-10 * scale),
        _geq_row("unsharpness", "variance_minus_dispersion", float(min_margin), -1e-10 * scale),
    ]


SUITES = {
    "green": suite_green,
    "commutator": suite_commutator,
    "sorkin": suite_sorkin,
    "scattering": suite_scattering,
    "induced": suite_induced,
    "updates": suite_updates,
    "impossible": suite_impossible,
    "unsharpness": suite_unsharpness,
}


def run_all(seed: int, scale: float = 1.0, parallel: bool = False) -> list[Row]:
    """Run every suite with per-suite seeded generators; deterministic output."""
    seeds = {name: np.random.SeedSequence([seed, i]) for i, name in enumerate(sorted(SUITES))}

    def run_one(name):
        return SUITES[name](np.random.default_rng(seeds[name]), scale=scale)

    names = sorted(SUITES)
    if parallel:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=4) as pool:
            results = list(pool.map(run_one, names))
    else:
        results = [run_one(name) for name in names]
    rows = []
    for chunk in results:
        rows.extend(chunk)
    return rows
