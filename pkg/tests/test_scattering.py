import numpy as np
import pytest

from kgmeasure.errors import GeometryError, SolverError
from kgmeasure.fields import FieldParams, TestFunction, advanced
from kgmeasure.lattice import LatticeSpec
from kgmeasure.scattering import (
    CouplingProfile,
    coupled_evolve,
    eta,
    free_evolve,
    free_solution,
    induced_observable,
    scattering_map,
    scattering_map_multi,
    theta_on_weyl,
)
from kgmeasure.weyl import (
    AlgebraElement,
    PhaseSpace,
    adjoint,
    evaluate,
    vacuum_state,
)

SPEC = LatticeSpec(32, 64, dx=0.1, dt=0.1)
SYS = FieldParams(1.0, SPEC)
PROBE = FieldParams(1.4, SPEC)
SYS_SPACE = PhaseSpace(SYS)


def zone_profile(strength=0.8, t0=16, x0=32):
    shape = TestFunction.gaussian_bump(
        SPEC, t0, x0, 1.2, 1.5, 1.0,
        support_box=(t0 - 3, t0 + 3, x0 - 5, x0 + 5),
    )
    return CouplingProfile(strength, shape)


class TestCouplingProfile:
    def test_negative_profile_rejected(self):
        v = np.zeros(SPEC.shape)
        v[10, 5] = -1.0
        with pytest.raises(GeometryError):
            CouplingProfile(1.0, TestFunction(SPEC, v))

    def test_padding_enforced(self):
        shape = TestFunction.point(SPEC, 1, 5)
        with pytest.raises(SolverError):
            CouplingProfile(1.0, shape)

    def test_zero_strength_skips_padding(self):
        shape = TestFunction.point(SPEC, 1, 5)
        assert CouplingProfile(0.0, shape).is_trivial()


class TestFreeSolution:
    def test_reproduces_data_on_bottom_slices(self):
        rng = np.random.default_rng(0)
        d = rng.normal(size=SYS_SPACE.dim)
        u = free_solution(d, SYS)
        assert np.array_equal(u[0], d[: SPEC.n_x])
        assert np.array_equal(u[1], d[SPEC.n_x:])

    def test_matches_free_evolve_round_trip(self):
        rng = np.random.default_rng(1)
        d = rng.normal(size=SYS_SPACE.dim)
        u = free_solution(d, SYS)
        top = free_evolve(d, [SYS])
        assert np.allclose(top[: SPEC.n_x], u[-2])
        assert np.allclose(top[SPEC.n_x:], u[-1])


class TestScatteringMap:
    def test_coupling_off_gives_identity(self):
        smap = scattering_map(zone_profile(0.0), SYS, PROBE)
        assert np.max(np.abs(smap.matrix - np.eye(smap.space.dim))) < 1e-12

    def test_symplectic(self):
        smap = scattering_map(zone_profile(), SYS, PROBE)
        assert smap.symplectic_defect() < 1e-10

    def test_nontrivial_when_coupled(self):
        smap = scattering_map(zone_profile(), SYS, PROBE)
        assert np.max(np.abs(smap.matrix - np.eye(smap.space.dim))) > 1e-4

    def test_locality_fixed_point(self):
        smap = scattering_map(zone_profile(), SYS, PROBE)
        far = TestFunction.gaussian_bump(SPEC, 16, 2, 1.0, 1.0,
                                         support_box=(13, 19, 0, 5))
        d = SYS_SPACE.data_of(far)
        comb = np.concatenate([d, np.zeros(2 * SPEC.n_x)])
        assert np.max(np.abs(smap.apply(comb) - comb)) < 1e-12

    def test_pairing_preserved(self):
        smap = scattering_map(zone_profile(), SYS, PROBE)
        rng = np.random.default_rng(2)
        for _ in range(5):
            d1 = rng.normal(size=smap.space.dim)
            d2 = rng.normal(size=smap.space.dim)
            before = smap.space.pairing(d1, d2)
            after = smap.space.pairing(smap.apply(d1), smap.apply(d2))
            assert after == pytest.approx(before, abs=1e-10)

    def test_different_grids_rejected(self):
        other = FieldParams(1.4, LatticeSpec(32, 48, dx=0.1, dt=0.1))
        with pytest.raises(SolverError):
            scattering_map(zone_profile(), SYS, other)


def test_coupled_evolve_spacelike_data_matches_free():
    coupling = zone_profile()
    far = TestFunction.gaussian_bump(SPEC, 16, 2, 1.0, 1.0, support_box=(13, 19, 0, 5))
    d = np.concatenate([SYS_SPACE.data_of(far), np.zeros(2 * SPEC.n_x)])
    assert np.allclose(coupled_evolve(d, coupling, SYS, PROBE),
                       free_evolve(d, [SYS, PROBE]), atol=1e-13)


def test_born_first_order_oracle():
    """For weak coupling the deviation is the advanced solve of the cross source."""
    lam = 1e-5
    coupling = zone_profile(lam)
    rng = np.random.default_rng(3)
    n = SPEC.n_x
    d_sys = rng.normal(size=2 * n)
    d_probe = rng.normal(size=2 * n)
    smap = scattering_map(coupling, SYS, PROBE)
    full = np.concatenate([d_sys, d_probe])
    deviation = (smap.apply(full) - full) / lam

    phi = free_solution(d_sys, SYS)
    psi = free_solution(d_probe, PROBE)
    src_sys = TestFunction(SPEC, -coupling.shape.values * psi)
    src_probe = TestFunction(SPEC, -coupling.shape.values * phi)
    delta_phi = advanced(src_sys, SYS).values
    delta_psi = advanced(src_probe, PROBE).values
    oracle = np.concatenate([delta_phi[0], delta_phi[1], delta_psi[0], delta_psi[1]])
    assert np.max(np.abs(deviation - oracle)) < 1e-4 * max(1.0, np.max(np.abs(oracle)))


class TestEta:
    def setup_method(self):
        self.smap = scattering_map(zone_profile(), SYS, PROBE)
        self.comp = self.smap.space
        self.probe_space = self.comp.parts[1]
        self.sigma = vacuum_state(PROBE)

    def test_system_only_untouched(self):
        d = np.random.default_rng(4).normal(size=SYS_SPACE.dim)
        a = AlgebraElement.weyl(self.comp, self.comp.embed(0, d), 0.7)
        out = eta(self.sigma, a)
        (coeff, data), = out.items()
        assert coeff == pytest.approx(0.7)
        assert np.allclose(data, d)

    def test_probe_only_becomes_scalar(self):
        g = np.random.default_rng(5).normal(size=self.probe_space.dim)
        b = AlgebraElement.weyl(self.comp, self.comp.embed(1, g))
        out = eta(self.sigma, b)
        (coeff, data), = out.items()
        assert coeff == pytest.approx(self.sigma.char_value(g))
        assert np.allclose(data, 0.0)

    def test_mixed_term_weight(self):
        rng = np.random.default_rng(6)
        d, g = rng.normal(size=SYS_SPACE.dim), rng.normal(size=self.probe_space.dim)
        a = AlgebraElement.weyl(self.comp, self.comp.combine([d, g]))
        (coeff, _), = eta(self.sigma, a).items()
        expected = np.exp(-0.5 * g @ self.sigma.covariance @ g)
        assert coeff == pytest.approx(expected)


class TestInducedObservable:
    def setup_method(self):
        self.coupling = zone_profile()
        self.smap = scattering_map(self.coupling, SYS, PROBE)
        self.probe_space = self.smap.space.parts[1]
        self.sigma = vacuum_state(PROBE)
        self.omega = vacuum_state(SYS, SYS_SPACE)

    def test_unit_maps_to_unit(self):
        eps = induced_observable(self.sigma, self.smap, AlgebraElement.unit(self.probe_space))
        (coeff, data), = eps.items()
        assert coeff == pytest.approx(1.0)
        assert np.allclose(data, 0.0)

    def test_adjoint_commutes(self):
        g = np.random.default_rng(7).normal(size=self.probe_space.dim)
        b = AlgebraElement.weyl(self.probe_space, g, 0.3 + 0.1j)
        left = induced_observable(self.sigma, self.smap, adjoint(b))
        right = adjoint(induced_observable(self.sigma, self.smap, b))
        for (c1, d1), (c2, d2) in zip(left.items(), right.items()):
            assert c1 == pytest.approx(c2)
            assert np.allclose(d1, d2)

    def test_coupling_off_gives_scalar(self):
        smap0 = scattering_map(zone_profile(0.0), SYS, PROBE)
        g = np.random.default_rng(8).normal(size=self.probe_space.dim)
        b = AlgebraElement.weyl(self.probe_space, g)
        eps = induced_observable(self.sigma, smap0, b)
        val = evaluate(self.omega, eps)
        assert val == pytest.approx(self.sigma.char_value(g), abs=1e-10)

    def test_expectation_consistency_two_routes(self):
        rng = np.random.default_rng(9)
        for _ in range(5):
            g = rng.normal(scale=0.5, size=self.probe_space.dim)
            b = AlgebraElement.weyl(self.probe_space, g)
            eps = induced_observable(self.sigma, self.smap, b)
            route_a = evaluate(self.omega, eps)
            tg = self.smap.apply(self.smap.space.embed(1, g))
            d_sys, d_probe = self.smap.space.split(tg)
            route_b = self.omega.char_value(d_sys) * self.sigma.char_value(d_probe)
            assert route_a == pytest.approx(route_b, abs=1e-12)


def test_theta_on_algebra_element():
    smap = scattering_map(zone_profile(), SYS, PROBE)
    rng = np.random.default_rng(10)
    d = rng.normal(size=smap.space.dim)
    a = AlgebraElement.weyl(smap.space, d, 0.5j)
    out = theta_on_weyl(smap, a)
    (coeff, data), = out.items()
    assert coeff == 0.5j
    assert np.allclose(data, smap.apply(d))


def test_three_field_map_symplectic():
    p2 = FieldParams(0.9, SPEC)
    c1 = zone_profile(0.6, t0=10, x0=20)
    c2 = zone_profile(0.6, t0=22, x0=40)
    smap = scattering_map_multi([SYS, PROBE, p2], [(0, 1, c1), (0, 2, c2)])
    assert smap.symplectic_defect() < 1e-10
    assert smap.space.dim == 6 * SPEC.n_x
