import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kgmeasure.errors import SolverError
from kgmeasure.fields import (
    FieldParams,
    TestFunction,
    advanced,
    admissible_time_window,
    apply_klein_gordon,
    commutator_form,
    pauli_jordan,
    retarded,
)
from kgmeasure.lattice import LatticeSpec, causal_future, causal_past, causally_disjoint


SPEC = LatticeSpec(32, 64, dx=0.1, dt=0.1)
PARAMS = FieldParams(1.0, SPEC)


def bump(t0, x0, amp=1.0, half=3):
    return TestFunction.gaussian_bump(
        SPEC, t0, x0, 1.0, 1.2, amp,
        support_box=(max(2, t0 - half), min(SPEC.n_t - 3, t0 + half),
                     max(0, x0 - half - 1), min(SPEC.n_x - 1, x0 + half + 1)),
    )


class TestTestFunction:
    def test_support_tracks_nonzeros(self):
        f = TestFunction.point(SPEC, 4, 10, 2.5)
        assert len(f.support) == 1
        assert (4, 10) in f.support

    def test_values_read_only(self):
        f = TestFunction.point(SPEC, 4, 10)
        with pytest.raises(ValueError):
            f.values[0, 0] = 1.0

    def test_linear_combinations(self):
        f, g = bump(8, 20), bump(8, 24)
        combo = 2.0 * f - g
        assert np.allclose(combo.values, 2.0 * f.values - g.values)

    def test_bump_periodic_wrap(self):
        f = TestFunction.gaussian_bump(SPEC, 8, 0, 1.0, 2.0, support_box=(5, 11, 0, 63))
        # spatial profile must be symmetric across the periodic seam
        assert f.values[8, 1] == pytest.approx(f.values[8, 63])


def test_point_source_checkerboard_oracle():
    # massless, dt = dx: the solution is exactly dt^2 on parity-matching
    # sites inside the cone and exactly zero elsewhere
    spec = LatticeSpec(16, 48, dx=0.25, dt=0.25)
    params = FieldParams(0.0, spec)
    t0, x0 = 2, 24
    u = retarded(TestFunction.point(spec, t0, x0), params).values
    for t in range(spec.n_t):
        for x in range(spec.n_x):
            steps = t - (t0 + 1)
            dx_sites = min(abs(x - x0), spec.n_x - abs(x - x0))
            if steps >= dx_sites and (steps + dx_sites) % 2 == 0:
                assert u[t, x] == pytest.approx(spec.dt**2)
            else:
                assert u[t, x] == 0.0


@pytest.mark.parametrize("mass", [0.0, 1.0, 2.5])
def test_retarded_residual_and_support(mass):
    params = FieldParams(mass, SPEC)
    f = bump(10, 30, amp=3.0)
    sol = retarded(f, params)
    residual = apply_klein_gordon(sol.values, params) - f.values
    assert np.max(np.abs(residual[1:-1])) < 1e-12
    allowed = causal_future(f.support).mask()
    assert np.all(sol.values[~allowed] == 0.0)


def test_advanced_is_time_reversed_retarded():
    f = bump(16, 30)
    flipped = TestFunction(SPEC, f.values[::-1])
    a = advanced(f, PARAMS).values
    r = retarded(flipped, PARAMS).values
    assert np.allclose(a, r[::-1], atol=1e-14)


def test_advanced_support_in_past_cone():
    f = bump(20, 12)
    sol = advanced(f, PARAMS)
    allowed = causal_past(f.support).mask()
    assert np.all(sol.values[~allowed] == 0.0)


def test_padding_guards():
    early = TestFunction.point(SPEC, 0, 5)
    with pytest.raises(SolverError):
        retarded(early, PARAMS)
    late = TestFunction.point(SPEC, SPEC.n_t - 1, 5)
    with pytest.raises(SolverError):
        advanced(late, PARAMS)
    lo, hi = admissible_time_window(SPEC)
    assert lo == 2 and hi == SPEC.n_t - 3


def test_pauli_jordan_solves_homogeneous_equation():
    f = bump(15, 40)
    e = pauli_jordan(f, PARAMS)
    residual = apply_klein_gordon(e, PARAMS)
    assert np.max(np.abs(residual[1:-1])) < 1e-12


class TestCommutatorForm:
    def test_antisymmetry(self):
        f, g = bump(8, 20, amp=2.0), bump(18, 28, amp=1.5)
        assert commutator_form(f, g, PARAMS) == pytest.approx(
            -commutator_form(g, f, PARAMS), abs=1e-14
        )

    def test_bilinearity(self):
        f, g, h = bump(8, 20), bump(18, 28), bump(18, 36)
        lhs = commutator_form(f, g + h, PARAMS)
        rhs = commutator_form(f, g, PARAMS) + commutator_form(f, h, PARAMS)
        assert lhs == pytest.approx(rhs, abs=1e-13)
        assert commutator_form(f, 3.0 * g, PARAMS) == pytest.approx(
            3.0 * commutator_form(f, g, PARAMS), abs=1e-13
        )

    def test_spacelike_vanishes_exactly(self):
        f, g = bump(10, 10), bump(10, 42)
        assert causally_disjoint(f.support, g.support)
        assert commutator_form(f, g, PARAMS) == 0.0

    def test_self_pairing_zero(self):
        f = bump(12, 30)
        assert commutator_form(f, f, PARAMS) == pytest.approx(0.0, abs=1e-15)

    def test_timelike_pair_nonzero(self):
        f, g = bump(6, 30), bump(24, 30)
        assert abs(commutator_form(f, g, PARAMS)) > 1e-6

    def test_adjoint_identity_between_green_operators(self):
        # sum (E_ret f) g dvol = sum f (E_adv g) dvol, exactly
        f, g = bump(8, 20, amp=2.0), bump(20, 30, amp=1.5)
        dvol = SPEC.dt * SPEC.dx
        lhs = float(np.sum(retarded(f, PARAMS).values * g.values) * dvol)
        rhs = float(np.sum(f.values * advanced(g, PARAMS).values) * dvol)
        assert lhs == pytest.approx(rhs, abs=1e-13)


@settings(max_examples=25, deadline=None)
@given(
    st.integers(6, 25), st.integers(0, 63),
    st.integers(6, 25), st.integers(0, 63),
)
def test_antisymmetry_property(t1, x1, t2, x2):
    f, g = bump(t1, x1), bump(t2, x2)
    s = commutator_form(f, g, PARAMS) + commutator_form(g, f, PARAMS)
    assert abs(s) < 1e-12
