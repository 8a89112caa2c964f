import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from manev_isosceles import coords
from manev_isosceles import potentials as pot
from manev_isosceles.coords import CylState, McGeheeState
from manev_isosceles.errors import (CollisionManifoldPoint, DoubleCollisionInput, ManevError,
                                    TripleCollisionInput)
from manev_isosceles.params import P0

cyl_states = st.builds(
    CylState,
    R=st.floats(0.2, 5), Z=st.floats(-3, 3),
    P_R=st.floats(-3, 3), P_Z=st.floats(-3, 3), C=st.floats(-5, 5),
)


def test_simple_state(p0):
    m = coords.to_mcgehee(p0, CylState(1.0, 0.0, 0.0, 0.0, 0.0))
    assert m.r == pytest.approx(math.sqrt(5), rel=1e-15)
    assert (m.theta, m.v, m.w) == (0.0, 0.0, 0.0)
    assert (m.t_phys, m.tau, m.sigma) == (0.0, 0.0, 0.0)


def test_axis_state_has_theta_half_pi(p0):
    assert coords.to_mcgehee(p0, CylState(0.0, 1.0, 0.0, 0.0)).theta == pytest.approx(math.pi / 2)


def test_triple_collision_rejected(p0):
    with pytest.raises(TripleCollisionInput):
        coords.to_mcgehee(p0, CylState(0.0, 0.0, 1.0, 0.0))


def test_inverse_simple_points(p0):
    s = coords.from_mcgehee(p0, McGeheeState(1.0, 0.0, 0.0, 0.0))
    assert s.R == pytest.approx(math.sqrt(0.2), rel=1e-15) and s.Z == 0.0
    s = coords.from_mcgehee(p0, McGeheeState(1.0, 0.0, math.pi / 4, 0.0))
    assert abs(s.Z * math.cos(math.pi / 4) - math.sqrt(21) / 2 * s.R * math.sin(math.pi / 4)) < 1e-12
    with pytest.raises(CollisionManifoldPoint):
        coords.from_mcgehee(p0, McGeheeState(0.0, 0.0, 0.0, 0.0))
    with pytest.raises(DoubleCollisionInput):
        coords.from_mcgehee(p0, McGeheeState(1.0, 0.0, math.pi / 2, 0.0))


@settings(max_examples=100)
@given(cyl_states)
def test_round_trip_cylindrical(s):
    back = coords.from_mcgehee(P0, coords.to_mcgehee(P0, s), s.C)
    a = np.array([s.R, s.Z, s.P_R, s.P_Z])
    b = np.array([back.R, back.Z, back.P_R, back.P_Z])
    assert np.allclose(a, b, rtol=1e-11, atol=1e-11)


@settings(max_examples=100)
@given(r=st.floats(0.01, 10), v=st.floats(-20, 20), th=st.floats(-1.5, 1.5), w=st.floats(-5, 5))
def test_round_trip_mcgehee(r, v, th, w):
    m = McGeheeState(r, v, th, w)
    back = coords.to_mcgehee(P0, coords.from_mcgehee(P0, m))
    assert np.allclose(back.core(), m.core(), rtol=1e-11, atol=1e-11)


@settings(max_examples=100)
@given(r=st.floats(0.01, 10), th=st.floats(-1.5, 1.5))
def test_ratio_identity(r, th):
    s = coords.from_mcgehee(P0, McGeheeState(r, 0.0, th, 0.0))
    assert abs(s.Z * math.cos(th) - math.sqrt(P0.mu) / 2 * s.R * math.sin(th)) <= 1e-12 * max(1, r)


@settings(max_examples=100)
@given(cyl_states)
def test_intermediate_constraints(s):
    r, sv, u = coords.intermediate(P0, s)
    K = coords.mass_matrix(P0)
    assert sv @ K @ sv == pytest.approx(1.0, abs=1e-12)
    assert abs(sv @ K @ u) <= 1e-12 * max(1.0, float(np.abs(u).max()))


def test_reduced_energy_simple_state(p0):
    # pair terms -G M^2 (1/R + g0/R^2) and 2 x -G M m (1/d + g/d^2) with d = R/2
    h = coords.reduced_energy(p0, CylState(1.0, 0.0, 0.0, 0.0, 0.0))
    assert h == pytest.approx(-100 * 2 - 2 * 10 * (2 + 3 * 4), rel=1e-15)
    assert h == -480.0


def test_reduced_energy_far_field(p0):
    assert abs(coords.reduced_energy(p0, CylState(1e8, 0.0, 0.0, 0.0, 0.0))) < 1e-5


def test_reduced_energy_rejects_double_collision(p0):
    with pytest.raises(DoubleCollisionInput):
        coords.reduced_energy(p0, CylState(0.0, 1.0, 0.0, 0.0))


@settings(max_examples=100)
@given(cyl_states)
def test_reduced_energy_matches_three_body_oracle(s):
    h = coords.reduced_energy(P0, s)
    ref = oracles.three_body_energy(P0.as_dict(), s.R, s.Z, s.P_R, s.P_Z, s.C)
    assert h == pytest.approx(ref, rel=1e-12, abs=1e-12)
    L = oracles.three_body_angular_momentum(P0.as_dict(), s.R, s.Z, s.P_R, s.P_Z, s.C)
    assert L == pytest.approx([0.0, 0.0, s.C], abs=1e-12)


def test_residual_examples(p0):
    assert coords.energy_residual(p0, (0, 0, 0, math.sqrt(2)), -3.0, 0.0) == pytest.approx(0, abs=1e-10)
    assert coords.energy_residual(p0, (0, math.sqrt(3400), 0, 0), 7.0, 0.0) == pytest.approx(0, abs=1e-9)
    # at the origin -C^2 cos^2 and 2 U cos^2 both survive: -1 + 3400
    assert coords.energy_residual(p0, (0, 0, 0, 0), 0.0, 1.0) == pytest.approx(3399.0, abs=1e-12)


@settings(max_examples=100)
@given(cyl_states)
def test_residual_vanishes_on_own_level(s):
    m = coords.to_mcgehee(P0, s)
    h = coords.reduced_energy(P0, s)
    F = coords.energy_residual(P0, m, h, s.C)
    assert abs(F) <= 1e-10 * max(1.0, coords.residual_scale(P0, m, h, s.C))


@settings(max_examples=100)
@given(r=st.floats(0, 5), v=st.floats(-20, 20), th=st.floats(-1.5, 1.5), w=st.floats(-5, 5),
       h=st.floats(-10, 10), C=st.floats(-50, 50))
def test_residual_symmetry_and_unscaled_form(r, v, th, w, h, C):
    F = coords.energy_residual(P0, (r, v, th, w), h, C)
    tol = 1e-12 * max(1.0, coords.residual_scale(P0, (r, v, th, w), h, C))
    assert coords.energy_residual(P0, (r, v, -th, -w), h, C) == pytest.approx(F, abs=tol)
    assert coords.energy_residual(P0, (r, v, th, -w), h, C) == pytest.approx(F, abs=tol)
    G = coords.energy_residual_unscaled(P0, (r, v, th, w), h, C)
    assert 2 * math.cos(th) ** 4 * G == pytest.approx(F, abs=10 * tol)


def test_solve_w_lands_on_level(p0, rng):
    for _ in range(50):
        r, v, th = rng.uniform(0, 2), rng.uniform(-5, 5), rng.uniform(-0.4, 0.4)
        try:
            w = coords.solve_w(p0, r, v, th, -1.0, 10.0, rng.choice([-1, 1]))
        except ManevError:
            continue
        F = coords.energy_residual(p0, (r, v, th, w), -1.0, 10.0)
        assert abs(F) <= 1e-12 * coords.residual_scale(p0, (r, v, th, w), -1.0, 10.0)


def test_solve_w_outside_hill_region(p0):
    with pytest.raises(ManevError, match="Hill"):
        coords.solve_w(p0, 0.0, 0.0, 0.0, -1.0, 60.0)


def test_effective_potential_is_pair_sum_plus_centrifugal(p0):
    R, Z, C = 1.3, 0.4, 2.0
    pair = oracles.three_body_energy(p0.as_dict(), R, Z, 0.0, 0.0, 0.0)
    assert coords.effective_potential(p0, R, Z, C) == pytest.approx(pair + C * C / (10 * R * R), rel=1e-14)


def test_w_definition(p0):
    s = CylState(1.2, 0.3, 0.1, -0.2, 0.0)
    m = coords.to_mcgehee(p0, s)
    k1, k2 = math.sqrt(5), math.sqrt(20 / 21)
    y = np.array([k1 * s.R, k2 * s.Z])
    ydot = np.array([s.P_R / k1, s.P_Z / k2])
    u = y[0] * ydot[1] - y[1] * ydot[0]
    assert m.w == pytest.approx(math.cos(m.theta) ** 2 * u / math.sqrt(float(pot.U(p0, m.theta))), rel=1e-14)
    assert m.v == pytest.approx(s.R * s.P_R + s.Z * s.P_Z, rel=1e-15)
