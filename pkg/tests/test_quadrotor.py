import math

import numpy as np
import pytest

from windfleet.errors import (
    CannotLiftError,
    SaturationError,
    SingularityError,
    UnrealizableInputError,
)
from windfleet.quadrotor import (
    INFEASIBLE,
    CraftParams,
    InputVector,
    UavState,
    is_feasible,
    max_relative_speed,
    mixer,
    mixer_inverse,
    piecewise_energy,
    rotor_power,
    step_dynamics,
    travel_energy,
)

# Golden values evaluated once by an independent script from the closed
# forms (see repository history); they pin the default-craft constants.
GOLDEN_VR = 49.09644837134984
GOLDEN_E_ONE_HOP = 100.44899809653919
GOLDEN_HOVER_OMEGA = 2687.943622275266


def test_mixer_equal_speeds_yield_pure_thrust(params):
    u = mixer([3000.0] * 4, params)
    assert u.moments == (0.0, 0.0, 0.0)
    assert u.f == pytest.approx(4 * params.kappa_f * 3000.0**2, rel=1e-12)


def test_mixer_at_omega_max_gives_f_max(params):
    u = mixer([params.omega_max] * 4, params)
    assert u.f == pytest.approx(4 * params.kappa_f * params.omega_max**2, rel=1e-12)
    assert u.f == pytest.approx(params.f_max, rel=1e-12)


def test_mixer_rejects_out_of_range_speed(params):
    with pytest.raises(SaturationError):
        mixer([0.0, 0.0, 0.0, params.omega_max * 1.01], params)
    with pytest.raises(SaturationError):
        mixer([-1.0, 0.0, 0.0, 0.0], params)


def test_hover_input_gives_four_equal_speeds(params):
    f_g = params.mass_kg * params.gravity
    assert f_g == pytest.approx(1.7658, abs=1e-12)
    speeds = mixer_inverse(InputVector(f_g, 0.0, 0.0, 0.0), params)
    assert np.allclose(speeds, speeds[0])
    assert speeds[0] == pytest.approx(GOLDEN_HOVER_OMEGA, rel=1e-12)


def test_mixer_inverse_round_trip(params, rng):
    for _ in range(200):
        w = rng.uniform(0.0, params.omega_max, size=4)
        u = mixer(w, params)
        w2 = mixer_inverse(u, params)
        assert np.allclose(w2, w, rtol=1e-9, atol=1e-9)
        u2 = mixer(w2, params)
        assert np.allclose(u2, u, rtol=1e-9, atol=1e-12)


def test_mixer_inverse_reports_offending_rotor(params):
    # a pure huge roll moment drives rotor 3 (index) negative
    with pytest.raises(UnrealizableInputError) as exc:
        mixer_inverse(InputVector(1.0, 1.0, 0.0, 0.0), params)
    assert exc.value.rotor_index is not None


def test_rotor_power_zero_and_max(params):
    assert rotor_power([0.0] * 4, params) == 0.0
    p_max = rotor_power([params.omega_max] * 4, params)
    assert p_max == pytest.approx(4 * params.kappa_m * params.omega_max**3, rel=1e-12)


def test_rotor_power_cubic_homogeneity(params):
    w = [1000.0, 1500.0, 2000.0, 2500.0]
    assert rotor_power([2 * x for x in w], params) == pytest.approx(
        8 * rotor_power(w, params), rel=1e-12
    )


def test_max_relative_speed_golden(params):
    assert max_relative_speed(params) == pytest.approx(GOLDEN_VR, rel=1e-12)


def test_max_relative_speed_zero_at_hover_boundary():
    p = CraftParams(kappa_f=0.18 * 9.81 / (4 * 7800.0**2))
    assert max_relative_speed(p) == pytest.approx(0.0, abs=1e-9)


def test_max_relative_speed_decreases_with_drag(params):
    vals = [
        max_relative_speed(CraftParams(drag_coeff=cd)) for cd in (0.5, 1.0, 2.0, 4.0)
    ]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_cannot_lift_error():
    p = CraftParams(kappa_f=1e-9)
    with pytest.raises(CannotLiftError):
        max_relative_speed(p)


def test_travel_energy_zero_distance(params):
    assert travel_energy((1.0, 2.0), (1.0, 2.0), (5.0, 5.0), params) == 0.0


def test_travel_energy_one_hop_golden(params):
    e = travel_energy((0.0, 0.0), (math.sqrt(3.0), 0.0), (0.0, 0.0), params)
    assert e == pytest.approx(GOLDEN_E_ONE_HOP, rel=1e-12)


def test_travel_energy_maximal_at_pi_with_cap(params):
    # sweep the angle between wind and travel direction
    cap = 8.0
    dist = 10.0
    energies = []
    for theta in np.linspace(0.0, math.pi, 181):
        d = (cap * math.cos(theta), cap * math.sin(theta))
        energies.append(travel_energy((0.0, 0.0), (dist, 0.0), d, params))
    assert np.argmax(energies) == 180
    lower = travel_energy((0.0, 0.0), (dist, 0.0), (-cap * 0.9, 0.0), params)
    assert energies[-1] > lower


def test_travel_energy_rotational_invariance(params, rng):
    for _ in range(100):
        dist = rng.uniform(0.5, 30.0)
        theta = rng.uniform(0, 2 * math.pi)
        mag = rng.uniform(0, 8.0)
        rel = rng.uniform(0, 2 * math.pi)  # angle between wind and travel dir
        base = travel_energy(
            (0.0, 0.0),
            (dist * math.cos(theta), dist * math.sin(theta)),
            (mag * math.cos(theta + rel), mag * math.sin(theta + rel)),
            params,
        )
        rot = rng.uniform(0, 2 * math.pi)
        other = travel_energy(
            (0.0, 0.0),
            (dist * math.cos(theta + rot), dist * math.sin(theta + rot)),
            (mag * math.cos(theta + rel + rot), mag * math.sin(theta + rel + rot)),
            params,
        )
        assert other == pytest.approx(base, rel=1e-9)


def test_travel_energy_infeasible_under_extreme_wind(params):
    vr = max_relative_speed(params)
    crosswind = (0.0, vr * 1.01)
    e = travel_energy((0.0, 0.0), (10.0, 0.0), crosswind, params)
    assert e == INFEASIBLE and not is_feasible(e)
    headwind = (-(vr + 1.0), 0.0)
    assert travel_energy((0.0, 0.0), (10.0, 0.0), headwind, params) == INFEASIBLE


def test_hover_equilibrium(params):
    x = UavState.at_rest(1.0, 2.0)
    u = InputVector(params.mass_kg * params.gravity, 0.0, 0.0, 0.0)
    x1 = step_dynamics(x, u, (0.0, 0.0), params, 0.005)
    assert np.linalg.norm(x1.as_vector() - x.as_vector()) < 1e-9


def test_free_fall(params):
    x = UavState.at_rest(0.0, 0.0)
    x1 = step_dynamics(x, InputVector(0.0, 0.0, 0.0, 0.0), (0.0, 0.0), params, 0.005)
    assert x1.v[2] == pytest.approx(-params.gravity * 0.005, rel=1e-12)


def test_zero_moments_keep_attitude_zero(params):
    x = UavState.at_rest(0.0, 0.0)
    u = InputVector(params.mass_kg * params.gravity, 0.0, 0.0, 0.0)
    for _ in range(100):
        x = step_dynamics(x, u, (1.0, -2.0), params, 0.005)
    assert np.allclose(x.theta, 0.0)
    assert np.allclose(x.omega, 0.0)


def test_steady_cruise_matches_ground_speed_formula(params):
    # full-throttle tilted flight into a headwind: terminal ground speed
    # must satisfy the steady-flight relation within 2%
    d = 8.0
    vr = max_relative_speed(params)
    f_max = params.f_max
    alpha = math.acos(params.mass_kg * params.gravity / f_max)
    x = UavState(
        p=np.zeros(3),
        v=np.zeros(3),
        theta=np.array([0.0, alpha, 0.0]),
        omega=np.zeros(3),
    )
    u = InputVector(f_max, 0.0, 0.0, 0.0)
    for _ in range(12_000):  # 60 s
        x = step_dynamics(x, u, (-d, 0.0), params, 0.005)
    expected = vr - d  # head-on wind, theta = pi
    assert x.v[0] == pytest.approx(expected, rel=0.02)


def test_pitch_singularity_detected(params):
    x = UavState(
        p=np.zeros(3),
        v=np.zeros(3),
        theta=np.array([0.0, math.pi / 2 - 1e-5, 0.0]),
        omega=np.array([0.0, 50.0, 0.0]),
    )
    with pytest.raises(SingularityError):
        step_dynamics(x, InputVector(1.7658, 0.0, 0.0, 0.0), (0.0, 0.0), params, 0.005)


def test_piecewise_energy_empty(params):
    assert piecewise_energy([], params, 0.005) == 0.0


def test_piecewise_energy_hover_one_second(params):
    u = InputVector(params.mass_kg * params.gravity, 0.0, 0.0, 0.0)
    w = mixer_inverse(u, params)
    expected = params.kappa_m * 4.0 * w[0] ** 3 * 1.0
    n = 200
    e = piecewise_energy([u] * n, params, 1.0 / n)
    assert e == pytest.approx(expected, rel=1e-9)


def test_piecewise_energy_concatenation_additivity(params, rng):
    seq = [
        mixer(rng.uniform(1000.0, 5000.0, 4), params)
        for _ in range(20)
    ]
    e_all = piecewise_energy(seq, params, 0.005)
    e_split = piecewise_energy(seq[:7], params, 0.005) + piecewise_energy(seq[7:], params, 0.005)
    assert e_all == pytest.approx(e_split, rel=1e-12)


def test_piecewise_energy_reports_time_index(params):
    seq = [InputVector(1.7658, 0.0, 0.0, 0.0), InputVector(5.0, 3.0, 0.0, 0.0)]
    with pytest.raises(UnrealizableInputError) as exc:
        piecewise_energy(seq, params, 0.005)
    assert exc.value.time_index == 1


def test_params_must_be_positive():
    with pytest.raises(ValueError):
        CraftParams(mass_kg=-1.0)
    with pytest.raises(ValueError):
        CraftParams(ref_area_m2=0.0)
