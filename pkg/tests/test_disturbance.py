import math

import numpy as np
import pytest

from windfleet.disturbance import (
    COMPASS,
    NoWind,
    WindPattern,
    WindTrace,
    best_case_wind,
    wind_at,
    worst_case_wind,
)
from windfleet.errors import DegenerateDirectionError
from windfleet.quadrotor import travel_energy


def test_calm_gap_inside_every_cycle():
    pat = WindPattern(speed=2.0, seed=3)
    for cycle in range(5):
        w = pat.at_time(cycle * 40.0 + 35.0)
        assert w.dx == 0.0 and w.dy == 0.0


def test_blowing_phase_has_exact_speed():
    pat = WindPattern(speed=2.0, seed=3)
    for cycle in range(5):
        w = pat.at_time(cycle * 40.0 + 5.0)
        assert w.magnitude == pytest.approx(2.0, abs=0.0)
        assert (w.dx, w.dy) in {(s * ux, s * uy) for s in (2.0,) for ux, uy in COMPASS.values()}


def test_north_direction_cycle_has_pure_north_vector():
    # seed chosen so the first cycle blows north
    for seed in range(50):
        pat = WindPattern(speed=2.0, seed=seed)
        if pat.direction(0) == "N":
            w = pat.at_time(5.0)
            assert (w.dx, w.dy) == (0.0, 2.0)
            return
    pytest.fail("no seed produced a north first cycle in 50 tries")


def test_equal_seeds_agree_over_ten_thousand_steps():
    a = WindPattern(speed=8.0, seed=99)
    b = WindPattern(speed=8.0, seed=99)
    for k in range(10_000):
        assert wind_at(a, k, 0.05) == wind_at(b, k, 0.05)


def test_duty_cycle_exactness():
    pat = WindPattern(speed=2.0, blow_s=30.0, cycle_s=40.0, seed=1)
    ts = 0.01
    m_cycles = 3
    n = int(m_cycles * 40.0 / ts)
    windy = sum(1 for k in range(n) if pat.at_time(k * ts).magnitude > 0.0)
    assert windy * ts == pytest.approx(m_cycles * 30.0, abs=ts)


def test_vectors_for_range_matches_pointwise():
    pat = WindPattern(speed=8.0, seed=12)
    ts = 0.005
    arr = pat.vectors_for_range(5_000, 20_000, ts)
    for i in range(0, 20_000, 313):
        w = pat.at_time((5_000 + i) * ts)
        assert arr[i, 0] == w.dx and arr[i, 1] == w.dy


def test_worst_case_is_pure_headwind():
    w = worst_case_wind(8.0, (1.0, 0.0))
    assert (w.dx, w.dy) == (-8.0, 0.0)
    assert worst_case_wind(0.0, (0.0, 1.0)).magnitude == 0.0


def test_best_case_is_pure_tailwind():
    w = best_case_wind(8.0, (0.0, 1.0))
    assert (w.dx, w.dy) == (0.0, 8.0)


def test_worst_and_best_are_negatives(rng):
    for _ in range(50):
        ang = rng.uniform(0, 2 * math.pi)
        u = (math.cos(ang), math.sin(ang))
        w = worst_case_wind(5.0, u)
        b = best_case_wind(5.0, u)
        assert w.dx == -b.dx and w.dy == -b.dy


def test_dot_products_hit_the_cap(rng):
    for _ in range(100):
        ang = rng.uniform(0, 2 * math.pi)
        u = (math.cos(ang), math.sin(ang))
        w = worst_case_wind(3.0, u)
        b = best_case_wind(3.0, u)
        assert w.dx * u[0] + w.dy * u[1] == pytest.approx(-3.0, abs=1e-12)
        assert b.dx * u[0] + b.dy * u[1] == pytest.approx(3.0, abs=1e-12)


def test_zero_direction_rejected():
    with pytest.raises(DegenerateDirectionError):
        worst_case_wind(2.0, (0.0, 0.0))
    with pytest.raises(DegenerateDirectionError):
        best_case_wind(2.0, (0.0, 0.0))


def test_energy_ordering_under_capped_wind(params, rng):
    # best-case <= measured <= worst-case for any wind within the cap
    cap = 8.0
    p_i = (0.0, 0.0)
    p_j = (5.0, 3.0)
    d = np.array(p_j) - np.array(p_i)
    u = tuple(d / np.linalg.norm(d))
    e_best = travel_energy(p_i, p_j, best_case_wind(cap, u), params)
    e_worst = travel_energy(p_i, p_j, worst_case_wind(cap, u), params)
    for _ in range(200):
        mag = rng.uniform(0, cap)
        ang = rng.uniform(0, 2 * math.pi)
        e = travel_energy(p_i, p_j, (mag * math.cos(ang), mag * math.sin(ang)), params)
        assert e_best <= e + 1e-9
        assert e <= e_worst + 1e-9


def test_trace_is_a_step_function(tmp_path):
    tr = WindTrace(rows=[(0.0, 0.0, -8.0), (30.0, 0.0, 0.0)])
    assert tr.at_time(0.0) == (0.0, -8.0)
    assert tr.at_time(29.999) == (0.0, -8.0)
    assert tr.at_time(30.0) == (0.0, 0.0)
    assert tr.cap == 8.0
    csv_path = tmp_path / "trace.csv"
    csv_path.write_text("time_s,dx,dy\n0,1.5,0\n10,0,0\n")
    tr2 = WindTrace.from_csv(csv_path)
    assert tr2.at_time(5.0) == (1.5, 0.0)
    assert tr2.at_time(10.0) == (0.0, 0.0)


def test_no_wind_source():
    nw = NoWind()
    assert nw.at_time(123.0).magnitude == 0.0
    assert np.all(nw.vectors_for_range(0, 10, 0.005) == 0.0)
