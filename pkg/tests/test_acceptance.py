"""Acceptance gate.  Each test checks one criterion with its tolerance pinned
below; the terminal summary prints one PASS/FAIL line per criterion."""

import math
import time

import numpy as np

from czic import fixtures, verify
from czic.bounds import SearchConfig, trace_region
from czic.channel import assemble_joint
from czic.cli import main
from czic.gp import gp_curve
from czic.sim import derive_rate_alloc, simulate, violate

DOMINANCE_TOL = 1e-9
COLLAPSE_TOL = 1e-9
XOR_FLOOR = 0.98
ORACLE_LOWER, ORACLE_UPPER = 1e-6, 0.05
SUFFICIENCY_TOL = 1e-9
MONOTONE_SLACK = 0.02
SIM_MARGIN, SIM_TRIALS, SIM_NS = 0.1, 2000, (8, 12, 16)
SIM_CEILING, VIOLATION_FLOOR, VIOLATION_EXCESS = 0.15, 0.2, 0.2


def test_c1_outer_dominates_inner(criterion):
    t = time.perf_counter()
    res = verify.check_dominance(n_channels=20, n_schemes=200, seed=0, tol=DOMINANCE_TOL)
    dt = time.perf_counter() - t
    ok = res.passed and dt < 10
    criterion(1, ok, f"min(outer-inner r1)={res.detail['min(outer-inner r1)']:.2e}, "
                     f"max|r2 diff|={res.detail['max|r2 diff|']:.2e}, {dt:.1f}s")
    assert res.passed
    assert dt < 10


def test_c2_noiseless_collapse(criterion):
    t = time.perf_counter()
    res = verify.check_collapse(n_channels=10, n_schemes=500, seed=1, tol=COLLAPSE_TOL)
    dt = time.perf_counter() - t
    criterion(2, res.passed and dt < 10, f"max gap={res.value:.2e}, {dt:.1f}s")
    assert res.passed
    assert dt < 10


def test_c3_xor_capacity_region(criterion):
    t = time.perf_counter()
    region = trace_region(fixtures.xor_channel(), "capacity", SearchConfig(r2_grid=5))
    dt = time.perf_counter() - t
    r1 = [p.best_r1 for p in region.points]
    ok = len(r1) == 5 and min(r1) >= XOR_FLOOR and dt < 120
    criterion(3, ok, f"min best_r1={min(r1):.6f} over {len(r1)} points, {dt:.1f}s")
    assert len(r1) == 5
    assert min(r1) >= XOR_FLOOR
    assert dt < 120


def test_c4_oracle_consistency(criterion):
    t = time.perf_counter()
    res = verify.check_oracle_consistency(lower_tol=ORACLE_LOWER, upper_slack=ORACLE_UPPER)
    dt = time.perf_counter() - t
    criterion(4, res.passed and dt < 300, f"{len(res.detail)} points, min(opt-oracle)={res.value:.2e}, {dt:.1f}s")
    assert res.passed, res.detail
    assert dt < 300


def test_c5_deterministic_sufficiency(criterion):
    t = time.perf_counter()
    res = verify.check_det_sufficiency(n_draws=50, n_stochastic=100, seed=2, tol=SUFFICIENCY_TOL)
    dt = time.perf_counter() - t
    criterion(5, res.passed and dt < 60, f"max(stochastic-deterministic)={res.value:.2e}, {dt:.1f}s")
    assert res.passed
    assert dt < 60


def test_c6_gp_reduction(criterion):
    t = time.perf_counter()
    res = verify.check_gp_reductions()
    dt = time.perf_counter() - t
    criterion(6, res.passed and dt < 300, f"(cFull, gpRate, pass) {res.detail}, {dt:.1f}s")
    assert res.passed, res.detail
    assert dt < 300


def test_c7_ternary_curve_nonincreasing(criterion):
    zic = fixtures.ternary_channel()
    t = time.perf_counter()
    curve = gp_curve(zic, np.linspace(0.0, math.log2(zic.x2_size), 8), SearchConfig())
    dt = time.perf_counter() - t
    c = [v for _, v in curve]
    worst_rise = max(b - a for a, b in zip(c, c[1:]))
    ok = worst_rise <= MONOTONE_SLACK and dt < 300
    criterion(7, ok, f"C(R2)={[round(v, 4) for v in c]}, worst rise={worst_rise:.2e}, {dt:.1f}s")
    assert worst_rise <= MONOTONE_SLACK
    assert dt < 300


def test_c8_achievability_simulation(criterion):
    zic = fixtures.xor_channel()
    scheme = fixtures.xor_precoding_scheme()
    joint = assemble_joint(zic, scheme)
    alloc = derive_rate_alloc(joint, SIM_MARGIN)
    t = time.perf_counter()
    reps = [simulate(zic, scheme, alloc, n, SIM_TRIALS, seed=0) for n in SIM_NS]
    # receiver 2's own link capacity I(X2;Y2|V) exceeded by 0.2 bit
    bad = violate(alloc, joint, "ach3", VIOLATION_EXCESS)
    control = simulate(zic, scheme, bad, SIM_NS[-1], SIM_TRIALS, seed=0)
    dt = time.perf_counter() - t
    p1 = [r.p_err1 for r in reps]
    p2 = [r.p_err2 for r in reps]
    decreasing = all(a > b for a, b in zip(p1, p1[1:])) and all(a > b for a, b in zip(p2, p2[1:]))
    small = p1[-1] <= SIM_CEILING and p2[-1] <= SIM_CEILING
    held_up = control.p_err2 >= VIOLATION_FLOOR
    ok = decreasing and small and held_up and dt < 600
    criterion(8, ok, f"pErr1={p1}, pErr2={p2}, violation pErr2={control.p_err2:.3f}, "
                     f"decreasing={decreasing}, n=16 <= {SIM_CEILING}: {small}, "
                     f"control >= {VIOLATION_FLOOR}: {held_up}, {dt:.0f}s")
    assert held_up
    assert dt < 600
    assert decreasing, (p1, p2)
    assert small, (p1[-1], p2[-1])


def _csv_bodies(out):
    return {p.name: p.read_bytes() for p in sorted(out.glob("*.csv"))}


def test_c9_reproducible_csv(criterion, tmp_path):
    region = ["region", "--channel", "fixture:ternary", "--kind", "inner", "--r2-grid", "3",
              "--v-cap", "2", "--u-cap", "3", "--restarts", "2", "--seed", "7"]
    sim = ["simulate", "--channel", "fixture:xor", "--n-list", "8,12", "--trials", "200",
           "--v-cap", "1", "--u-cap", "2", "--restarts", "2", "--seed", "7"]
    runs = {}
    for name, args in (("region", region), ("simulate", sim)):
        for k in range(2):
            out = tmp_path / f"{name}{k}"
            assert main([*args, "--out", str(out)]) == 0
            runs[name, k] = _csv_bodies(out)
    same = all(runs[n, 0] == runs[n, 1] and runs[n, 0] for n in ("region", "simulate"))
    criterion(9, same, f"files compared: {sorted(runs['region', 0]) + sorted(runs['simulate', 0])}")
    assert same
