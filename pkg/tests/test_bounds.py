import numpy as np
import pytest

from czic import fixtures
from czic.bounds import (
    SearchConfig,
    capacity_rates,
    enumerate_det_encoders,
    fast_rates,
    inner_rates,
    max_r2,
    optimize_point,
    outer_rates,
    trace_region,
    upper_concave_envelope,
)
from czic.channel import assemble_joint, scheme_from_arrays
from czic.errors import BudgetExceeded, Infeasible, NotNoiseless
from czic.sampling import random_channel, random_scheme

SMALL = SearchConfig(v_cap=2, u_cap=2, restarts=2, r2_grid=3)


def xor_joint():
    return assemble_joint(fixtures.xor_channel(), fixtures.xor_precoding_scheme())


@pytest.mark.parametrize("rates", [inner_rates, outer_rates, capacity_rates])
def test_xor_scheme_rates(rates):
    pair = rates(xor_joint())
    assert pair.r1 == pytest.approx(1.0)
    assert pair.r2 == pytest.approx(1.0)


def test_constant_u_kills_r1():
    zic = fixtures.ternary_channel()
    p = np.random.default_rng(0).dirichlet(np.ones(6)).reshape(2, 1, 3)
    joint = assemble_joint(zic, scheme_from_arrays(p, [[0, 1, 2]]))
    assert inner_rates(joint).r1 == 0.0
    assert outer_rates(joint).r1 == 0.0


def test_constant_x2_kills_capacity_r2():
    p = np.zeros((1, 2, 2))
    p[0, :, 1] = 0.5
    joint = assemble_joint(fixtures.xor_channel(), scheme_from_arrays(p, [[0, 1], [1, 0]]))
    assert capacity_rates(joint).r2 == pytest.approx(0.0, abs=1e-12)


def test_dead_first_link_kills_r1():
    rng = np.random.default_rng(3)
    zic = fixtures.zero_capacity_channel()
    for _ in range(20):
        assert inner_rates(assemble_joint(zic, random_scheme(rng, zic))).r1 == 0.0


def test_capacity_rejects_noisy_link():
    zic = fixtures.noisy_xor_channel()
    joint = assemble_joint(zic, fixtures.xor_precoding_scheme())
    with pytest.raises(NotNoiseless):
        capacity_rates(joint)
    with pytest.raises(NotNoiseless):
        optimize_point(zic, "capacity", 0.0, SMALL)


def test_encoder_enumeration():
    assert len(list(enumerate_det_encoders(1, 1, 2))) == 2
    maps = list(enumerate_det_encoders(2, 2, 2))
    assert len(maps) == 16
    assert len({m.tobytes() for m in maps}) == 16
    with pytest.raises(BudgetExceeded):
        list(enumerate_det_encoders(2, 2, 2, budget=10))


def test_fast_rates_match_joint_route():
    rng = np.random.default_rng(11)
    for _ in range(30):
        zic = random_channel(rng, noiseless=bool(rng.integers(2)))
        scheme = random_scheme(rng, zic, stochastic=bool(rng.integers(2)))
        joint = assemble_joint(zic, scheme)
        kinds = ["inner", "outer"] + (["capacity"] if zic.chan2.max() == 1.0 else [])
        for kind in kinds:
            ref = {"inner": inner_rates, "outer": outer_rates, "capacity": capacity_rates}[kind](joint)
            r1, r2 = fast_rates(zic, scheme, kind)
            assert max(r1, 0.0) == pytest.approx(ref.r1, abs=1e-9)
            assert r2 == pytest.approx(ref.r2, abs=1e-9)


@pytest.mark.parametrize("target", [0.0, 1.0])
def test_xor_optimum(target):
    r1, scheme = optimize_point(fixtures.xor_channel(), "capacity", target, SMALL)
    assert r1 == pytest.approx(1.0, abs=0.02)
    # the reported value is attained by the returned scheme
    pair = capacity_rates(assemble_joint(fixtures.xor_channel(), scheme))
    assert pair.r1 == pytest.approx(r1, abs=1e-9)
    assert pair.r2 >= target - 1e-9


def test_target_above_cap():
    with pytest.raises(Infeasible):
        optimize_point(fixtures.xor_channel(), "inner", 10.0, SMALL)


def test_search_is_reproducible_and_thread_invariant():
    zic = fixtures.ternary_channel()
    cfg = SearchConfig(v_cap=2, u_cap=3, restarts=2, seed=5)
    a = optimize_point(zic, "inner", 0.8, cfg)
    b = optimize_point(zic, "inner", 0.8, cfg)
    assert a[0] == b[0]
    np.testing.assert_array_equal(a[1].pvux2.mass, b[1].pvux2.mass)
    xor = fixtures.xor_channel()
    one = trace_region(xor, "inner", SMALL).to_csv()
    two = trace_region(xor, "inner", SearchConfig(v_cap=2, u_cap=2, restarts=2, r2_grid=3, threads=2)).to_csv()
    assert one == two


def test_zero_capacity_region():
    region = trace_region(fixtures.zero_capacity_channel(), "capacity", SMALL)
    assert [p.best_r1 for p in region.points] == [0.0, 0.0, 0.0]
    assert region.r2_max == pytest.approx(1.0, abs=1e-6)


def test_outer_dominates_inner_on_noisy_link():
    zic = fixtures.noisy_xor_channel(0.2)
    inner = trace_region(zic, "inner", SMALL)
    outer = trace_region(zic, "outer", SMALL)
    for p, q in zip(inner.points, outer.points):
        assert q.best_r1 >= p.best_r1 - 1e-9


def test_region_is_monotone_and_csv_shaped():
    region = trace_region(fixtures.ternary_channel(), "inner", SearchConfig(v_cap=2, u_cap=3, restarts=2, r2_grid=4))
    r1 = [p.best_r1 for p in region.points]
    assert all(a >= b for a, b in zip(r1, r1[1:]))
    lines = region.to_csv().splitlines()
    assert lines[0] == "r2_target,best_r1,scheme_id"
    assert len(lines) == 5
    assert len(region.schemes()) == len({p.scheme_id for p in region.points})


def test_max_r2_xor():
    top, _ = max_r2(fixtures.xor_channel(), "capacity", SMALL)
    assert top == pytest.approx(1.0, abs=1e-6)


def test_upper_concave_envelope():
    hull = upper_concave_envelope([(0, 1), (0.5, 0.4), (1, 0.6), (2, 0)])
    assert hull == [(0.0, 1.0), (1.0, 0.6), (2.0, 0.0)]
