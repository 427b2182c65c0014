"""Invariant checks run by ``czic verify`` and the acceptance tests."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from czic import _search, fixtures
from czic.bounds import (
    KINDS,
    SearchConfig,
    capacity_rates,
    enumerate_det_encoders,
    inner_rates,
    optimize_point,
    outer_rates,
)
from czic.channel import AuxScheme, CognitiveZic, assemble_joint, is_noiseless_component
from czic.errors import Infeasible, NotNoiseless
from czic.gp import check_gp_reduction
from czic.oracle import GridSpec, oracle_point
from czic.sampling import random_channel, random_scheme, random_stochastic_encoder


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float = float("nan")
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: {self.value:.3g} {self.detail if self.detail else ''}".rstrip()


def check_dominance(n_channels: int = 20, n_schemes: int = 200, seed: int = 0, tol: float = 1e-9) -> CheckResult:
    """outer r1 >= inner r1 and equal r2 on random (channel, scheme) pairs."""
    rng = np.random.default_rng(seed)
    channels = [random_channel(rng) for _ in range(n_channels)]
    worst_r1, worst_r2 = 0.0, 0.0
    for i in range(n_schemes):
        zic = channels[i % n_channels]
        joint = assemble_joint(zic, random_scheme(rng, zic))
        inner, outer = inner_rates(joint), outer_rates(joint)
        worst_r1 = min(worst_r1, outer.r1 - inner.r1)
        worst_r2 = max(worst_r2, abs(outer.r2 - inner.r2))
    ok = worst_r1 >= -tol and worst_r2 <= tol
    return CheckResult("bound dominance", ok, worst_r1, {"min(outer-inner r1)": worst_r1, "max|r2 diff|": worst_r2})


def check_collapse(n_channels: int = 10, n_schemes: int = 500, seed: int = 1, tol: float = 1e-9) -> CheckResult:
    """With a noiseless component, inner = outer = capacity rates for every scheme."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for c in range(n_channels):
        zic = random_channel(rng, noiseless=True)
        for _ in range(n_schemes // n_channels):
            joint = assemble_joint(zic, random_scheme(rng, zic))
            a, b, d = inner_rates(joint), outer_rates(joint), capacity_rates(joint, zic)
            worst = max(worst, abs(a.r1 - b.r1), abs(a.r2 - b.r2), abs(a.r1 - d.r1), abs(a.r2 - d.r2))
    return CheckResult("noiseless collapse", worst <= tol, worst)


def capcap1(joint) -> float:
    from czic.prob import conditional_mi

    return conditional_mi(joint, "u", "y1", "v") - conditional_mi(joint, "u", "x2", "v")


def check_det_sufficiency(n_draws: int = 50, n_stochastic: int = 100, seed: int = 2, tol: float = 1e-9) -> CheckResult:
    """For fixed p(v,u,x2), no stochastic encoder beats the best deterministic one."""
    rng = np.random.default_rng(seed)
    worst = -math.inf
    for _ in range(n_draws):
        zic = random_channel(rng)
        base = random_scheme(rng, zic, max_aux=2)
        model = _search.RateModel(zic.chan1, zic.chan2, "capacity")
        maps = np.array(list(enumerate_det_encoders(base.u_size, zic.x2_size, zic.x1_size)))
        r1_det, _ = model.rates(base.pvux2.mass[None], model.effective_channel(maps))
        best_det = float(r1_det.max())
        best_sto = -math.inf
        for _ in range(n_stochastic):
            enc = random_stochastic_encoder(rng, base.u_size, zic.x2_size, zic.x1_size)
            best_sto = max(best_sto, capcap1(assemble_joint(zic, AuxScheme(base.pvux2, enc))))
        worst = max(worst, best_sto - best_det)
    return CheckResult("deterministic sufficiency", worst <= tol, worst, {"max(stochastic - deterministic)": worst})


BINARY_FIXTURES = ("xor", "interference_free", "zero_capacity", "noisy_xor")


def check_oracle_consistency(
    names: Iterable[str] = BINARY_FIXTURES,
    targets: Iterable[float] = (0.0, 0.5, 1.0),
    seed: int = 0,
    lower_tol: float = 1e-6,
    upper_slack: float = 0.05,
) -> CheckResult:
    """optimize_point vs the exhaustive lattice at |V| = |U| = 2, step 0.25."""
    grid = GridSpec(step=0.25, v_size=2, u_size=2)
    cfg = SearchConfig(v_cap=2, u_cap=2, grid_levels=4, restarts=4, seed=seed)
    rows = {}
    ok = True
    worst = 0.0
    for name in names:
        zic = fixtures.get(name)
        kinds = KINDS if is_noiseless_component(zic) else ("inner", "outer")
        for kind in kinds:
            for t in targets:
                ref = oracle_point(zic, kind, t, grid)
                try:
                    got = optimize_point(zic, kind, t, cfg)[0]
                except Infeasible:
                    # fine only if the lattice has nothing useful there either
                    got = 0.0
                rows[f"{name}/{kind}/{t:g}"] = (round(got, 6), round(ref, 6))
                ok &= got >= ref - lower_tol and ref >= got - upper_slack
                worst = min(worst, got - ref)
    return CheckResult("oracle consistency", ok, worst, rows)


def check_gp_reductions(names: Iterable[str] = tuple(fixtures.STOCK), cfg: SearchConfig = SearchConfig()) -> CheckResult:
    rows = {}
    ok = True
    for name in names:
        rep = check_gp_reduction(fixtures.get(name), cfg)
        rows[name] = (round(rep.c_full, 6), round(rep.gp_rate, 6), rep.passed)
        ok &= rep.passed
    worst = max(abs(c - g) for c, g, _ in rows.values())
    return CheckResult("GP reduction", ok, worst, rows)


def check_expected_not_noiseless() -> CheckResult:
    """A noisy X2 -> Y2 link must be refused by the capacity formulas."""
    zic = fixtures.noisy_xor_channel()
    try:
        optimize_point(zic, "capacity", 0.0, SearchConfig(v_cap=1, u_cap=2, restarts=1))
    except NotNoiseless:
        return CheckResult("noisy component refused (expected failure)", True, 0.0)
    return CheckResult("noisy component refused (expected failure)", False, 1.0)


def check_channel(zic: CognitiveZic, seed: int = 0) -> CheckResult:
    """Dominance and (when noiseless) collapse on random schemes for one user channel."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(100):
        joint = assemble_joint(zic, random_scheme(rng, zic))
        a, b = inner_rates(joint), outer_rates(joint)
        worst = min(worst, b.r1 - a.r1, -abs(a.r2 - b.r2))
        if is_noiseless_component(zic):
            d = capacity_rates(joint, zic)
            worst = min(worst, -abs(a.r1 - d.r1), -abs(a.r2 - d.r2))
    return CheckResult(f"channel {zic.name or '(file)'}", worst >= -1e-9, worst)


def run_suite(
    seed: int = 0,
    extra: Iterable[CognitiveZic] = (),
    report: Optional[Callable[[CheckResult], None]] = None,
) -> list[CheckResult]:
    checks = [
        lambda: check_dominance(n_channels=10, n_schemes=100, seed=seed),
        lambda: check_collapse(n_channels=5, n_schemes=100, seed=seed + 1),
        lambda: check_det_sufficiency(n_draws=10, n_stochastic=50, seed=seed + 2),
        lambda: check_oracle_consistency(targets=(0.0, 1.0), seed=seed),
        lambda: check_gp_reductions(cfg=SearchConfig(seed=seed)),
        check_expected_not_noiseless,
    ]
    checks += [lambda z=z: check_channel(z, seed) for z in extra]
    results = []
    for run in checks:
        res = run()
        results.append(res)
        if report:
            report(res)
    return results
