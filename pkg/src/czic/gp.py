"""Gel'fand-Pinsker capacity and its generalization C(R2).

C(R2) is the best rate of the cognitive pair when the interference X2 is
uniform over a designable set of 2^{nR2} sequences.  It is the capacity
region's R1 frontier, so it delegates to ``bounds.optimize_point`` with the
capacity formulas.  At R2 = log|X2| it must equal the classical GP rate with
an i.i.d. uniform state; ``check_gp_reduction`` compares the two searches.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from czic import _search
from czic.bounds import SearchConfig, optimize_point
from czic.channel import AuxScheme, CognitiveZic, _check_rows, is_noiseless_component
from czic.errors import BadShape, Infeasible, NotNoiseless, NotNormalized
from czic.prob import NORM_TOL


@dataclass(frozen=True, eq=False)
class GpProblem:
    """State distribution p(s), channel p(y|x,s) of shape (|X|, |S|, |Y|)."""

    state_dist: np.ndarray
    chan: np.ndarray
    u_cap: Optional[int] = None

    def __post_init__(self):
        ps = np.array(self.state_dist, dtype=float)
        chan = np.array(self.chan, dtype=float)
        if chan.ndim != 3 or ps.ndim != 1 or chan.shape[1] != ps.shape[0]:
            raise BadShape(f"state {ps.shape} and channel {chan.shape} do not fit")
        if np.any(ps < 0) or abs(ps.sum() - 1.0) > NORM_TOL:
            raise NotNormalized(f"state distribution {ps} is not a pmf")
        _check_rows("chan", chan)
        object.__setattr__(self, "state_dist", ps / ps.sum())
        object.__setattr__(self, "chan", chan)

    @property
    def x_size(self) -> int:
        return self.chan.shape[0]

    @property
    def s_size(self) -> int:
        return self.chan.shape[1]

    @property
    def y_size(self) -> int:
        return self.chan.shape[2]

    @property
    def resolved_u_cap(self) -> int:
        return self.u_cap if self.u_cap is not None else self.x_size * self.s_size + 1


def gp_problem_for(zic: CognitiveZic, u_cap: Optional[int] = None) -> GpProblem:
    """The GP problem seen by the cognitive pair with X2 i.i.d. uniform as state."""
    return GpProblem(np.full(zic.x2_size, 1.0 / zic.x2_size), zic.chan1, u_cap)


def gp_search(prob: GpProblem, cfg: SearchConfig = SearchConfig()) -> _search.Candidate:
    model = _search.RateModel(prob.chan, np.eye(prob.s_size), "gp")
    objective = _search.Objective(model, "r1", None)
    engine_cfg = cfg.engine(v_size=1, u_size=prob.resolved_u_cap, fixed_x2=prob.state_dist)
    return _search.Engine(objective, engine_cfg).run()


def gp_capacity(prob: GpProblem, cfg: SearchConfig = SearchConfig()) -> float:
    """Best I(U;Y) - I(U;S) found over p(u|s) and maps x = g(u, s), clamped at 0."""
    return max(0.0, gp_search(prob, cfg).r1)


def generalized_gp_cap(zic: CognitiveZic) -> float:
    return math.log2(zic.x2_size) + math.log2(min(zic.y1_size, zic.x2_size))


def generalized_gp_capacity(
    zic: CognitiveZic,
    r2: float,
    cfg: SearchConfig = SearchConfig(),
    warm: Sequence[AuxScheme] = (),
) -> float:
    """C(R2): best I(U;Y1|V) - I(U;X2|V) subject to H(X2|V) + min{I(V;Y1), I(V;X2)} >= R2."""
    if not is_noiseless_component(zic):
        raise NotNoiseless("C(R2) is defined only when Y2 is a one-to-one function of X2")
    if r2 < 0:
        raise ValueError("R2 must be >= 0")
    if r2 > generalized_gp_cap(zic) + _search.FEAS_TOL:
        raise Infeasible(f"R2={r2} exceeds the cap {generalized_gp_cap(zic):.6g}")
    return optimize_point(zic, "capacity", r2, cfg, warm=warm)[0]


def gp_curve(
    zic: CognitiveZic, r2_values: Sequence[float], cfg: SearchConfig = SearchConfig()
) -> list[tuple[float, float]]:
    """C(R2) at each requested R2, every point searched independently with the same seed."""
    return [(float(r), generalized_gp_capacity(zic, float(r), cfg)) for r in r2_values]


@dataclass
class GpReport:
    c_full: float
    gp_rate: float
    gap: float
    passed: bool
    tolerance: float

    def to_dict(self) -> dict:
        return {
            "cFull": self.c_full,
            "gpRate": self.gp_rate,
            "gap": self.gap,
            "pass": self.passed,
            "tolerance": self.tolerance,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def check_gp_reduction(zic: CognitiveZic, cfg: SearchConfig = SearchConfig()) -> GpReport:
    """Compare C(log|X2|) with the GP rate of a uniform i.i.d. state."""
    if not is_noiseless_component(zic):
        raise NotNoiseless("the reduction needs Y2 to be a one-to-one function of X2")
    c_full = generalized_gp_capacity(zic, math.log2(zic.x2_size), cfg)
    gp_rate = gp_capacity(gp_problem_for(zic), cfg)
    gap = c_full - gp_rate
    tolerance = 0.02 + 2 * cfg.tol
    return GpReport(c_full, gp_rate, gap, abs(gap) <= tolerance, tolerance)
