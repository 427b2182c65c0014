"""Inner bound, outer bound and capacity formulas, and rate-region tracing.

For a scheme (V, U, p(x1|u,x2)) driven through the channel:

* inner:    R1 <= I(U;Y1|V) - I(U;X2|V),  R2 <= I(X2;Y2|V) + min{I(V;Y1), I(V;Y2)}
* outer:    R1 <= I(U;Y1|V) - I(U;Y2|V),  same R2 term
* capacity: R1 <= I(U;Y1|V) - I(U;X2|V),  R2 <= H(X2|V) + min{I(V;Y1), I(V;X2)}

The last one needs Y2 to be a one-to-one function of X2.  Regions are the
union of the rectangles [0, r1] x [0, r2] over schemes, traced as
max r1 subject to r2 >= t on a grid of t.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, replace
from typing import Iterator, Optional, Sequence

import numpy as np

from czic import _search
from czic.channel import AuxScheme, CognitiveZic, RatePair, is_noiseless_component, scheme_from_arrays
from czic.errors import BudgetExceeded, Infeasible, MissingAxis, NotNoiseless
from czic.prob import JointDist, conditional_entropy, conditional_mi

KINDS = ("inner", "outer", "capacity")
_NEEDED = ("v", "u", "x1", "x2", "y1", "y2")


def _require_axes(joint: JointDist) -> None:
    missing = [a for a in _NEEDED if a not in joint.names]
    if missing:
        raise MissingAxis(f"joint lacks axes {missing}")


def _common_r2(joint: JointDist) -> float:
    return conditional_mi(joint, "x2", "y2", "v") + min(
        conditional_mi(joint, "v", "y1"), conditional_mi(joint, "v", "y2")
    )


def inner_rates(joint: JointDist) -> RatePair:
    """Achievable corner point of the scheme's rectangle."""
    _require_axes(joint)
    r1 = conditional_mi(joint, "u", "y1", "v") - conditional_mi(joint, "u", "x2", "v")
    return RatePair(max(0.0, r1), _common_r2(joint))


def outer_rates(joint: JointDist) -> RatePair:
    """Converse corner point; dominates inner_rates on the same joint."""
    _require_axes(joint)
    r1 = conditional_mi(joint, "u", "y1", "v") - conditional_mi(joint, "u", "y2", "v")
    return RatePair(max(0.0, r1), _common_r2(joint))


def _y2_is_relabeling(joint: JointDist) -> bool:
    pxy = joint.mass.sum(axis=(0, 1, 2, 4))  # (x2, y2)
    px = pxy.sum(axis=1)
    for x in np.flatnonzero(px > 0):
        row = pxy[x] / px[x]
        if np.sum(row > 1e-12) != 1 or abs(row.max() - 1.0) > 1e-9:
            return False
    images = pxy[px > 0].argmax(axis=1)
    return len(set(images.tolist())) == len(images)


def capacity_rates(joint: JointDist, zic: Optional[CognitiveZic] = None) -> RatePair:
    """Capacity-region corner point; requires a noiseless X2 -> Y2 link.

    When ``zic`` is given its chan2 is tested directly, otherwise the
    relabeling property is read off the joint's (x2, y2) marginal.
    """
    _require_axes(joint)
    ok = is_noiseless_component(zic) if zic is not None else _y2_is_relabeling(joint)
    if not ok:
        raise NotNoiseless("capacity formula needs Y2 to be a one-to-one function of X2")
    r1 = conditional_mi(joint, "u", "y1", "v") - conditional_mi(joint, "u", "x2", "v")
    r2 = conditional_entropy(joint, "x2", "v") + min(
        conditional_mi(joint, "v", "y1"), conditional_mi(joint, "v", "x2")
    )
    return RatePair(max(0.0, r1), r2)


RATE_FUNCS = {"inner": inner_rates, "outer": outer_rates, "capacity": capacity_rates}


def enumerate_det_encoders(
    u_size: int, x2_size: int, x1_size: int, budget: int = 1 << 16
) -> Iterator[np.ndarray]:
    """Yield every map table x1 = f(u, x2) once, in lexicographic order."""
    if min(u_size, x2_size, x1_size) < 1:
        raise ValueError("sizes must be >= 1")
    total = _search.map_count(u_size, x2_size, x1_size)
    if total > budget:
        raise BudgetExceeded(f"{total} deterministic maps exceed budget {budget}")
    for chunk in _search.iter_map_chunks(u_size, x2_size, x1_size):
        yield from chunk


# -- optimization ------------------------------------------------------------


@dataclass(frozen=True)
class SearchConfig:
    """Knobs of the multistart search.  ``None`` caps resolve per channel."""

    v_cap: Optional[int] = None
    u_cap: Optional[int] = None
    restarts: int = 8
    grid_levels: int = 4
    r2_grid: int = 9
    tol: float = 1e-4
    seed: int = 0
    allow_stochastic_encoder: bool = False
    enum_budget: int = 4096
    grid_budget: int = 2000
    threads: int = 1

    def __post_init__(self):
        for name in ("restarts", "grid_levels", "r2_grid", "enum_budget", "grid_budget", "threads"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        for name in ("v_cap", "u_cap"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ValueError(f"{name} must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be > 0")

    def resolved(self, zic: CognitiveZic) -> "SearchConfig":
        return replace(
            self,
            v_cap=self.v_cap if self.v_cap is not None else zic.x2_size + 3,
            u_cap=self.u_cap if self.u_cap is not None else zic.x1_size * zic.x2_size + 2,
        )

    def engine(self, **overrides) -> _search.EngineConfig:
        kw = dict(
            v_size=self.v_cap,
            u_size=self.u_cap,
            restarts=self.restarts,
            grid_levels=self.grid_levels,
            tol=self.tol,
            seed=self.seed,
            enum_budget=self.enum_budget,
            grid_budget=self.grid_budget,
            threads=self.threads,
            stochastic_encoder=self.allow_stochastic_encoder,
        )
        kw.update(overrides)
        return _search.EngineConfig(**kw)


def r2_cap(zic: CognitiveZic, kind: str) -> float:
    """Loose upper bound on the R2 formula; targets above it are rejected outright."""
    y2 = zic.x2_size if kind == "capacity" else zic.y2_size
    return math.log2(zic.x2_size) + math.log2(min(zic.y1_size, y2))


def _check_kind(zic: CognitiveZic, kind: str) -> None:
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    if kind == "capacity" and not is_noiseless_component(zic):
        raise NotNoiseless("capacity kind needs a noiseless X2 -> Y2 component")


def _to_scheme(cand: _search.Candidate, **meta) -> AuxScheme:
    return scheme_from_arrays(cand.P, cand.encoder, r1=cand.r1, r2=cand.r2, **meta)


def _warm(schemes: Sequence[AuxScheme]):
    return [(s.pvux2.mass, s.encoder) for s in schemes]


def optimize_point(
    zic: CognitiveZic,
    kind: str,
    r2_target: float,
    cfg: SearchConfig = SearchConfig(),
    warm: Sequence[AuxScheme] = (),
) -> tuple[float, AuxScheme]:
    """Best r1 found over schemes whose R2 formula reaches ``r2_target``.

    The value is attained by the returned scheme, so it is a lower bound on
    the true maximum over the capped auxiliary alphabets.
    """
    _check_kind(zic, kind)
    if r2_target > r2_cap(zic, kind) + _search.FEAS_TOL:
        raise Infeasible(f"R2 target {r2_target} exceeds the cap {r2_cap(zic, kind):.6g}")
    cfg = cfg.resolved(zic)
    model = _search.RateModel(zic.chan1, zic.chan2, kind)
    objective = _search.Objective(model, "r1", max(0.0, float(r2_target)))
    best = _search.Engine(objective, cfg.engine()).run(_warm(warm))
    if not best.feasible:
        raise Infeasible(f"no scheme found with R2 >= {r2_target} (best R2 {best.r2:.6g})")
    return max(0.0, best.r1), _to_scheme(best, kind=kind)


def max_r2(zic: CognitiveZic, kind: str, cfg: SearchConfig = SearchConfig()) -> tuple[float, AuxScheme]:
    """Largest value of the kind's R2 formula over schemes, with its scheme."""
    _check_kind(zic, kind)
    cfg = cfg.resolved(zic)
    model = _search.RateModel(zic.chan1, zic.chan2, kind)
    objective = _search.Objective(model, "r2", None)
    best = _search.Engine(objective, cfg.engine(restarts=max(2, cfg.restarts // 2))).run()
    return max(0.0, best.r2), _to_scheme(best, kind=kind)


@dataclass
class RegionPoint:
    r2_target: float
    best_r1: float
    scheme: AuxScheme
    scheme_id: int = 0


@dataclass
class RateRegion:
    kind: str
    points: list[RegionPoint]
    config: SearchConfig
    r2_max: float = 0.0
    channel: str = ""

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["r2_target", "best_r1", "scheme_id"])
        for pt in self.points:
            writer.writerow([fmt(pt.r2_target), fmt(pt.best_r1), pt.scheme_id])
        return buf.getvalue()

    def schemes(self) -> list[AuxScheme]:
        out: dict[int, AuxScheme] = {}
        for pt in self.points:
            out.setdefault(pt.scheme_id, pt.scheme)
        return [out[k] for k in sorted(out)]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "channel": self.channel,
            "r2_max": self.r2_max,
            "config": asdict(self.config),
            "points": [
                {"r2_target": p.r2_target, "best_r1": p.best_r1, "scheme_id": p.scheme_id}
                for p in self.points
            ],
            "schemes": [s.to_dict() for s in self.schemes()],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def fmt(x: float) -> str:
    return f"{x:.10f}"


def trace_region(
    zic: CognitiveZic, kind: str, cfg: SearchConfig = SearchConfig()
) -> RateRegion:
    """Frontier of the union region on ``cfg.r2_grid`` evenly spaced R2 targets."""
    _check_kind(zic, kind)
    cfg = cfg.resolved(zic)
    top, top_scheme = max_r2(zic, kind, cfg)
    targets = np.linspace(0.0, top, cfg.r2_grid) if cfg.r2_grid > 1 else np.array([top])

    def solve(t):
        return optimize_point(zic, kind, float(t), replace(cfg, threads=1), warm=[top_scheme])

    results = _search.parallel_map(solve, list(targets), cfg.threads)
    points = [RegionPoint(float(t), r1, s) for t, (r1, s) in zip(targets, results)]
    # a scheme feasible at a larger target is feasible at every smaller one
    for i in range(len(points) - 2, -1, -1):
        if points[i + 1].best_r1 > points[i].best_r1:
            points[i].best_r1 = points[i + 1].best_r1
            points[i].scheme = points[i + 1].scheme
    ids: dict[int, int] = {}
    for pt in points:
        pt.scheme_id = ids.setdefault(id(pt.scheme), len(ids))
    return RateRegion(kind, points, cfg, r2_max=float(top), channel=zic.name)


def upper_concave_envelope(points: Sequence[tuple[float, float]]) -> list[tuple[float, float]]:
    """Upper hull of (r2, r1) pairs, sorted by r2."""
    pts = sorted(set((float(a), float(b)) for a, b in points))
    hull: list[tuple[float, float]] = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) >= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def region_hull(region: RateRegion) -> list[tuple[float, float]]:
    pts = [(p.r2_target, p.best_r1) for p in region.points]
    pts.append((region.r2_max, 0.0))
    return upper_concave_envelope(pts)


def fast_rates(zic: CognitiveZic, scheme: AuxScheme, kind: str) -> tuple[float, float]:
    """Raw rates through the vectorized evaluator (used to cross-check the search)."""
    model = _search.RateModel(zic.chan1, zic.chan2, kind)
    enc = scheme.encoder if scheme.is_deterministic else scheme.encoder_tensor(zic.x1_size)
    r1, r2 = model.rates(scheme.pvux2.mass[None], model.effective_channel(enc))
    return float(r1[0]), float(r2[0])
