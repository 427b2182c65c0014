"""Exhaustive lattice baselines for tiny instances.

Every simplex point whose coordinates are multiples of ``step`` is crossed
with every deterministic encoder, and rates are computed through the plain
JointDist route (``assemble_joint`` + the bound formulas).  Nothing here
shares code with the vectorized search.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from czic.bounds import KINDS, RATE_FUNCS
from czic.channel import AuxScheme, CognitiveZic, assemble_joint, is_noiseless_component
from czic.errors import NotNoiseless, TooLarge
from czic.gp import GpProblem
from czic.prob import JointDist, conditional_mi

MAX_ALPHABET = 3
MAX_POINTS = 10**7
FEAS_TOL = 1e-9


@dataclass(frozen=True)
class GridSpec:
    step: float = 0.25
    v_size: int = 1
    u_size: int = 2

    def __post_init__(self):
        if not 0 < self.step <= 0.5:
            raise ValueError("step must lie in (0, 0.5]")
        if abs(1 / self.step - round(1 / self.step)) > 1e-9:
            raise ValueError("1/step must be an integer")
        if self.v_size not in (1, 2) or self.u_size not in (1, 2):
            raise ValueError("oracle auxiliary sizes must be 1 or 2")

    @property
    def levels(self) -> int:
        return int(round(1 / self.step))


def simplex_lattice(cells: int, levels: int) -> list[tuple[float, ...]]:
    """All points of the probability simplex with coordinates in (1/levels)Z."""
    out = []
    for combo in itertools.combinations_with_replacement(range(cells), levels):
        counts = [0] * cells
        for c in combo:
            counts[c] += 1
        out.append(tuple(k / levels for k in counts))
    return out


def _all_maps(rows: int, cols: int, values: int):
    for flat in itertools.product(range(values), repeat=rows * cols):
        yield np.array(flat, dtype=np.int64).reshape(rows, cols)


def _guard_sizes(*sizes: int) -> None:
    if max(sizes) > MAX_ALPHABET:
        raise TooLarge(f"oracle handles alphabets up to {MAX_ALPHABET}, got {sizes}")


@lru_cache(maxsize=64)
def _table(key) -> tuple[np.ndarray, np.ndarray]:
    chan1, chan2, shape1, shape2, kind, grid = key
    zic = CognitiveZic(
        np.frombuffer(chan1).reshape(shape1), np.frombuffer(chan2).reshape(shape2)
    )
    V, U, X2 = grid.v_size, grid.u_size, zic.x2_size
    rate = RATE_FUNCS[kind]
    r1s, r2s = [], []
    for point in simplex_lattice(V * U * X2, grid.levels):
        dist = JointDist([("v", V), ("u", U), ("x2", X2)], np.reshape(point, (V, U, X2)))
        for f in _all_maps(U, X2, zic.x1_size):
            joint = assemble_joint(zic, AuxScheme(dist, f))
            pair = rate(joint)
            r1s.append(pair.r1)
            r2s.append(pair.r2)
    return np.array(r1s), np.array(r2s)


def oracle_point(zic: CognitiveZic, kind: str, r2_target: float, grid: GridSpec = GridSpec()) -> float:
    """Exact lattice maximum of r1 subject to r2 >= r2_target (0 when nothing qualifies)."""
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}")
    _guard_sizes(zic.x1_size, zic.x2_size, zic.y1_size, zic.y2_size)
    if kind == "capacity" and not is_noiseless_component(zic):
        raise NotNoiseless("capacity kind needs a noiseless X2 -> Y2 component")
    n_points = math.comb(grid.v_size * grid.u_size * zic.x2_size + grid.levels - 1, grid.levels)
    n_maps = zic.x1_size ** (grid.u_size * zic.x2_size)
    if n_points * n_maps > MAX_POINTS:
        raise TooLarge(f"{n_points} lattice points x {n_maps} maps exceeds {MAX_POINTS}")
    key = (
        zic.chan1.tobytes(), zic.chan2.tobytes(), zic.chan1.shape, zic.chan2.shape, kind, grid,
    )
    r1, r2 = _table(key)
    ok = r2 >= r2_target - FEAS_TOL
    return float(r1[ok].max()) if ok.any() else 0.0


def oracle_gp(prob: GpProblem, grid: GridSpec = GridSpec()) -> float:
    """Exact lattice maximum of I(U;Y) - I(U;S) over p(u|s) x maps x = g(u, s)."""
    _guard_sizes(prob.s_size, prob.x_size, prob.y_size)
    U, S, X, Y = grid.u_size, prob.s_size, prob.x_size, prob.y_size
    columns = simplex_lattice(U, grid.levels)
    n = len(columns) ** S * X ** (U * S)
    if n > MAX_POINTS:
        raise TooLarge(f"{n} oracle points exceeds {MAX_POINTS}")
    best = 0.0
    axes = [("u", U), ("s", S), ("x", X), ("y", Y)]
    for cols in itertools.product(columns, repeat=S):
        pus = np.array(cols).T * prob.state_dist[None, :]  # (u, s)
        for g in _all_maps(U, S, X):
            mass = np.zeros((U, S, X, Y))
            for u in range(U):
                for s in range(S):
                    mass[u, s, g[u, s]] = pus[u, s] * prob.chan[g[u, s], s]
            joint = JointDist(axes, mass)
            rate = conditional_mi(joint, "u", "y") - conditional_mi(joint, "u", "s")
            best = max(best, rate)
    return best
