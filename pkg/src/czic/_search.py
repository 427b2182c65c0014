"""Vectorized rate evaluation and the multistart local search behind the optimizers.

A candidate is a pair (P, encoder) with P = p(v,u,x2) of shape (V, U, X2).
Rates are computed for whole batches of candidates at once; the search
alternates an encoder step (exhaustive over deterministic maps when the
enumeration budget allows) with coordinate ascent on P.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Sequence

import numpy as np
from scipy.special import entr

LN2 = math.log(2.0)
FEAS_TOL = 1e-9
INFEASIBLE_FLOOR = -1e6
MIN_STEP = 1e-4
PAIR_CHUNK = 16384
MAX_CLIMB = 400
ETAS = (0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 4.0)


def _hb(m: np.ndarray) -> np.ndarray:
    """Entropy in bits of each batch row of the pmf array ``m`` (batch axis 0)."""
    return entr(m).reshape(m.shape[0], -1).sum(axis=1) / LN2


class RateModel:
    """Rate formulas of one bound, evaluated on batches.

    kind is one of ``inner``, ``outer``, ``capacity`` or ``gp`` (GP objective
    with no R2 constraint).
    """

    def __init__(self, chan1: np.ndarray, chan2: np.ndarray, kind: str):
        self.chan1 = np.asarray(chan1, dtype=float)
        self.chan2 = np.asarray(chan2, dtype=float)
        self.kind = kind
        self.x1_size, self.x2_size, self.y1_size = self.chan1.shape
        self._x2_index = np.arange(self.x2_size)

    def effective_channel(self, encoder: np.ndarray) -> np.ndarray:
        """p(y1|u,x2) induced by an encoder (or a batch of them)."""
        enc = np.asarray(encoder)
        if np.issubdtype(enc.dtype, np.integer):
            return self.chan1[enc, self._x2_index]
        return np.einsum("...uxa,axy->...uxy", enc, self.chan1)

    def rates(self, P: np.ndarray, K: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Raw (unclamped) r1 and r2 for batches P (B,V,U,X2) and K (B or 1,U,X2,Y1)."""
        if K.ndim == 3:
            K = K[None]
        B = max(P.shape[0], K.shape[0])
        # p(v,u,y1) = sum_x2 p(v,u,x2) p(y1|u,x2), as a batched matmul over (b, u)
        pvuy1 = np.matmul(P.transpose(0, 2, 1, 3), K).transpose(0, 2, 1, 3)
        pvy1 = pvuy1.sum(axis=2)
        pvu = P.sum(axis=3)
        pv = pvu.sum(axis=2)
        pvx = P.sum(axis=2)
        hv = _hb(pv)
        hvu = _hb(pvu)
        hvx = _hb(pvx)
        hvy1 = _hb(pvy1)
        i_vy1 = hv + _hb(pvy1.sum(axis=1)) - hvy1
        i_uy1_v = hvu + hvy1 - hv - _hb(pvuy1)
        i_ux2_v = hvu + hvx - hv - _hb(P)
        if self.kind == "gp":
            return np.broadcast_arrays(i_uy1_v - i_ux2_v, np.zeros(B))
        if self.kind == "capacity":
            i_vx2 = hv + _hb(pvx.sum(axis=1)) - hvx
            r2 = (hvx - hv) + np.minimum(i_vy1, i_vx2)
            return np.broadcast_arrays(i_uy1_v - i_ux2_v, r2)
        W2 = self.chan2
        pvy2 = pvx @ W2
        # H(V,X2,Y2) = H(V,X2) + sum_x2 p(x2) H(Y2|X2=x2)
        h_y2_x = entr(W2).sum(axis=1) / LN2
        hvxy2 = hvx + pvx.sum(axis=1) @ h_y2_x
        hvy2 = _hb(pvy2)
        i_x2y2_v = hvx + hvy2 - hv - hvxy2
        i_vy2 = hv + _hb(pvy2.sum(axis=1)) - hvy2
        r2 = i_x2y2_v + np.minimum(i_vy1, i_vy2)
        if self.kind == "inner":
            r1 = i_uy1_v - i_ux2_v
        elif self.kind == "outer":
            r1 = i_uy1_v - (hvu + hvy2 - hv - _hb(P @ W2))
        else:
            raise ValueError(f"unknown kind {self.kind!r}")
        return np.broadcast_arrays(r1, r2)


@dataclass
class Objective:
    """What to maximize (``r1`` or ``r2``) and the R2 floor, if any."""

    model: RateModel
    maximize: str = "r1"
    target: Optional[float] = None

    def keys(self, P: np.ndarray, K: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        r1, r2 = self.model.rates(P, K)
        obj = r1 if self.maximize == "r1" else r2
        if self.target is None:
            return obj, r1, r2
        viol = np.maximum(0.0, self.target - r2)
        key = np.where(viol <= FEAS_TOL, obj, INFEASIBLE_FLOOR - viol)
        return key, r1, r2


@dataclass
class Candidate:
    key: float
    r1: float
    r2: float
    P: np.ndarray
    encoder: np.ndarray

    @property
    def feasible(self) -> bool:
        return self.key > INFEASIBLE_FLOOR / 2


@dataclass
class EngineConfig:
    v_size: int
    u_size: int
    restarts: int = 8
    grid_levels: int = 4
    tol: float = 1e-6
    seed: int = 0
    enum_budget: int = 4096
    grid_budget: int = 2000
    cross_budget: int = 200_000
    sampled_maps: int = 64
    max_rounds: int = 25
    threads: int = 1
    stochastic_encoder: bool = False
    fixed_x2: Optional[np.ndarray] = None


# -- deterministic encoder maps ---------------------------------------------


def map_count(u_size: int, x2_size: int, x1_size: int) -> int:
    return x1_size ** (u_size * x2_size)


def maps_from_codes(codes: np.ndarray, u_size: int, x2_size: int, x1_size: int) -> np.ndarray:
    """Decode integer codes into map tables; cell (0,0) is the most significant digit."""
    cells = u_size * x2_size
    powers = x1_size ** np.arange(cells - 1, -1, -1, dtype=np.int64)
    digits = (np.asarray(codes, dtype=np.int64)[:, None] // powers) % x1_size
    return digits.reshape(-1, u_size, x2_size)


def iter_map_chunks(u_size, x2_size, x1_size, chunk=4096) -> Iterator[np.ndarray]:
    total = map_count(u_size, x2_size, x1_size)
    for start in range(0, total, chunk):
        codes = np.arange(start, min(total, start + chunk), dtype=np.int64)
        yield maps_from_codes(codes, u_size, x2_size, x1_size)


# -- lattice points of the simplex ------------------------------------------


def compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All tuples of ``parts`` nonnegative ints summing to ``total``, lexicographic."""
    for bars in itertools.combinations(range(total + parts - 1), parts - 1):
        prev = -1
        out = []
        for b in bars:
            out.append(b - prev - 1)
            prev = b
        out.append(total + parts - 2 - prev)
        yield tuple(out)


def composition_count(total: int, parts: int) -> int:
    return math.comb(total + parts - 1, parts - 1)


def _random_composition(rng: np.random.Generator, total: int, parts: int) -> np.ndarray:
    if parts == 1:
        return np.array([total])
    bars = np.sort(rng.choice(total + parts - 1, parts - 1, replace=False))
    edges = np.concatenate(([-1], bars, [total + parts - 1]))
    return np.diff(edges) - 1


def lattice_points(shape, levels, rng, budget, fixed_x2=None) -> np.ndarray:
    """Simplex lattice with denominator ``levels`` (enumerated, or sampled past budget).

    With ``fixed_x2`` the lattice is taken per x2 column over p(v,u|x2).
    """
    V, U, X2 = shape
    if fixed_x2 is None:
        cells = V * U * X2
        count = composition_count(levels, cells)
        if count <= budget:
            pts = np.array(list(compositions(levels, cells)), dtype=float)
        else:
            pts = np.array([_random_composition(rng, levels, cells) for _ in range(budget)], dtype=float)
        return pts.reshape(-1, V, U, X2) / levels
    cells = V * U
    per = composition_count(levels, cells)
    if per**X2 <= budget:
        cols = np.array(list(compositions(levels, cells)), dtype=float) / levels
        combos = itertools.product(range(len(cols)), repeat=X2)
        pts = np.array([np.stack([cols[i] for i in combo], axis=-1) for combo in combos])
    else:
        pts = np.array([
            np.stack([_random_composition(rng, levels, cells) / levels for _ in range(X2)], axis=-1)
            for _ in range(budget)
        ])
    pts = pts.reshape(-1, V, U, X2) * np.asarray(fixed_x2)[None, None, None, :]
    return pts


# -- the search ---------------------------------------------------------------


class Engine:
    def __init__(self, objective: Objective, cfg: EngineConfig):
        self.obj = objective
        self.cfg = cfg
        m = objective.model
        self.shape = (cfg.v_size, cfg.u_size, m.x2_size)
        self.x1_size = m.x1_size
        self.n_maps = map_count(cfg.u_size, m.x2_size, m.x1_size)
        self.enumerable = self.n_maps <= cfg.enum_budget
        C = int(np.prod(self.shape))
        self._eye = np.eye(C).reshape((C,) + self.shape)
        x2_of_cell = np.unravel_index(np.arange(C), self.shape)[2]
        self._x2_of_cell = x2_of_cell
        self._colmask = (np.arange(m.x2_size)[None, :] == x2_of_cell[:, None]).astype(float)
        self._colmask = np.broadcast_to(
            self._colmask[:, None, None, :], (C,) + self.shape
        ).copy()

    # scoring helpers
    def _score(self, P, encoder):
        K = self.obj.model.effective_channel(encoder)
        key, r1, r2 = self.obj.keys(P[None], K)
        return float(key[0]), float(r1[0]), float(r2[0])

    def candidate(self, P, encoder) -> Candidate:
        key, r1, r2 = self._score(P, encoder)
        return Candidate(key, r1, r2, P, encoder)

    # encoder step ---------------------------------------------------------
    def best_encoder(self, P, current, rng) -> np.ndarray:
        V, U, X2 = self.shape
        X1 = self.x1_size
        best_enc = current
        best_key = self._score(P, current)[0]
        if not np.issubdtype(np.asarray(current).dtype, np.integer):
            det = np.asarray(current).argmax(axis=-1)
            k = self._score(P, det)[0]
            if k >= best_key:
                best_enc, best_key = det, k
        if self.enumerable:
            for maps in iter_map_chunks(U, X2, X1):
                keys = self.obj.keys(P[None], self.obj.model.effective_channel(maps))[0]
                i = int(np.argmax(keys))
                if keys[i] > best_key + 1e-12:
                    best_key, best_enc = float(keys[i]), maps[i]
        else:
            maps = rng.integers(0, X1, size=(self.cfg.sampled_maps, U, X2))
            keys = self.obj.keys(P[None], self.obj.model.effective_channel(maps))[0]
            i = int(np.argmax(keys))
            if keys[i] > best_key + 1e-12:
                best_key, best_enc = float(keys[i]), maps[i]
            best_enc = np.asarray(best_enc)
            # coordinate ascent over single cells
            while True:
                trial = np.repeat(best_enc[None], U * X2 * X1, axis=0)
                cell_u, cell_x, val = np.unravel_index(np.arange(U * X2 * X1), (U, X2, X1))
                trial[np.arange(len(trial)), cell_u, cell_x] = val
                keys = self.obj.keys(P[None], self.obj.model.effective_channel(trial))[0]
                i = int(np.argmax(keys))
                if keys[i] > best_key + 1e-12:
                    best_key, best_enc = float(keys[i]), trial[i]
                else:
                    break
        if self.cfg.stochastic_encoder:
            best_enc, best_key = self._stochastic_climb(P, best_enc, best_key)
        return np.asarray(best_enc)

    def _stochastic_climb(self, P, enc, key):
        U, X2, X1 = self.shape[1], self.shape[2], self.x1_size
        E = np.asarray(enc)
        if np.issubdtype(E.dtype, np.integer):
            E = np.eye(X1)[E]
        step = 0.25
        n = U * X2 * X1
        cu, cx, ca = np.unravel_index(np.arange(n), (U, X2, X1))
        while step >= MIN_STEP:
            trial = np.repeat(E[None], n, axis=0)
            rows = trial[np.arange(n), cu, cx]
            rows = (1 - step) * rows
            rows[np.arange(n), ca] += step
            trial[np.arange(n), cu, cx] = rows
            keys = self.obj.keys(P[None], self.obj.model.effective_channel(trial))[0]
            i = int(np.argmax(keys))
            if keys[i] > key + 1e-12:
                key, E = float(keys[i]), trial[i]
            else:
                step /= 2
        return E, key

    # P step ---------------------------------------------------------------
    def _moves(self, P, step):
        eye, colmask = self._eye, self._colmask
        flatP = P.reshape(-1)
        col_mass = P.sum(axis=(0, 1))[self._x2_of_cell][:, None, None, None]
        Pc = flatP[:, None, None, None]
        # within-column moves keep p(x2) fixed
        toward_col = P[None] - step * P[None] * colmask + step * col_mass * eye
        denom = col_mass - step * Pc
        factor = np.where(denom > 0, col_mass / np.where(denom > 0, denom, 1.0), 1.0)
        away_col = (P[None] - step * Pc * eye) * (1 + colmask * (factor - 1))
        out = [toward_col, away_col]
        if self.cfg.fixed_x2 is None:
            toward = (1 - step) * P[None] + step * eye
            away = P[None] * (1 - step * eye)
            away = away / away.sum(axis=(1, 2, 3), keepdims=True)
            out += [toward, away]
        moves = np.concatenate(out)
        moves = np.clip(moves, 0.0, None)
        return moves / moves.sum(axis=(1, 2, 3), keepdims=True)

    def _eg_moves(self, P, d_obj, d_r2):
        """Exponentiated-gradient candidates along finite-difference directions."""
        fixed = self.cfg.fixed_x2 is not None
        out = []
        for mu in (0.0, 1.0, 10.0):
            D = d_obj + mu * d_r2
            scale = np.abs(D).max()
            if not np.isfinite(scale) or scale == 0:
                continue
            D = (D / scale).reshape(self.shape)
            for eta in ETAS:
                Q = P * np.exp(eta * (D - 1.0))
                if fixed:
                    cols = Q.sum(axis=(0, 1))
                    mass = P.sum(axis=(0, 1))
                    Q = Q * np.where(cols > 0, mass / np.where(cols > 0, cols, 1.0), 0.0)
                out.append(Q / Q.sum())
        return np.array(out).reshape((-1,) + self.shape)

    def climb_P(self, P, enc, key):
        K = self.obj.model.effective_channel(enc)
        C = P.size
        fixed = self.cfg.fixed_x2 is not None
        _, r1_0, r2_0 = self.obj.keys(P[None], K)
        obj0 = (r1_0 if self.obj.maximize == "r1" else r2_0)[0]
        step = 0.25
        for _ in range(MAX_CLIMB):
            if step < MIN_STEP:
                break
            moves = self._moves(P, step)
            keys, r1, r2 = self.obj.keys(moves, K)
            # directional derivatives toward each cell, from the toward-moves
            lo = 0 if fixed else 2 * C
            obj = r1 if self.obj.maximize == "r1" else r2
            d_obj = (obj[lo:lo + C] - obj0) / step
            d_r2 = (r2[lo:lo + C] - r2_0[0]) / step
            eg = self._eg_moves(P, d_obj, d_r2)
            if len(eg):
                k2, e1, e2 = self.obj.keys(eg, K)
                moves = np.concatenate([moves, eg])
                keys = np.concatenate([keys, k2])
                r1 = np.concatenate([r1, e1])
                r2 = np.concatenate([r2, e2])
            i = int(np.argmax(keys))
            if keys[i] > key + self.cfg.tol:
                key, P = float(keys[i]), moves[i]
                r2_0 = r2[i:i + 1]
                obj0 = (r1 if self.obj.maximize == "r1" else r2)[i]
            else:
                step /= 2
        return P, key

    def local_search(self, start: Candidate, rng) -> Candidate:
        P, enc = start.P, np.asarray(start.encoder)
        key = self._score(P, enc)[0]
        for _ in range(self.cfg.max_rounds):
            before = key
            enc = self.best_encoder(P, enc, rng)
            key = self._score(P, enc)[0]
            P, key = self.climb_P(P, enc, key)
            if key - before < self.cfg.tol:
                break
        return self.candidate(P, enc)

    # starts -----------------------------------------------------------------
    def _structured_starts(self) -> list[np.ndarray]:
        V, U, X2 = self.shape
        fixed = self.cfg.fixed_x2
        px2 = np.full(X2, 1.0 / X2) if fixed is None else np.asarray(fixed, dtype=float)
        full = np.ones((V, U, 1)) / (V * U) * px2
        vtriv = np.zeros((V, U, X2))
        vtriv[0] = np.ones((U, 1)) / U * px2
        starts = [full, vtriv]
        if U > 1:
            # U independent of X2, split over two symbols: the classic precoding start
            half = np.zeros((V, U, X2))
            half[0, :2] = 0.5 * px2
            starts.append(half)
        return starts

    def _random_start(self, rng, idx) -> np.ndarray:
        V, U, X2 = self.shape
        fixed = self.cfg.fixed_x2
        v_trivial = idx % 4 >= 2
        free_x2 = fixed is None and idx % 2 == 0
        if v_trivial:
            P = np.zeros((V, U, X2))
            if free_x2:
                P[0] = rng.dirichlet(np.ones(U * X2)).reshape(U, X2)
            else:
                px2 = np.full(X2, 1.0 / X2) if fixed is None else np.asarray(fixed)
                P[0] = np.stack([rng.dirichlet(np.ones(U)) for _ in range(X2)], axis=1) * px2
            return P
        if free_x2:
            return rng.dirichlet(np.ones(V * U * X2)).reshape(V, U, X2)
        px2 = np.full(X2, 1.0 / X2) if fixed is None else np.asarray(fixed)
        cond = np.stack([rng.dirichlet(np.ones(V * U)) for _ in range(X2)], axis=1)
        return cond.reshape(V, U, X2) * px2

    def _grid_candidates(self, rng, seed_maps: Sequence[np.ndarray]) -> list[Candidate]:
        pts = lattice_points(self.shape, self.cfg.grid_levels, rng, self.cfg.grid_budget, self.cfg.fixed_x2)
        V, U, X2 = self.shape
        if self.enumerable and len(pts) * self.n_maps <= self.cfg.cross_budget:
            maps = np.concatenate(list(iter_map_chunks(U, X2, self.x1_size)))
        else:
            extra = rng.integers(0, self.x1_size, size=(self.cfg.sampled_maps // 2, U, X2))
            maps = np.concatenate([np.asarray(seed_maps, dtype=np.int64).reshape(-1, U, X2), extra])
        Ks = self.obj.model.effective_channel(maps)
        best_key = np.full(len(pts), -np.inf)
        best_map = np.zeros(len(pts), dtype=np.int64)
        per = max(1, PAIR_CHUNK // max(1, len(maps)))
        for lo in range(0, len(pts), per):
            chunk = pts[lo:lo + per]
            Pb = np.repeat(chunk, len(maps), axis=0)
            Kb = np.tile(Ks, (len(chunk), 1, 1, 1))
            keys = self.obj.keys(Pb, Kb)[0].reshape(len(chunk), len(maps))
            j = keys.argmax(axis=1)
            best_key[lo:lo + per] = keys[np.arange(len(chunk)), j]
            best_map[lo:lo + per] = j
        order = np.argsort(-best_key, kind="stable")
        self.grid_best = None
        out = []
        for i in order[: max(1, self.cfg.restarts)]:
            out.append(self.candidate(pts[i], maps[best_map[i]]))
        if len(order):
            i = order[0]
            self.grid_best = self.candidate(pts[i], maps[best_map[i]])
        return out

    def run(self, warm: Sequence[tuple[np.ndarray, np.ndarray]] = ()) -> Candidate:
        cfg = self.cfg
        V, U, X2 = self.shape
        root = np.random.SeedSequence(cfg.seed)
        grid_rng, *item_seeds = [np.random.default_rng(s) for s in root.spawn(1 + cfg.restarts + 64)]
        default_map = np.zeros((U, X2), dtype=np.int64)
        starts: list[Candidate] = []
        for P, enc in warm:
            P = _fit(np.asarray(P, dtype=float), self.shape)
            enc = _fit_encoder(np.asarray(enc), U, X2)
            if P is not None and enc is not None:
                starts.append(self.candidate(P, enc))
        for P in self._structured_starts():
            starts.append(self.candidate(P, default_map))
        seed_maps = [default_map] + [np.asarray(c.encoder) for c in starts if np.asarray(c.encoder).ndim == 2]
        starts.extend(self._grid_candidates(grid_rng, seed_maps))
        for i in range(cfg.restarts):
            starts.append(self.candidate(self._random_start(item_seeds[i], i), default_map))

        rngs = [np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(7, i))) for i in range(len(starts))]
        jobs = list(zip(starts, rngs))
        if cfg.threads > 1:
            with ThreadPoolExecutor(cfg.threads) as pool:
                results = list(pool.map(lambda job: self.local_search(*job), jobs))
        else:
            results = [self.local_search(*job) for job in jobs]
        if self.grid_best is not None:
            results.append(self.grid_best)
        best = results[0]
        for cand in results[1:]:
            if cand.key > best.key + 1e-12:
                best = cand
        return best


def _fit(P: np.ndarray, shape) -> Optional[np.ndarray]:
    """Embed a smaller p(v,u,x2) into ``shape`` by zero padding; None if it does not fit."""
    if P.ndim != 3 or P.shape[2] != shape[2] or P.shape[0] > shape[0] or P.shape[1] > shape[1]:
        return None
    out = np.zeros(shape)
    out[: P.shape[0], : P.shape[1]] = P
    return out / out.sum()


def _fit_encoder(enc: np.ndarray, U: int, X2: int) -> Optional[np.ndarray]:
    if enc.shape[0] > U or enc.shape[1] != X2:
        return None
    out = np.zeros((U, X2) + enc.shape[2:], dtype=enc.dtype)
    out[: enc.shape[0]] = enc
    if enc.ndim == 3:
        out[enc.shape[0]:, :, 0] = 1.0
    return out


def parallel_map(fn: Callable, items: Sequence, threads: int) -> list:
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]
