"""Monte Carlo simulation of the superposition + binning scheme.

Transmitter 2 sends an inner codeword v^n (rate gamma) and an outer codeword
x2^n drawn around it.  The cognitive transmitter searches bin w1 of its
u^n codebook for a word jointly typical with (v^n, x2^n) and sends
x1 = f(u, x2) symbolwise.  Both receivers decode v^n first and then their
own outer codeword, all by unique strong joint typicality.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from czic.channel import AuxScheme, CognitiveZic, assemble_joint
from czic.errors import BudgetExceeded, DecodeFailure, DegenerateScheme, EncodingFailure
from czic.prob import JointDist, conditional_mi, marginalize

DEFAULT_EPS = 0.2
DEFAULT_BUDGET = 50_000_000  # codeword symbols
CEIL_SLACK = 1e-9
Z95 = 1.959963984540054

# the bin constraint is on the total u^n rate R1 + R0, carried in every report
ACH5_NOTE = "constraint ach5 implemented as R1 + R0 <= I(U;Y1|V)"


@dataclass(frozen=True)
class RateAlloc:
    gamma: float
    r2: float
    r1: float
    r0: float
    margin: float

    def __post_init__(self):
        if not (0 <= self.gamma <= self.r2 + 1e-12) or self.r0 < 0 or self.r1 < 0:
            raise ValueError(f"inconsistent rate allocation {self}")


def scheme_informations(joint: JointDist) -> dict[str, float]:
    """The five mutual informations that the achievability constraints involve."""
    return {
        "I(U;X2|V)": conditional_mi(joint, "u", "x2", "v"),
        "I(V;Y2)": conditional_mi(joint, "v", "y2"),
        "I(X2;Y2|V)": conditional_mi(joint, "x2", "y2", "v"),
        "I(V;Y1)": conditional_mi(joint, "v", "y1"),
        "I(U;Y1|V)": conditional_mi(joint, "u", "y1", "v"),
    }


def derive_rate_alloc(joint: JointDist, margin: float) -> RateAlloc:
    """Rates sitting ``margin`` inside every achievability constraint."""
    if not margin > 0:
        raise ValueError("margin must be > 0")
    mi = scheme_informations(joint)
    gamma = max(0.0, min(mi["I(V;Y1)"], mi["I(V;Y2)"]) - margin)
    r0 = mi["I(U;X2|V)"] + margin
    r1 = max(0.0, mi["I(U;Y1|V)"] - r0 - margin)
    r2 = gamma + max(0.0, mi["I(X2;Y2|V)"] - margin)
    if r1 == 0 and r2 == 0:
        raise DegenerateScheme(f"margin {margin} leaves no positive rate (informations {mi})")
    return RateAlloc(gamma=gamma, r2=r2, r1=r1, r0=r0, margin=margin)


def constraint_slacks(alloc: RateAlloc, joint: JointDist) -> dict[str, float]:
    """Right-hand side minus left-hand side of each constraint; >= 0 means satisfied."""
    mi = scheme_informations(joint)
    return {
        "ach1": alloc.r0 - mi["I(U;X2|V)"],
        "ach2": mi["I(V;Y2)"] - alloc.gamma,
        "ach3": mi["I(X2;Y2|V)"] - (alloc.r2 - alloc.gamma),
        "ach4": mi["I(V;Y1)"] - alloc.gamma,
        "ach5": mi["I(U;Y1|V)"] - (alloc.r1 + alloc.r0),
    }


def violate(alloc: RateAlloc, joint: JointDist, constraint: str, excess: float = 0.2) -> RateAlloc:
    """Copy of ``alloc`` with one constraint broken by ``excess`` bits."""
    mi = scheme_informations(joint)
    if constraint == "ach1":
        return replace(alloc, r0=max(0.0, mi["I(U;X2|V)"] - excess))
    if constraint in ("ach2", "ach4"):
        cap = mi["I(V;Y2)"] if constraint == "ach2" else mi["I(V;Y1)"]
        gamma = cap + excess
        return replace(alloc, gamma=gamma, r2=gamma + (alloc.r2 - alloc.gamma))
    if constraint == "ach3":
        return replace(alloc, r2=alloc.gamma + mi["I(X2;Y2|V)"] + excess)
    if constraint == "ach5":
        return replace(alloc, r1=max(0.0, mi["I(U;Y1|V)"] - alloc.r0 + excess))
    raise ValueError(f"unknown constraint {constraint!r}")


# -- codebooks -----------------------------------------------------------------


def _exponent(n: int, rate: float) -> int:
    return max(0, math.ceil(n * rate - CEIL_SLACK))


@dataclass(frozen=True, eq=False)
class Codebooks:
    """Random codebooks; arrays are indexed [inner codeword, ...]."""

    n: int
    seed: int
    inner: np.ndarray       # (Nv, n)
    outer_x2: np.ndarray    # (Nv, Nx2, n)
    outer_u: np.ndarray     # (Nv, Nu, n)
    bin_order: np.ndarray   # (Nv, Nu): u indices, bin after bin, in scan order
    bin_edges: np.ndarray   # (n_bins + 1,)

    @property
    def n_inner(self) -> int:
        return self.inner.shape[0]

    @property
    def n_outer_x2(self) -> int:
        return self.outer_x2.shape[1]

    @property
    def n_outer_u(self) -> int:
        return self.outer_u.shape[1]

    @property
    def n_bins(self) -> int:
        return len(self.bin_edges) - 1

    @property
    def n_messages2(self) -> int:
        return self.n_inner * self.n_outer_x2

    def bin_members(self, v_index: int, w1: int) -> np.ndarray:
        return self.bin_order[v_index, self.bin_edges[w1]:self.bin_edges[w1 + 1]]

    def bin_of(self, v_index: int) -> np.ndarray:
        out = np.empty(self.n_outer_u, dtype=np.int64)
        sizes = np.diff(self.bin_edges)
        out[self.bin_order[v_index]] = np.repeat(np.arange(self.n_bins), sizes)
        return out

    def realized_rates(self) -> dict[str, float]:
        n = self.n
        return {
            "gamma": math.log2(self.n_inner) / n,
            "r2": math.log2(self.n_messages2) / n,
            "r1": math.log2(self.n_bins) / n,
            "r0": (math.log2(self.n_outer_u) - math.log2(self.n_bins)) / n,
        }


def _draw(rng, cond: np.ndarray, given: np.ndarray, count: int) -> np.ndarray:
    """``count`` sequences drawn symbolwise from cond[given_i] for each row of ``given``."""
    rows, n = given.shape
    out = np.zeros((rows, count, n), dtype=np.uint8)
    draws = rng.random((rows, count, n))
    cdf = np.cumsum(cond, axis=1)
    cdf[:, -1] = 1.0
    for a in range(cond.shape[0]):
        mask = given == a
        if mask.any():
            sel = np.broadcast_to(mask[:, None, :], out.shape)
            out[sel] = np.searchsorted(cdf[a], draws[sel], side="right")
    return np.minimum(out, cond.shape[1] - 1).astype(np.uint8)


def _conditional(p_joint: np.ndarray) -> np.ndarray:
    """Rows of p(b|a) from a 2-d joint p(a,b); empty rows become uniform."""
    rows = p_joint.sum(axis=1, keepdims=True)
    return np.where(rows > 0, p_joint / np.where(rows > 0, rows, 1.0), 1.0 / p_joint.shape[1])


def build_codebooks(
    scheme: AuxScheme, alloc: RateAlloc, n: int, seed: int = 0, budget: int = DEFAULT_BUDGET
) -> Codebooks:
    if n < 1:
        raise ValueError("blocklength must be >= 1")
    e_v = _exponent(n, alloc.gamma)
    e_x2 = _exponent(n, alloc.r2 - alloc.gamma)
    e_u = _exponent(n, alloc.r1 + alloc.r0)
    e_bins = _exponent(n, alloc.r1)
    symbols = n * (2**e_v) * (1 + 2**e_x2 + 2**e_u)
    if symbols > budget:
        raise BudgetExceeded(f"codebooks need {symbols} symbols, budget is {budget}")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    p = scheme.pvux2.mass
    pv = p.sum(axis=(1, 2))
    n_v = 2**e_v
    inner = rng.choice(len(pv), size=(n_v, n), p=pv).astype(np.uint8)
    outer_x2 = _draw(rng, _conditional(p.sum(axis=1)), inner, 2**e_x2)
    outer_u = _draw(rng, _conditional(p.sum(axis=2)), inner, 2**e_u)
    n_u, n_bins = 2**e_u, 2**e_bins
    order = np.stack([rng.permutation(n_u) for _ in range(n_v)])
    edges = np.array([len(c) for c in np.array_split(np.arange(n_u), n_bins)])
    edges = np.concatenate(([0], np.cumsum(edges)))
    for arr in (inner, outer_x2, outer_u, order, edges):
        arr.setflags(write=False)
    return Codebooks(n, seed, inner, outer_x2, outer_u, order, edges)


# -- typicality ------------------------------------------------------------------


def typical_rows(index: np.ndarray, pmf: np.ndarray, eps: float) -> np.ndarray:
    """Strong typicality of each row of cell indices against ``pmf``.

    A row is typical iff every cell's empirical frequency is within eps * p of
    p; cells with p = 0 must stay empty.
    """
    index = np.atleast_2d(index)
    rows, n = index.shape
    p = np.asarray(pmf, dtype=float).ravel()
    cells = p.size
    zero = p == 0
    # rows touching a forbidden cell fail outright; only the rest get counted
    ok = ~zero[index].any(axis=1) if zero.any() else np.ones(rows, dtype=bool)
    keep = np.flatnonzero(ok)
    if keep.size:
        sub = index[keep].astype(np.int64)
        flat = (sub + cells * np.arange(keep.size)[:, None]).ravel()
        counts = np.bincount(flat, minlength=keep.size * cells).reshape(keep.size, cells)
        ok[keep] = np.all(np.abs(counts / n - p) <= eps * p + 1e-12, axis=1)
    return ok


def is_typical(seqs: Sequence[np.ndarray], pmf: np.ndarray, eps: float) -> np.ndarray:
    """Joint typicality of broadcastable sequence arrays against a joint pmf."""
    pmf = np.asarray(pmf, dtype=float)
    dtype = np.min_scalar_type(pmf.size)
    index = None
    for seq, size in zip(seqs, pmf.shape):
        seq = np.asarray(seq).astype(dtype, copy=False)
        index = seq if index is None else index * dtype.type(size) + seq
    shape = index.shape
    return typical_rows(index.reshape(-1, shape[-1]), pmf, eps).reshape(shape[:-1])


# -- encoder and decoders ----------------------------------------------------------


def _encode(w1, w2, books: Codebooks, scheme: AuxScheme, eps, rng):
    w2a, w2b = divmod(int(w2), books.n_outer_x2)
    v = books.inner[w2a]
    x2 = books.outer_x2[w2a, w2b]
    members = books.bin_members(w2a, int(w1))
    ok = is_typical([v[None], books.outer_u[w2a, members], x2[None]], scheme.pvux2.mass, eps)
    hit = np.flatnonzero(ok)
    found = len(hit) > 0
    u = books.outer_u[w2a, members[hit[0] if found else 0]]
    if scheme.is_deterministic:
        x1 = scheme.encoder[u, x2]
    else:
        rows = scheme.encoder[u, x2]
        cdf = np.cumsum(rows, axis=1)
        if rng is None:
            rng = np.random.default_rng(0)
        x1 = np.minimum((rng.random(len(u))[:, None] > cdf).sum(axis=1), rows.shape[1] - 1)
    return x1.astype(np.uint8), x2, found


def encode(w1: int, w2: int, books: Codebooks, scheme: AuxScheme, eps: float = DEFAULT_EPS, rng=None):
    """Channel inputs (x1^n, x2^n) for messages (w1, w2); raises EncodingFailure."""
    x1, x2, found = _encode(w1, w2, books, scheme, eps, rng)
    if not found:
        raise EncodingFailure(f"bin {w1} has no u^n typical with the interference")
    return x1, x2


def _unique(mask: np.ndarray, stage: str) -> int:
    hits = np.flatnonzero(mask)
    if len(hits) != 1:
        raise DecodeFailure(f"{stage}: {len(hits)} typical candidates")
    return int(hits[0])


def _decode_inner(y: np.ndarray, books: Codebooks, p_vy: np.ndarray, eps, stage) -> int:
    if books.n_inner == 1:
        return 0
    return _unique(is_typical([books.inner, y[None]], p_vy, eps), stage)


def decode2(y2: np.ndarray, books: Codebooks, joint: JointDist, eps: float = DEFAULT_EPS) -> tuple[int, int]:
    """Receiver 2: inner codeword from y2, then the outer x2 codeword around it."""
    p_vy2 = marginalize(joint, ("v", "y2")).mass
    a = _decode_inner(y2, books, p_vy2, eps, "receiver 2 inner")
    if books.n_outer_x2 == 1:
        return a, 0
    p = marginalize(joint, ("v", "x2", "y2")).mass
    ok = is_typical([books.inner[a][None], books.outer_x2[a], y2[None]], p, eps)
    return a, _unique(ok, "receiver 2 outer")


def decode1(y1: np.ndarray, books: Codebooks, joint: JointDist, eps: float = DEFAULT_EPS) -> int:
    """Receiver 1: inner codeword from y1, then the unique typical u^n; returns its bin."""
    p_vy1 = marginalize(joint, ("v", "y1")).mass
    a = _decode_inner(y1, books, p_vy1, eps, "receiver 1 inner")
    if books.n_bins == 1:
        return 0
    p = marginalize(joint, ("v", "u", "y1")).mass
    ok = is_typical([books.inner[a][None], books.outer_u[a], y1[None]], p, eps)
    k = _unique(ok, "receiver 1 outer")
    return int(books.bin_of(a)[k])


# -- simulation ----------------------------------------------------------------------


@dataclass
class SimReport:
    n: int
    trials: int
    enc_failures: int
    err1: int
    err2: int
    realized: dict = field(default_factory=dict)
    notes: list = field(default_factory=lambda: [ACH5_NOTE])

    @property
    def defined(self) -> bool:
        return self.trials > 0

    def _p(self, k):
        return k / self.trials if self.trials else None

    def _ci(self, k):
        if not self.trials:
            return None
        p = k / self.trials
        return Z95 * math.sqrt(p * (1 - p) / self.trials)

    @property
    def p_err1(self) -> Optional[float]:
        return self._p(self.err1)

    @property
    def p_err2(self) -> Optional[float]:
        return self._p(self.err2)

    @property
    def ci1(self) -> Optional[float]:
        return self._ci(self.err1)

    @property
    def ci2(self) -> Optional[float]:
        return self._ci(self.err2)

    CSV_HEADER = ("n", "trials", "enc_failures", "err1", "err2", "p_err1", "ci1", "p_err2", "ci2")

    def csv_row(self) -> list[str]:
        def f(x):
            return "nan" if x is None else f"{x:.6f}"

        return [str(self.n), str(self.trials), str(self.enc_failures), str(self.err1),
                str(self.err2), f(self.p_err1), f(self.ci1), f(self.p_err2), f(self.ci2)]

    def to_dict(self) -> dict:
        out = asdict(self)
        out.update(p_err1=self.p_err1, ci1=self.ci1, p_err2=self.p_err2, ci2=self.ci2,
                   defined=self.defined)
        return out


def reports_csv(reports: Sequence[SimReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SimReport.CSV_HEADER)
    for rep in reports:
        writer.writerow(rep.csv_row())
    return buf.getvalue()


def _sample_output(rng, chan_rows: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(chan_rows, axis=1)
    out = (rng.random(len(chan_rows))[:, None] > cdf).sum(axis=1)
    return np.minimum(out, chan_rows.shape[1] - 1)


def simulate(
    zic: CognitiveZic,
    scheme: AuxScheme,
    alloc: RateAlloc,
    n: int,
    trials: int,
    eps: float = DEFAULT_EPS,
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
) -> SimReport:
    """Run ``trials`` independent message pairs through codebooks of blocklength n.

    An encoding failure counts as an error at receiver 1; the encoder then
    sends the first codeword of the bin so receiver 2 is still exercised.
    """
    if trials < 0:
        raise ValueError("trials must be >= 0")
    joint = assemble_joint(zic, scheme)
    books = build_codebooks(scheme, alloc, n, seed, budget)
    report = SimReport(n, trials, 0, 0, 0, realized=books.realized_rates())
    for t in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1, t)))
        w1 = int(rng.integers(books.n_bins))
        w2 = int(rng.integers(books.n_messages2))
        x1, x2, found = _encode(w1, w2, books, scheme, eps, rng)
        y1 = _sample_output(rng, zic.chan1[x1, x2])
        y2 = _sample_output(rng, zic.chan2[x2])
        if not found:
            report.enc_failures += 1
        try:
            ok1 = found and decode1(y1, books, joint, eps) == w1
        except DecodeFailure:
            ok1 = False
        try:
            a, b = decode2(y2, books, joint, eps)
            ok2 = a * books.n_outer_x2 + b == w2
        except DecodeFailure:
            ok2 = False
        report.err1 += not ok1
        report.err2 += not ok2
    return report
