"""Cognitive Z-interference channels, auxiliary schemes and joint assembly."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from czic.errors import BadShape, ParseError, RowNotNormalized, ShapeMismatch
from czic.prob import NORM_TOL, JointDist

JOINT_AXES = ("v", "u", "x1", "x2", "y1", "y2")
DETERMINISTIC_TOL = 1e-12


def _check_rows(name: str, arr: np.ndarray) -> None:
    if np.any(~np.isfinite(arr)) or np.any(arr < 0):
        raise RowNotNormalized(f"{name} has negative or non-finite entries")
    sums = arr.sum(axis=-1)
    bad = np.abs(sums - 1.0) > NORM_TOL
    if np.any(bad):
        idx = tuple(int(i) for i in np.argwhere(bad)[0])
        raise RowNotNormalized(f"{name} row {idx} sums to {sums[idx]!r}")


@dataclass(frozen=True, eq=False)
class CognitiveZic:
    """Channel pair p(y1|x1,x2) and p(y2|x2).

    ``chan1`` has shape (|X1|, |X2|, |Y1|), ``chan2`` has shape (|X2|, |Y2|).
    """

    chan1: np.ndarray
    chan2: np.ndarray
    name: str = ""

    def __post_init__(self):
        c1 = np.array(self.chan1, dtype=float)
        c2 = np.array(self.chan2, dtype=float)
        if c1.ndim != 3 or c2.ndim != 2:
            raise BadShape(f"chan1 must be 3-d and chan2 2-d, got {c1.shape}, {c2.shape}")
        if c1.shape[1] != c2.shape[0]:
            raise BadShape(f"|X2| differs: chan1 {c1.shape[1]} vs chan2 {c2.shape[0]}")
        if min(c1.shape + c2.shape) < 1:
            raise BadShape("alphabets must be nonempty")
        _check_rows("chan1", c1)
        _check_rows("chan2", c2)
        c1 = c1 / c1.sum(axis=-1, keepdims=True)
        c2 = c2 / c2.sum(axis=-1, keepdims=True)
        c1.setflags(write=False)
        c2.setflags(write=False)
        object.__setattr__(self, "chan1", c1)
        object.__setattr__(self, "chan2", c2)

    @property
    def x1_size(self) -> int:
        return self.chan1.shape[0]

    @property
    def x2_size(self) -> int:
        return self.chan1.shape[1]

    @property
    def y1_size(self) -> int:
        return self.chan1.shape[2]

    @property
    def y2_size(self) -> int:
        return self.chan2.shape[1]

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        if self.name:
            out["name"] = self.name
        out.update(
            x1_size=self.x1_size,
            x2_size=self.x2_size,
            y1_size=self.y1_size,
            y2_size=self.y2_size,
            chan1=self.chan1.tolist(),
            chan2=self.chan2.tolist(),
        )
        return out


@dataclass(frozen=True)
class RatePair:
    r1: float
    r2: float

    def __post_init__(self):
        for value in (self.r1, self.r2):
            if not math.isfinite(value):
                raise ValueError(f"rates must be finite, got {self}")
        object.__setattr__(self, "r1", max(0.0, float(self.r1)))
        object.__setattr__(self, "r2", max(0.0, float(self.r2)))


@dataclass(frozen=True, eq=False)
class AuxScheme:
    """One point of the union: p(v,u,x2) and the cognitive encoder.

    ``encoder`` is either an integer table of shape (|U|, |X2|) giving
    x1 = f(u, x2), or a float tensor p(x1|u,x2) of shape (|U|, |X2|, |X1|).
    """

    pvux2: JointDist
    encoder: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.pvux2.names != ("v", "u", "x2"):
            raise BadShape(f"pvux2 axes must be (v, u, x2), got {self.pvux2.names}")
        enc = np.asarray(self.encoder)
        v, u, x2 = self.pvux2.sizes
        if enc.shape[:2] != (u, x2) or enc.ndim not in (2, 3):
            raise BadShape(f"encoder shape {enc.shape} does not fit |U|={u}, |X2|={x2}")
        if enc.ndim == 2:
            if not np.issubdtype(enc.dtype, np.integer):
                if np.any(enc != np.round(enc)):
                    raise BadShape("deterministic encoder table must be integer")
            enc = enc.astype(np.int64)
            if np.any(enc < 0):
                raise BadShape("encoder table entries must be >= 0")
        else:
            enc = enc.astype(float)
            _check_rows("encoder", enc)
            enc = enc / enc.sum(axis=-1, keepdims=True)
        enc = enc.copy()
        enc.setflags(write=False)
        object.__setattr__(self, "encoder", enc)

    @property
    def v_size(self) -> int:
        return self.pvux2.sizes[0]

    @property
    def u_size(self) -> int:
        return self.pvux2.sizes[1]

    @property
    def x2_size(self) -> int:
        return self.pvux2.sizes[2]

    @property
    def is_deterministic(self) -> bool:
        return self.encoder.ndim == 2

    def encoder_tensor(self, x1_size: int) -> np.ndarray:
        """The encoder as p(x1|u,x2) of shape (|U|, |X2|, |X1|)."""
        if not self.is_deterministic:
            if self.encoder.shape[2] != x1_size:
                raise ShapeMismatch(
                    f"encoder has |X1|={self.encoder.shape[2]}, channel has {x1_size}"
                )
            return self.encoder
        if self.encoder.max() >= x1_size:
            raise ShapeMismatch(f"encoder emits x1={self.encoder.max()} but |X1|={x1_size}")
        return np.eye(x1_size)[self.encoder]

    def to_dict(self) -> dict[str, Any]:
        return {
            "v_size": self.v_size,
            "u_size": self.u_size,
            "x2_size": self.x2_size,
            "pvux2": self.pvux2.mass.tolist(),
            "encoder_kind": "deterministic" if self.is_deterministic else "stochastic",
            "encoder": self.encoder.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "AuxScheme":
        try:
            mass = np.array(doc["pvux2"], dtype=float)
            enc = np.array(doc["encoder"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad scheme document: {exc}") from exc
        if mass.ndim != 3:
            raise ParseError("pvux2 must be a nested [v][u][x2] array")
        v, u, x2 = mass.shape
        pvux2 = JointDist([("v", v), ("u", u), ("x2", x2)], mass)
        if doc.get("encoder_kind", "deterministic") == "deterministic":
            enc = enc.astype(np.int64)
        else:
            enc = enc.astype(float)
        return cls(pvux2, enc)


def scheme_from_arrays(pvux2: np.ndarray, encoder: np.ndarray, **meta) -> AuxScheme:
    pvux2 = np.asarray(pvux2, dtype=float)
    v, u, x2 = pvux2.shape
    dist = JointDist([("v", v), ("u", u), ("x2", x2)], pvux2 / pvux2.sum())
    return AuxScheme(dist, np.asarray(encoder), meta=dict(meta))


# -- ingestion ---------------------------------------------------------------

_REQUIRED = ("x1_size", "x2_size", "y1_size", "y2_size", "chan1", "chan2")


def channel_from_dict(doc: Mapping[str, Any]) -> CognitiveZic:
    if not isinstance(doc, Mapping):
        raise ParseError("channel document must be a key/value object")
    missing = [key for key in _REQUIRED if key not in doc]
    if missing:
        raise ParseError(f"missing field(s): {', '.join(missing)}")
    try:
        sizes = tuple(int(doc[k]) for k in _REQUIRED[:4])
        chan1 = np.array(doc["chan1"], dtype=float)
        chan2 = np.array(doc["chan2"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"non-numeric or ragged channel data: {exc}") from exc
    x1, x2, y1, y2 = sizes
    if min(sizes) < 1:
        raise BadShape(f"alphabet sizes must be positive, got {sizes}")
    if chan1.shape != (x1, x2, y1):
        raise BadShape(f"chan1 has shape {chan1.shape}, expected {(x1, x2, y1)}")
    if chan2.shape != (x2, y2):
        raise BadShape(f"chan2 has shape {chan2.shape}, expected {(x2, y2)}")
    return CognitiveZic(chan1, chan2, name=str(doc.get("name", "")))


def load_channel(source) -> CognitiveZic:
    """Load a channel from a JSON document, a path to one, or a parsed mapping."""
    if isinstance(source, Mapping):
        return channel_from_dict(source)
    if isinstance(source, Path) or (
        isinstance(source, str) and not source.lstrip().startswith("{")
    ):
        path = Path(source)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ParseError(f"cannot read {path}: {exc}") from exc
    else:
        text = source
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    return channel_from_dict(doc)


def dump_channel(zic: CognitiveZic, path) -> None:
    Path(path).write_text(json.dumps(zic.to_dict(), indent=2) + "\n", encoding="utf-8")


# -- assembly ----------------------------------------------------------------


def assemble_joint(zic: CognitiveZic, scheme: AuxScheme) -> JointDist:
    """Joint pmf over (v, u, x1, x2, y1, y2) for the scheme driven through ``zic``."""
    if scheme.x2_size != zic.x2_size:
        raise ShapeMismatch(f"scheme |X2|={scheme.x2_size}, channel |X2|={zic.x2_size}")
    enc = scheme.encoder_tensor(zic.x1_size)
    p = scheme.pvux2.mass
    joint = np.einsum(
        "vux,uxa,axb,xc->vuaxbc", p, enc, zic.chan1, zic.chan2, optimize=True
    )
    axes = list(
        zip(
            JOINT_AXES,
            (scheme.v_size, scheme.u_size, zic.x1_size, zic.x2_size, zic.y1_size, zic.y2_size),
        )
    )
    return JointDist._trusted(axes, joint)


def is_noiseless_component(zic: CognitiveZic) -> bool:
    """True iff p(y2|x2) is a deterministic one-to-one map."""
    c2 = zic.chan2
    hits = np.abs(c2 - 1.0) <= DETERMINISTIC_TOL
    zeros = np.abs(c2) <= DETERMINISTIC_TOL
    if not np.all(hits | zeros) or not np.all(hits.sum(axis=1) == 1):
        return False
    images = c2.argmax(axis=1)
    return len(set(images.tolist())) == len(images)
