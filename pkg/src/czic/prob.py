"""Probability tensors over named finite axes and Shannon information measures.

All quantities are in bits.  ``0 log 0`` is taken as 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from czic.errors import (
    DuplicateAxis,
    NegativeMass,
    NotNormalized,
    OverlappingAxisSets,
    UnknownAxis,
)

NORM_TOL = 1e-9
MI_CLAMP = 1e-12

AxisSet = Union[str, Iterable[str]]


def _as_names(axes: AxisSet) -> tuple[str, ...]:
    if isinstance(axes, str):
        return (axes,)
    return tuple(axes)


def _check(axes: Sequence[tuple[str, int]], mass: np.ndarray) -> None:
    names = [name for name, _ in axes]
    if len(set(names)) != len(names):
        raise DuplicateAxis(f"axis names must be unique, got {names}")
    for name, size in axes:
        if int(size) < 1:
            raise ValueError(f"axis {name!r} has size {size} < 1")
    if mass.size != int(np.prod([s for _, s in axes], dtype=np.int64)):
        raise ValueError(
            f"mass has {mass.size} entries, axes {list(axes)} need "
            f"{int(np.prod([s for _, s in axes]))}"
        )
    if not np.all(np.isfinite(mass)):
        raise NegativeMass("mass contains non-finite entries")
    if np.any(mass < 0):
        raise NegativeMass(f"negative entry {mass.min()!r}")
    total = float(mass.sum())
    if abs(total - 1.0) > NORM_TOL:
        raise NotNormalized(f"total mass {total!r} is not 1 within {NORM_TOL}")


@dataclass(frozen=True, eq=False)
class JointDist:
    """A joint pmf over an ordered list of named finite axes.

    ``mass`` is stored as a read-only array whose shape is the axis sizes;
    ``flat`` gives the mixed-radix (C-order) flattening.  Construction
    validates the invariants and renormalizes exactly.
    """

    axes: tuple[tuple[str, int], ...]
    mass: np.ndarray

    def __init__(self, axes: Sequence[tuple[str, int]], mass):
        axes = tuple((str(name), int(size)) for name, size in axes)
        arr = np.array(mass, dtype=float)
        _check(axes, arr)
        arr = arr.reshape(tuple(size for _, size in axes)) / arr.sum()
        arr.setflags(write=False)
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "mass", arr)

    @classmethod
    def _trusted(cls, axes, mass: np.ndarray) -> "JointDist":
        # internal fast path for tensors that are valid by construction
        obj = object.__new__(cls)
        arr = np.ascontiguousarray(mass, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(obj, "axes", tuple(axes))
        object.__setattr__(obj, "mass", arr)
        return obj

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.axes)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(size for _, size in self.axes)

    @property
    def flat(self) -> np.ndarray:
        return self.mass.ravel()

    def size_of(self, name: str) -> int:
        for axis, size in self.axes:
            if axis == name:
                return size
        raise UnknownAxis(name)

    def __repr__(self) -> str:
        return f"JointDist(axes={list(self.axes)})"


def validate(dist: JointDist) -> None:
    """Raise if ``dist`` violates a JointDist invariant; return None otherwise."""
    _check(dist.axes, np.asarray(dist.mass, dtype=float))


def uniform(axes: Sequence[tuple[str, int]]) -> JointDist:
    shape = tuple(int(s) for _, s in axes)
    return JointDist(axes, np.full(shape, 1.0 / np.prod(shape)))


def _positions(dist: JointDist, names: Iterable[str]) -> list[int]:
    lookup = {name: i for i, name in enumerate(dist.names)}
    out = []
    for name in names:
        if name not in lookup:
            raise UnknownAxis(f"{name!r} not in {dist.names}")
        out.append(lookup[name])
    return out


def marginalize(dist: JointDist, keep: AxisSet) -> JointDist:
    """Sum out every axis not in ``keep``; kept axes stay in original order."""
    keep_pos = set(_positions(dist, _as_names(keep)))
    drop = tuple(i for i in range(len(dist.axes)) if i not in keep_pos)
    axes = [ax for i, ax in enumerate(dist.axes) if i in keep_pos]
    return JointDist._trusted(axes, dist.mass.sum(axis=drop))


def _h(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def entropy(dist: JointDist, axes: AxisSet) -> float:
    """Joint entropy H of the marginal on ``axes``, in bits."""
    pos = set(_positions(dist, _as_names(axes)))
    drop = tuple(i for i in range(len(dist.axes)) if i not in pos)
    return _h(dist.mass.sum(axis=drop))


def conditional_entropy(dist: JointDist, a: AxisSet, given: AxisSet = ()) -> float:
    a, given = _as_names(a), _as_names(given)
    return entropy(dist, a + given) - entropy(dist, given)


def conditional_mi(
    dist: JointDist, a: AxisSet, b: AxisSet, given: AxisSet = ()
) -> float:
    """I(A;B|C) in bits; tiny negative round-off is clamped to 0.

    >>> d = JointDist([("a", 2), ("b", 2)], [[0.5, 0], [0, 0.5]])
    >>> conditional_mi(d, "a", "b")
    1.0
    """
    a, b, c = _as_names(a), _as_names(b), _as_names(given)
    sa, sb, sc = set(a), set(b), set(c)
    if sa & sb or sa & sc or sb & sc:
        raise OverlappingAxisSets(f"{a}, {b}, {c} must be pairwise disjoint")
    _positions(dist, a + b + c)
    value = (
        entropy(dist, a + c)
        + entropy(dist, b + c)
        - entropy(dist, a + b + c)
        - (entropy(dist, c) if c else 0.0)
    )
    if -MI_CLAMP <= value < 0:
        return 0.0
    return value


mutual_information = conditional_mi
