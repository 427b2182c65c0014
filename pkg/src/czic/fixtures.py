"""Built-in channels used by the CLI, the verification suite and the tests."""

from __future__ import annotations

import numpy as np

from czic.channel import CognitiveZic, scheme_from_arrays, AuxScheme

# frozen once from a Dirichlet(0.7) draw, rounded to 3 decimals; rows sum to 1
TERNARY_CHAN1 = [
    [[0.065, 0.105, 0.830], [0.150, 0.417, 0.433], [0.670, 0.030, 0.300]],
    [[0.862, 0.080, 0.058], [0.061, 0.685, 0.254], [0.287, 0.386, 0.327]],
    [[0.035, 0.681, 0.284], [0.235, 0.630, 0.135], [0.011, 0.663, 0.326]],
]


def xor_channel() -> CognitiveZic:
    """Y1 = X1 xor X2, Y2 = X2, all binary."""
    chan1 = np.zeros((2, 2, 2))
    for a in range(2):
        for b in range(2):
            chan1[a, b, a ^ b] = 1.0
    return CognitiveZic(chan1, np.eye(2), name="xor")


def interference_free_channel() -> CognitiveZic:
    """Y1 = X1, Y2 = X2: the interference link is absent."""
    chan1 = np.zeros((2, 2, 2))
    for a in range(2):
        chan1[a, :, a] = 1.0
    return CognitiveZic(chan1, np.eye(2), name="interference_free")


def zero_capacity_channel() -> CognitiveZic:
    """Y1 is a fair coin independent of the inputs; Y2 = X2.

    The cognitive pair has zero capacity while the component link stays
    noiseless, so every capacity-side formula applies.
    """
    return CognitiveZic(np.full((2, 2, 2), 0.5), np.eye(2), name="zero_capacity")


def ternary_channel() -> CognitiveZic:
    """3-ary alphabets, frozen random p(y1|x1,x2), Y2 = X2."""
    return CognitiveZic(np.array(TERNARY_CHAN1), np.eye(3), name="ternary")


def dead_channel() -> CognitiveZic:
    """Both outputs independent of the inputs (not noiseless)."""
    return CognitiveZic(np.full((2, 2, 2), 0.5), np.full((2, 2), 0.5), name="dead")


def noisy_xor_channel(flip: float = 0.1) -> CognitiveZic:
    """XOR interference with a binary symmetric X2 -> Y2 link."""
    base = xor_channel()
    chan2 = np.array([[1 - flip, flip], [flip, 1 - flip]])
    return CognitiveZic(base.chan1, chan2, name=f"noisy_xor_{flip:g}")


STOCK = {
    "xor": xor_channel,
    "interference_free": interference_free_channel,
    "zero_capacity": zero_capacity_channel,
    "ternary": ternary_channel,
}

EXTRA = {
    "dead": dead_channel,
    "noisy_xor": noisy_xor_channel,
}


def get(name: str) -> CognitiveZic:
    try:
        return {**STOCK, **EXTRA}[name]()
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; known: {sorted({**STOCK, **EXTRA})}") from None


def xor_precoding_scheme() -> AuxScheme:
    """Trivial V, U uniform and independent of uniform X2, x1 = u xor x2."""
    return scheme_from_arrays(np.full((1, 2, 2), 0.25), np.array([[0, 1], [1, 0]]))
