"""Random channels and schemes for property checks."""

from __future__ import annotations

import numpy as np

from czic.channel import AuxScheme, CognitiveZic, scheme_from_arrays


def random_channel(rng: np.random.Generator, max_size: int = 3, noiseless: bool = False) -> CognitiveZic:
    x1, x2, y1, y2 = rng.integers(2, max_size + 1, size=4)
    chan1 = rng.dirichlet(np.full(y1, 0.5), size=(x1, x2))
    if noiseless:
        chan2 = np.eye(x2)[rng.permutation(x2)]
    else:
        chan2 = rng.dirichlet(np.full(y2, 0.5), size=x2)
    return CognitiveZic(chan1, chan2, name="random")


def random_scheme(
    rng: np.random.Generator,
    zic: CognitiveZic,
    max_aux: int = 3,
    stochastic: bool = False,
) -> AuxScheme:
    v, u = rng.integers(1, max_aux + 1, size=2)
    # sparse-ish Dirichlet so that boundary cases (zeros) show up too
    p = rng.dirichlet(np.full(v * u * zic.x2_size, 0.4)).reshape(v, u, zic.x2_size)
    if stochastic:
        enc = rng.dirichlet(np.full(zic.x1_size, 0.7), size=(u, zic.x2_size))
    else:
        enc = rng.integers(0, zic.x1_size, size=(u, zic.x2_size))
    return scheme_from_arrays(p, enc)


def random_stochastic_encoder(rng: np.random.Generator, u: int, x2: int, x1: int) -> np.ndarray:
    return rng.dirichlet(np.full(x1, 0.7), size=(u, x2))
