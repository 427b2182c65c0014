import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from czic.errors import (
    DuplicateAxis,
    NegativeMass,
    NotNormalized,
    OverlappingAxisSets,
    UnknownAxis,
)
from czic.prob import (
    JointDist,
    conditional_entropy,
    conditional_mi,
    entropy,
    marginalize,
    uniform,
    validate,
)


def bsc_joint(flip):
    mass = 0.5 * np.array([[1 - flip, flip], [flip, 1 - flip]])
    return JointDist([("a", 2), ("b", 2)], mass)


def test_validate_examples():
    validate(uniform([("x", 2)]))
    with pytest.raises(NotNormalized):
        JointDist([("x", 2)], [0.5, 0.6])
    with pytest.raises(NegativeMass):
        JointDist([("x", 2)], [1.2, -0.2])


def test_axis_errors():
    with pytest.raises(DuplicateAxis):
        JointDist([("x", 2), ("x", 2)], np.full((2, 2), 0.25))
    d = uniform([("x", 2), ("y", 2)])
    with pytest.raises(UnknownAxis):
        marginalize(d, ["z"])
    with pytest.raises(OverlappingAxisSets):
        conditional_mi(d, "x", "x")


def test_marginalize_examples():
    d = uniform([("x", 2), ("y", 2)])
    np.testing.assert_allclose(marginalize(d, ["x"]).mass, [0.5, 0.5])
    np.testing.assert_allclose(marginalize(d, ["x", "y"]).mass, d.mass)
    d = JointDist([("x", 2), ("y", 2)], [[0.1, 0.2], [0.3, 0.4]])
    np.testing.assert_allclose(marginalize(d, ["y"]).mass, [0.4, 0.6])


def test_entropy_examples():
    assert entropy(uniform([("x", 2)]), "x") == pytest.approx(1.0)
    assert entropy(JointDist([("x", 2)], [1.0, 0.0]), "x") == 0.0
    assert entropy(JointDist([("x", 2)], [0.25, 0.75]), "x") == pytest.approx(0.811278, abs=1e-6)


def test_mi_examples():
    assert conditional_mi(uniform([("a", 2), ("b", 2)]), "a", "b") == 0.0
    assert conditional_mi(bsc_joint(0.0), "a", "b") == pytest.approx(1.0)
    assert conditional_mi(bsc_joint(0.11), "a", "b") == pytest.approx(0.5, abs=1e-3)


def test_mass_is_read_only():
    d = uniform([("x", 2)])
    with pytest.raises(ValueError):
        d.mass[0] = 1.0


# -- properties on random three-axis distributions -------------------------------

shapes = st.tuples(*[st.integers(1, 3)] * 3)


@st.composite
def joints(draw):
    shape = draw(shapes)
    seed = draw(st.integers(0, 2**32 - 1))
    alpha = draw(st.sampled_from([0.2, 1.0, 5.0]))
    mass = np.random.default_rng(seed).dirichlet(np.full(math.prod(shape), alpha))
    return JointDist([("a", shape[0]), ("b", shape[1]), ("c", shape[2])], mass.reshape(shape))


@settings(max_examples=60, deadline=None)
@given(joints())
def test_chain_rule(d):
    # H(A,B,C) = H(A) + H(B|A) + H(C|A,B)
    lhs = entropy(d, ["a", "b", "c"])
    rhs = entropy(d, "a") + conditional_entropy(d, "b", "a") + conditional_entropy(d, "c", ["a", "b"])
    assert lhs == pytest.approx(rhs, abs=1e-9)
    # I(A;B,C) = I(A;B) + I(A;C|B)
    assert conditional_mi(d, "a", ["b", "c"]) == pytest.approx(
        conditional_mi(d, "a", "b") + conditional_mi(d, "a", "c", "b"), abs=1e-9
    )


@settings(max_examples=60, deadline=None)
@given(joints())
def test_nonnegative_and_bounded(d):
    for a, b, g in [("a", "b", ()), ("a", "c", "b"), ("b", "c", "a")]:
        mi = conditional_mi(d, a, b, g)
        assert mi >= 0
        assert mi <= min(conditional_entropy(d, a, g), conditional_entropy(d, b, g)) + 1e-9


@settings(max_examples=60, deadline=None)
@given(joints())
def test_marginal_entropy_consistent(d):
    m = marginalize(d, ["b", "a"])
    assert m.names == ("a", "b")  # source order is kept
    assert entropy(m, ["a", "b"]) == pytest.approx(entropy(d, ["a", "b"]), abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 3), st.integers(2, 3), st.integers(2, 3))
def test_data_processing(seed, na, nb, nc):
    # A -> B -> C built as p(a) p(b|a) p(c|b)
    rng = np.random.default_rng(seed)
    pa = rng.dirichlet(np.ones(na))
    pba = rng.dirichlet(np.ones(nb), size=na)
    pcb = rng.dirichlet(np.ones(nc), size=nb)
    mass = pa[:, None, None] * pba[:, :, None] * pcb[None, :, :]
    d = JointDist([("a", na), ("b", nb), ("c", nc)], mass)
    assert conditional_mi(d, "a", "c") <= conditional_mi(d, "a", "b") + 1e-9
    assert conditional_mi(d, "a", "c", "b") == pytest.approx(0.0, abs=1e-9)
