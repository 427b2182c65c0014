import json

import numpy as np
import pytest

from czic import fixtures
from czic.channel import (
    AuxScheme,
    CognitiveZic,
    assemble_joint,
    channel_from_dict,
    is_noiseless_component,
    load_channel,
    scheme_from_arrays,
)
from czic.errors import ParseError, RowNotNormalized, ShapeMismatch
from czic.prob import conditional_mi, entropy


def test_load_xor_document(tmp_path):
    doc = fixtures.xor_channel().to_dict()
    path = tmp_path / "xor.json"
    path.write_text(json.dumps(doc))
    zic = load_channel(path)
    assert set(np.unique(zic.chan1)) == {0.0, 1.0}
    assert load_channel(json.dumps(doc)).chan1.tolist() == zic.chan1.tolist()


def test_bad_documents():
    doc = fixtures.xor_channel().to_dict()
    doc["chan2"] = [[0.9, 0.0], [0.0, 1.0]]
    with pytest.raises(RowNotNormalized):
        channel_from_dict(doc)
    del doc["chan2"]
    with pytest.raises(ParseError):
        channel_from_dict(doc)
    with pytest.raises(ParseError):
        load_channel("{not json")


def test_xor_precoding_joint():
    joint = assemble_joint(fixtures.xor_channel(), fixtures.xor_precoding_scheme())
    assert joint.names == ("v", "u", "x1", "x2", "y1", "y2")
    assert conditional_mi(joint, "u", "y1") == pytest.approx(1.0)
    assert conditional_mi(joint, "u", "x2") == pytest.approx(0.0, abs=1e-12)


def test_point_mass_scheme_gives_point_mass_inputs():
    zic = fixtures.ternary_channel()
    p = np.zeros((1, 1, 3))
    p[0, 0, 2] = 1.0
    joint = assemble_joint(zic, scheme_from_arrays(p, [[0, 0, 1]]))
    assert entropy(joint, ["v", "u", "x1", "x2"]) == 0.0
    y1 = joint.mass.sum(axis=(0, 1, 2, 3, 5))
    np.testing.assert_allclose(y1, zic.chan1[1, 2])


def test_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        assemble_joint(fixtures.ternary_channel(), fixtures.xor_precoding_scheme())


def test_noiseless_detection():
    assert is_noiseless_component(fixtures.xor_channel())
    assert not is_noiseless_component(fixtures.noisy_xor_channel(0.1))
    two_to_one = CognitiveZic(np.full((2, 2, 2), 0.5), np.array([[1.0, 0.0], [1.0, 0.0]]))
    assert not is_noiseless_component(two_to_one)
    # a permutation is still a relabeling
    swapped = CognitiveZic(np.full((2, 3, 2), 0.5), np.eye(3)[[2, 0, 1]])
    assert is_noiseless_component(swapped)


def test_scheme_round_trip():
    s = fixtures.xor_precoding_scheme()
    back = AuxScheme.from_dict(json.loads(json.dumps(s.to_dict())))
    np.testing.assert_array_equal(back.encoder, s.encoder)
    np.testing.assert_allclose(back.pvux2.mass, s.pvux2.mass)
    assert back.is_deterministic
    sto = scheme_from_arrays(s.pvux2.mass, np.full((2, 2, 2), 0.5))
    assert not AuxScheme.from_dict(sto.to_dict()).is_deterministic
