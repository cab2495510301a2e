import json

import numpy as np
import pytest

from qmeas.core import (
    Channel,
    Instrument,
    Operation,
    State,
    choi_of,
    luders_instrument,
    scheme_to_instrument,
    superop_distance,
)
from qmeas.errors import ValidationError
from qmeas.modelfile import SCHEMA_VERSION, decode, dumps, encode, load, loads, save
from qmeas.models import (
    build_extremal_model,
    completely_unsharp_pair,
    random_channel,
    random_full_rank_state,
    random_povm,
)


def roundtrip(obj):
    return loads(dumps(obj))


class TestRoundTrip:
    def test_state(self):
        st = random_full_rank_state(3, 4)
        back = roundtrip(st)
        assert isinstance(back, State)
        assert np.array_equal(back.matrix, st.matrix)

    def test_observable_with_labels(self):
        obs = completely_unsharp_pair()
        back = roundtrip(obs)
        assert back.outcomes == obs.outcomes
        for a, b in zip(back.effects, obs.effects):
            assert np.array_equal(a, b)

    def test_channel_and_operation(self):
        ch = random_channel(2, 3, 2, 9)
        back = roundtrip(ch)
        assert isinstance(back, Channel)
        assert superop_distance(back, ch) < 1e-14
        op = luders_instrument(completely_unsharp_pair()).operations[0]
        back_op = roundtrip(op)
        assert isinstance(back_op, Operation)
        assert superop_distance(back_op, op) < 1e-14

    def test_instrument(self):
        inst = luders_instrument(random_povm(2, 3, 1))
        back = roundtrip(inst)
        assert isinstance(back, Instrument)
        assert back.outcomes == inst.outcomes
        for a, b in zip(back.operations, inst.operations):
            assert superop_distance(a, b) < 1e-14

    def test_scheme(self):
        scheme = build_extremal_model()
        back = roundtrip(scheme)
        assert back.system_dim == scheme.system_dim
        assert np.array_equal(back.ancilla.matrix, scheme.ancilla.matrix)
        a = scheme_to_instrument(back)
        b = scheme_to_instrument(scheme)
        assert max(superop_distance(x, y) for x, y in zip(a.operations, b.operations)) < 1e-12

    def test_file_round_trip(self, tmp_path):
        path = tmp_path / "state.json"
        st = random_full_rank_state(2, 0)
        save(st, str(path))
        back = load(str(path))
        assert np.array_equal(back.matrix, st.matrix)
        raw = json.loads(path.read_text())
        assert raw["schema_version"] == SCHEMA_VERSION
        assert raw["kind"] == "state"


class TestChoiPayload:
    def test_channel_from_choi(self):
        ch = random_channel(2, 3, 2, 5)
        doc = {
            "schema_version": SCHEMA_VERSION,
            "kind": "channel",
            "choi": [[[z.real, z.imag] for z in row] for row in choi_of(ch)],
            "dims": [3, 2],
        }
        back = decode(doc)
        assert superop_distance(back, ch) < 1e-8

    def test_choi_requires_dims(self):
        ch = random_channel(2, 2, 2, 5)
        doc = {
            "schema_version": SCHEMA_VERSION,
            "kind": "channel",
            "choi": [[[z.real, z.imag] for z in row] for row in choi_of(ch)],
        }
        with pytest.raises(ValidationError):
            decode(doc)

    def test_choi_shape_must_match_dims(self):
        ch = random_channel(2, 2, 2, 5)
        doc = {
            "schema_version": SCHEMA_VERSION,
            "kind": "channel",
            "choi": [[[z.real, z.imag] for z in row] for row in choi_of(ch)],
            "dims": [3, 2],
        }
        with pytest.raises(ValidationError):
            decode(doc)


class TestValidation:
    def test_rejects_wrong_schema_version(self):
        doc = encode(State.complete_mixture(2))
        doc["schema_version"] = "0"
        with pytest.raises(ValidationError):
            decode(doc)

    def test_rejects_unknown_kind(self):
        doc = encode(State.complete_mixture(2))
        doc["kind"] = "density"
        with pytest.raises(ValidationError):
            decode(doc)

    def test_rejects_malformed_matrix(self):
        doc = encode(State.complete_mixture(2))
        doc["matrix"][0][0] = [1.0]
        with pytest.raises(ValidationError):
            decode(doc)

    def test_rejects_non_object(self):
        with pytest.raises(ValidationError):
            decode([1, 2, 3])

    def test_rejects_invalid_json_text(self):
        with pytest.raises(ValidationError):
            loads("{not json")

    def test_rejects_scheme_missing_fields(self):
        doc = encode(build_extremal_model())
        del doc["pointer"]
        with pytest.raises(ValidationError):
            decode(doc)

    def test_rejects_unencodable(self):
        with pytest.raises(ValidationError):
            encode(np.eye(2))

    def test_decoded_objects_are_validated(self):
        doc = encode(State.complete_mixture(2))
        doc["matrix"][0][0] = [5.0, 0.0]
        with pytest.raises(Exception):
            decode(doc)
