import json
import math

import numpy as np
import pytest

from qchain.core.errors import InvalidDimensions, InvalidState
from qchain.core.quantum import random_channel, random_state
from qchain.core.serialization import (
    channel_to_dict,
    dump_channel,
    dump_state,
    format_number,
    load_channel,
    load_state,
    parse_channel,
    parse_distribution,
    parse_state,
    state_to_dict,
    to_json,
    to_jsonable,
)
from qchain.core.verify import CheckResult
from tests.test_data.sample_data import (
    BAD_SHAPE_DOC,
    BAD_TRACE_DOC,
    IDENTITY_CHANNEL_DOC,
    MIXED_STATE_DOC,
    PLUS_STATE_DOC,
)


@pytest.mark.unit
class TestDocuments:
    def test_parse_state(self):
        state = parse_state(PLUS_STATE_DOC)
        np.testing.assert_allclose(state.matrix, [[0.5, 0.5], [0.5, 0.5]])

    def test_imaginary_part_is_optional(self):
        np.testing.assert_allclose(parse_state(MIXED_STATE_DOC).matrix, np.eye(2) / 2)

    def test_parse_channel(self):
        m = parse_channel(IDENTITY_CHANNEL_DOC)
        assert m.trace_preserving and not m.pre_transpose

    def test_bad_trace(self):
        with pytest.raises(InvalidState):
            parse_state(BAD_TRACE_DOC)

    def test_shape_mismatch(self):
        with pytest.raises(InvalidState):
            parse_state(BAD_SHAPE_DOC)

    def test_ragged_matrix(self):
        doc = {"dim": 2, "matrix": {"rows": 2, "cols": 2, "re": [[1.0, 0.0], [0.0]]}}
        with pytest.raises(InvalidState):
            parse_state(doc)

    def test_empty_channel(self):
        with pytest.raises(InvalidDimensions):
            parse_channel({"kraus": []})

    def test_state_file_reloads_exactly(self, tmp_path, rng):
        state = random_state(3, seed=rng)
        path = tmp_path / "state.json"
        dump_state(state, path)
        assert np.array_equal(load_state(path).matrix, state.matrix)

    def test_channel_file_reloads(self, tmp_path, rng):
        m = random_channel(2, seed=rng).transposed()
        path = tmp_path / "channel.json"
        dump_channel(m, path)
        loaded = load_channel(path)
        assert loaded.pre_transpose
        assert channel_to_dict(loaded) == channel_to_dict(m)

    def test_emitted_state_reparses(self, rng):
        state = random_state(2, seed=rng)
        emitted = json.loads(to_json({"state": state_to_dict(state)}))
        assert np.array_equal(parse_state(emitted["state"]).matrix, state.matrix)

    def test_malformed_json_file(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{")
        with pytest.raises(InvalidState):
            load_state(path)


@pytest.mark.unit
class TestDistributions:
    def test_inline(self):
        np.testing.assert_allclose(parse_distribution("[0.75, 0.25]").probs, [0.75, 0.25])

    def test_file(self, write_json):
        path = write_json("p.json", [0.5, 0.5])
        np.testing.assert_allclose(parse_distribution(str(path)).probs, [0.5, 0.5])

    @pytest.mark.parametrize("text", ["not json", '{"p": 1}', '["a", "b"]', "[0.5, 0.4]"])
    def test_rejects(self, text):
        with pytest.raises(InvalidState):
            parse_distribution(text)


@pytest.mark.unit
class TestNumberFormatting:
    @pytest.mark.parametrize(
        "value,expected",
        [
            (math.inf, "inf"),
            (-math.inf, "-inf"),
            (math.nan, "nan"),
            (1 / 3, 0.333333333333),
            (3, 3),
            (True, True),
            (None, None),
        ],
    )
    def test_format_number(self, value, expected):
        assert format_number(value) == expected

    def test_to_jsonable_handles_numpy_and_models(self):
        result = CheckResult(name="x", lhs_bits=1.0, rhs_bits=math.inf, slack=math.inf, passed=True, tol=1e-7)
        payload = to_jsonable({"arr": np.array([1.0, np.inf]), "flag": np.bool_(True), "n": np.int64(4), "r": result})
        assert payload["arr"] == [1.0, "inf"]
        assert payload["flag"] is True and payload["n"] == 4
        assert payload["r"]["pass"] is True
        assert payload["r"]["slack"] == "inf"

    def test_to_json_is_strict(self):
        text = to_json({"value": math.inf})
        assert "Infinity" not in text
        assert json.loads(text) == {"value": "inf"}
