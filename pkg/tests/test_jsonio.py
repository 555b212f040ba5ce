import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weaktomo import jsonio
from weaktomo.errors import DimensionMismatchError
from weaktomo.states import PureState, fourier_mub
from weaktomo.weakvalues import PointerModel, WeakValueVector


@given(st.floats(allow_nan=False, allow_infinity=False))
@settings(max_examples=300)
def test_float_round_trip(x):
    assert json.loads(jsonio.dumps({"x": x}))["x"] == x


def test_csv_digits():
    assert jsonio.format_float(1 / 3, 12) == "0.333333333333"
    assert jsonio.csv_lines(["a", "b"], [[0.5, 2]]) == "a,b\n0.5,2\n"


def test_state_round_trip():
    psi = PureState.from_unnormalized([1, 2j, -0.3])
    back = jsonio.state_from_json(json.loads(jsonio.dumps(jsonio.state_to_json(psi))))
    np.testing.assert_array_equal(back.amps, psi.amps)


def test_field_names():
    assert set(jsonio.state_to_json(fourier_mub(2))) == {"dim", "amps"}
    w = WeakValueVector([0.5 + 1j, 0.5 - 1j])
    assert jsonio.weak_values_to_json(w) == {"dim": 2, "w": [[0.5, 1.0], [0.5, -1.0]]}
    assert jsonio.pointer_to_json(PointerModel(2.0, 9)) == {"delta": 2.0, "ensemble": 9}
    assert jsonio.pointer_from_json({"delta": 3, "ensemble": 4}).delta_s == 1.5


def test_parse_errors():
    with pytest.raises(jsonio.ParseError):
        jsonio.loads("{")
    with pytest.raises(jsonio.ParseError):
        jsonio.state_from_json({"dim": 2})
    with pytest.raises(jsonio.ParseError):
        jsonio.state_from_json({"dim": 2, "amps": [1, 0]})
    with pytest.raises(jsonio.ParseError):
        jsonio.pointer_from_json({"delta": "x", "ensemble": 1})
    with pytest.raises(DimensionMismatchError):
        jsonio.state_from_json({"dim": 3, "amps": [[1, 0], [0, 0]]})
