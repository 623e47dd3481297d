import json
import math

import numpy as np
from hypothesis import given, strategies as st

from dsdirac.io import complex_pair, dumps, fmt17, to_jsonable, write_csv, write_json


def test_fmt17():
    assert fmt17(0.1) == "1.0000000000000001e-01"
    assert fmt17(-3) == "-3.0000000000000000e+00"


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_fmt17_round_trip(x):
    assert float(fmt17(x)) == x


def test_complex_pair():
    assert complex_pair(1 - 2j) == [1.0, -2.0]


def test_jsonable_conversion():
    obj = {"a": np.float64(1.5), "b": np.arange(3), "c": 1j, 2: (np.bool_(True), None)}
    assert to_jsonable(obj) == {"a": 1.5, "b": [0, 1, 2], "c": [0.0, 1.0], "2": [True, None]}


def test_dumps_parses_and_preserves():
    obj = {"x": [0.1, 2.0, math.inf], "n": 3, "s": "é", "nested": [{"k": []}, {}]}
    back = json.loads(dumps(obj))
    assert back == {"x": [0.1, 2.0, None], "n": 3, "s": "é", "nested": [{"k": []}, {}]}
    assert "1.0000000000000001e-01" in dumps(obj)


@given(st.recursive(st.floats(allow_nan=False, allow_infinity=False) | st.integers() | st.text(),
                    lambda c: st.lists(c, max_size=4) | st.dictionaries(st.text(), c, max_size=4),
                    max_leaves=20))
def test_dumps_round_trip(obj):
    assert json.loads(dumps(obj)) == json.loads(json.dumps(obj))


def test_writers(tmp_path):
    write_json(tmp_path / "a.json", {"v": 1.0})
    assert json.loads((tmp_path / "a.json").read_text()) == {"v": 1.0}
    write_csv(tmp_path / "b.csv", ["x", "y"], [[1.0, 2], [np.float64(0.5), 3]])
    assert (tmp_path / "b.csv").read_text().splitlines() == [
        "x,y", "1.0000000000000000e+00,2", "5.0000000000000000e-01,3"]
