import json
import math

import numpy as np
import pytest

from itespec import io


def test_float_format():
    assert io.fmt_float(1.25) == "1.2500000000000000e+00"
    assert io.fmt_float(-0.375) == "-3.7500000000000000e-01"
    assert io.fmt_float(math.nan) == "NaN"
    assert io.fmt_float(-math.inf) == "-Infinity"
    x = 0.1 + 0.2
    assert float(io.fmt_float(x)) == x


def test_dumps_roundtrip_and_types():
    obj = {"a": 1, "b": [0.5, True, None, "s"], "c": {}, "d": [], "e": np.float64(2.0),
           "f": np.int64(3)}
    text = io.dumps(obj)
    back = json.loads(text)
    assert back == {"a": 1, "b": [0.5, True, None, "s"], "c": {}, "d": [], "e": 2.0, "f": 3}
    assert io.dumps(obj) == text
    with pytest.raises(TypeError):
        io.dumps({"x": object()})


def test_csv(tmp_path):
    io.write_csv(tmp_path / "x.csv", ["t", "N"], [(0.5, 1), (1.0, 2)])
    assert (tmp_path / "x.csv").read_text() == (
        "t,N\n5.0000000000000000e-01,1\n1.0000000000000000e+00,2\n")
