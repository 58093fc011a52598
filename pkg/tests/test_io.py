import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from g2kit.io import curve_from_csv, curve_from_json, curve_to_csv, curve_to_json, read_curve, write_curve
from g2kit.regression import CorrelationCurve

floats = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(floats, floats, floats, st.floats(0, 1e3)), min_size=1, max_size=12))
def test_round_trip_exact(rows):
    tau = np.arange(len(rows), dtype=float) * 0.37
    g1 = np.array([complex(a, b) for a, b, _, _ in rows])
    g2 = np.array([c for _, _, c, _ in rows])
    err = np.array([e for *_, e in rows])
    curve = CorrelationCurve(tau, g1, g2, 1.0, g1_err=err, g2_err=err)
    for back in (curve_from_csv(curve_to_csv(curve)), curve_from_json(curve_to_json(curve))):
        assert np.array_equal(back.tau, tau) and np.array_equal(back.g1, g1)
        assert np.array_equal(back.g2, g2) and np.array_equal(back.g2_err, err)


def test_missing_g2_round_trip():
    curve = CorrelationCurve([0.0, 1.0], [1.0, 0.5j], None, 1.0)
    text = curve_to_csv(curve)
    assert text.splitlines()[1].endswith(",nan")
    assert curve_from_csv(text).g2 is None
    assert '"g2": null' in curve_to_json(curve)
    assert curve_from_json(curve_to_json(curve)).g2 is None


def test_header_with_errors():
    curve = CorrelationCurve([0.0], [1.0], [2.0], 1.0, g1_err=[0.0], g2_err=[0.1])
    assert curve_to_csv(curve).splitlines()[0] == "tau,g1_re,g1_im,g2,g1_err,g2_err"


def test_seventeen_digits():
    x = 0.1 + 0.2
    curve = CorrelationCurve([0.0, x], [1.0, 1.0], [x, x], 1.0)
    assert "0.30000000000000004" in curve_to_csv(curve)


def test_write_to_stream_and_file(tmp_path):
    curve = CorrelationCurve([0.0, 1.0], [1.0, 0.5], [2.0, 1.2], 1.0)
    buf = io.StringIO()
    write_curve(curve, buf, "json")
    assert buf.getvalue().lstrip().startswith("[")
    write_curve(curve, tmp_path / "c.csv")
    assert np.array_equal(read_curve(tmp_path / "c.csv").g2, curve.g2)


@pytest.mark.parametrize("text", ["", "tau,g1_re\n0,1\n", "[]", '{"a": 1}'])
def test_malformed(text):
    with pytest.raises(ValueError):
        if text.startswith(("[", "{")):
            curve_from_json(text)
        else:
            curve_from_csv(text)
