import numpy as np

from skcvr.curve import RateCurve, RatePoint, format_number


def _curve() -> RateCurve:
    points = [
        RatePoint(10.0, 0.25, 0.5, {"eta": 0.631}),
        RatePoint(20.0, 0.125, 0.25, {"eta": 0.398}),
    ]
    return RateCurve(points)


def test_rate_curve_columns_and_rows():
    curve = _curve()
    assert curve.columns() == ["parameter", "rate", "probability", "eta"]
    np.testing.assert_equal(curve.column("rate"), [0.25, 0.125])
    assert curve.max_rate() == 0.25
    assert len(curve) == 2
    assert curve[1].parameter == 20.0
    assert [p.parameter for p in curve[:1]] == [10.0]
    assert RateCurve().columns() == ["parameter", "rate", "probability"]


def test_rate_curve_serialization():
    curve = _curve()
    again = RateCurve.loads(curve.dumps())
    assert again.rows() == curve.rows()


def test_rate_curve_add():
    curve = _curve()
    joined = curve + curve
    assert len(joined) == 4
    joined[0].metadata["eta"] = 1.0
    assert curve[0].metadata["eta"] == 0.631


def test_to_csv():
    text = _curve().to_csv()
    lines = text.split("\n")
    assert lines[0] == "parameter,rate,probability,eta"
    assert lines[1] == "10.0,0.25,0.5,0.631"
    assert text.endswith("\n")
    assert "\r" not in text


def test_format_number_is_shortest_roundtrip():
    x = 0.1 + 0.2
    assert float(format_number(x)) == x
    assert format_number(0.4) == "0.4"
    assert format_number(np.float64(1.0) / 3.0) == repr(1.0 / 3.0)
    assert format_number(3) == "3"
    assert format_number(np.bool_(True)) == "True"


if __name__ == "__main__":
    test_to_csv()
