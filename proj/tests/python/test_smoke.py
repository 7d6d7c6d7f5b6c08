import math

import pytest

import restart_tail as rt

BASE = "F = exponential(rate=1)\nG = exponential(rate=1)\nseed = 3\n"


def test_distribution_round_trip():
    d = rt.Distribution("weibull(shape=0.5, scale=2)")
    assert d.name == "weibull"
    assert rt.Distribution(str(d)) == d
    assert d.tail(2.0) == pytest.approx(math.exp(-1.0))
    assert d.cdf(2.0) + d.tail(2.0) == pytest.approx(1.0)


def test_bad_distribution_raises():
    with pytest.raises(rt.RtailError):
        rt.Distribution("exponential(rate=-1)")
    with pytest.raises(ValueError):
        rt.Distribution("banana()")


def test_lundberg_root():
    sol = rt.lundberg_root(rt.Distribution("exponential(rate=1)"), 0.5)
    assert sol["gamma"] == pytest.approx(3.51286241725, abs=1e-10)
    assert abs(sol["residual"]) < 1e-10


def test_classify_and_asymptote():
    F = rt.Distribution("pareto(index=2, scale=1)")
    G = rt.Distribution("pareto(index=1, scale=2)")
    rc = rt.classify(F, G)
    assert rc["case"] == "Case22"
    assert rc["theta"] == 2.0
    e = rt.Distribution("exponential(rate=1)")
    assert rt.asymptote(e, e, 100.0) == pytest.approx(0.01)
    assert rt.moment_classify(rt.Distribution("exponential(rate=2)"), e, 1.0) == "Finite"


def test_semi_analytic_matches_diagonal_rate():
    e = rt.Distribution("exponential(rate=1)")
    est = rt.semi_analytic_tail(e, e, 1e4)
    assert est["point"] * 1e4 == pytest.approx(1.0, rel=0.01)


def test_run_records_and_csv():
    recs = rt.run(BASE + "command = asymptote\nx_grid = 10, 100\n")
    assert [r["x"] for r in recs] == [10.0, 100.0]
    assert recs[0]["point"] is None
    csv = rt.run_csv(BASE + "command = tail\nestimator = crude\nn = 1000\nx_grid = 1, 2\n")
    assert csv == rt.run_csv(BASE + "command = tail\nestimator = crude\nn = 1000\nx_grid = 1, 2\n")
    assert "x,point,stderr,lower,upper,asymptote,ratio,n" in csv


def test_config_error():
    with pytest.raises(rt.RtailError, match="seed"):
        rt.run("F = exponential(rate=1)\nG = exponential(rate=1)\ncommand = tail\n")
