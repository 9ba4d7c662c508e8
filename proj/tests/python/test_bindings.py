import math

import pytest

d2d = pytest.importorskip("d2d_offload")


def test_config_defaults_and_overrides():
    cfg = d2d.config()
    assert cfg.user_density == pytest.approx(0.01)
    assert cfg.collab_distance == pytest.approx(100.0)
    assert cfg.catalog_size == 1000
    near = d2d.config({"collab_distance_m": 50})
    assert near.collab_distance == pytest.approx(50.0)
    with pytest.raises(ValueError):
        d2d.config({"no_such_key": 1})
    with pytest.raises(ValueError):
        d2d.config({"user_density": -1})


def test_config_text_round_trip():
    cfg = d2d.config({"battery_fraction": 0.3})
    back = d2d.parse_config_text(cfg.to_text())
    assert back.battery_fraction == cfg.battery_fraction
    assert back.to_text() == cfg.to_text()


def test_popularity_and_caching():
    assert d2d.zipf(3, 1.0) == pytest.approx([6 / 11, 3 / 11, 2 / 11], abs=1e-14)
    pc = d2d.optimal_caching(0.01, 20.0, 3, 1.0)
    assert pc == pytest.approx([0.38086, 0.32570, 0.29344], abs=1e-5)
    big = d2d.optimal_caching(0.01, 100.0, 1000, 1.0)
    assert sum(big) == pytest.approx(1.0, abs=1e-12)
    assert sum(1 for p in big if p > 0) == 317
    po = d2d.offloading_opportunity(d2d.config())
    assert po == pytest.approx(0.713477, abs=1e-6)
    assert d2d.offloading_opportunity(d2d.config(), d2d.CachePolicy.uniform) < po


def test_special_functions():
    assert d2d.upper_gamma(3.5, 0.0) == pytest.approx(1.875 * math.sqrt(math.pi), rel=1e-12)
    assert d2d.expint_ei(-1.0) == pytest.approx(-0.2193839344, abs=1e-10)
    assert d2d.expint_e1(1.0) == pytest.approx(0.2193839344, abs=1e-10)
    assert d2d.xi1(4.0) == pytest.approx(math.pi / 2, abs=1e-10)
    assert d2d.xi2(4.0, 1e-3) < d2d.xi1(4.0)


def test_analytic_reference_values():
    cfg = d2d.config()
    fr = d2d.analytic(cfg, d2d.Scheme.full_reuse, 0.001, 0.01)
    assert fr["p_o"] == pytest.approx(0.713477, abs=1e-6)
    assert fr["p"] == pytest.approx(0.20103, abs=5e-5)
    assert fr["pa"] == pytest.approx(0.28787, abs=5e-5)
    td = d2d.analytic(cfg, d2d.Scheme.tdma, 0.2, 0.01)
    assert td["p"] == pytest.approx(0.6928, abs=1e-4)
    for m in (fr, td):
        assert m["p"] <= m["pa"] <= m["p_o"]
        assert m["e"] <= 0.01


def test_optimal_power():
    cfg = d2d.config()
    fr = d2d.optimal_power(cfg, d2d.Scheme.full_reuse, 0.01)
    assert fr["p_star"] == pytest.approx(3.386e-4, rel=1e-2)
    assert not fr["clamped"]
    td = d2d.optimal_power(cfg, d2d.Scheme.tdma, 0.01)
    assert td["p_star"] == pytest.approx(0.2)
    assert td["clamped"]


def test_monte_carlo_is_deterministic_and_close():
    cfg = d2d.config()
    a = d2d.monte_carlo(cfg, d2d.Scheme.tdma, [0.05, 0.2], 0.01, drops=20, seed=3, boundary=d2d.Boundary.torus)
    b = d2d.monte_carlo(cfg, d2d.Scheme.tdma, [0.05, 0.2], 0.01, drops=20, seed=3, boundary=d2d.Boundary.torus)
    assert a == b
    assert len(a) == 2
    want = d2d.analytic(cfg, d2d.Scheme.tdma, 0.2, 0.01)["p"]
    mean, hw = a[1]["probability"]
    assert abs(mean - want) <= max(0.03, 3 * hw)
    assert a[1]["budget_violations"] == 0


def test_figure_csv_header():
    text = d2d.figure_csv("fig2a")
    header = text.splitlines()[0].split(",")
    assert header == ["sweep", "variable", "value", "index", "p_r", "p_c"]
    with pytest.raises(ValueError):
        d2d.figure_csv("fig99")
