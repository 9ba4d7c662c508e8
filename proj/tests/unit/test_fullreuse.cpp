#include <doctest.h>

#include <cmath>
#include <numbers>

#include "d2d/experiments.hpp"
#include "d2d/fullreuse.hpp"
#include "d2d/montecarlo.hpp"

using namespace d2d;

namespace {

struct Fixture {
  SystemConfig cfg = default_config();
  Popularity pop = zipf(1000, 1.0);
  CachingDistribution cache = optimal_caching(0.01, 100.0, pop);
};

SystemConfig with(const char* kv) {
  auto raw = default_parameters();
  apply_override(raw, kv);
  return validate(raw);
}

// p_1 by a plain trapezoid over r with the survival exponent, file by file.
double p1_trapezoid(const FullReuseModel& m, const OperatingPoint& op, int panels) {
  const auto& cfg = m.config();
  const double noise = cfg.noise_power / (op.tx_power * cfg.pathloss_gain);
  double p = 0.0;
  for (std::size_t i = 0; i < m.popularity().size(); ++i) {
    const double lam = cfg.user_density * m.cache().pmf[i];
    if (lam <= 0.0) continue;
    const double h = cfg.collab_distance / panels;
    double s = 0.0;
    for (int k = 0; k <= panels; ++k) {
      const double r = k * h;
      const double w = (k == 0 || k == panels) ? 0.5 : 1.0;
      const double phi = r > 0.0 ? survival_exponent(m.densities(), i, op.gamma1, r, cfg.pathloss_exponent, noise) : 0.0;
      s += w * link_distance_pdf(r, lam) * std::exp(-phi);
    }
    p += m.popularity().pmf[i] * s * h;
  }
  return p;
}

}  // namespace

TEST_SUITE("fullreuse") {
  TEST_CASE("transmitter densities") {
    Fixture f;
    const auto d = dt_densities(f.cfg, f.pop, f.cache);
    for (std::size_t i = f.cache.cutoff; i < 1000; ++i) CHECK(d.per_file[i] == 0.0);
    CHECK(d.total == doctest::Approx(0.00363421).epsilon(1e-5));
    CHECK(d.active_prob == doctest::Approx(0.3634).epsilon(1e-3));
    double sum = 0.0;
    for (double v : d.per_file) sum += v;
    CHECK(sum == doctest::Approx(d.total).epsilon(1e-12));
    for (std::size_t i = 0; i < 1000; ++i) CHECK(d.per_file[i] <= f.cfg.user_density * f.cache.pmf[i] * (1 + 1e-12));

    // Far collaboration distance: theta -> 1 and p_s -> (1 + lambda p_r / (3.5 lambda_i))^-3.5.
    auto wide = f.cfg;
    wide.collab_distance = 5000.0;
    const auto wc = optimal_caching(0.01, 5000.0, f.pop);
    const auto dw = dt_densities(wide, f.pop, wc);
    for (std::size_t i : {0u, 10u, 500u}) {
      const double li = 0.01 * wc.pmf[i];
      CHECK(dw.theta[i] == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(dw.inactive_prob[i] ==
            doctest::Approx(std::pow(1.0 + 0.01 * f.pop.pmf[i] / (3.5 * li), -3.5)).epsilon(1e-9));
    }
  }

  TEST_CASE("link distance pdf") {
    const double lam = 0.01 * 0.004;
    const double total = integrate_to_infinity([&](double r) { return link_distance_pdf(r, lam); }, 0.0,
                                               {1e-12, 1e-16, 400});
    CHECK(std::abs(total - 1.0) < 1e-10);
    const double mode = 1.0 / std::sqrt(2.0 * std::numbers::pi * lam);
    CHECK(link_distance_pdf(mode, lam) > link_distance_pdf(mode * 0.99, lam));
    CHECK(link_distance_pdf(mode, lam) > link_distance_pdf(mode * 1.01, lam));
    const double rc = 100.0;
    const double cdf = integrate([&](double r) { return link_distance_pdf(r, lam); }, 0.0, rc);
    CHECK(cdf == doctest::Approx(-std::expm1(-lam * std::numbers::pi * rc * rc)).epsilon(1e-12));
  }

  TEST_CASE("survival exponent") {
    Fixture f;
    DtDensities empty;
    empty.per_file.assign(1000, 0.0);
    CHECK(survival_exponent(empty, 0, 3.0, 30.0, 3.68, 0.0) == 0.0);

    const auto d = dt_densities(f.cfg, f.pop, f.cache);
    double prev = 0.0;
    for (double x = 1e-3; x < 1e4; x *= 3.0) {
      const double v = survival_exponent(d, 0, x, 30.0, 3.68, 1e-6);
      CHECK(v >= prev);
      prev = v;
    }
    const double s = 1e-7, x = 2.0, r = 40.0;
    const double diff = survival_exponent(d, 3, x, r, 3.68, 2 * s) - survival_exponent(d, 3, x, r, 3.68, s);
    CHECK(diff == doctest::Approx(x * std::pow(r, 3.68) * s).epsilon(1e-10));
  }

  TEST_CASE("values at the reference point") {
    Fixture f;
    const FullReuseModel m(f.cfg, f.pop, f.cache);
    const double p1[] = {0.20103, 0.19036, 0.15779, 0.13409, 0.10761};
    const double pa[] = {0.28787, 0.27577, 0.23751, 0.20821, 0.17378};
    const double pw[] = {1, 10, 50, 100, 200};
    for (int k = 0; k < 5; ++k) {
      const auto op = make_operating_point(f.cfg, pw[k] * 1e-3, 0.01);
      CHECK(m.offload_prob(op) == doctest::Approx(p1[k]).epsilon(5e-5 / p1[k]));
      CHECK(m.offload_ratio(op) == doctest::Approx(pa[k]).epsilon(5e-5 / pa[k]));
    }
  }

  TEST_CASE("p1 matches a trapezoid oracle") {
    Fixture f;
    const FullReuseModel m(f.cfg, f.pop, f.cache);
    for (double pt : {1e-3, 0.2}) {
      const auto op = make_operating_point(f.cfg, pt, 0.01);
      CHECK(std::abs(m.offload_prob(op) - p1_trapezoid(m, op, 4000)) < 2e-6);
    }
  }

  TEST_CASE("p1a matches the defining delivered-fraction integral") {
    Fixture f;
    const FullReuseModel m(f.cfg, f.pop, f.cache);
    const auto op = make_operating_point(f.cfg, 0.05, 0.01);
    // E[min(1, ln(1+SINR)/ln(1+Gamma))] through P(SINR > t), integrated in ln(1+t).
    const double y = std::log1p(op.gamma1);
    const double want = integrate([&](double s) { return m.success_mass(std::expm1(s), op.tx_power); }, 0.0, y,
                                  {1e-10, 1e-14, 400}) / y;
    CHECK(m.offload_ratio(op) == doctest::Approx(want).epsilon(1e-7));
  }

  TEST_CASE("limits") {
    Fixture f;
    const FullReuseModel m(f.cfg, f.pop, f.cache);
    const auto op = make_operating_point(f.cfg, 0.1, 1e6);
    CHECK(std::abs(m.offload_prob(op) - m.opportunity()) < 1e-3);
    CHECK(std::abs(m.offload_ratio(op) - m.opportunity()) < 1e-3);
    // Interference keeps a gap of order Gamma_1^(2/alpha): each 100x in rho shrinks it by 100^(-2/alpha).
    const auto op2 = make_operating_point(f.cfg, 0.1, 1e8);
    const double shrink = (m.opportunity() - m.offload_prob(op2)) / (m.opportunity() - m.offload_prob(op));
    CHECK(shrink == doctest::Approx(std::pow(100.0, -2.0 / f.cfg.pathloss_exponent)).epsilon(0.05));

    auto tiny = f.cfg;
    tiny.collab_distance = 1e-3;
    const FullReuseModel mt(tiny, f.pop, optimal_caching(0.01, 1e-3, f.pop));
    CHECK(mt.offload_prob(make_operating_point(tiny, 0.1, 0.01)) < 1e-7);

    // Tiny rho: Gamma_1 huge, every link partial, energy -> the budget.
    const auto starved = make_operating_point(f.cfg, 0.1, 1e-4);
    CHECK(m.energy_cost(starved) == doctest::Approx(1e-4).epsilon(1e-3));
  }

  TEST_CASE("ordering and energy bound") {
    for (double rc : {30.0, 250.0}) {
      auto cfg = default_config();
      cfg.collab_distance = rc;
      const auto pop = zipf(1000, 1.0);
      const FullReuseModel m(cfg, pop, optimal_caching(0.01, rc, pop));
      for (double rho : {0.001, 0.1, 1.0}) {
        for (double pt : {1e-3, 5e-2, 0.2}) {
          const auto op = make_operating_point(cfg, pt, rho);
          const auto a = m.evaluate(op);
          CHECK(a.probability <= a.ratio + 1e-6);
          CHECK(a.ratio <= a.opportunity + 1e-6);
          CHECK(a.energy_cost <= rho + 1e-9);
          CHECK(a.energy_complete <= rho * cfg.battery_energy() * (1 + 1e-12));
          // Partial links spend the whole budget.
          const double mix = (a.probability * a.energy_complete +
                              (a.opportunity - a.probability) * rho * cfg.battery_energy()) / a.opportunity;
          CHECK(a.energy_average == doctest::Approx(mix).epsilon(1e-9));
        }
      }
    }
  }

  TEST_CASE("complete-link energy against the threshold-space integral") {
    Fixture f;
    const FullReuseModel m(f.cfg, f.pop, f.cache);
    const auto op = make_operating_point(f.cfg, 0.05, 0.01);
    // E[1/ln(1+S); S >= G] = P(S>=G)/ln(1+G) - int_G^inf P(S>t) / ((1+t) ln^2(1+t)) dt.
    const double y = std::log1p(op.gamma1);
    const double p1 = m.offload_prob(op);
    const double tail = integrate_to_infinity(
        [&](double t) { return m.success_mass(t, op.tx_power) / ((1.0 + t) * std::pow(std::log1p(t), 2)); },
        op.gamma1, {1e-10, 1e-16, 600});
    const double want = f.cfg.budget_joules() * y * (p1 / y - tail) / p1;
    CHECK(m.energy_complete(op) == doctest::Approx(want).epsilon(1e-6));
  }

  TEST_CASE("line-of-sight closed form") {
    const auto cfg = with("pathloss_exponent=2");
    const auto pop = zipf(1000, 1.0);
    const auto cache = optimal_caching(0.01, 100.0, pop);
    const FullReuseModel m(cfg, pop, cache);
    CHECK(m.line_of_sight());
    for (double pt : {1e-3, 0.05, 0.2}) {
      const auto op = make_operating_point(cfg, pt, 0.01);
      CHECK(std::abs(m.offload_prob_los(op) - m.offload_prob(op)) < 1e-8);
    }
    const auto open = make_operating_point(cfg, 0.1, 1e7);
    CHECK(m.offload_prob_los(open) == doctest::Approx(m.opportunity()).epsilon(1e-6));
    // A file nobody caches contributes nothing.
    CachingDistribution one;
    one.pmf.assign(1000, 0.0);
    one.pmf[0] = 1.0;
    one.cutoff = 1;
    const FullReuseModel m1(cfg, pop, one);
    const auto op = make_operating_point(cfg, 0.1, 1e7);
    CHECK(m1.offload_prob_los(op) == doctest::Approx(pop.pmf[0] * -std::expm1(-0.01 * std::numbers::pi * 1e4)).epsilon(1e-6));
    CHECK_THROWS((void)FullReuseModel(default_config(), pop, cache).offload_prob_los(op));
  }

  TEST_CASE("agreement with simulation at 50 mW") {
    Fixture f;
    McScenario sc;
    sc.boundary = Boundary::torus;
    const auto res = run_monte_carlo(f.cfg, f.pop, f.cache, sc, {{Scheme::full_reuse, 0.05, 0.01}}, 200, 7);
    const FullReuseModel m(f.cfg, f.pop, f.cache);
    const auto a = m.evaluate(make_operating_point(f.cfg, 0.05, 0.01));
    const auto& mc = res[0].metrics;
    CHECK(std::abs(mc.at("probability").mean - a.probability) <= std::max(0.02, 3 * mc.at("probability").half_width_95));
    CHECK(std::abs(mc.at("ratio").mean - a.ratio) <= std::max(0.02, 3 * mc.at("ratio").half_width_95));
    CHECK(std::abs(mc.at("energy_cost").mean - a.energy_cost) <= 0.1 * a.energy_cost);
    // Active DT density: simulated fraction of helpers that serve someone.
    CHECK(mc.at("dt_density").mean == doctest::Approx(m.densities().total).epsilon(0.05));
  }
}
