// Acceptance suite: one PASS/FAIL line per criterion.
//   d2d_acceptance [--only 1,4] [--expect-fail 9,10] [--drops-scale 0.1]
// Exit status 0 when the set of failing criteria equals --expect-fail
// (empty by default), 1 otherwise.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "caching_oracle.hpp"
#include "d2d/experiments.hpp"
#include "d2d/fullreuse.hpp"
#include "d2d/montecarlo.hpp"
#include "d2d/popularity.hpp"
#include "d2d/power.hpp"
#include "d2d/specfun.hpp"
#include "d2d/tdma.hpp"

using namespace d2d;

namespace {

double g_drops_scale = 1.0;

std::size_t drops(std::size_t n) { return std::max<std::size_t>(2, static_cast<std::size_t>(std::lround(n * g_drops_scale))); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

const std::vector<double> kPowers{1e-3, 1e-2, 5e-2, 0.1, 0.2};

SystemConfig with(std::initializer_list<std::string> kvs) {
  auto raw = default_parameters();
  for (const auto& kv : kvs) apply_override(raw, kv);
  return validate(raw);
}

Outcome c1_caching_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (std::size_t n : {3u, 10u, 20u})
    for (double beta : {0.5, 1.0, 1.5}) {
      const auto pop = zipf(n, beta);
      for (double c : {0.5, 2.0, 10.0, 50.0}) {
        const double rc = std::sqrt(c / (0.01 * std::numbers::pi));
        const auto got = optimal_caching(0.01, rc, pop).pmf;
        const auto want = oracle::projected_gradient(pop.pmf, c);
        for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(got[i] - want[i]));
      }
    }
  const auto hand = optimal_caching(0.01, 20.0, zipf(3, 1.0)).pmf;
  const double ref[] = {0.38086, 0.32570, 0.29344};
  double hand_err = 0.0;
  for (int i = 0; i < 3; ++i) hand_err = std::max(hand_err, std::abs(hand[i] - ref[i]));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {worst <= 1e-6 && hand_err <= 1e-5 && secs < 5.0,
          "max |solver - projected gradient| = " + fmt("%.2e", worst) + ", hand value error " +
              fmt("%.2e", hand_err) + ", " + fmt("%.2f", secs) + " s"};
}

Outcome c2_caching_limits() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto pop = zipf(1000, 1.0);
  const auto wide = optimal_caching(0.01, 500.0, pop);
  double dev = 0.0;
  for (double p : wide.pmf) dev = std::max(dev, std::abs(p - 1e-3));
  const auto narrow = optimal_caching(0.01, 1.0, pop);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool pass = dev < 0.002 && narrow.pmf[0] == 1.0 && narrow.cutoff == 1 && secs < 1.0;
  return {pass, "r_c=500: max |p_c - 1/N_f| = " + fmt("%.2e", dev) + "; r_c=1: p_c(1) = " + fmt("%.12g", narrow.pmf[0]) +
                    ", " + fmt("%.3f", secs) + " s"};
}

Outcome c3_special_functions() {
  const double g = std::abs(upper_gamma(3.5, 0.0) - 1.875 * std::sqrt(std::numbers::pi));
  const double x = std::abs(xi1(4.0) - std::numbers::pi / 2.0);
  // E1 convergent series in long double.
  long double sum = 0.0L, term = 1.0L;
  for (int k = 1; k < 100; ++k) {
    term *= -1.0L / k;
    sum += term / k;
  }
  const double ei_series = static_cast<double>(0.577215664901532860606512090082402431L + sum);  // Ei(-1) = -E1(1)
  const double e = std::abs(expint_ei(-1.0) - ei_series);
  return {g <= 1e-12 && x <= 1e-10 && e <= 1e-10, "Gamma(3.5,0) err " + fmt("%.1e", g) + ", xi1(4) err " +
                                                      fmt("%.1e", x) + ", Ei(-1) err " + fmt("%.1e", e)};
}

struct Reference {
  SystemConfig cfg = default_config();
  Popularity pop = zipf(1000, 1.0);
  CachingDistribution cache = optimal_caching(0.01, 100.0, pop);
};

// Criterion 4 Monte Carlo results, reused by criterion 7.
std::vector<McResult> g_c4_mc;

Outcome c4_overlap() {
  Reference r;
  McScenario sc;
  sc.boundary = Boundary::torus;
  std::vector<McPoint> pts;
  for (Scheme s : {Scheme::full_reuse, Scheme::tdma})
    for (double p : kPowers) pts.push_back({s, p, 0.01});
  const std::size_t n = drops(2000);
  g_c4_mc = run_monte_carlo(r.cfg, r.pop, r.cache, sc, pts, n, 2024);
  bool pass = true;
  double worst_prob = 0.0, worst_energy = 0.0;
  std::ostringstream os;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const auto a = analytic_metrics(r.cfg, r.pop, r.cache, pts[k].scheme, pts[k].tx_power, 0.01);
    const auto& m = g_c4_mc[k].metrics;
    for (auto [name, val] : {std::pair{"probability", a.probability}, std::pair{"ratio", a.ratio}}) {
      const double d = std::abs(m.at(name).mean - val);
      const double tol = std::max(0.02, 3 * m.at(name).half_width_95);
      worst_prob = std::max(worst_prob, d);
      if (d > tol) {
        pass = false;
        os << " " << to_string(pts[k].scheme) << "@" << pts[k].tx_power * 1e3 << "mW " << name << " off by " << d << ";";
      }
    }
    const double rel = std::abs(m.at("energy_cost").mean - a.energy_cost) / a.energy_cost;
    worst_energy = std::max(worst_energy, rel);
    if (rel > 0.10) {
      pass = false;
      os << " " << to_string(pts[k].scheme) << "@" << pts[k].tx_power * 1e3 << "mW energy off by " << rel * 100 << "%;";
    }
  }
  return {pass, std::to_string(n) + " drops (torus): max |analytic - MC| probability/ratio " + fmt("%.4f", worst_prob) +
                    ", max energy rel diff " + fmt("%.2f%%", worst_energy * 100) + os.str()};
}

Outcome c5_ordering() {
  Reference r;
  double worst = 1.0;
  for (Scheme s : {Scheme::full_reuse, Scheme::tdma})
    for (double rho : {0.001, 0.01, 0.1, 1.0})
      for (double p : kPowers) {
        const auto a = analytic_metrics(r.cfg, r.pop, r.cache, s, p, rho);
        worst = std::min({worst, a.ratio - a.probability, a.opportunity - a.ratio});
      }
  return {worst >= -1e-6, "min slack of p <= pa <= p_o over 40 points: " + fmt("%.3e", worst)};
}

Outcome c6_limits() {
  Reference r;
  const double po = offloading_opportunity(0.01, 100.0, r.pop, r.cache);
  const double d1 = std::abs(analytic_metrics(r.cfg, r.pop, r.cache, Scheme::full_reuse, 0.1, 1e6).ratio - po);
  const double d2 = std::abs(analytic_metrics(r.cfg, r.pop, r.cache, Scheme::tdma, 0.1, 1e6).ratio - po);
  return {d1 <= 1e-3 && d2 <= 1e-3, "rho=1e6: |p1a - p_o| = " + fmt("%.2e", d1) + ", |p2a - p_o| = " + fmt("%.2e", d2)};
}

Outcome c7_energy_bound() {
  Reference r;
  double worst = 1.0;
  for (Scheme s : {Scheme::full_reuse, Scheme::tdma})
    for (double rho : {0.001, 0.01, 0.1, 1.0})
      for (double p : kPowers) worst = std::min(worst, rho - analytic_metrics(r.cfg, r.pop, r.cache, s, p, rho).energy_cost);
  std::uint64_t violations = 0;
  double ratio = 0.0;
  if (g_c4_mc.empty()) {
    McScenario sc;
    std::vector<McPoint> pts;
    for (Scheme s : {Scheme::full_reuse, Scheme::tdma})
      for (double p : kPowers) pts.push_back({s, p, 0.01});
    g_c4_mc = run_monte_carlo(r.cfg, r.pop, r.cache, sc, pts, drops(200), 7);
  }
  for (const auto& m : g_c4_mc) {
    violations += m.budget_violations;
    ratio = std::max(ratio, m.max_energy_over_budget);
  }
  return {worst >= -1e-9 && violations == 0 && ratio <= 1.0,
          "min (rho - e) = " + fmt("%.3e", worst) + "; MC per-request spend / budget max " + fmt("%.6f", ratio) +
              ", violations " + std::to_string(violations)};
}

Outcome c8_power() {
  const auto pop = zipf(1000, 1.0);
  const auto cache = optimal_caching(0.01, 100.0, pop);
  bool pass = true;
  double worst = 0.0;
  int clamped_both = 0;
  for (const std::string f : {"30", "300", "3000"}) {
    const auto cfg = with({"file_size_mbytes=" + f});
    const TdmaModel m(cfg, pop, cache);
    for (double rho : {0.001, 0.01, 0.1}) {
      const auto a = optimize_power_tdma(m, rho);
      const auto b = optimize_power_tdma_search(m, rho);
      if (a.clamped && b.clamped) {
        ++clamped_both;
        continue;
      }
      const double rel = std::abs(a.p_star - b.p_star) / b.p_star;
      worst = std::max(worst, rel);
      if (rel > 0.01) pass = false;
    }
  }
  Reference r;
  const auto def = optimize_power_tdma(TdmaModel(r.cfg, r.pop, r.cache), 0.01);
  pass = pass && def.p_star == r.cfg.max_tx_power;
  return {pass, std::to_string(clamped_both) + "/9 both clamp, max rel gap otherwise " + fmt("%.2f%%", worst * 100) +
                    "; defaults P* = " + fmt("%.1f", def.p_star * 1e3) + " mW"};
}

Outcome c9_shape() {
  Reference r;
  std::vector<double> p1a, p2a;
  for (double p : kPowers) {
    p1a.push_back(analytic_metrics(r.cfg, r.pop, r.cache, Scheme::full_reuse, p, 0.01).ratio);
    p2a.push_back(analytic_metrics(r.cfg, r.pop, r.cache, Scheme::tdma, p, 0.01).ratio);
  }
  // Exactly one local maximum: the differences change sign once, + to -.
  int changes = 0;
  bool rises = false;
  for (std::size_t k = 1; k < p1a.size(); ++k) {
    const bool up = p1a[k] > p1a[k - 1];
    if (k == 1) rises = up;
    if (k > 1 && up != (p1a[k - 1] > p1a[k - 2])) ++changes;
  }
  const bool one_peak = rises && changes == 1;
  bool nondecreasing = true;
  for (std::size_t k = 1; k < p2a.size(); ++k) nondecreasing = nondecreasing && p2a[k] >= p2a[k - 1];

  // Context: the same test on a log grid reaching below 1 mW.
  const FullReuseModel m(r.cfg, r.pop, r.cache);
  const auto peak = optimize_power_full_reuse(m, 0.01);
  std::ostringstream os;
  os << "p1a on grid:";
  for (double v : p1a) os << " " << fmt("%.4f", v);
  os << (one_peak ? " (one interior peak)" : " (no interior peak on this grid)");
  os << "; p2a " << (nondecreasing ? "nondecreasing" : "not monotone");
  os << "; full-reuse optimum at " << fmt("%.3f", peak.p_star * 1e3) << " mW";
  return {one_peak && nondecreasing, os.str()};
}

Outcome c10_los() {
  const auto cfg = with({"pathloss_exponent=2"});
  const auto pop = zipf(1000, 1.0);
  const auto cache = optimal_caching(0.01, 100.0, pop);
  const FullReuseModel fr(cfg, pop, cache);
  McScenario sc;
  sc.boundary = Boundary::torus;
  sc.truncate_interference = true;
  std::vector<McPoint> pts;
  for (double p : kPowers) pts.push_back({Scheme::full_reuse, p, 0.01});
  const std::size_t n = drops(2000);
  const auto mc = run_monte_carlo(cfg, pop, cache, sc, pts, n, 4242);
  double worst = 0.0;
  std::ostringstream os;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const double closed = fr.offload_prob_los(make_operating_point(cfg, pts[k].tx_power, 0.01));
    const double d = std::abs(closed - mc[k].metrics.at("probability").mean);
    worst = std::max(worst, d);
    os << " " << pts[k].tx_power * 1e3 << "mW " << fmt("%.3f", closed) << "/" << fmt("%.3f", mc[k].metrics.at("probability").mean);
  }
  const TdmaModel td(cfg, pop, cache);
  double worst2 = 0.0;
  for (double rho : {0.001, 0.01, 0.1})
    for (double p : kPowers) {
      const auto c = td.context(p, rho);
      worst2 = std::max(worst2, std::abs(td.offload_prob_los(c) - td.offload_prob(c)));
    }
  return {worst <= 0.02 && worst2 <= 1e-8, "alpha=2, " + std::to_string(n) + " drops: closed/MC p1" + os.str() +
                                               "; max gap " + fmt("%.4f", worst) + "; p2 closed vs quadrature " +
                                               fmt("%.1e", worst2)};
}

Outcome c11_multi_request() {
  const auto base = default_config();
  const auto pop = zipf(1000, 1.0);
  const std::vector<double> rc_grid{25, 50, 75, 100, 150, 200, 250, 300, 350, 400};
  const std::vector<double> rhos{0.001, 0.003, 0.01, 0.03, 0.1, 0.3, 1.0};
  McScenario sc;
  sc.requests_per_user = 10;
  const std::size_t n = drops(1000);
  double best = -1.0, at_one = 0.0, hw_one = 0.0;
  std::ostringstream os;
  for (double rho : rhos) {
    auto cfg = base;
    cfg.battery_fraction = rho;
    cfg.collab_distance = optimal_collab_distance(cfg, Scheme::tdma, rc_grid);
    const auto cache = optimal_caching(cfg.user_density, cfg.collab_distance, pop);
    const double p = optimal_power(cfg, pop, cache, Scheme::tdma, rho).p_star;
    const auto res = run_monte_carlo(cfg, pop, cache, sc, {{Scheme::tdma, p, rho}}, n, 77);
    const auto est = res[0].metrics.at("ratio");
    os << " rho=" << rho << "(r_c=" << cfg.collab_distance << "): " << fmt("%.4f", est.mean);
    if (rho <= 0.3) best = std::max(best, est.mean);
    if (rho == 1.0) {
      at_one = est.mean;
      hw_one = est.half_width_95;
    }
  }
  return {at_one - best <= hw_one, "N_r=10, TDMA, " + std::to_string(n) + " drops;" + os.str() +
                                        "; ratio(rho=1) - best(rho<=0.3) = " + fmt("%.4f", at_one - best) +
                                        ", half-width " + fmt("%.4f", hw_one)};
}

std::set<int> parse_set(const std::string& s) {
  std::set<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.insert(std::stoi(tok));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only, expected;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if ((a == "--only" || a == "--expect-fail" || a == "--drops-scale") && i + 1 < argc) {
      const std::string v = argv[++i];
      if (a == "--only") only = parse_set(v);
      if (a == "--expect-fail") expected = parse_set(v);
      if (a == "--drops-scale") g_drops_scale = std::stod(v);
    } else {
      std::fprintf(stderr, "usage: %s [--only 1,2] [--expect-fail 9,10] [--drops-scale x]\n", argv[0]);
      return 2;
    }
  }

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"caching optimality oracle", c1_caching_oracle},
      {"caching limits", c2_caching_limits},
      {"special functions", c3_special_functions},
      {"analytic vs Monte Carlo overlap", c4_overlap},
      {"ordering p <= pa <= p_o", c5_ordering},
      {"large-rho limits", c6_limits},
      {"energy bound", c7_energy_bound},
      {"TDMA power optimization", c8_power},
      {"shape of pa vs P_t", c9_shape},
      {"line-of-sight closed forms", c10_los},
      {"multi-request battery effect", c11_multi_request},
  };

  std::set<int> failed;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) failed.insert(id);
    const char* tag = o.pass ? "PASS" : (expected.count(id) ? "FAIL (expected)" : "FAIL");
    std::printf("[%s] criterion %d, %s: %s [%.1f s]\n", tag, id, criteria[k].first.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::set<int> expected_run;
  for (int id : expected)
    if (only.empty() || only.count(id)) expected_run.insert(id);
  std::printf("%zu failed", failed.size());
  if (!expected_run.empty()) std::printf(", %zu expected to fail", expected_run.size());
  std::printf("\n");
  return failed == expected_run ? 0 : 1;
}
