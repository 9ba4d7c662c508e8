#include "d2d/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "d2d/tdma.hpp"
#include "json.hpp"

namespace d2d {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

SystemConfig with_overrides(const SystemConfig& cfg, const ParameterMap& overrides) {
  if (overrides.empty()) return cfg;
  ParameterMap raw = serialize(cfg);
  for (const auto& [key, value] : overrides) apply_override(raw, key + "=" + value);
  return validate(raw);
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string_view to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::tx_power:
      return "P_t";
    case SweepVariable::collab_distance:
      return "r_c";
    case SweepVariable::battery_fraction:
      return "rho";
    case SweepVariable::zipf_exponent:
      return "beta";
    case SweepVariable::file_size:
      return "F";
    case SweepVariable::idle_power:
      return "P_cI";
    case SweepVariable::requests:
      return "N_r";
  }
  return "unknown";
}

SweepVariable parse_sweep_variable(std::string_view name) {
  for (auto v : {SweepVariable::tx_power, SweepVariable::collab_distance, SweepVariable::battery_fraction,
                 SweepVariable::zipf_exponent, SweepVariable::file_size, SweepVariable::idle_power,
                 SweepVariable::requests})
    if (name == to_string(v)) return v;
  throw std::invalid_argument("unknown sweep variable '" + std::string(name) + "' (P_t, r_c, rho, beta, F, P_cI, N_r)");
}

std::vector<double> make_grid(double lo, double hi, std::size_t n, bool log_spaced) {
  if (n == 0) throw std::invalid_argument("grid needs at least one point");
  if (log_spaced && !(lo > 0.0 && hi > 0.0)) throw std::invalid_argument("log grid needs positive bounds");
  if (n == 1) return {lo};
  std::vector<double> g(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(n - 1);
    g[k] = log_spaced ? std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo))) : lo + t * (hi - lo);
  }
  g.back() = hi;
  return g;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string Table::to_csv() const {
  std::ostringstream os;
  for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << csv_escape(columns[c]);
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << csv_escape(row[c]);
    os << '\n';
  }
  return os.str();
}

std::string Table::to_json() const {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    nlohmann::ordered_json obj;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const std::string& cell = c < row.size() ? row[c] : std::string();
      if (cell.empty()) {
        obj[columns[c]] = nullptr;
        continue;
      }
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end && *end == '\0')
        obj[columns[c]] = v;
      else
        obj[columns[c]] = cell;
    }
    arr.push_back(std::move(obj));
  }
  return arr.dump(2) + "\n";
}

AnalyticMetrics analytic_metrics(const SystemConfig& cfg, const Popularity& pop, const CachingDistribution& cache,
                                 Scheme scheme, double tx_power, double battery_fraction) {
  if (scheme == Scheme::full_reuse) {
    const FullReuseModel model(cfg, pop, cache);
    return model.evaluate(make_operating_point(cfg, tx_power, battery_fraction));
  }
  const TdmaModel model(cfg, pop, cache);
  return model.evaluate(model.context(tx_power, battery_fraction));
}

PowerResult optimal_power(const SystemConfig& cfg, const Popularity& pop, const CachingDistribution& cache,
                          Scheme scheme, double battery_fraction) {
  if (scheme == Scheme::full_reuse) {
    const FullReuseModel model(cfg, pop, cache);
    return model.line_of_sight() ? optimize_power_los_cubic(model, battery_fraction)
                                 : optimize_power_full_reuse(model, battery_fraction);
  }
  return optimize_power_tdma(TdmaModel(cfg, pop, cache), battery_fraction);
}

CachingDistribution make_cache(const SystemConfig& cfg, const Popularity& pop, CachePolicy policy) {
  if (policy == CachePolicy::optimal) return optimal_caching(cfg.user_density, cfg.collab_distance, pop);
  return baseline_caching(policy, pop);
}

double optimal_collab_distance(const SystemConfig& cfg, Scheme scheme, const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("empty r_c grid");
  double best_rc = grid.front();
  double best = -1.0;
  for (double rc : grid) {
    SystemConfig c = cfg;
    c.collab_distance = rc;
    const Popularity pop = zipf(c.catalog_size, c.zipf_exponent);
    const CachingDistribution cache = make_cache(c, pop, CachePolicy::optimal);
    const PowerResult p = optimal_power(c, pop, cache, scheme, c.battery_fraction);
    const double ratio = analytic_metrics(c, pop, cache, scheme, p.p_star, c.battery_fraction).ratio;
    if (ratio > best) {
      best = ratio;
      best_rc = rc;
    }
  }
  return best_rc;
}

std::vector<std::string> sweep_columns(SweepOutput output) {
  if (output == SweepOutput::distribution) return {"sweep", "variable", "value", "index", "p_r", "p_c"};
  return {"sweep",    "variable", "value",   "scheme", "policy",  "cache_slots", "P_t_mW", "rho",     "r_c",
          "P_cI_mW",  "beta",     "F_MB",    "N_r",    "p_o",     "p",           "pa",     "E_bar",   "e",
          "power_method", "clamped", "mc_p_o", "mc_p_o_hw", "mc_p", "mc_p_hw",   "mc_pa",  "mc_pa_hw", "mc_e",
          "mc_e_hw",  "mc_drops"};
}

Table run_sweep(const SystemConfig& base, const SweepSpec& spec, std::uint64_t seed) {
  if (spec.grid.empty()) throw std::invalid_argument("sweep grid is empty");
  if (spec.schemes.empty() || spec.policies.empty() || spec.cache_slots.empty())
    throw std::invalid_argument("sweep needs at least one scheme, policy and cache size");
  const SystemConfig fixed = with_overrides(base, spec.fixed);
  Table table;
  table.columns = sweep_columns(spec.output);

  auto run_point = [&](std::size_t g) {
    std::vector<std::vector<std::string>> rows;
    const double value = spec.grid[g];
    SystemConfig cfg = fixed;
    McScenario scenario = spec.scenario;
    double tx_power = spec.tx_power > 0.0 ? spec.tx_power : cfg.max_tx_power;
    switch (spec.variable) {
      case SweepVariable::tx_power:
        tx_power = value * 1e-3;
        break;
      case SweepVariable::collab_distance:
        cfg.collab_distance = value;
        break;
      case SweepVariable::battery_fraction:
        cfg.battery_fraction = value;
        break;
      case SweepVariable::zipf_exponent:
        cfg.zipf_exponent = value;
        break;
      case SweepVariable::file_size:
        cfg.file_size = value * 8e6;
        break;
      case SweepVariable::idle_power:
        cfg.idle_power = value * 1e-3;
        break;
      case SweepVariable::requests:
        if (!(value >= 1.0) || value != std::floor(value)) throw std::invalid_argument("N_r must be a positive integer");
        scenario.requests_per_user = static_cast<std::size_t>(value);
        break;
    }
    if (!(tx_power > 0.0) || tx_power > cfg.max_tx_power * (1.0 + 1e-12))
      throw std::invalid_argument("P_t must lie in (0, P_max]");
    cfg = validate(serialize(cfg));
    const Popularity pop = zipf(cfg.catalog_size, cfg.zipf_exponent);
    const std::string var = std::string(to_string(spec.variable));

    if (spec.output == SweepOutput::distribution) {
      const CachingDistribution cache = make_cache(cfg, pop, spec.policies.front());
      for (std::size_t i = 0; i < pop.size(); ++i)
        rows.push_back({spec.name, var, format_number(value), std::to_string(i + 1), format_number(pop.pmf[i]),
                              format_number(cache.pmf[i])});
      return rows;
    }

    for (CachePolicy policy : spec.policies) {
      for (std::size_t slots : spec.cache_slots) {
        for (Scheme scheme : spec.schemes) {
          SystemConfig point_cfg = cfg;
          point_cfg.cache_slots = slots;
          if (spec.optimize_collab_distance) {
            point_cfg.collab_distance = optimal_collab_distance(point_cfg, scheme, spec.collab_grid);
          }
          const CachingDistribution cache = make_cache(point_cfg, pop, policy);
          double p_t = tx_power;
          std::string method = "fixed";
          double clamped = kNaN;
          if (spec.optimize_power && spec.variable != SweepVariable::tx_power) {
            SystemConfig single = point_cfg;
            single.cache_slots = 1;
            const PowerResult pr = optimal_power(single, pop, cache, scheme, point_cfg.battery_fraction);
            p_t = pr.p_star;
            method = std::string(to_string(pr.method));
            clamped = pr.clamped ? 1.0 : 0.0;
          }
          AnalyticMetrics am{kNaN, kNaN, kNaN, kNaN, kNaN, kNaN};
          if (spec.analytic && slots == 1) am = analytic_metrics(point_cfg, pop, cache, scheme, p_t, point_cfg.battery_fraction);
          McEstimate po, pp, pa, pe;
          double drops = kNaN;
          if (spec.monte_carlo) {
            const auto res = run_monte_carlo(point_cfg, pop, cache, scenario,
                                             {{scheme, p_t, point_cfg.battery_fraction}}, spec.drops, seed + g);
            po = res[0].metrics.at("opportunity");
            pp = res[0].metrics.at("probability");
            pa = res[0].metrics.at("ratio");
            pe = res[0].metrics.at("energy_cost");
            drops = static_cast<double>(spec.drops);
          }
          auto mc = [&](const McEstimate& e, bool hw) {
            return spec.monte_carlo ? format_number(hw ? e.half_width_95 : e.mean) : std::string();
          };
          rows.push_back({spec.name,
                                var,
                                format_number(value),
                                std::string(to_string(scheme)),
                                std::string(to_string(policy)),
                                std::to_string(slots),
                                format_number(p_t * 1e3),
                                format_number(point_cfg.battery_fraction),
                                format_number(point_cfg.collab_distance),
                                format_number(point_cfg.idle_power * 1e3),
                                format_number(point_cfg.zipf_exponent),
                                format_number(point_cfg.file_size / 8e6),
                                std::to_string(scenario.requests_per_user),
                                format_number(am.opportunity),
                                format_number(am.probability),
                                format_number(am.ratio),
                                format_number(am.energy_average),
                                format_number(am.energy_cost),
                                method,
                                format_number(clamped),
                                mc(po, false),
                                mc(po, true),
                                mc(pp, false),
                                mc(pp, true),
                                mc(pa, false),
                                mc(pa, true),
                                mc(pe, false),
                                mc(pe, true),
                                format_number(drops)});
        }
      }
    }
    return rows;
  };

  // Analytic points are independent; Monte Carlo points already use every core.
  std::vector<std::vector<std::vector<std::string>>> per_point(spec.grid.size());
  if (spec.monte_carlo) {
    for (std::size_t g = 0; g < spec.grid.size(); ++g) per_point[g] = run_point(g);
  } else {
    std::vector<std::future<std::vector<std::vector<std::string>>>> jobs;
    for (std::size_t g = 0; g < spec.grid.size(); ++g) jobs.push_back(std::async(std::launch::async, run_point, g));
    for (std::size_t g = 0; g < jobs.size(); ++g) per_point[g] = jobs[g].get();
  }
  for (auto& rows : per_point)
    for (auto& r : rows) table.rows.push_back(std::move(r));
  return table;
}

std::vector<SweepSpec> figure_preset(std::string_view name, bool full) {
  const std::size_t drops = full ? 2000 : 100;
  const std::vector<double> power_grid{1, 10, 25, 50, 75, 100, 125, 150, 175, 200};
  std::vector<SweepSpec> out;

  if (name == "fig2a") {
    // Optimal caching distribution for different r_c, beta and lambda.
    SweepSpec s;
    s.output = SweepOutput::distribution;
    s.analytic = true;
    s.name = "fig2a-rc";
    s.variable = SweepVariable::collab_distance;
    s.grid = {20, 100, 500};
    out.push_back(s);
    s.name = "fig2a-beta";
    s.variable = SweepVariable::zipf_exponent;
    s.grid = {0.5, 1.0, 1.5};
    out.push_back(s);
    for (const char* density : {"0.005", "0.02"}) {
      SweepSpec d = s;
      d.name = std::string("fig2a-lambda-") + density;
      d.variable = SweepVariable::collab_distance;
      d.grid = {100};
      d.fixed["user_density"] = density;
      out.push_back(d);
    }
  } else if (name == "fig2b") {
    // Simulated offloading opportunity vs r_c for several policies and cache sizes.
    SweepSpec s;
    s.name = "fig2b";
    s.variable = SweepVariable::collab_distance;
    s.grid = {10, 25, 50, 75, 100, 150, 200, 250, 300, 350, 400};
    s.schemes = {Scheme::tdma};
    s.policies = {CachePolicy::optimal, CachePolicy::popularity, CachePolicy::uniform};
    s.cache_slots = {1, 2, 3};
    s.analytic = false;
    s.monte_carlo = true;
    s.drops = full ? 1000 : 20;
    out.push_back(s);
  } else if (name == "fig3") {
    SweepSpec s;
    s.name = "fig3";
    s.variable = SweepVariable::tx_power;
    s.grid = power_grid;
    s.monte_carlo = true;
    s.drops = drops;
    s.fixed = {{"collab_distance_m", "100"}, {"battery_fraction", "0.01"}};
    out.push_back(s);
  } else if (name == "fig4") {
    // Special channels: alpha = 2 with interference beyond r_max ignored, and alpha = 4.
    SweepSpec s;
    s.variable = SweepVariable::tx_power;
    s.grid = power_grid;
    s.monte_carlo = true;
    s.drops = drops;
    s.name = "fig4-alpha2";
    s.fixed = {{"pathloss_exponent", "2"}, {"battery_fraction", "0.01"}};
    s.scenario.truncate_interference = true;
    out.push_back(s);
    s.name = "fig4-alpha4";
    s.fixed = {{"pathloss_exponent", "4"}, {"battery_fraction", "0.01"}};
    s.scenario.truncate_interference = false;
    out.push_back(s);
  } else if (name == "fig5") {
    // File size from 30 MB to 3 GB with the optimal power.
    for (const char* rho : {"0.01", "0.1"}) {
      SweepSpec s;
      s.name = std::string("fig5-rho-") + rho;
      s.variable = SweepVariable::file_size;
      s.grid = make_grid(30, 3000, 12, true);
      s.optimize_power = true;
      s.fixed = {{"battery_fraction", rho}};
      out.push_back(s);
    }
  } else if (name == "fig6") {
    // Idle power of a muting DT under TDMA.
    for (const char* rho : {"0.01", "0.3"}) {
      SweepSpec s;
      s.name = std::string("fig6-rho-") + rho;
      s.variable = SweepVariable::idle_power;
      s.grid = {0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
      s.optimize_power = true;
      s.fixed = {{"battery_fraction", rho}};
      out.push_back(s);
    }
  } else if (name == "fig7") {
    // Zipf exponent with and without self offloading (simulated).
    SweepSpec s;
    s.variable = SweepVariable::zipf_exponent;
    s.grid = {0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6};
    s.optimize_power = true;
    s.monte_carlo = true;
    s.drops = full ? 1000 : 50;
    s.fixed = {{"battery_fraction", "0.01"}};
    s.name = "fig7";
    out.push_back(s);
    s.name = "fig7-self";
    s.scenario.self_offload = true;
    out.push_back(s);
  } else if (name == "fig8a") {
    // Offloading ratio vs energy cost traced by r_c from 10 m to 400 m.
    for (const char* rho : {"0.1", "0.3"}) {
      SweepSpec s;
      s.name = std::string("fig8a-rho-") + rho;
      s.variable = SweepVariable::collab_distance;
      s.grid = {10, 25, 50, 80, 100, 150, 200, 250, 300, 350, 400};
      s.policies = {CachePolicy::optimal, CachePolicy::popularity};
      s.optimize_power = true;
      s.monte_carlo = true;
      s.drops = full ? 1000 : 20;
      s.fixed = {{"battery_fraction", rho}};
      out.push_back(s);
    }
  } else if (name == "fig8b") {
    // rho from 0 to 1 at the optimal r_c, each user sending N_r requests.
    for (std::size_t nr : {1, 5, 10}) {
      SweepSpec s;
      s.name = "fig8b-nr-" + std::to_string(nr);
      s.variable = SweepVariable::battery_fraction;
      s.grid = {0.001, 0.003, 0.01, 0.03, 0.1, 0.3, 0.6, 1.0};
      s.schemes = {Scheme::tdma, Scheme::full_reuse};
      s.optimize_power = true;
      s.optimize_collab_distance = true;
      s.collab_grid = {25, 50, 75, 100, 150, 200, 250, 300, 350, 400};
      s.analytic = nr == 1;
      s.monte_carlo = true;
      s.drops = full ? 1000 : 20;
      s.scenario.requests_per_user = nr;
      out.push_back(s);
    }
  } else {
    throw std::invalid_argument("unknown figure preset '" + std::string(name) + "'");
  }
  return out;
}

bool CompareReport::pass() const {
  return !rows.empty() && std::all_of(rows.begin(), rows.end(), [](const CompareRow& r) { return r.pass; });
}

Table CompareReport::to_table() const {
  Table t;
  t.columns = {"metric", "scheme", "P_t_mW", "rho", "analytic", "mc", "half_width", "diff", "tolerance", "pass"};
  for (const auto& r : rows)
    t.rows.push_back({r.metric, std::string(to_string(r.scheme)), format_number(r.tx_power * 1e3),
                      format_number(r.battery_fraction), format_number(r.analytic), format_number(r.mc),
                      format_number(r.half_width), format_number(r.diff), format_number(r.tolerance),
                      r.pass ? "1" : "0"});
  return t;
}

std::string CompareReport::to_json() const {
  nlohmann::ordered_json j;
  j["status"] = rows.empty() ? "empty" : (pass() ? "pass" : "fail");
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    j["rows"].push_back({{"metric", r.metric},
                         {"scheme", std::string(to_string(r.scheme))},
                         {"P_t_mW", r.tx_power * 1e3},
                         {"rho", r.battery_fraction},
                         {"analytic", r.analytic},
                         {"mc", r.mc},
                         {"half_width", r.half_width},
                         {"diff", r.diff},
                         {"tolerance", r.tolerance},
                         {"pass", r.pass}});
  }
  return j.dump(2) + "\n";
}

CompareReport compare_report(const SystemConfig& cfg, const CompareOptions& options, std::uint64_t seed) {
  CompareReport report;
  if (options.tx_powers.empty() || options.schemes.empty()) return report;
  const std::vector<double> rhos =
      options.battery_fractions.empty() ? std::vector<double>{cfg.battery_fraction} : options.battery_fractions;
  const SystemConfig analytic_cfg = with_overrides(cfg, options.analytic_overrides);
  const Popularity pop = zipf(cfg.catalog_size, cfg.zipf_exponent);
  const CachingDistribution cache = make_cache(cfg, pop, options.policy);
  const Popularity a_pop = zipf(analytic_cfg.catalog_size, analytic_cfg.zipf_exponent);
  const CachingDistribution a_cache = make_cache(analytic_cfg, a_pop, options.policy);

  std::vector<McPoint> points;
  for (Scheme s : options.schemes)
    for (double rho : rhos)
      for (double p : options.tx_powers) points.push_back({s, p, rho});
  const auto mc = run_monte_carlo(cfg, pop, cache, options.scenario, points, options.drops, seed);

  for (std::size_t k = 0; k < points.size(); ++k) {
    const McPoint& pt = points[k];
    const AnalyticMetrics am =
        analytic_metrics(analytic_cfg, a_pop, a_cache, pt.scheme, pt.tx_power, pt.battery_fraction);
    auto add = [&](const char* metric, double analytic, const McEstimate& e, bool relative) {
      CompareRow r;
      r.metric = metric;
      r.scheme = pt.scheme;
      r.tx_power = pt.tx_power;
      r.battery_fraction = pt.battery_fraction;
      r.analytic = analytic;
      r.mc = e.mean;
      r.half_width = e.half_width_95;
      r.diff = e.mean - analytic;
      if (relative) {
        r.tolerance = options.energy_rel_tolerance * std::abs(analytic);
      } else {
        r.tolerance = std::max(options.abs_tolerance, 3.0 * e.half_width_95);
      }
      r.pass = std::abs(r.diff) <= r.tolerance;
      report.rows.push_back(r);
    };
    add("p_o", am.opportunity, mc[k].metrics.at("opportunity"), false);
    add("p", am.probability, mc[k].metrics.at("probability"), false);
    add("pa", am.ratio, mc[k].metrics.at("ratio"), false);
    add("e", am.energy_cost, mc[k].metrics.at("energy_cost"), true);
  }
  return report;
}

}  // namespace d2d
