// d2dsim: command line front end for the D2D offloading model and simulator.
#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "d2d/config.hpp"
#include "d2d/experiments.hpp"
#include "d2d/montecarlo.hpp"
#include "d2d/popularity.hpp"
#include "d2d/power.hpp"
#include "d2d/tdma.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitTolerance = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

struct Globals {
  std::string config_path;
  std::vector<std::string> sets;
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "csv";
};

struct ScenarioFlags {
  bool self_offload = false;
  bool truncate = false;
  bool realistic = false;
  std::size_t requests = 1;
  std::string boundary = "plain";
  std::string conflict = "shared";
  std::string depletion = "battery";

  void add_to(CLI::App* app) {
    app->add_flag("--self-offload", self_offload, "Serve requests from the requester's own cache");
    app->add_flag("--truncate", truncate, "Only DTs within the truncation radius interfere");
    app->add_flag("--realistic", realistic, "DTs stop interfering once their transfer ends");
    app->add_option("--requests", requests, "Requests per user (N_r)")->check(CLI::PositiveNumber);
    app->add_option("--boundary", boundary, "Cell boundary")->check(CLI::IsMember({"plain", "torus"}));
    app->add_option("--conflict", conflict, "Helper conflict rule")->check(CLI::IsMember({"shared", "exclusive"}));
    app->add_option("--depletion", depletion, "Multi-request battery rule")
        ->check(CLI::IsMember({"battery", "budget"}));
  }

  [[nodiscard]] d2d::McScenario scenario() const {
    d2d::McScenario s;
    s.self_offload = self_offload;
    s.truncate_interference = truncate;
    s.realistic_interference = realistic;
    s.requests_per_user = requests;
    s.boundary = d2d::parse_boundary(boundary);
    s.conflict = d2d::parse_conflict_policy(conflict);
    s.depletion = d2d::parse_depletion_rule(depletion);
    return s;
  }
};

d2d::SystemConfig load_config(const Globals& g) {
  d2d::ParameterMap raw = g.config_path.empty() ? d2d::default_parameters() : d2d::load_config_file(g.config_path);
  for (const auto& s : g.sets) d2d::apply_override(raw, s);
  return d2d::validate(raw);
}

void emit(const Globals& g, const std::string& text) {
  if (g.out.empty() || g.out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(g.out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + g.out + "' for writing");
  f << text;
  if (!f) throw std::runtime_error("write to '" + g.out + "' failed");
}

void emit_table(const Globals& g, const d2d::Table& t) { emit(g, g.format == "json" ? t.to_json() : t.to_csv()); }

std::vector<d2d::Scheme> schemes_from(const std::string& name) {
  if (name == "both") return {d2d::Scheme::full_reuse, d2d::Scheme::tdma};
  return {d2d::parse_scheme(name)};
}

std::vector<double> mw_to_w(const std::vector<double>& mw) {
  std::vector<double> w;
  for (double v : mw) w.push_back(v * 1e-3);
  return w;
}

// Comma separated numbers; empty tokens are skipped so "" is an empty list.
std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const std::string tok = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (tok.find_first_not_of(" \t") != std::string::npos) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        throw std::invalid_argument("not a number: '" + tok + "'");
      }
      if (tok.find_first_not_of(" \t", used) != std::string::npos)
        throw std::invalid_argument("not a number: '" + tok + "'");
      out.push_back(v);
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

using d2d::format_number;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"D2D caching and battery-limited offloading: analysis, optimization and Monte Carlo"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  Globals g;
  app.add_option("--config", g.config_path, "Parameter file (key = value)")->check(CLI::ExistingFile);
  app.add_option("--set", g.sets, "Override, key=value (repeatable)")->take_all();
  app.add_option("--seed", g.seed, "Base random seed");
  app.add_option("--out", g.out, "Output file (default stdout)");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"csv", "json"}));

  // solve-caching
  auto* cmd_cache = app.add_subcommand("solve-caching", "Caching distribution for a placement policy");
  std::string cache_policy = "optimal";
  cmd_cache->add_option("--policy", cache_policy)->check(CLI::IsMember({"optimal", "uniform", "popularity"}));

  // analytic
  auto* cmd_an = app.add_subcommand("analytic", "Analytic metrics for one scheme");
  std::string an_scheme;
  std::vector<double> an_power_mw, an_rho;
  std::string an_policy = "optimal";
  cmd_an->add_option("--scheme", an_scheme)->required()->check(CLI::IsMember({"full-reuse", "tdma"}));
  cmd_an->add_option("--tx-power-mw", an_power_mw, "Transmit powers in mW (default P_max)")->delimiter(',');
  cmd_an->add_option("--rho", an_rho, "Battery fractions (default from config)")->delimiter(',');
  cmd_an->add_option("--policy", an_policy)->check(CLI::IsMember({"optimal", "uniform", "popularity"}));

  // mc
  auto* cmd_mc = app.add_subcommand("mc", "Monte Carlo estimates for one scheme");
  std::string mc_scheme;
  std::vector<double> mc_power_mw, mc_rho;
  std::string mc_policy = "optimal";
  std::size_t mc_drops = 200;
  std::size_t mc_slots = 0;
  unsigned mc_threads = 0;
  ScenarioFlags mc_flags;
  cmd_mc->add_option("--scheme", mc_scheme)->required()->check(CLI::IsMember({"full-reuse", "tdma"}));
  cmd_mc->add_option("--tx-power-mw", mc_power_mw)->delimiter(',');
  cmd_mc->add_option("--rho", mc_rho)->delimiter(',');
  cmd_mc->add_option("--policy", mc_policy)->check(CLI::IsMember({"optimal", "uniform", "popularity"}));
  cmd_mc->add_option("--drops", mc_drops)->check(CLI::PositiveNumber);
  cmd_mc->add_option("--cache-slots", mc_slots, "Files cached per user (M)")->check(CLI::PositiveNumber);
  cmd_mc->add_option("--threads", mc_threads, "Worker threads (0 = all cores)");
  mc_flags.add_to(cmd_mc);

  // optimize-power
  auto* cmd_opt = app.add_subcommand("optimize-power", "Energy-aware optimal transmit power");
  std::string opt_scheme;
  std::vector<double> opt_rho;
  bool opt_check = false;
  cmd_opt->add_option("--scheme", opt_scheme)->required()->check(CLI::IsMember({"full-reuse", "tdma"}));
  cmd_opt->add_option("--rho", opt_rho)->delimiter(',');
  cmd_opt->add_flag("--search", opt_check, "TDMA: use the numerical search instead of the closed form");

  // sweep
  auto* cmd_sw = app.add_subcommand("sweep", "Sweep one parameter");
  std::string sw_var;
  std::string sw_grid;
  std::vector<double> sw_range;
  bool sw_log = false;
  std::string sw_scheme = "both";
  std::vector<std::string> sw_policies{"optimal"};
  std::vector<std::size_t> sw_slots{1};
  bool sw_mc = false, sw_no_analytic = false, sw_opt_power = false;
  double sw_power_mw = 0.0;
  std::size_t sw_drops = 200;
  ScenarioFlags sw_flags;
  cmd_sw->add_option("--variable", sw_var, "P_t, r_c, rho, beta, F, P_cI or N_r")
      ->required()
      ->check(CLI::IsMember({"P_t", "r_c", "rho", "beta", "F", "P_cI", "N_r"}));
  auto* grid_opt = cmd_sw->add_option("--grid", sw_grid, "Explicit grid values, comma separated");
  auto* range_opt = cmd_sw->add_option("--range", sw_range, "lo,hi,n")->delimiter(',')->expected(3);
  grid_opt->excludes(range_opt);
  cmd_sw->add_flag("--log", sw_log, "Log-spaced --range");
  cmd_sw->add_option("--scheme", sw_scheme)->check(CLI::IsMember({"full-reuse", "tdma", "both"}));
  cmd_sw->add_option("--policy", sw_policies)->delimiter(',')->check(CLI::IsMember({"optimal", "uniform", "popularity"}));
  cmd_sw->add_option("--cache-slots", sw_slots)->delimiter(',')->check(CLI::PositiveNumber);
  cmd_sw->add_flag("--mc", sw_mc, "Add Monte Carlo estimates");
  cmd_sw->add_flag("--no-analytic", sw_no_analytic, "Skip the analytic columns");
  cmd_sw->add_flag("--optimize-power", sw_opt_power, "Use the optimal P_t at every point");
  cmd_sw->add_option("--tx-power-mw", sw_power_mw, "Fixed P_t when not swept (default P_max)");
  cmd_sw->add_option("--drops", sw_drops)->check(CLI::PositiveNumber);
  sw_flags.add_to(cmd_sw);

  // figure
  auto* cmd_fig = app.add_subcommand("figure", "Run a figure preset");
  std::string fig_name;
  bool fig_full = false, fig_list = false;
  cmd_fig->add_option("name", fig_name, "Preset name");
  cmd_fig->add_flag("--full", fig_full, "Full-scale drop counts");
  cmd_fig->add_flag("--list", fig_list, "List presets");

  // compare
  auto* cmd_cmp = app.add_subcommand("compare", "Analytic vs Monte Carlo report; exit 1 on tolerance failure");
  std::string cmp_scheme = "both";
  std::string cmp_power_mw = "1,10,50,100,200";
  std::vector<double> cmp_rho;
  std::string cmp_policy = "optimal";
  std::size_t cmp_drops = 200;
  double cmp_tol = 0.02, cmp_energy_tol = 0.10;
  std::vector<std::string> cmp_analytic_sets;
  ScenarioFlags cmp_flags;
  cmd_cmp->add_option("--scheme", cmp_scheme)->check(CLI::IsMember({"full-reuse", "tdma", "both"}));
  cmd_cmp->add_option("--tx-power-mw", cmp_power_mw, "Powers in mW, comma separated (\"\" gives an empty report)");
  cmd_cmp->add_option("--rho", cmp_rho)->delimiter(',');
  cmd_cmp->add_option("--policy", cmp_policy)->check(CLI::IsMember({"optimal", "uniform", "popularity"}));
  cmd_cmp->add_option("--drops", cmp_drops)->check(CLI::PositiveNumber);
  cmd_cmp->add_option("--tolerance", cmp_tol, "Absolute tolerance for probabilities");
  cmd_cmp->add_option("--energy-tolerance", cmp_energy_tol, "Relative tolerance for energy cost");
  cmd_cmp->add_option("--analytic-set", cmp_analytic_sets, "Override applied to the analytic side only")->take_all();
  cmp_flags.add_to(cmd_cmp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  d2d::SystemConfig cfg;
  try {
    cfg = load_config(g);
  } catch (const std::exception& e) {
    std::cerr << "d2dsim: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*cmd_cache) {
      const auto pop = d2d::zipf(cfg.catalog_size, cfg.zipf_exponent);
      const auto cache = d2d::make_cache(cfg, pop, d2d::parse_cache_policy(cache_policy));
      d2d::Table t;
      t.columns = {"index", "p_r", "p_c"};
      for (std::size_t i = 0; i < pop.size(); ++i)
        t.rows.push_back({std::to_string(i + 1), format_number(pop.pmf[i]), format_number(cache.pmf[i])});
      emit_table(g, t);
      return kExitPass;
    }

    if (*cmd_an) {
      const auto scheme = d2d::parse_scheme(an_scheme);
      if (cfg.cache_slots != 1) throw std::invalid_argument("the analysis covers cache_slots = 1 only");
      const auto pop = d2d::zipf(cfg.catalog_size, cfg.zipf_exponent);
      const auto cache = d2d::make_cache(cfg, pop, d2d::parse_cache_policy(an_policy));
      const auto powers = an_power_mw.empty() ? std::vector<double>{cfg.max_tx_power} : mw_to_w(an_power_mw);
      const auto rhos = an_rho.empty() ? std::vector<double>{cfg.battery_fraction} : an_rho;
      const bool fr = scheme == d2d::Scheme::full_reuse;
      d2d::Table t;
      if (fr)
        t.columns = {"P_t_mW", "rho", "r_c", "p_o", "p1", "p1a", "E1_bar_J", "e1"};
      else
        t.columns = {"P_t_mW", "rho", "r_c", "P_cI_mW", "p_o", "p2", "p2a", "E2_bar_J", "e2"};
      for (double rho : rhos) {
        if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
        for (double p : powers) {
          if (!(p > 0.0) || p > cfg.max_tx_power) throw std::invalid_argument("P_t must lie in (0, P_max]");
          const auto m = d2d::analytic_metrics(cfg, pop, cache, scheme, p, rho);
          std::vector<std::string> row{format_number(p * 1e3), format_number(rho), format_number(cfg.collab_distance)};
          if (!fr) row.push_back(format_number(cfg.idle_power * 1e3));
          for (double v : {m.opportunity, m.probability, m.ratio, m.energy_average, m.energy_cost})
            row.push_back(format_number(v));
          t.rows.push_back(std::move(row));
        }
      }
      emit_table(g, t);
      return kExitPass;
    }

    if (*cmd_mc) {
      const auto scheme = d2d::parse_scheme(mc_scheme);
      if (mc_slots > 0) cfg.cache_slots = mc_slots;
      const auto pop = d2d::zipf(cfg.catalog_size, cfg.zipf_exponent);
      const auto cache = d2d::make_cache(cfg, pop, d2d::parse_cache_policy(mc_policy));
      const auto powers = mc_power_mw.empty() ? std::vector<double>{cfg.max_tx_power} : mw_to_w(mc_power_mw);
      const auto rhos = mc_rho.empty() ? std::vector<double>{cfg.battery_fraction} : mc_rho;
      std::vector<d2d::McPoint> points;
      for (double rho : rhos)
        for (double p : powers) {
          if (!(p > 0.0) || p > cfg.max_tx_power) throw std::invalid_argument("P_t must lie in (0, P_max]");
          if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
          points.push_back({scheme, p, rho});
        }
      const auto res =
          d2d::run_monte_carlo(cfg, pop, cache, mc_flags.scenario(), points, mc_drops, g.seed, mc_threads);
      const bool fr = scheme == d2d::Scheme::full_reuse;
      const std::string k = fr ? "1" : "2";
      d2d::Table t;
      t.columns = {"P_t_mW", "rho", "r_c"};
      if (!fr) t.columns.push_back("P_cI_mW");
      for (const std::string& c : std::vector<std::string>{"p_o", "p_o_hw", "p" + k, "p" + k + "_hw", "p" + k + "a", "p" + k + "a_hw",
                                  "E" + k + "_bar_J", "e" + k, "e" + k + "_hw", "budget_violations", "drops"})
        t.columns.push_back(c);
      for (const auto& r : res) {
        const auto& m = r.metrics;
        std::vector<std::string> row{format_number(r.point.tx_power * 1e3), format_number(r.point.battery_fraction),
                                     format_number(cfg.collab_distance)};
        if (!fr) row.push_back(format_number(cfg.idle_power * 1e3));
        const auto& e = m.at("energy_cost");
        for (double v : {m.at("opportunity").mean, m.at("opportunity").half_width_95, m.at("probability").mean,
                         m.at("probability").half_width_95, m.at("ratio").mean, m.at("ratio").half_width_95,
                         e.mean * cfg.battery_energy(), e.mean, e.half_width_95})
          row.push_back(format_number(v));
        row.push_back(std::to_string(r.budget_violations));
        row.push_back(std::to_string(mc_drops));
        t.rows.push_back(std::move(row));
      }
      emit_table(g, t);
      return kExitPass;
    }

    if (*cmd_opt) {
      const auto scheme = d2d::parse_scheme(opt_scheme);
      const auto pop = d2d::zipf(cfg.catalog_size, cfg.zipf_exponent);
      const auto cache = d2d::make_cache(cfg, pop, d2d::CachePolicy::optimal);
      const auto rhos = opt_rho.empty() ? std::vector<double>{cfg.battery_fraction} : opt_rho;
      d2d::Table t;
      t.columns = {"rho", "r_c", "P_star_mW", "objective", "clamped", "method"};
      for (double rho : rhos) {
        if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
        d2d::PowerResult r;
        if (opt_check && scheme == d2d::Scheme::tdma)
          r = d2d::optimize_power_tdma_search(d2d::TdmaModel(cfg, pop, cache), rho);
        else
          r = d2d::optimal_power(cfg, pop, cache, scheme, rho);
        t.rows.push_back({format_number(rho), format_number(cfg.collab_distance), format_number(r.p_star * 1e3),
                          format_number(r.objective), r.clamped ? "1" : "0", std::string(d2d::to_string(r.method))});
      }
      emit_table(g, t);
      return kExitPass;
    }

    if (*cmd_sw) {
      d2d::SweepSpec spec;
      spec.name = "sweep";
      spec.variable = d2d::parse_sweep_variable(sw_var);
      if (!sw_range.empty()) {
        if (!(sw_range[2] >= 1.0)) throw std::invalid_argument("--range needs n >= 1");
        spec.grid = d2d::make_grid(sw_range[0], sw_range[1], static_cast<std::size_t>(sw_range[2]), sw_log);
      } else {
        spec.grid = parse_list(sw_grid);
      }
      if (spec.grid.empty()) throw std::invalid_argument("empty grid: give --grid or --range");
      spec.schemes = schemes_from(sw_scheme);
      spec.policies.clear();
      for (const auto& p : sw_policies) spec.policies.push_back(d2d::parse_cache_policy(p));
      spec.cache_slots = sw_slots;
      spec.analytic = !sw_no_analytic;
      spec.monte_carlo = sw_mc;
      spec.optimize_power = sw_opt_power;
      spec.tx_power = sw_power_mw * 1e-3;
      spec.drops = sw_drops;
      spec.scenario = sw_flags.scenario();
      emit_table(g, d2d::run_sweep(cfg, spec, g.seed));
      return kExitPass;
    }

    if (*cmd_fig) {
      if (fig_list) {
        std::string s;
        for (auto n : d2d::kFigureNames) s += std::string(n) + "\n";
        emit(g, s);
        return kExitPass;
      }
      if (fig_name.empty()) throw std::invalid_argument("figure needs a preset name (see --list)");
      const auto specs = d2d::figure_preset(fig_name, fig_full);
      d2d::Table all;
      for (const auto& spec : specs) {
        auto t = d2d::run_sweep(cfg, spec, g.seed);
        if (all.columns.empty()) all.columns = t.columns;
        for (auto& r : t.rows) all.rows.push_back(std::move(r));
      }
      emit_table(g, all);
      return kExitPass;
    }

    if (*cmd_cmp) {
      d2d::CompareOptions opt;
      opt.schemes = schemes_from(cmp_scheme);
      opt.tx_powers = mw_to_w(parse_list(cmp_power_mw));
      opt.battery_fractions = cmp_rho;
      opt.policy = d2d::parse_cache_policy(cmp_policy);
      opt.drops = cmp_drops;
      opt.scenario = cmp_flags.scenario();
      opt.abs_tolerance = cmp_tol;
      opt.energy_rel_tolerance = cmp_energy_tol;
      for (const auto& s : cmp_analytic_sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("--analytic-set expects key=value");
        opt.analytic_overrides[s.substr(0, eq)] = s.substr(eq + 1);
      }
      for (double p : opt.tx_powers)
        if (!(p > 0.0) || p > cfg.max_tx_power) throw std::invalid_argument("P_t must lie in (0, P_max]");
      const auto report = d2d::compare_report(cfg, opt, g.seed);
      emit(g, g.format == "json" ? report.to_json() : report.to_table().to_csv());
      if (report.empty()) {
        std::cerr << "d2dsim: empty comparison grid\n";
        return kExitUsage;
      }
      return report.pass() ? kExitPass : kExitTolerance;
    }
  } catch (const d2d::ConfigError& e) {
    std::cerr << "d2dsim: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "d2dsim: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "d2dsim: error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
