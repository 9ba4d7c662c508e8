#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "d2d/config.hpp"
#include "d2d/fullreuse.hpp"
#include "d2d/montecarlo.hpp"
#include "d2d/popularity.hpp"
#include "d2d/power.hpp"

namespace d2d {

/// Swept quantity. Grid values use natural units: P_t and P_cI in mW, F in
/// MBytes, r_c in m, N_r as a count.
enum class SweepVariable { tx_power, collab_distance, battery_fraction, zipf_exponent, file_size, idle_power, requests };
std::string_view to_string(SweepVariable v);
SweepVariable parse_sweep_variable(std::string_view name);

/// metrics: one row per (grid point, policy, slots, scheme).
/// distribution: the caching pmf at every grid point, one row per file.
enum class SweepOutput { metrics, distribution };

struct SweepSpec {
  std::string name = "sweep";
  SweepVariable variable = SweepVariable::tx_power;
  std::vector<double> grid;
  ParameterMap fixed;  // overrides applied before the swept value
  std::vector<Scheme> schemes{Scheme::full_reuse, Scheme::tdma};
  std::vector<CachePolicy> policies{CachePolicy::optimal};
  std::vector<std::size_t> cache_slots{1};
  SweepOutput output = SweepOutput::metrics;
  bool analytic = true;
  bool monte_carlo = false;
  bool optimize_power = false;            // P_t := P* per point and scheme
  bool optimize_collab_distance = false;  // r_c := argmax of the analytic ratio over collab_grid
  std::vector<double> collab_grid;
  double tx_power = 0.0;  // W; 0 means P_max
  std::size_t drops = 200;
  McScenario scenario;
};

/// lo..hi with n points, linear or log spaced.
std::vector<double> make_grid(double lo, double hi, std::size_t n, bool log_spaced);

/// Text table with stable column order; numbers are printed with %.10g and
/// missing values are empty cells.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  [[nodiscard]] std::string to_csv() const;
  [[nodiscard]] std::string to_json() const;
};

std::string format_number(double v);

/// Analytic metrics of one scheme at (P_t, rho); needs cache_slots = 1.
AnalyticMetrics analytic_metrics(const SystemConfig& cfg, const Popularity& pop, const CachingDistribution& cache,
                                 Scheme scheme, double tx_power, double battery_fraction);

/// Optimal P_t for a scheme: golden-section search (full reuse, alpha > 2),
/// the cubic (full reuse, alpha = 2) or the closed form (TDMA).
PowerResult optimal_power(const SystemConfig& cfg, const Popularity& pop, const CachingDistribution& cache,
                          Scheme scheme, double battery_fraction);

/// Cache for a policy at the configured r_c.
CachingDistribution make_cache(const SystemConfig& cfg, const Popularity& pop, CachePolicy policy);

/// r_c in grid that maximizes the analytic offloading ratio with optimal
/// caching and optimal power.
double optimal_collab_distance(const SystemConfig& cfg, Scheme scheme, const std::vector<double>& grid);

/// Columns of the metrics table.
std::vector<std::string> sweep_columns(SweepOutput output);

Table run_sweep(const SystemConfig& cfg, const SweepSpec& spec, std::uint64_t seed);

inline constexpr std::string_view kFigureNames[] = {"fig2a", "fig2b", "fig3", "fig4", "fig5",
                                                    "fig6",  "fig7",  "fig8a", "fig8b"};

/// Sweep specs reproducing one figure's axes. `full` raises the Monte Carlo
/// drop counts from desk scale to full scale.
std::vector<SweepSpec> figure_preset(std::string_view name, bool full = false);

struct CompareOptions {
  std::vector<Scheme> schemes{Scheme::full_reuse, Scheme::tdma};
  std::vector<double> tx_powers;       // W
  std::vector<double> battery_fractions;  // empty: use cfg.battery_fraction
  CachePolicy policy = CachePolicy::optimal;
  std::size_t drops = 200;
  McScenario scenario;
  ParameterMap analytic_overrides;  // applied to the analytic side only
  double abs_tolerance = 0.02;
  double energy_rel_tolerance = 0.10;
};

struct CompareRow {
  std::string metric;  // p_o, p, pa, e
  Scheme scheme = Scheme::full_reuse;
  double tx_power = 0.0;
  double battery_fraction = 0.0;
  double analytic = 0.0;
  double mc = 0.0;
  double half_width = 0.0;
  double diff = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct CompareReport {
  std::vector<CompareRow> rows;
  [[nodiscard]] bool empty() const { return rows.empty(); }
  [[nodiscard]] bool pass() const;
  [[nodiscard]] std::string to_json() const;
  [[nodiscard]] Table to_table() const;
};

/// Analytic value vs Monte Carlo mean per metric: probabilities pass when
/// |diff| <= max(abs_tolerance, 3 half-width), energy cost when the relative
/// difference is within energy_rel_tolerance.
CompareReport compare_report(const SystemConfig& cfg, const CompareOptions& options, std::uint64_t seed);

}  // namespace d2d
