#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <string_view>

#include "d2d/fullreuse.hpp"
#include "d2d/tdma.hpp"

namespace d2d {

enum class PowerMethod { search, grid, cubic, closed_form };

std::string_view to_string(PowerMethod method);

struct PowerResult {
  double p_star = 0.0;     // W
  double objective = 0.0;  // offloading probability at p_star
  bool clamped = false;    // p_star == P_max
  PowerMethod method = PowerMethod::search;
};

struct SearchResult {
  double argmax = 0.0;
  double value = 0.0;
};

/// Golden-section maximization of f over [lo, hi] in log coordinates.
/// Stops when the bracket's log-width is below log_tol.
SearchResult golden_section_maximize(const std::function<double(double)>& f, double lo, double hi,
                                     double log_tol = 1e-4);

/// Best of n log-spaced points on [lo, hi].
SearchResult grid_maximize(const std::function<double(double)>& f, double lo, double hi, int n = 200);

inline constexpr double kMinSearchPower = 1e-6;

/// argmax of p_1 over (0, P_max]. Falls back to a 200-point grid when the
/// search result is worse than an endpoint by more than 1e-6.
PowerResult optimize_power_full_reuse(const FullReuseModel& model, double battery_fraction);

/// Coefficients {c0, c1, c2, c3} of the alpha = 2 stationarity cubic
/// a^2 mu x^3 + (a (s + mu eta P_c) + mu) a x^2 + a^2 eta P_c s x - a eta P_c s
/// with s = sigma^2 / K and mu = pi lambda_I ln(1 + r_max).
std::array<double, 4> los_cubic_coefficients(const FullReuseModel& model, double battery_fraction);

/// Unique positive real root of c3 x^3 + c2 x^2 + c1 x + c0 with c0 < 0 and
/// c1, c2, c3 >= 0 (not all zero). Cardano followed by Newton polishing.
double positive_cubic_root(const std::array<double, 4>& c);

/// Closed-form alpha = 2 optimum, clamped to P_max.
PowerResult optimize_power_los_cubic(const FullReuseModel& model, double battery_fraction);

/// Unclamped eta P_c^T (sqrt(1/(a eta P_c^T) + 1/4) - 1/2).
double tdma_unconstrained_optimum(double a_coeff, double eta_total_circuit);

/// Closed-form TDMA optimum with the P_max clamp.
PowerResult optimize_power_tdma(const TdmaModel& model, double battery_fraction);

/// Golden-section maximizer of ln p_2, used to check the closed form.
PowerResult optimize_power_tdma_search(const TdmaModel& model, double battery_fraction);

}  // namespace d2d
