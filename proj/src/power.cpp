#include "d2d/power.hpp"

#include <algorithm>
#include <numbers>
#include <stdexcept>

namespace d2d {

std::string_view to_string(PowerMethod method) {
  switch (method) {
    case PowerMethod::search:
      return "search";
    case PowerMethod::grid:
      return "grid";
    case PowerMethod::cubic:
      return "cubic";
    case PowerMethod::closed_form:
      return "closed-form";
  }
  return "unknown";
}

SearchResult golden_section_maximize(const std::function<double(double)>& f, double lo, double hi,
                                     double log_tol) {
  if (!(lo > 0.0) || !(lo < hi)) throw std::invalid_argument("golden section needs 0 < lo < hi");
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = std::log(lo);
  double b = std::log(hi);
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(std::exp(x1));
  double f2 = f(std::exp(x2));
  while (b - a > log_tol) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(std::exp(x1));
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(std::exp(x2));
    }
  }
  SearchResult best = f1 >= f2 ? SearchResult{std::exp(x1), f1} : SearchResult{std::exp(x2), f2};
  // The maximum may sit on the boundary, which the interior probes never reach.
  for (double edge : {lo, hi}) {
    if (std::abs(std::log(edge) - std::log(best.argmax)) <= 2.0 * log_tol) {
      const double fe = f(edge);
      if (fe >= best.value) best = {edge, fe};
    }
  }
  return best;
}

SearchResult grid_maximize(const std::function<double(double)>& f, double lo, double hi, int n) {
  if (n < 2 || !(lo > 0.0) || !(lo < hi)) throw std::invalid_argument("grid search needs n >= 2 and 0 < lo < hi");
  SearchResult best{lo, -std::numeric_limits<double>::infinity()};
  const double step = std::log(hi / lo) / (n - 1);
  for (int k = 0; k < n; ++k) {
    const double x = k == n - 1 ? hi : lo * std::exp(step * k);
    const double v = f(x);
    if (v > best.value) best = {x, v};
  }
  return best;
}

namespace {

bool at_cap(double p, double cap) { return p >= cap * (1.0 - 1e-3); }

}  // namespace

PowerResult optimize_power_full_reuse(const FullReuseModel& model, double battery_fraction) {
  const SystemConfig& cfg = model.config();
  const double cap = cfg.max_tx_power;
  auto objective = [&](double p) { return model.offload_prob(make_operating_point(cfg, p, battery_fraction)); };
  SearchResult best = golden_section_maximize(objective, kMinSearchPower, cap);
  PowerMethod method = PowerMethod::search;
  const double edge = std::max(objective(kMinSearchPower), objective(cap));
  if (best.value < edge - 1e-6) {
    best = grid_maximize(objective, kMinSearchPower, cap, 200);
    method = PowerMethod::grid;
  }
  return {best.argmax, best.value, at_cap(best.argmax, cap), method};
}

std::array<double, 4> los_cubic_coefficients(const FullReuseModel& model, double battery_fraction) {
  const SystemConfig& cfg = model.config();
  const double a = a_coefficient(cfg, battery_fraction);
  const double s = cfg.noise_power / cfg.pathloss_gain;
  const double mu = std::numbers::pi * model.densities().total * std::log1p(cfg.interference_truncation);
  const double etapc = cfg.pa_efficiency * cfg.tx_circuit_power;
  return {-a * etapc * s, a * a * etapc * s, (a * (s + mu * etapc) + mu) * a, a * a * mu};
}

double positive_cubic_root(const std::array<double, 4>& c) {
  const auto [c0, c1, c2, c3] = c;
  if (!(c0 < 0.0) || c1 < 0.0 || c2 < 0.0 || c3 < 0.0 || (c1 == 0.0 && c2 == 0.0 && c3 == 0.0))
    throw std::domain_error("cubic does not have the single-sign-change pattern");
  double x = 0.0;
  if (c3 > 0.0) {
    // Depressed cubic t^3 + p t + q with x = t - b/3.
    const double b = c2 / c3, cc = c1 / c3, d = c0 / c3;
    const double p = cc - b * b / 3.0;
    const double q = 2.0 * b * b * b / 27.0 - b * cc / 3.0 + d;
    const double disc = q * q / 4.0 + p * p * p / 27.0;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      x = std::cbrt(-q / 2.0 + sq) + std::cbrt(-q / 2.0 - sq) - b / 3.0;
    } else {
      const double r = std::sqrt(-p / 3.0);
      const double phi = std::acos(std::clamp(-q / (2.0 * r * r * r), -1.0, 1.0));
      for (int k = 0; k < 3; ++k) {
        const double root = 2.0 * r * std::cos((phi - 2.0 * std::numbers::pi * k) / 3.0) - b / 3.0;
        x = std::max(x, root);
      }
    }
  } else if (c2 > 0.0) {
    x = (-c1 + std::sqrt(c1 * c1 - 4.0 * c2 * c0)) / (2.0 * c2);
  } else {
    x = -c0 / c1;
  }
  // The polynomial is increasing for x > 0, so Newton from the right converges.
  if (!(x > 0.0)) x = std::cbrt(-c0 / std::max(c3, 1e-300));
  for (int it = 0; it < 50; ++it) {
    const double fx = ((c3 * x + c2) * x + c1) * x + c0;
    const double dfx = (3.0 * c3 * x + 2.0 * c2) * x + c1;
    if (dfx <= 0.0) break;
    const double next = x - fx / dfx;
    if (!(next > 0.0)) {
      x *= 0.5;
      continue;
    }
    const bool done = std::abs(next - x) <= 1e-15 * x;
    x = next;
    if (done) break;
  }
  return x;
}

PowerResult optimize_power_los_cubic(const FullReuseModel& model, double battery_fraction) {
  const SystemConfig& cfg = model.config();
  if (!model.line_of_sight()) throw SpecialFunctionError("the cubic optimum needs alpha = 2");
  double root = 0.0;
  try {
    root = positive_cubic_root(los_cubic_coefficients(model, battery_fraction));
  } catch (const std::domain_error&) {
    return optimize_power_full_reuse(model, battery_fraction);
  }
  const bool clamped = root >= cfg.max_tx_power;
  const double p = clamped ? cfg.max_tx_power : root;
  return {p, model.offload_prob_los(make_operating_point(cfg, p, battery_fraction)), clamped, PowerMethod::cubic};
}

double tdma_unconstrained_optimum(double a_coeff, double eta_total_circuit) {
  if (!(a_coeff > 0.0) || !(eta_total_circuit > 0.0)) throw std::invalid_argument("a and eta P_c^T must be positive");
  const double v = 1.0 / (a_coeff * eta_total_circuit);
  // sqrt(v + 1/4) - 1/2 = v / (sqrt(v + 1/4) + 1/2) avoids cancellation for small v.
  return eta_total_circuit * v / (std::sqrt(v + 0.25) + 0.5);
}

PowerResult optimize_power_tdma(const TdmaModel& model, double battery_fraction) {
  const SystemConfig& cfg = model.config();
  const TdmaContext probe = model.context(cfg.max_tx_power, battery_fraction);
  const double unconstrained = tdma_unconstrained_optimum(a_coefficient(cfg, battery_fraction),
                                                          cfg.pa_efficiency * probe.total_circuit);
  const bool clamped = cfg.max_tx_power < unconstrained;
  const double p = clamped ? cfg.max_tx_power : unconstrained;
  return {p, model.offload_prob(model.context(p, battery_fraction)), clamped, PowerMethod::closed_form};
}

PowerResult optimize_power_tdma_search(const TdmaModel& model, double battery_fraction) {
  const double cap = model.config().max_tx_power;
  auto objective = [&](double p) { return model.log_offload_prob(model.context(p, battery_fraction)); };
  const SearchResult best = golden_section_maximize(objective, kMinSearchPower, cap);
  return {best.argmax, std::exp(best.value), at_cap(best.argmax, cap), PowerMethod::search};
}

}  // namespace d2d
