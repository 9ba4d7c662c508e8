#pragma once

#include "d2d/config.hpp"
#include "d2d/fullreuse.hpp"
#include "d2d/popularity.hpp"
#include "d2d/specfun.hpp"

namespace d2d {

/// Round-robin TDMA quantities at one (P_t, rho).
///
/// Gamma_2 overflows a double for tiny rho and large files, so the exponent
/// y = ln(1 + Gamma_2) and ln Gamma_2 are kept alongside it.
struct TdmaContext {
  double avg_receivers = 0.0;   // N_a = p_o lambda S
  double total_circuit = 0.0;   // P_c^T, W
  double gamma2 = 0.0;          // may be +inf
  double log1p_gamma2 = 0.0;    // y = ln(1 + Gamma_2)
  double log_gamma2 = 0.0;      // ln Gamma_2
  double tx_power = 0.0;
  double battery_fraction = 0.0;
};

/// N_a and P_c^T; (N_a - 1) is clamped at 0.
TdmaContext tdma_context(const SystemConfig& cfg, double opportunity, double tx_power, double battery_fraction);

/// e^A (E1(A) - E1(A (1 + Gamma))), i.e. int_0^Gamma e^{-A t} / (1 + t) dt.
/// gamma may be +inf.
double tdma_ratio_kernel(double a, double gamma);

class TdmaModel {
 public:
  TdmaModel(const SystemConfig& cfg, Popularity pop, CachingDistribution cache, QuadSpec quad = {});

  [[nodiscard]] const SystemConfig& config() const { return cfg_; }
  [[nodiscard]] double opportunity() const { return opportunity_; }
  [[nodiscard]] TdmaContext context(double tx_power, double battery_fraction) const;

  /// p_2 by quadrature (any alpha >= 2).
  [[nodiscard]] double offload_prob(const TdmaContext& ctx) const;
  /// ln p_2, finite even when p_2 underflows.
  [[nodiscard]] double log_offload_prob(const TdmaContext& ctx) const;
  /// Closed form for alpha = 2.
  [[nodiscard]] double offload_prob_los(const TdmaContext& ctx) const;
  /// p_2^a through the exponential-integral form.
  [[nodiscard]] double offload_ratio(const TdmaContext& ctx) const;
  [[nodiscard]] double energy_complete(const TdmaContext& ctx) const;
  [[nodiscard]] double energy_average(const TdmaContext& ctx) const;
  [[nodiscard]] double energy_cost(const TdmaContext& ctx) const;
  [[nodiscard]] AnalyticMetrics evaluate(const TdmaContext& ctx) const;

  /// sum_i p_r(i) int_0^{r_c} f_i(r) exp(-x r^alpha sigma_0^2) dr.
  [[nodiscard]] double success_mass(double threshold, double tx_power) const;

 private:
  [[nodiscard]] double energy_integral(const TdmaContext& ctx) const;

  SystemConfig cfg_;
  Popularity pop_;
  CachingDistribution cache_;
  QuadSpec quad_;
  double opportunity_ = 0.0;
};

double offload_prob_p2(const SystemConfig& cfg, const Popularity& pop, const CachingDistribution& cache,
                       const TdmaContext& ctx);
double offload_prob_p2_los(const SystemConfig& cfg, const Popularity& pop, const CachingDistribution& cache,
                           const TdmaContext& ctx);
double offload_ratio_p2a(const SystemConfig& cfg, const Popularity& pop, const CachingDistribution& cache,
                         const TdmaContext& ctx);
double energy_cost_e2(const SystemConfig& cfg, const Popularity& pop, const CachingDistribution& cache,
                      const TdmaContext& ctx);

}  // namespace d2d
