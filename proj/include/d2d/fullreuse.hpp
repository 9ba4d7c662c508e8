#pragma once

#include <cstddef>
#include <vector>

#include "d2d/config.hpp"
#include "d2d/popularity.hpp"
#include "d2d/specfun.hpp"

namespace d2d {

/// Densities of active D2D transmitters derived from the Voronoi-cell
/// approximation of each helper's service area.
struct DtDensities {
  std::vector<double> per_file;       // lambda_i^d, m^-2
  double total = 0.0;                 // lambda_I, m^-2
  std::vector<double> inactive_prob;  // p_s(i)
  double active_prob = 0.0;           // p_a
  std::vector<double> theta;          // theta_i
};

/// Transmit power and battery fraction with the implied SINR threshold
/// Gamma_1 = exp(F (P_t + eta P_c) ln2 / (W rho Q V0 eta)) - 1.
struct OperatingPoint {
  double tx_power = 0.0;
  double battery_fraction = 0.0;
  double gamma1 = 0.0;
};

OperatingPoint make_operating_point(const SystemConfig& cfg, double tx_power, double battery_fraction);

/// All analytic quantities for one scheme at one operating point.
struct AnalyticMetrics {
  double opportunity = 0.0;    // p_o
  double probability = 0.0;    // p_1 or p_2
  double ratio = 0.0;          // p_1^a or p_2^a
  double energy_complete = 0.0;  // E-bar for complete transmissions, J
  double energy_average = 0.0;   // E-bar^a over all links, J
  double energy_cost = 0.0;      // E-bar^a / (V0 Q)
};

DtDensities dt_densities(const SystemConfig& cfg, const Popularity& pop, const CachingDistribution& cache);

/// Nearest-helper distance pdf 2 pi r lambda_i exp(-lambda_i pi r^2).
double link_distance_pdf(double r, double helper_density);

/// phi_i(x, r) for alpha > 2: P[SINR >= x] = exp(-phi_i(x, r)) at link
/// distance r, with normalized noise sigma_0^2.
double survival_exponent(const DtDensities& dens, std::size_t file, double threshold, double r, double alpha,
                         double normalized_noise);

/// Full-reuse analytic model for a fixed cache and collaboration distance.
///
/// Transmitter densities do not depend on P_t or rho, so they are computed
/// once at construction and reused by every evaluation. With alpha = 2 the
/// interference Laplace transform uses the truncated-interference
/// approximation exp(-pi lambda_I ln(1 + r_max) x r^2) throughout.
class FullReuseModel {
 public:
  FullReuseModel(const SystemConfig& cfg, Popularity pop, CachingDistribution cache, QuadSpec quad = {});

  [[nodiscard]] const SystemConfig& config() const { return cfg_; }
  [[nodiscard]] const Popularity& popularity() const { return pop_; }
  [[nodiscard]] const CachingDistribution& cache() const { return cache_; }
  [[nodiscard]] const DtDensities& densities() const { return dens_; }
  [[nodiscard]] double opportunity() const { return opportunity_; }
  [[nodiscard]] bool line_of_sight() const { return cfg_.pathloss_exponent <= 2.0; }

  /// p_1 by quadrature over the link distance.
  [[nodiscard]] double offload_prob(const OperatingPoint& op) const;
  /// Closed-form alpha = 2 approximation of p_1.
  [[nodiscard]] double offload_prob_los(const OperatingPoint& op) const;
  /// p_1^a, counting partially delivered files.
  [[nodiscard]] double offload_ratio(const OperatingPoint& op) const;
  /// Mean DT energy for a complete transmission, J. Needs p_1 > 0.
  [[nodiscard]] double energy_complete(const OperatingPoint& op) const;
  /// Mean DT energy over all links (complete and partial), J. Needs p_o > 0.
  [[nodiscard]] double energy_average(const OperatingPoint& op) const;
  /// energy_average / (V0 Q).
  [[nodiscard]] double energy_cost(const OperatingPoint& op) const;

  [[nodiscard]] AnalyticMetrics evaluate(const OperatingPoint& op) const;

  /// sum_i p_r(i) int_0^{r_c} f_i(r) exp(-phi_i(x, r)) dr at transmit power P_t.
  [[nodiscard]] double success_mass(double threshold, double tx_power) const;

 private:
  // Integral of success_mass(e^{1/t} - 1) over t in [0, 1/ln(1+Gamma)].
  [[nodiscard]] double energy_integral(const OperatingPoint& op) const;

  SystemConfig cfg_;
  Popularity pop_;
  CachingDistribution cache_;
  QuadSpec quad_;
  DtDensities dens_;
  double opportunity_ = 0.0;
  double xi1_ = 0.0;
};

// Free-function forms of the model operations.
double offload_prob_p1(const SystemConfig& cfg, const Popularity& pop, const CachingDistribution& cache,
                       const OperatingPoint& op);
double offload_prob_p1_los(const SystemConfig& cfg, const Popularity& pop, const CachingDistribution& cache,
                           const OperatingPoint& op);
double offload_ratio_p1a(const SystemConfig& cfg, const Popularity& pop, const CachingDistribution& cache,
                         const OperatingPoint& op);
double energy_complete_e1(const SystemConfig& cfg, const Popularity& pop, const CachingDistribution& cache,
                          const OperatingPoint& op);
double energy_cost_e1(const SystemConfig& cfg, const Popularity& pop, const CachingDistribution& cache,
                      const OperatingPoint& op);

}  // namespace d2d
