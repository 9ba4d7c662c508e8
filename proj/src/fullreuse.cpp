#include "d2d/fullreuse.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace d2d {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kVoronoiShape = 3.5;
constexpr double kMaxExponentArg = 700.0;

}  // namespace

OperatingPoint make_operating_point(const SystemConfig& cfg, double tx_power, double battery_fraction) {
  if (!(tx_power > 0.0)) throw std::invalid_argument("transmit power must be positive");
  if (!(battery_fraction > 0.0)) throw std::invalid_argument("battery_fraction must be positive");
  const double a = a_coefficient(cfg, battery_fraction);
  return {tx_power, battery_fraction, std::expm1(a * (tx_power + cfg.pa_efficiency * cfg.tx_circuit_power))};
}

DtDensities dt_densities(const SystemConfig& cfg, const Popularity& pop, const CachingDistribution& cache) {
  if (pop.size() != cache.size()) throw std::invalid_argument("popularity and cache sizes differ");
  const std::size_t n = pop.size();
  const double lambda = cfg.user_density;
  const double disk = kPi * cfg.collab_distance * cfg.collab_distance;
  DtDensities d;
  d.per_file.assign(n, 0.0);
  d.inactive_prob.assign(n, 1.0);
  d.theta.assign(n, 1.0);
  double idle_share = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double helpers = lambda * cache.pmf[i];
    if (helpers > 0.0) {
      const double requests = lambda * pop.pmf[i];
      const double shaped = kVoronoiShape * helpers;
      // theta_i = gamma(3.5, (3.5 l_i + l p_r) pi r_c^2) / gamma(3.5, 3.5 l_i pi r_c^2)
      d.theta[i] = lower_gamma(kVoronoiShape, (shaped + requests) * disk) / lower_gamma(kVoronoiShape, shaped * disk);
      const double ps = std::pow(1.0 + requests / shaped, -kVoronoiShape) * d.theta[i];
      d.inactive_prob[i] = std::clamp(ps, 0.0, 1.0);
      d.per_file[i] = helpers * (1.0 - d.inactive_prob[i]);
    }
    idle_share += cache.pmf[i] * d.inactive_prob[i];
    d.total += d.per_file[i];
  }
  d.active_prob = 1.0 - idle_share;
  return d;
}

double link_distance_pdf(double r, double helper_density) {
  if (!(r >= 0.0)) throw std::invalid_argument("distance must be non-negative");
  return 2.0 * kPi * r * helper_density * std::exp(-helper_density * kPi * r * r);
}

double survival_exponent(const DtDensities& dens, std::size_t file, double threshold, double r, double alpha,
                         double normalized_noise) {
  if (!(threshold > 0.0) || !(r > 0.0)) throw std::invalid_argument("threshold and distance must be positive");
  const double interference =
      kPi * (dens.total * xi1(alpha) - dens.per_file.at(file) * xi2(alpha, threshold)) * r * r *
      std::pow(threshold, 2.0 / alpha);
  return threshold * std::pow(r, alpha) * normalized_noise + interference;
}

FullReuseModel::FullReuseModel(const SystemConfig& cfg, Popularity pop, CachingDistribution cache, QuadSpec quad)
    : cfg_(cfg), pop_(std::move(pop)), cache_(std::move(cache)), quad_(quad) {
  if (cfg_.cache_slots != 1) throw ConfigError("the analytic model requires cache_slots = 1");
  if (pop_.size() != cache_.size()) throw std::invalid_argument("popularity and cache sizes differ");
  dens_ = dt_densities(cfg_, pop_, cache_);
  opportunity_ = offloading_opportunity(cfg_.user_density, cfg_.collab_distance, pop_, cache_);
  if (!line_of_sight()) xi1_ = xi1(cfg_.pathloss_exponent);
}

double FullReuseModel::success_mass(double threshold, double tx_power) const {
  if (!(threshold >= 0.0)) throw std::invalid_argument("threshold must be non-negative");
  const double alpha = cfg_.pathloss_exponent;
  const double noise = cfg_.noise_power / (tx_power * cfg_.pathloss_gain);
  const double disk = kPi * cfg_.collab_distance * cfg_.collab_distance;

  // Interference exponent per unit r^2 is base - per_file[i] * tweak.
  double base = 0.0;
  double tweak = 0.0;
  if (threshold > 0.0) {
    if (line_of_sight()) {
      base = kPi * dens_.total * std::log1p(cfg_.interference_truncation) * threshold;
    } else {
      const double scale = kPi * std::pow(threshold, 2.0 / alpha);
      base = scale * dens_.total * xi1_;
      tweak = scale * xi2(alpha, threshold);
    }
  }

  double mass = 0.0;
  for (std::size_t i = 0; i < pop_.size(); ++i) {
    const double helpers = cfg_.user_density * cache_.pmf[i];
    if (helpers <= 0.0) continue;
    const double upper = helpers * disk;
    if (threshold == 0.0) {
      mass += pop_.pmf[i] * -std::expm1(-upper);
      continue;
    }
    // Substitute u = lambda_i pi r^2, so f_i(r) dr = e^-u du and r^2 = u / (pi lambda_i).
    const double per_u = 1.0 / (kPi * helpers);
    const double interference = (base - dens_.per_file[i] * tweak) * per_u;
    const double noise_coeff = threshold * noise;
    auto integrand = [&](double u) {
      const double r2 = u * per_u;
      const double arg = u + noise_coeff * std::pow(r2, 0.5 * alpha) + interference * u;
      return std::exp(-arg);
    };
    const double knee = std::min(1.0 / (1.0 + interference),
                                 noise_coeff > 0.0 ? std::pow(noise_coeff, -2.0 / alpha) / per_u : upper);
    mass += pop_.pmf[i] * integrate_multiscale(integrand, upper, knee, quad_);
  }
  return mass;
}

double FullReuseModel::offload_prob(const OperatingPoint& op) const { return success_mass(op.gamma1, op.tx_power); }

double FullReuseModel::offload_prob_los(const OperatingPoint& op) const {
  if (!line_of_sight()) throw SpecialFunctionError("the closed-form approximation needs alpha = 2");
  const double noise = cfg_.noise_power / (op.tx_power * cfg_.pathloss_gain);
  const double xi_s = std::log1p(cfg_.interference_truncation);
  const double r2 = cfg_.collab_distance * cfg_.collab_distance;
  double p = 0.0;
  for (std::size_t i = 0; i < pop_.size(); ++i) {
    const double helpers = cfg_.user_density * cache_.pmf[i];
    if (helpers <= 0.0) continue;
    const double varphi = noise * op.gamma1 + kPi * dens_.total * xi_s * op.gamma1 + kPi * helpers;
    p += pop_.pmf[i] * kPi * helpers * -std::expm1(-varphi * r2) / varphi;
  }
  return p;
}

double FullReuseModel::offload_ratio(const OperatingPoint& op) const {
  const double log_gain = std::log1p(op.gamma1);
  if (log_gain <= 0.0) return opportunity_;
  auto integrand = [&](double t) { return success_mass(t, op.tx_power) / (1.0 + t); };
  return integrate(integrand, 0.0, op.gamma1, quad_) / log_gain;
}

double FullReuseModel::energy_integral(const OperatingPoint& op) const {
  const double log_gain = std::log1p(op.gamma1);
  auto integrand = [&](double t) {
    if (!(t > 0.0) || 1.0 / t > kMaxExponentArg) return 0.0;
    return success_mass(std::expm1(1.0 / t), op.tx_power);
  };
  return integrate(integrand, 0.0, 1.0 / log_gain, quad_);
}

double FullReuseModel::energy_complete(const OperatingPoint& op) const {
  const double p1 = offload_prob(op);
  if (!(p1 > 0.0)) throw std::domain_error("energy for complete transmissions needs p_1 > 0");
  const double budget = op.battery_fraction * cfg_.battery_energy();
  return budget * (1.0 - std::log1p(op.gamma1) * energy_integral(op) / p1);
}

double FullReuseModel::energy_average(const OperatingPoint& op) const {
  if (!(opportunity_ > 0.0)) throw std::domain_error("average energy needs p_o > 0");
  const double budget = op.battery_fraction * cfg_.battery_energy();
  return budget * (1.0 - std::log1p(op.gamma1) * energy_integral(op) / opportunity_);
}

double FullReuseModel::energy_cost(const OperatingPoint& op) const {
  return energy_average(op) / cfg_.battery_energy();
}

AnalyticMetrics FullReuseModel::evaluate(const OperatingPoint& op) const {
  AnalyticMetrics m;
  m.opportunity = opportunity_;
  m.probability = offload_prob(op);
  m.ratio = offload_ratio(op);
  const double budget = op.battery_fraction * cfg_.battery_energy();
  const double weighted = std::log1p(op.gamma1) * energy_integral(op);
  m.energy_complete = m.probability > 0.0 ? budget * (1.0 - weighted / m.probability) : budget;
  m.energy_average = opportunity_ > 0.0 ? budget * (1.0 - weighted / opportunity_) : 0.0;
  m.energy_cost = m.energy_average / cfg_.battery_energy();
  return m;
}

double offload_prob_p1(const SystemConfig& cfg, const Popularity& pop, const CachingDistribution& cache,
                       const OperatingPoint& op) {
  return FullReuseModel(cfg, pop, cache).offload_prob(op);
}

double offload_prob_p1_los(const SystemConfig& cfg, const Popularity& pop, const CachingDistribution& cache,
                           const OperatingPoint& op) {
  return FullReuseModel(cfg, pop, cache).offload_prob_los(op);
}

double offload_ratio_p1a(const SystemConfig& cfg, const Popularity& pop, const CachingDistribution& cache,
                         const OperatingPoint& op) {
  return FullReuseModel(cfg, pop, cache).offload_ratio(op);
}

double energy_complete_e1(const SystemConfig& cfg, const Popularity& pop, const CachingDistribution& cache,
                          const OperatingPoint& op) {
  return FullReuseModel(cfg, pop, cache).energy_complete(op);
}

double energy_cost_e1(const SystemConfig& cfg, const Popularity& pop, const CachingDistribution& cache,
                      const OperatingPoint& op) {
  return FullReuseModel(cfg, pop, cache).energy_cost(op);
}

}  // namespace d2d
