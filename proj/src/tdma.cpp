#include "d2d/tdma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace d2d {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMaxExponentArg = 700.0;
// Beyond v^(alpha/2) = 745 the rescaled integrand is below the smallest double.
constexpr double kTailCutoff = 745.0;

double log_expm1(double y) { return y > 1.0 ? y + std::log1p(-std::exp(-y)) : std::log(std::expm1(y)); }

double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

}  // namespace

TdmaContext tdma_context(const SystemConfig& cfg, double opportunity, double tx_power, double battery_fraction) {
  if (!(opportunity >= 0.0 && opportunity <= 1.0)) throw std::invalid_argument("p_o must lie in [0, 1]");
  if (!(tx_power > 0.0)) throw std::invalid_argument("transmit power must be positive");
  TdmaContext ctx;
  ctx.avg_receivers = opportunity * cfg.user_density * cfg.cell_area();
  ctx.total_circuit = cfg.tx_circuit_power + std::max(ctx.avg_receivers - 1.0, 0.0) * cfg.idle_power;
  ctx.log1p_gamma2 =
      a_coefficient(cfg, battery_fraction) * (tx_power + cfg.pa_efficiency * ctx.total_circuit);
  ctx.gamma2 = std::expm1(ctx.log1p_gamma2);
  ctx.log_gamma2 = log_expm1(ctx.log1p_gamma2);
  ctx.tx_power = tx_power;
  ctx.battery_fraction = battery_fraction;
  return ctx;
}

double tdma_ratio_kernel(double a, double gamma) {
  if (!(a >= 0.0) || !(gamma >= 0.0)) throw std::invalid_argument("kernel needs A >= 0 and Gamma >= 0");
  if (gamma == 0.0) return 0.0;
  const double log_gain = std::log1p(gamma);
  if (a == 0.0) return log_gain;
  const double b = a * (1.0 + gamma);
  if (a < 1e-12 && b < 1e-6) return (1.0 + a) * (log_gain - a * gamma);
  if (b <= 1.0) {
    // E1(A) - E1(B) = ln(B/A) + sum_k (-1)^k (B^k - A^k) / (k k!)
    double sum = 0.0;
    double pa = 1.0, pb = 1.0, fact = 1.0;
    for (int k = 1; k < 200; ++k) {
      pa *= a;
      pb *= b;
      fact *= k;
      const double term = ((k % 2 == 0) ? 1.0 : -1.0) * (pb - pa) / (k * fact);
      sum += term;
      if (std::abs(term) <= std::abs(sum) * 1e-17 || pb / fact < 1e-300) break;
    }
    return std::exp(a) * (log_gain + sum);
  }
  const double span = a * gamma;
  if (span < 1e-3) {
    // Near-equal scaled E1 values would cancel; integrate e^-s / (A + s) over [0, A Gamma].
    return integrate([a](double s) { return std::exp(-s) / (a + s); }, 0.0, span, {1e-13, 1e-300, 50});
  }
  const double tail = std::isfinite(b) ? std::exp(-span) * expint_e1_scaled(b) : 0.0;
  return expint_e1_scaled(a) - tail;
}

TdmaModel::TdmaModel(const SystemConfig& cfg, Popularity pop, CachingDistribution cache, QuadSpec quad)
    : cfg_(cfg), pop_(std::move(pop)), cache_(std::move(cache)), quad_(quad) {
  if (cfg_.cache_slots != 1) throw ConfigError("the analytic model requires cache_slots = 1");
  if (pop_.size() != cache_.size()) throw std::invalid_argument("popularity and cache sizes differ");
  opportunity_ = offloading_opportunity(cfg_.user_density, cfg_.collab_distance, pop_, cache_);
}

TdmaContext TdmaModel::context(double tx_power, double battery_fraction) const {
  return tdma_context(cfg_, opportunity_, tx_power, battery_fraction);
}

double TdmaModel::success_mass(double threshold, double tx_power) const {
  if (!(threshold >= 0.0)) throw std::invalid_argument("threshold must be non-negative");
  const double alpha = cfg_.pathloss_exponent;
  const double coeff = threshold * cfg_.noise_power / (tx_power * cfg_.pathloss_gain);
  const double disk = kPi * cfg_.collab_distance * cfg_.collab_distance;
  double mass = 0.0;
  for (std::size_t i = 0; i < pop_.size(); ++i) {
    const double helpers = cfg_.user_density * cache_.pmf[i];
    if (helpers <= 0.0) continue;
    const double upper = helpers * disk;
    if (coeff == 0.0) {
      mass += pop_.pmf[i] * -std::expm1(-upper);
      continue;
    }
    if (!std::isfinite(coeff)) continue;
    const double per_u = 1.0 / (kPi * helpers);
    auto integrand = [&](double u) { return std::exp(-u - coeff * std::pow(u * per_u, 0.5 * alpha)); };
    const double knee = std::min(1.0, std::pow(coeff, -2.0 / alpha) / per_u);
    mass += pop_.pmf[i] * integrate_multiscale(integrand, upper, knee, quad_);
  }
  return mass;
}

double TdmaModel::offload_prob(const TdmaContext& ctx) const { return success_mass(ctx.gamma2, ctx.tx_power); }

double TdmaModel::log_offload_prob(const TdmaContext& ctx) const {
  // With c = Gamma_2 sigma_0^2 and u_0 = pi lambda_i c^(-2/alpha), v = u / u_0 gives
  //   int_0^U e^{-u - c (u / pi lambda_i)^(alpha/2)} du = u_0 int_0^{U/u_0} e^{-u_0 v - v^(alpha/2)} dv.
  const double alpha = cfg_.pathloss_exponent;
  const double log_c = ctx.log_gamma2 + std::log(cfg_.noise_power / (ctx.tx_power * cfg_.pathloss_gain));
  const double disk = kPi * cfg_.collab_distance * cfg_.collab_distance;
  const double v_cap = std::pow(kTailCutoff, 2.0 / alpha);
  double total = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pop_.size(); ++i) {
    const double helpers = cfg_.user_density * cache_.pmf[i];
    if (helpers <= 0.0 || pop_.pmf[i] <= 0.0) continue;
    const double log_u0 = std::log(kPi * helpers) - (2.0 / alpha) * log_c;
    const double u0 = std::exp(log_u0);
    const double upper = std::min(std::exp(std::log(helpers * disk) - log_u0), v_cap);
    auto integrand = [&](double v) { return std::exp(-u0 * v - std::pow(v, 0.5 * alpha)); };
    const double inner = integrate(integrand, 0.0, upper, quad_);
    if (inner > 0.0) total = log_add(total, std::log(pop_.pmf[i]) + log_u0 + std::log(inner));
  }
  return total;
}

double TdmaModel::offload_prob_los(const TdmaContext& ctx) const {
  if (cfg_.pathloss_exponent != 2.0) throw SpecialFunctionError("the closed form needs alpha = 2");
  const double noise = cfg_.noise_power / (ctx.tx_power * cfg_.pathloss_gain);
  const double r2 = cfg_.collab_distance * cfg_.collab_distance;
  double p = 0.0;
  for (std::size_t i = 0; i < pop_.size(); ++i) {
    const double helpers = cfg_.user_density * cache_.pmf[i];
    if (helpers <= 0.0) continue;
    const double varphi = noise * ctx.gamma2 + kPi * helpers;
    if (!std::isfinite(varphi)) continue;
    p += pop_.pmf[i] * kPi * helpers * -std::expm1(-varphi * r2) / varphi;
  }
  return p;
}

double TdmaModel::offload_ratio(const TdmaContext& ctx) const {
  if (ctx.log1p_gamma2 <= 0.0) return opportunity_;
  const double alpha = cfg_.pathloss_exponent;
  const double noise = cfg_.noise_power / (ctx.tx_power * cfg_.pathloss_gain);
  const double disk = kPi * cfg_.collab_distance * cfg_.collab_distance;
  double ratio = 0.0;
  for (std::size_t i = 0; i < pop_.size(); ++i) {
    const double helpers = cfg_.user_density * cache_.pmf[i];
    if (helpers <= 0.0) continue;
    const double per_u = 1.0 / (kPi * helpers);
    auto integrand = [&](double u) {
      const double a = noise * std::pow(u * per_u, 0.5 * alpha);
      return std::exp(-u) * tdma_ratio_kernel(a, ctx.gamma2);
    };
    const double knee = std::min(1.0, std::pow(noise, -2.0 / alpha) / per_u);
    ratio += pop_.pmf[i] * integrate_multiscale(integrand, helpers * disk, knee, quad_);
  }
  return ratio / ctx.log1p_gamma2;
}

double TdmaModel::energy_integral(const TdmaContext& ctx) const {
  auto integrand = [&](double t) {
    if (!(t > 0.0) || 1.0 / t > kMaxExponentArg) return 0.0;
    return success_mass(std::expm1(1.0 / t), ctx.tx_power);
  };
  return integrate(integrand, 0.0, 1.0 / ctx.log1p_gamma2, quad_);
}

double TdmaModel::energy_complete(const TdmaContext& ctx) const {
  const double p2 = offload_prob(ctx);
  if (!(p2 > 0.0)) throw std::domain_error("energy for complete transmissions needs p_2 > 0");
  const double budget = ctx.battery_fraction * cfg_.battery_energy();
  return budget * (1.0 - ctx.log1p_gamma2 * energy_integral(ctx) / p2);
}

double TdmaModel::energy_average(const TdmaContext& ctx) const {
  if (!(opportunity_ > 0.0)) throw std::domain_error("average energy needs p_o > 0");
  const double budget = ctx.battery_fraction * cfg_.battery_energy();
  return budget * (1.0 - ctx.log1p_gamma2 * energy_integral(ctx) / opportunity_);
}

double TdmaModel::energy_cost(const TdmaContext& ctx) const { return energy_average(ctx) / cfg_.battery_energy(); }

AnalyticMetrics TdmaModel::evaluate(const TdmaContext& ctx) const {
  AnalyticMetrics m;
  m.opportunity = opportunity_;
  m.probability = offload_prob(ctx);
  m.ratio = offload_ratio(ctx);
  const double budget = ctx.battery_fraction * cfg_.battery_energy();
  const double weighted = ctx.log1p_gamma2 * energy_integral(ctx);
  m.energy_complete = m.probability > 0.0 ? budget * (1.0 - weighted / m.probability) : budget;
  m.energy_average = opportunity_ > 0.0 ? budget * (1.0 - weighted / opportunity_) : 0.0;
  m.energy_cost = m.energy_average / cfg_.battery_energy();
  return m;
}

double offload_prob_p2(const SystemConfig& cfg, const Popularity& pop, const CachingDistribution& cache,
                       const TdmaContext& ctx) {
  return TdmaModel(cfg, pop, cache).offload_prob(ctx);
}

double offload_prob_p2_los(const SystemConfig& cfg, const Popularity& pop, const CachingDistribution& cache,
                           const TdmaContext& ctx) {
  return TdmaModel(cfg, pop, cache).offload_prob_los(ctx);
}

double offload_ratio_p2a(const SystemConfig& cfg, const Popularity& pop, const CachingDistribution& cache,
                         const TdmaContext& ctx) {
  return TdmaModel(cfg, pop, cache).offload_ratio(ctx);
}

double energy_cost_e2(const SystemConfig& cfg, const Popularity& pop, const CachingDistribution& cache,
                      const TdmaContext& ctx) {
  return TdmaModel(cfg, pop, cache).energy_cost(ctx);
}

}  // namespace d2d
