#include "d2d/popularity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace d2d {

std::string_view to_string(CachePolicy policy) {
  switch (policy) {
    case CachePolicy::optimal:
      return "optimal";
    case CachePolicy::uniform:
      return "uniform";
    case CachePolicy::popularity:
      return "popularity";
  }
  return "unknown";
}

CachePolicy parse_cache_policy(std::string_view name) {
  if (name == "optimal") return CachePolicy::optimal;
  if (name == "uniform") return CachePolicy::uniform;
  if (name == "popularity") return CachePolicy::popularity;
  throw std::invalid_argument("unknown cache policy '" + std::string(name) + "'");
}

Popularity zipf(std::size_t catalog_size, double exponent) {
  if (catalog_size < 1) throw std::invalid_argument("catalog size must be >= 1");
  if (!(exponent >= 0.0)) throw std::invalid_argument("zipf exponent must be >= 0");
  Popularity pop;
  pop.exponent = exponent;
  pop.pmf.resize(catalog_size);
  double norm = 0.0;
  for (std::size_t i = 0; i < catalog_size; ++i) {
    pop.pmf[i] = std::pow(static_cast<double>(i + 1), -exponent);
    norm += pop.pmf[i];
  }
  for (auto& p : pop.pmf) p /= norm;
  return pop;
}

namespace {

// Candidate solution with the first `active` files cached:
//   p(i) = (1/active) (1 + (1/load) sum_{j<=active} ln(j/i)),
// where load = density*pi*r_c^2/beta. sum_j ln j = lgamma(active+1).
double share(std::size_t active, std::size_t index, double log_factorial, double load) {
  const double k = static_cast<double>(active);
  return (1.0 + (log_factorial - k * std::log(static_cast<double>(index))) / load) / k;
}

CachingDistribution finalize(std::vector<double> pmf, std::size_t cutoff) {
  double sum = 0.0;
  for (double p : pmf) sum += p;
  const double err = std::abs(sum - 1.0);
  if (err > 1e-9) throw CachingError("caching distribution sums to " + std::to_string(sum));
  if (err > 1e-12)
    for (auto& p : pmf) p /= sum;
  return {std::move(pmf), CachePolicy::optimal, cutoff};
}

}  // namespace

CachingDistribution optimal_caching(double density, double collab_distance, const Popularity& pop) {
  const double zipf_exponent = pop.exponent;
  if (!(density > 0.0) || !(collab_distance > 0.0))
    throw std::invalid_argument("density and collaboration distance must be positive");
  const std::size_t n = pop.size();
  if (n == 0) throw std::invalid_argument("empty catalog");

  if (zipf_exponent == 0.0 || n == 1) {
    CachingDistribution uniform = baseline_caching(CachePolicy::uniform, pop);
    uniform.policy = CachePolicy::optimal;
    return uniform;
  }

  const double load = density * std::numbers::pi * collab_distance * collab_distance / zipf_exponent;
  const double dn = static_cast<double>(n);

  // Full-catalog branch: N^N / N! < exp(load), compared in the log domain.
  if (dn * std::log(dn) - std::lgamma(dn + 1.0) < load) {
    const double lf = std::lgamma(dn + 1.0);
    std::vector<double> pmf(n);
    for (std::size_t i = 0; i < n; ++i) pmf[i] = share(n, i + 1, lf, load);
    return finalize(std::move(pmf), n);
  }

  const double lo_bound = std::ceil(load) - 2.0;
  const double hi_bound = std::floor(load + std::log(std::sqrt(2.0 * std::numbers::pi * dn))) + 2.0;
  const auto lo = static_cast<std::size_t>(std::clamp(lo_bound, 1.0, dn));
  const auto hi = static_cast<std::size_t>(std::clamp(hi_bound, 1.0, dn));

  for (std::size_t k = lo; k <= hi; ++k) {
    const double lf = std::lgamma(static_cast<double>(k) + 1.0);
    if (share(k, k, lf, load) < 0.0) continue;
    if (k < n && share(k, k + 1, lf, load) > 0.0) continue;
    std::vector<double> pmf(n, 0.0);
    for (std::size_t i = 0; i < k; ++i) pmf[i] = share(k, i + 1, lf, load);
    return finalize(std::move(pmf), k);
  }
  throw CachingError("no admissible cutoff index in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

CachingDistribution baseline_caching(CachePolicy policy, const Popularity& pop) {
  const std::size_t n = pop.size();
  CachingDistribution out;
  out.policy = policy;
  out.cutoff = n;
  switch (policy) {
    case CachePolicy::uniform:
      out.pmf.assign(n, 1.0 / static_cast<double>(n));
      break;
    case CachePolicy::popularity:
      out.pmf = pop.pmf;
      break;
    case CachePolicy::optimal:
      throw std::invalid_argument("the optimal policy is computed by optimal_caching()");
  }
  while (out.cutoff > 0 && out.pmf[out.cutoff - 1] == 0.0) --out.cutoff;
  if (out.cutoff == 0) out.cutoff = n;
  return out;
}

double offloading_opportunity(double density, double collab_distance, const Popularity& pop,
                              const CachingDistribution& cache) {
  if (pop.size() != cache.size()) throw std::invalid_argument("popularity and cache sizes differ");
  const double disk = std::numbers::pi * collab_distance * collab_distance;
  double po = 0.0;
  for (std::size_t i = 0; i < pop.size(); ++i) po += pop.pmf[i] * -std::expm1(-density * cache.pmf[i] * disk);
  return po;
}

}  // namespace d2d
