#pragma once

#include <cstddef>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace d2d {

/// Request probabilities p_r(i), i = 1..N_f (stored zero-based).
struct Popularity {
  std::vector<double> pmf;
  double exponent = 0.0;  // beta
  [[nodiscard]] std::size_t size() const { return pmf.size(); }
};

enum class CachePolicy { optimal, uniform, popularity };

std::string_view to_string(CachePolicy policy);
CachePolicy parse_cache_policy(std::string_view name);

/// Probabilistic single-slot cache placement p_c(i).
struct CachingDistribution {
  std::vector<double> pmf;
  CachePolicy policy = CachePolicy::optimal;
  std::size_t cutoff = 0;  // one-based index of the last nonzero entry
  [[nodiscard]] std::size_t size() const { return pmf.size(); }
};

/// Thrown when the closed-form caching solution cannot be made consistent
/// (no admissible cutoff index, or a normalization error above 1e-9).
class CachingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Zipf law p_r(i) = i^-beta / sum_k k^-beta.
Popularity zipf(std::size_t catalog_size, double exponent);

/// Caching distribution that maximizes the offloading opportunity
///   p_o = sum_i p_r(i) (1 - exp(-density p_c(i) pi r_c^2))
/// over the probability simplex, for Zipf popularity.
///
/// Uses the closed-form water-filling solution: when the full catalog stays
/// active every file gets a positive share, otherwise files past a cutoff i*
/// are never cached and i* is located by scanning a narrow window around
/// density*pi*r_c^2/beta and checking the KKT sign conditions.
CachingDistribution optimal_caching(double density, double collab_distance, const Popularity& pop);

/// Uniform (1/N_f) or popularity-proportional (p_r) placement.
CachingDistribution baseline_caching(CachePolicy policy, const Popularity& pop);

/// Probability that a request finds its file cached within r_c.
double offloading_opportunity(double density, double collab_distance, const Popularity& pop,
                              const CachingDistribution& cache);

}  // namespace d2d
