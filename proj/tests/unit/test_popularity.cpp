#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "caching_oracle.hpp"
#include "d2d/popularity.hpp"

using namespace d2d;

namespace {

double harmonic(std::size_t n, double beta) {
  double h = 0.0;
  for (std::size_t k = n; k >= 1; --k) h += std::pow(static_cast<double>(k), -beta);
  return h;
}

}  // namespace

TEST_SUITE("popularity") {
  TEST_CASE("zipf against harmonic sums") {
    const auto u = zipf(4, 0.0);
    for (double p : u.pmf) CHECK(p == doctest::Approx(0.25).epsilon(1e-15));

    const auto z3 = zipf(3, 1.0);
    CHECK(z3.pmf[0] == doctest::Approx(6.0 / 11.0).epsilon(1e-14));
    CHECK(z3.pmf[1] == doctest::Approx(3.0 / 11.0).epsilon(1e-14));
    CHECK(z3.pmf[2] == doctest::Approx(2.0 / 11.0).epsilon(1e-14));

    const double h1000 = harmonic(1000, 1.0);
    CHECK(h1000 == doctest::Approx(7.4855).epsilon(1e-5));
    const auto z = zipf(1000, 1.0);
    CHECK(z.pmf[0] == doctest::Approx(1.0 / h1000).epsilon(1e-13));
    CHECK(z.pmf[0] == doctest::Approx(0.13359).epsilon(1e-4));
    CHECK(std::accumulate(z.pmf.begin(), z.pmf.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(z.exponent == 1.0);
    CHECK_THROWS(zipf(0, 1.0));
    CHECK_THROWS(zipf(10, -1.0));
  }

  TEST_CASE("optimal caching: hand value for three files") {
    const auto pop = zipf(3, 1.0);
    const auto c = optimal_caching(0.01, 20.0, pop);
    CHECK(c.pmf[0] == doctest::Approx(0.38086).epsilon(1e-5 / 0.38));
    CHECK(c.pmf[1] == doctest::Approx(0.32570).epsilon(1e-5 / 0.32));
    CHECK(c.pmf[2] == doctest::Approx(0.29344).epsilon(1e-5 / 0.29));
    CHECK(c.cutoff == 3);
    CHECK(offloading_opportunity(0.01, 20.0, pop, c) == doctest::Approx(0.9864).epsilon(1e-4));
  }

  TEST_CASE("optimal caching matches a projected-gradient solver") {
    double worst = 0.0;
    for (std::size_t n : {3u, 10u, 20u}) {
      for (double beta : {0.5, 1.0, 1.5}) {
        const auto pop = zipf(n, beta);
        for (double c : {0.5, 2.0, 10.0, 50.0}) {
          const double density = 0.01;
          const double rc = std::sqrt(c / (density * std::numbers::pi));
          const auto got = optimal_caching(density, rc, pop);
          const auto want = oracle::projected_gradient(pop.pmf, c);
          for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(got.pmf[i] - want[i]));
          CHECK(std::accumulate(got.pmf.begin(), got.pmf.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
          // The cutoff is the last positive entry.
          CHECK(got.pmf[got.cutoff - 1] > 0.0);
          for (std::size_t i = got.cutoff; i < n; ++i) CHECK(got.pmf[i] == 0.0);
        }
      }
    }
    CHECK(worst < 1e-6);
  }

  TEST_CASE("optimal caching limits") {
    const auto pop = zipf(1000, 1.0);
    const auto wide = optimal_caching(0.01, 500.0, pop);
    double dev = 0.0;
    for (double p : wide.pmf) dev = std::max(dev, std::abs(p - 1e-3));
    CHECK(dev < 0.002);

    const auto narrow = optimal_caching(0.01, 1.0, pop);
    CHECK(narrow.pmf[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(narrow.cutoff == 1);
    for (std::size_t i = 1; i < 1000; ++i) CHECK(narrow.pmf[i] == 0.0);
  }

  TEST_CASE("optimal cutoff at the defaults") {
    const auto c = optimal_caching(0.01, 100.0, zipf(1000, 1.0));
    CHECK(c.cutoff == 317);
    CHECK(offloading_opportunity(0.01, 100.0, zipf(1000, 1.0), c) == doctest::Approx(0.713477).epsilon(1e-6));
  }

  TEST_CASE("baselines") {
    const auto u = baseline_caching(CachePolicy::uniform, zipf(4, 1.0));
    for (double p : u.pmf) CHECK(p == doctest::Approx(0.25));
    const auto pop = zipf(3, 1.0);
    const auto pp = baseline_caching(CachePolicy::popularity, pop);
    CHECK(pp.pmf == pop.pmf);
    for (std::size_t n : {1u, 7u, 1000u}) {
      const auto b = baseline_caching(CachePolicy::uniform, zipf(n, 0.8));
      CHECK(std::accumulate(b.pmf.begin(), b.pmf.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-13));
    }
    CHECK(parse_cache_policy("popularity") == CachePolicy::popularity);
    CHECK_THROWS(parse_cache_policy("lru"));
  }

  TEST_CASE("offloading opportunity special cases") {
    const auto pop = zipf(1000, 1.0);
    const auto c = optimal_caching(0.01, 100.0, pop);
    CHECK(offloading_opportunity(0.01, 0.0, pop, c) == 0.0);
    for (double beta : {0.3, 1.0, 2.0}) {
      const auto p = zipf(50, beta);
      CachingDistribution one;
      one.pmf.assign(50, 0.0);
      one.pmf[0] = 1.0;
      one.cutoff = 1;
      const double want = p.pmf[0] * -std::expm1(-0.01 * std::numbers::pi * 30.0 * 30.0);
      CHECK(offloading_opportunity(0.01, 30.0, p, one) == doctest::Approx(want).epsilon(1e-14));
    }
    // Optimal placement beats both baselines.
    const double opt = offloading_opportunity(0.01, 100.0, pop, c);
    CHECK(opt >= offloading_opportunity(0.01, 100.0, pop, baseline_caching(CachePolicy::uniform, pop)));
    CHECK(opt >= offloading_opportunity(0.01, 100.0, pop, baseline_caching(CachePolicy::popularity, pop)));
  }
}
