#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "d2d/config.hpp"
#include "d2d/popularity.hpp"

namespace d2d {

enum class Scheme { full_reuse, tdma };
std::string_view to_string(Scheme scheme);
Scheme parse_scheme(std::string_view name);

/// How a helper requested by several receivers in the same round is handled.
///   shared:    every receiver links to its nearest cached helper; a DT may
///              serve several receivers (the transmitter model of the analysis).
///   exclusive: a helper serves one receiver; pairs are matched greedily by
///              distance and losers fall back to their next free helper.
enum class ConflictPolicy { shared, exclusive };
std::string_view to_string(ConflictPolicy policy);
ConflictPolicy parse_conflict_policy(std::string_view name);

/// plain: the square cell as is. torus: distances wrap around the cell edges.
enum class Boundary { plain, torus };
std::string_view to_string(Boundary boundary);
Boundary parse_boundary(std::string_view name);

/// Multi-request battery accounting.
///   battery: each user starts with Q V0; a request may use
///            min(rho Q V0, remaining); empty batteries are ineligible.
///   budget:  a helper is ineligible once its cumulative spend reaches rho Q V0.
enum class DepletionRule { battery, budget };
std::string_view to_string(DepletionRule rule);
DepletionRule parse_depletion_rule(std::string_view name);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// One operating point evaluated in every drop.
struct McPoint {
  Scheme scheme = Scheme::full_reuse;
  double tx_power = 0.0;
  double battery_fraction = 0.0;
};

struct McScenario {
  std::size_t requests_per_user = 1;  // N_r
  bool self_offload = false;
  bool truncate_interference = false;   // only DTs within r_max interfere
  bool realistic_interference = false;  // DTs stop interfering once done
  ConflictPolicy conflict = ConflictPolicy::shared;
  Boundary boundary = Boundary::plain;
  DepletionRule depletion = DepletionRule::battery;
};

struct Link {
  std::uint32_t receiver = 0;
  std::uint32_t transmitter = 0;
  std::uint32_t file = 0;
  double distance = 0.0;
  double fading = 1.0;        // h
  double interference = 0.0;  // sum_j h_j r_j^-alpha over other active DTs
  bool self = false;          // served from the receiver's own cache
};

struct NetworkRealization {
  std::vector<Point> positions;
  std::vector<std::vector<std::uint32_t>> cached_files;  // M per user
  std::vector<std::vector<std::uint32_t>> requests;      // N_r per user
  std::vector<Link> links;                                // first round
};

struct DropMetrics {
  std::uint64_t n_requests = 0;
  std::uint64_t n_found = 0;
  std::uint64_t n_complete = 0;
  std::uint64_t n_links = 0;  // D2D links, self-served excluded
  std::uint64_t self_offloaded = 0;
  std::uint64_t n_transmitters = 0;  // distinct DTs in the first round
  std::uint64_t budget_violations = 0;
  double delivered_bits = 0.0;
  double total_bits = 0.0;
  double dt_energy = 0.0;          // J, summed over D2D links
  double max_link_energy = 0.0;    // J, largest single-request spend
  double max_link_budget = 0.0;    // J, budget of that request
};

struct McEstimate {
  double mean = 0.0;
  double half_width_95 = 0.0;
  std::size_t n_drops = 0;
};

struct McResult {
  McPoint point;
  std::map<std::string, McEstimate> metrics;  // opportunity, probability, ratio, energy_cost, dt_density
  std::uint64_t budget_violations = 0;
  double max_energy_over_budget = 0.0;  // max over drops of spend / budget
};

/// Per-drop seed, a pure function of (base_seed, drop index).
std::uint64_t drop_seed(std::uint64_t base_seed, std::uint64_t drop);

/// Homogeneous PPP on [0, side]^2.
std::vector<Point> sample_ppp(double density, double side, std::mt19937_64& rng);
std::vector<Point> sample_ppp(double density, double side, std::uint64_t seed);

/// M = 1: one draw from p_c per user. M > 1: M distinct files drawn
/// sequentially without replacement.
std::vector<std::vector<std::uint32_t>> assign_caches(std::size_t n_users, const CachingDistribution& cache,
                                                      std::size_t slots, std::mt19937_64& rng);

std::vector<std::vector<std::uint32_t>> draw_requests(std::size_t n_users, const Popularity& pop,
                                                      std::size_t per_user, std::mt19937_64& rng);

/// Geometry of one request round: nearest eligible helper within r_c.
/// eligible may be empty (everyone eligible). Fading and interference are
/// left at their defaults.
std::vector<Link> establish_links(const NetworkRealization& net, const SystemConfig& cfg, std::size_t round,
                                  const McScenario& scenario, const std::vector<char>& eligible);

/// One drop evaluated at every operating point.
std::vector<DropMetrics> simulate_drop(const SystemConfig& cfg, const Popularity& pop, const CachingDistribution& cache,
                                       const McScenario& scenario, const std::vector<McPoint>& points,
                                       std::uint64_t seed, NetworkRealization* keep = nullptr);

/// Ratio-of-sums estimate sum(num) / sum(den) with a delta-method 95% half-width.
McEstimate ratio_estimate(const std::vector<double>& num, const std::vector<double>& den);

/// Runs n_drops drops (threads = 0 picks the hardware concurrency) and
/// reduces them in drop order, so results do not depend on scheduling.
std::vector<McResult> run_monte_carlo(const SystemConfig& cfg, const Popularity& pop, const CachingDistribution& cache,
                                      const McScenario& scenario, const std::vector<McPoint>& points,
                                      std::size_t n_drops, std::uint64_t base_seed, unsigned threads = 0);

}  // namespace d2d
