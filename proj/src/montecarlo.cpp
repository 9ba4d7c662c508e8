#include "d2d/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <tuple>

namespace d2d {

std::string_view to_string(Scheme scheme) { return scheme == Scheme::full_reuse ? "full-reuse" : "tdma"; }

Scheme parse_scheme(std::string_view name) {
  if (name == "full-reuse" || name == "full_reuse") return Scheme::full_reuse;
  if (name == "tdma") return Scheme::tdma;
  throw std::invalid_argument("unknown scheme '" + std::string(name) + "'");
}

std::string_view to_string(ConflictPolicy policy) { return policy == ConflictPolicy::shared ? "shared" : "exclusive"; }

ConflictPolicy parse_conflict_policy(std::string_view name) {
  if (name == "shared") return ConflictPolicy::shared;
  if (name == "exclusive") return ConflictPolicy::exclusive;
  throw std::invalid_argument("unknown conflict policy '" + std::string(name) + "'");
}

std::string_view to_string(Boundary boundary) { return boundary == Boundary::plain ? "plain" : "torus"; }

Boundary parse_boundary(std::string_view name) {
  if (name == "plain") return Boundary::plain;
  if (name == "torus") return Boundary::torus;
  throw std::invalid_argument("unknown boundary '" + std::string(name) + "'");
}

std::string_view to_string(DepletionRule rule) { return rule == DepletionRule::battery ? "battery" : "budget"; }

DepletionRule parse_depletion_rule(std::string_view name) {
  if (name == "battery") return DepletionRule::battery;
  if (name == "budget") return DepletionRule::budget;
  throw std::invalid_argument("unknown depletion rule '" + std::string(name) + "'");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double distance(const Point& a, const Point& b, Boundary boundary, double side) {
  double dx = std::abs(a.x - b.x);
  double dy = std::abs(a.y - b.y);
  if (boundary == Boundary::torus) {
    dx = std::min(dx, side - dx);
    dy = std::min(dy, side - dy);
  }
  return std::hypot(dx, dy);
}

bool caches(const std::vector<std::uint32_t>& files, std::uint32_t f) {
  return std::find(files.begin(), files.end(), f) != files.end();
}

// Link quality and energy for one operating point.
struct LinkOutcome {
  double spent = 0.0;
  double delivered = 0.0;
  bool complete = false;
};

LinkOutcome serve(double sinr, double power, double budget, const SystemConfig& cfg) {
  const double rate = cfg.bandwidth * std::log2(1.0 + sinr);
  const double needed = rate > 0.0 ? cfg.file_size / rate * power : std::numeric_limits<double>::infinity();
  LinkOutcome out;
  out.complete = needed <= budget;
  out.spent = std::min(needed, budget);
  out.delivered = out.complete ? cfg.file_size : cfg.file_size * (budget / needed);
  return out;
}

double path_gain(double d, double alpha) { return std::pow(d, -alpha); }

// Transmitters of the non-self links, ascending.
std::vector<std::uint32_t> transmitters_of(const std::vector<Link>& links) {
  std::vector<std::uint32_t> dts;
  for (const auto& l : links)
    if (!l.self) dts.push_back(l.transmitter);
  std::sort(dts.begin(), dts.end());
  dts.erase(std::unique(dts.begin(), dts.end()), dts.end());
  return dts;
}

struct Contribution {
  std::uint32_t link;
  double value;
};

// Draws link fading and, for full reuse, the per-interferer terms. When
// per_dt is non-null the individual contributions are kept for the
// realistic-interference mode.
void draw_channels(std::vector<Link>& links, const NetworkRealization& net, const SystemConfig& cfg,
                   const McScenario& scenario, bool need_interference, std::mt19937_64& rng,
                   std::vector<std::vector<Contribution>>* per_dt) {
  std::exponential_distribution<double> exp1(1.0);
  for (auto& l : links) l.fading = l.self ? 1.0 : exp1(rng);
  if (!need_interference) return;
  const auto dts = transmitters_of(links);
  if (per_dt) per_dt->assign(dts.size(), {});
  const double alpha = cfg.pathloss_exponent;
  const double cap = cfg.interference_truncation;
  for (std::uint32_t k = 0; k < links.size(); ++k) {
    Link& l = links[k];
    if (l.self) continue;
    double sum = 0.0;
    for (std::size_t j = 0; j < dts.size(); ++j) {
      const std::uint32_t dt = dts[j];
      // A DT does not interfere with its own receiver, and a receiver that is
      // itself transmitting is not hit by its own signal.
      if (dt == l.transmitter || dt == l.receiver) continue;
      const double d = distance(net.positions[l.receiver], net.positions[dt], scenario.boundary, cfg.cell_side);
      if (scenario.truncate_interference && d > cap) continue;
      const double c = exp1(rng) * path_gain(d, alpha);
      sum += c;
      if (per_dt) (*per_dt)[j].push_back({k, c});
    }
    l.interference = sum;
  }
}

struct PointContext {
  double power = 0.0;        // P_t / eta + circuit, W
  double noise = 0.0;        // sigma^2 / (P_t K)
  bool interference = true;  // false for TDMA
};

PointContext point_context(const SystemConfig& cfg, const McPoint& pt, std::size_t n_d2d_links) {
  PointContext pc;
  pc.noise = cfg.noise_power / (pt.tx_power * cfg.pathloss_gain);
  if (pt.scheme == Scheme::full_reuse) {
    pc.power = pt.tx_power / cfg.pa_efficiency + cfg.tx_circuit_power;
  } else {
    const double receivers = static_cast<double>(n_d2d_links);
    const double total_circuit = cfg.tx_circuit_power + std::max(receivers - 1.0, 0.0) * cfg.idle_power;
    pc.power = pt.tx_power / cfg.pa_efficiency + total_circuit;
    pc.interference = false;
  }
  return pc;
}

void record(DropMetrics& m, const LinkOutcome& o, double budget, double cap) {
  ++m.n_found;
  ++m.n_links;
  if (o.complete) ++m.n_complete;
  m.delivered_bits += o.delivered;
  m.dt_energy += o.spent;
  if (o.spent > cap) ++m.budget_violations;
  if (budget > 0.0 && o.spent / budget >= m.max_link_energy / std::max(m.max_link_budget, 1e-300)) {
    m.max_link_energy = o.spent;
    m.max_link_budget = budget;
  }
}

void record_self(DropMetrics& m, const SystemConfig& cfg) {
  ++m.n_found;
  ++m.n_complete;
  ++m.self_offloaded;
  m.delivered_bits += cfg.file_size;
}

// Event-driven variant: a DT stops interfering once all of its links have
// finished or run out of budget. Budgets are given per link.
std::vector<LinkOutcome> serve_realistic(const std::vector<Link>& links, const std::vector<double>& budgets,
                                         const std::vector<std::vector<Contribution>>& per_dt,
                                         const PointContext& pc, const SystemConfig& cfg) {
  const auto dts = transmitters_of(links);
  const std::size_t n = links.size();
  std::vector<double> interference(n), bits(n, cfg.file_size), energy(budgets);
  std::vector<char> active(n, 0);
  std::vector<std::size_t> open_links(dts.size(), 0);
  std::vector<std::size_t> dt_index(n, 0);
  for (std::size_t k = 0; k < n; ++k) {
    if (links[k].self) continue;
    interference[k] = links[k].interference;
    dt_index[k] = static_cast<std::size_t>(std::lower_bound(dts.begin(), dts.end(), links[k].transmitter) - dts.begin());
    active[k] = 1;
    ++open_links[dt_index[k]];
  }
  const double alpha = cfg.pathloss_exponent;
  std::size_t remaining = static_cast<std::size_t>(std::count(active.begin(), active.end(), 1));
  std::vector<double> rate(n, 0.0);
  while (remaining > 0) {
    double step = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k]) continue;
      const double sinr = links[k].fading * path_gain(links[k].distance, alpha) / (std::max(interference[k], 0.0) + pc.noise);
      rate[k] = cfg.bandwidth * std::log2(1.0 + sinr);
      const double t_bits = rate[k] > 0.0 ? bits[k] / rate[k] : std::numeric_limits<double>::infinity();
      step = std::min({step, t_bits, energy[k] / pc.power});
    }
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k]) continue;
      const double t_bits = rate[k] > 0.0 ? bits[k] / rate[k] : std::numeric_limits<double>::infinity();
      const double t_energy = energy[k] / pc.power;
      const bool done = std::min(t_bits, t_energy) <= step * (1.0 + 1e-12);
      bits[k] = t_bits <= step * (1.0 + 1e-12) ? 0.0 : bits[k] - rate[k] * step;
      energy[k] = std::max(energy[k] - pc.power * step, 0.0);
      if (!done) continue;
      active[k] = 0;
      --remaining;
      if (--open_links[dt_index[k]] == 0)
        for (const auto& c : per_dt[dt_index[k]]) interference[c.link] -= c.value;
    }
  }
  std::vector<LinkOutcome> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (links[k].self) continue;
    out[k].complete = bits[k] <= cfg.file_size * 1e-12;
    out[k].spent = std::min(budgets[k] - energy[k], budgets[k]);
    out[k].delivered = cfg.file_size - bits[k];
  }
  return out;
}

// Budgets for one round: rho Q V0, or for multi-request with the battery rule
// min(rho Q V0, remaining / links of that DT in this round).
std::vector<double> round_budgets(const std::vector<Link>& links, double cap, const std::vector<double>* battery) {
  std::vector<double> budgets(links.size(), cap);
  if (!battery) return budgets;
  std::map<std::uint32_t, std::size_t> per_dt;
  for (const auto& l : links)
    if (!l.self) ++per_dt[l.transmitter];
  for (std::size_t k = 0; k < links.size(); ++k)
    if (!links[k].self)
      budgets[k] = std::min(cap, (*battery)[links[k].transmitter] / static_cast<double>(per_dt[links[k].transmitter]));
  return budgets;
}

void evaluate_round(const std::vector<Link>& links, const std::vector<std::vector<Contribution>>* per_dt,
                    const SystemConfig& cfg, const McScenario& scenario, const McPoint& pt, DropMetrics& m,
                    std::vector<double>* battery, std::vector<double>* spent_total) {
  std::size_t d2d = 0;
  for (const auto& l : links) d2d += l.self ? 0 : 1;
  const PointContext pc = point_context(cfg, pt, d2d);
  const double cap = pt.battery_fraction * cfg.battery_energy();
  const bool use_battery = battery && scenario.depletion == DepletionRule::battery;
  const double alpha = cfg.pathloss_exponent;

  if (scenario.realistic_interference && pc.interference && per_dt) {
    const auto budgets = round_budgets(links, cap, use_battery ? battery : nullptr);
    const auto outcomes = serve_realistic(links, budgets, *per_dt, pc, cfg);
    for (std::size_t k = 0; k < links.size(); ++k) {
      if (links[k].self) {
        record_self(m, cfg);
        continue;
      }
      record(m, outcomes[k], budgets[k], cap);
      if (battery) (*battery)[links[k].transmitter] -= outcomes[k].spent;
      if (spent_total) (*spent_total)[links[k].transmitter] += outcomes[k].spent;
    }
    return;
  }

  for (const auto& l : links) {
    if (l.self) {
      record_self(m, cfg);
      continue;
    }
    const double budget = use_battery ? std::min(cap, std::max((*battery)[l.transmitter], 0.0)) : cap;
    const double denom = (pc.interference ? l.interference : 0.0) + pc.noise;
    const LinkOutcome o = serve(l.fading * path_gain(l.distance, alpha) / denom, pc.power, budget, cfg);
    record(m, o, budget, cap);
    if (battery) (*battery)[l.transmitter] -= o.spent;
    if (spent_total) (*spent_total)[l.transmitter] += o.spent;
  }
}

}  // namespace

std::uint64_t drop_seed(std::uint64_t base_seed, std::uint64_t drop) {
  return splitmix64(splitmix64(base_seed) ^ (drop * 0xD1B54A32D192ED03ULL + 1));
}

std::vector<Point> sample_ppp(double density, double side, std::mt19937_64& rng) {
  if (!(density >= 0.0) || !(side > 0.0)) throw std::invalid_argument("sample_ppp needs density >= 0 and side > 0");
  std::vector<Point> pts;
  if (density == 0.0) return pts;
  std::poisson_distribution<std::uint64_t> count(density * side * side);
  std::uniform_real_distribution<double> coord(0.0, side);
  pts.resize(count(rng));
  for (auto& p : pts) {
    p.x = coord(rng);
    p.y = coord(rng);
  }
  return pts;
}

std::vector<Point> sample_ppp(double density, double side, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_ppp(density, side, rng);
}

std::vector<std::vector<std::uint32_t>> assign_caches(std::size_t n_users, const CachingDistribution& cache,
                                                      std::size_t slots, std::mt19937_64& rng) {
  if (slots < 1) throw std::invalid_argument("cache_slots must be >= 1");
  const auto support = static_cast<std::size_t>(
      std::count_if(cache.pmf.begin(), cache.pmf.end(), [](double p) { return p > 0.0; }));
  if (slots > support)
    throw std::invalid_argument("cache_slots exceeds the number of files with positive caching probability");
  std::vector<std::vector<std::uint32_t>> out(n_users);
  std::discrete_distribution<std::uint32_t> first(cache.pmf.begin(), cache.pmf.end());
  for (auto& files : out) {
    files.push_back(first(rng));
    if (slots == 1) continue;
    std::vector<double> w = cache.pmf;
    w[files.back()] = 0.0;
    while (files.size() < slots) {
      std::discrete_distribution<std::uint32_t> next(w.begin(), w.end());
      files.push_back(next(rng));
      w[files.back()] = 0.0;
    }
  }
  return out;
}

std::vector<std::vector<std::uint32_t>> draw_requests(std::size_t n_users, const Popularity& pop,
                                                      std::size_t per_user, std::mt19937_64& rng) {
  std::discrete_distribution<std::uint32_t> pick(pop.pmf.begin(), pop.pmf.end());
  std::vector<std::vector<std::uint32_t>> out(n_users);
  for (auto& r : out) {
    r.resize(per_user);
    for (auto& f : r) f = pick(rng);
  }
  return out;
}

std::vector<Link> establish_links(const NetworkRealization& net, const SystemConfig& cfg, std::size_t round,
                                  const McScenario& scenario, const std::vector<char>& eligible) {
  const std::size_t n = net.positions.size();
  std::map<std::uint32_t, std::vector<std::uint32_t>> holders;
  for (std::uint32_t u = 0; u < n; ++u)
    if (eligible.empty() || eligible[u])
      for (auto f : net.cached_files[u]) holders[f].push_back(u);

  struct Candidate {
    double d;
    std::uint32_t rx, tx, file;
  };
  std::vector<Link> links;
  std::vector<Candidate> pairs;
  for (std::uint32_t u = 0; u < n; ++u) {
    if (round >= net.requests[u].size()) continue;
    const std::uint32_t f = net.requests[u][round];
    if (scenario.self_offload && caches(net.cached_files[u], f)) {
      links.push_back({u, u, f, 0.0, 1.0, 0.0, true});
      continue;
    }
    const auto it = holders.find(f);
    if (it == holders.end()) continue;
    Candidate best{std::numeric_limits<double>::infinity(), u, 0, f};
    for (auto v : it->second) {
      if (v == u) continue;
      const double d = distance(net.positions[u], net.positions[v], scenario.boundary, cfg.cell_side);
      if (d > cfg.collab_distance) continue;
      if (scenario.conflict == ConflictPolicy::exclusive) {
        pairs.push_back({d, u, v, f});
      } else if (d < best.d) {
        best = {d, u, v, f};
      }
    }
    if (scenario.conflict == ConflictPolicy::shared && std::isfinite(best.d))
      links.push_back({u, best.tx, f, best.d, 1.0, 0.0, false});
  }
  if (scenario.conflict == ConflictPolicy::exclusive) {
    std::sort(pairs.begin(), pairs.end(), [](const Candidate& a, const Candidate& b) {
      return std::tie(a.d, a.rx, a.tx) < std::tie(b.d, b.rx, b.tx);
    });
    std::vector<char> rx_done(n, 0), tx_busy(n, 0);
    for (const auto& l : links) rx_done[l.receiver] = 1;
    for (const auto& c : pairs) {
      if (rx_done[c.rx] || tx_busy[c.tx]) continue;
      rx_done[c.rx] = 1;
      tx_busy[c.tx] = 1;
      links.push_back({c.rx, c.tx, c.file, c.d, 1.0, 0.0, false});
    }
  }
  std::sort(links.begin(), links.end(), [](const Link& a, const Link& b) { return a.receiver < b.receiver; });
  return links;
}

std::vector<DropMetrics> simulate_drop(const SystemConfig& cfg, const Popularity& pop, const CachingDistribution& cache,
                                       const McScenario& scenario, const std::vector<McPoint>& points,
                                       std::uint64_t seed, NetworkRealization* keep) {
  if (scenario.requests_per_user < 1) throw std::invalid_argument("requests_per_user must be >= 1");
  std::mt19937_64 rng(seed);
  NetworkRealization net;
  net.positions = sample_ppp(cfg.user_density, cfg.cell_side, rng);
  const std::size_t n = net.positions.size();
  net.cached_files = assign_caches(n, cache, cfg.cache_slots, rng);
  net.requests = draw_requests(n, pop, scenario.requests_per_user, rng);
  const std::uint64_t per_request = n;

  const bool any_full_reuse = std::any_of(points.begin(), points.end(),
                                          [](const McPoint& p) { return p.scheme == Scheme::full_reuse; });
  std::vector<DropMetrics> out(points.size());

  if (scenario.requests_per_user == 1) {
    net.links = establish_links(net, cfg, 0, scenario, {});
    std::vector<std::vector<Contribution>> per_dt;
    draw_channels(net.links, net, cfg, scenario, any_full_reuse, rng,
                  scenario.realistic_interference ? &per_dt : nullptr);
    const auto n_dts = transmitters_of(net.links).size();
    for (std::size_t k = 0; k < points.size(); ++k) {
      DropMetrics& m = out[k];
      m.n_requests = per_request;
      m.total_bits = static_cast<double>(per_request) * cfg.file_size;
      m.n_transmitters = n_dts;
      evaluate_round(net.links, scenario.realistic_interference ? &per_dt : nullptr, cfg, scenario, points[k], m,
                     nullptr, nullptr);
    }
  } else {
    // Each operating point replays the same users, caches and requests; link
    // channels use a stream derived from the drop seed and the point index.
    for (std::size_t k = 0; k < points.size(); ++k) {
      std::mt19937_64 channel_rng(splitmix64(seed ^ (0xA5A5A5A5ULL + k)));
      DropMetrics& m = out[k];
      const double cap = points[k].battery_fraction * cfg.battery_energy();
      std::vector<double> battery(n, cfg.battery_energy());
      std::vector<double> spent(n, 0.0);
      std::vector<char> eligible(n, 1);
      for (std::size_t round = 0; round < scenario.requests_per_user; ++round) {
        for (std::size_t u = 0; u < n; ++u)
          eligible[u] = scenario.depletion == DepletionRule::battery ? battery[u] > 0.0 : spent[u] < cap;
        auto links = establish_links(net, cfg, round, scenario, eligible);
        std::vector<std::vector<Contribution>> per_dt;
        const bool fr = points[k].scheme == Scheme::full_reuse;
        draw_channels(links, net, cfg, scenario, fr, channel_rng,
                      fr && scenario.realistic_interference ? &per_dt : nullptr);
        if (round == 0) {
          m.n_transmitters = transmitters_of(links).size();
          if (keep && k == 0) net.links = links;
        }
        m.n_requests += per_request;
        m.total_bits += static_cast<double>(per_request) * cfg.file_size;
        evaluate_round(links, per_dt.empty() ? nullptr : &per_dt, cfg, scenario, points[k], m, &battery, &spent);
      }
    }
  }
  if (keep) *keep = std::move(net);
  return out;
}

McEstimate ratio_estimate(const std::vector<double>& num, const std::vector<double>& den) {
  if (num.size() != den.size()) throw std::invalid_argument("ratio_estimate: size mismatch");
  McEstimate e;
  e.n_drops = num.size();
  const double sx = std::accumulate(num.begin(), num.end(), 0.0);
  const double sy = std::accumulate(den.begin(), den.end(), 0.0);
  if (sy == 0.0) return e;
  e.mean = sx / sy;
  const std::size_t n = num.size();
  if (n < 2) return e;
  double ss = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double r = num[k] - e.mean * den[k];
    ss += r * r;
  }
  const double ybar = sy / static_cast<double>(n);
  e.half_width_95 = 1.959963984540054 * std::sqrt(ss / (n - 1.0) / static_cast<double>(n)) / ybar;
  return e;
}

std::vector<McResult> run_monte_carlo(const SystemConfig& cfg, const Popularity& pop, const CachingDistribution& cache,
                                      const McScenario& scenario, const std::vector<McPoint>& points,
                                      std::size_t n_drops, std::uint64_t base_seed, unsigned threads) {
  if (n_drops < 2) throw std::invalid_argument("n_drops must be >= 2");
  if (points.empty()) throw std::invalid_argument("no operating points");
  validate(serialize(cfg));
  std::vector<std::vector<DropMetrics>> drops(n_drops);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_drops));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= n_drops) return;
      try {
        drops[k] = simulate_drop(cfg, pop, cache, scenario, points, drop_seed(base_seed, k));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n_drops;
        return;
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<McResult> out(points.size());
  const double area = cfg.cell_area();
  for (std::size_t p = 0; p < points.size(); ++p) {
    std::vector<double> found(n_drops), complete(n_drops), requests(n_drops), delivered(n_drops), bits(n_drops),
        energy(n_drops), served(n_drops), dts(n_drops), areas(n_drops, area);
    McResult& r = out[p];
    r.point = points[p];
    for (std::size_t k = 0; k < n_drops; ++k) {
      const DropMetrics& m = drops[k][p];
      found[k] = static_cast<double>(m.n_found);
      complete[k] = static_cast<double>(m.n_complete);
      requests[k] = static_cast<double>(m.n_requests);
      delivered[k] = m.delivered_bits;
      bits[k] = m.total_bits;
      energy[k] = m.dt_energy / cfg.battery_energy();
      served[k] = static_cast<double>(m.n_links + m.self_offloaded);
      dts[k] = static_cast<double>(m.n_transmitters);
      r.budget_violations += m.budget_violations;
      if (m.max_link_budget > 0.0)
        r.max_energy_over_budget = std::max(r.max_energy_over_budget, m.max_link_energy / m.max_link_budget);
    }
    r.metrics["opportunity"] = ratio_estimate(found, requests);
    r.metrics["probability"] = ratio_estimate(complete, requests);
    r.metrics["ratio"] = ratio_estimate(delivered, bits);
    r.metrics["energy_cost"] = ratio_estimate(energy, served);
    r.metrics["dt_density"] = ratio_estimate(dts, areas);
  }
  return out;
}

}  // namespace d2d
