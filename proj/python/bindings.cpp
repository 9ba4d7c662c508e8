#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "d2d/config.hpp"
#include "d2d/experiments.hpp"
#include "d2d/fullreuse.hpp"
#include "d2d/montecarlo.hpp"
#include "d2d/popularity.hpp"
#include "d2d/power.hpp"
#include "d2d/specfun.hpp"
#include "d2d/tdma.hpp"

namespace py = pybind11;
using namespace d2d;

namespace {

SystemConfig config_from(const py::dict& overrides) {
  ParameterMap raw = default_parameters();
  for (const auto& [k, v] : overrides) apply_override(raw, py::str(k).cast<std::string>() + "=" + py::str(v).cast<std::string>());
  return validate(raw);
}

py::dict metrics_dict(const AnalyticMetrics& m) {
  py::dict d;
  d["p_o"] = m.opportunity;
  d["p"] = m.probability;
  d["pa"] = m.ratio;
  d["E_complete"] = m.energy_complete;
  d["E_bar"] = m.energy_average;
  d["e"] = m.energy_cost;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Cache-enabled D2D offloading under battery budgets";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<CachingError>(m, "CachingError", PyExc_RuntimeError);

  py::enum_<Scheme>(m, "Scheme").value("full_reuse", Scheme::full_reuse).value("tdma", Scheme::tdma);
  py::enum_<CachePolicy>(m, "CachePolicy")
      .value("optimal", CachePolicy::optimal)
      .value("uniform", CachePolicy::uniform)
      .value("popularity", CachePolicy::popularity);
  py::enum_<Boundary>(m, "Boundary").value("plain", Boundary::plain).value("torus", Boundary::torus);

  py::class_<SystemConfig>(m, "SystemConfig")
      .def_readwrite("user_density", &SystemConfig::user_density)
      .def_readwrite("collab_distance", &SystemConfig::collab_distance)
      .def_readwrite("battery_fraction", &SystemConfig::battery_fraction)
      .def_readwrite("bandwidth", &SystemConfig::bandwidth)
      .def_readwrite("noise_power", &SystemConfig::noise_power)
      .def_readwrite("pathloss_exponent", &SystemConfig::pathloss_exponent)
      .def_readwrite("pathloss_gain", &SystemConfig::pathloss_gain)
      .def_readwrite("file_size", &SystemConfig::file_size)
      .def_readwrite("catalog_size", &SystemConfig::catalog_size)
      .def_readwrite("zipf_exponent", &SystemConfig::zipf_exponent)
      .def_readwrite("max_tx_power", &SystemConfig::max_tx_power)
      .def_readwrite("tx_circuit_power", &SystemConfig::tx_circuit_power)
      .def_readwrite("idle_power", &SystemConfig::idle_power)
      .def_readwrite("pa_efficiency", &SystemConfig::pa_efficiency)
      .def_readwrite("battery_capacity", &SystemConfig::battery_capacity)
      .def_readwrite("operating_voltage", &SystemConfig::operating_voltage)
      .def_readwrite("cell_side", &SystemConfig::cell_side)
      .def_readwrite("interference_truncation", &SystemConfig::interference_truncation)
      .def_readwrite("cache_slots", &SystemConfig::cache_slots)
      .def("to_text", [](const SystemConfig& c) { return to_config_text(c); });

  m.def("config", &config_from, py::arg("overrides") = py::dict(),
        "Default parameters with key=value overrides, e.g. config({'collab_distance_m': 50}).");
  m.def("parse_config_text", [](const std::string& text) { return validate(parse_config_text(text)); });

  m.def("zipf", [](std::size_t n, double beta) { return zipf(n, beta).pmf; }, py::arg("catalog_size"),
        py::arg("beta"));
  m.def(
      "optimal_caching",
      [](double density, double rc, std::size_t n, double beta) {
        return optimal_caching(density, rc, zipf(n, beta)).pmf;
      },
      py::arg("density"), py::arg("collab_distance"), py::arg("catalog_size"), py::arg("beta"));
  m.def(
      "offloading_opportunity",
      [](const SystemConfig& cfg, CachePolicy policy) {
        const auto pop = zipf(cfg.catalog_size, cfg.zipf_exponent);
        return offloading_opportunity(cfg.user_density, cfg.collab_distance, pop, make_cache(cfg, pop, policy));
      },
      py::arg("cfg"), py::arg("policy") = CachePolicy::optimal);

  m.def("upper_gamma", &upper_gamma);
  m.def("expint_e1", &expint_e1);
  m.def("expint_ei", &expint_ei);
  m.def("xi1", &xi1);
  m.def("xi2", &xi2);

  m.def(
      "analytic",
      [](const SystemConfig& cfg, Scheme scheme, double tx_power, double rho, CachePolicy policy) {
        const auto pop = zipf(cfg.catalog_size, cfg.zipf_exponent);
        return metrics_dict(analytic_metrics(cfg, pop, make_cache(cfg, pop, policy), scheme, tx_power, rho));
      },
      py::arg("cfg"), py::arg("scheme"), py::arg("tx_power"), py::arg("rho"), py::arg("policy") = CachePolicy::optimal,
      "Analytic metrics; tx_power in W.");

  m.def(
      "optimal_power",
      [](const SystemConfig& cfg, Scheme scheme, double rho) {
        const auto pop = zipf(cfg.catalog_size, cfg.zipf_exponent);
        const auto r = optimal_power(cfg, pop, make_cache(cfg, pop, CachePolicy::optimal), scheme, rho);
        py::dict d;
        d["p_star"] = r.p_star;
        d["objective"] = r.objective;
        d["clamped"] = r.clamped;
        d["method"] = std::string(to_string(r.method));
        return d;
      },
      py::arg("cfg"), py::arg("scheme"), py::arg("rho"));

  m.def(
      "monte_carlo",
      [](const SystemConfig& cfg, Scheme scheme, const std::vector<double>& tx_powers, double rho, std::size_t drops,
         std::uint64_t seed, Boundary boundary, std::size_t requests, bool self_offload, bool truncate) {
        const auto pop = zipf(cfg.catalog_size, cfg.zipf_exponent);
        const auto cache = make_cache(cfg, pop, CachePolicy::optimal);
        McScenario sc;
        sc.boundary = boundary;
        sc.requests_per_user = requests;
        sc.self_offload = self_offload;
        sc.truncate_interference = truncate;
        std::vector<McPoint> pts;
        for (double p : tx_powers) pts.push_back({scheme, p, rho});
        std::vector<McResult> res;
        {
          py::gil_scoped_release nogil;
          res = run_monte_carlo(cfg, pop, cache, sc, pts, drops, seed);
        }
        py::list out;
        for (const auto& r : res) {
          py::dict d;
          d["tx_power"] = r.point.tx_power;
          for (const auto& [name, est] : r.metrics) d[py::str(name)] = py::make_tuple(est.mean, est.half_width_95);
          d["budget_violations"] = r.budget_violations;
          out.append(d);
        }
        return out;
      },
      py::arg("cfg"), py::arg("scheme"), py::arg("tx_powers"), py::arg("rho"), py::arg("drops") = 100,
      py::arg("seed") = 1, py::arg("boundary") = Boundary::plain, py::arg("requests") = 1,
      py::arg("self_offload") = false, py::arg("truncate") = false,
      "Monte Carlo estimates as {metric: (mean, 95% half-width)} per power.");

  m.def(
      "figure_csv",
      [](const std::string& name, std::uint64_t seed) {
        const auto cfg = default_config();
        Table all;
        for (const auto& spec : figure_preset(name, false)) {
          auto t = run_sweep(cfg, spec, seed);
          if (all.columns.empty()) all.columns = t.columns;
          for (auto& r : t.rows) all.rows.push_back(std::move(r));
        }
        return all.to_csv();
      },
      py::arg("name"), py::arg("seed") = 1, py::call_guard<py::gil_scoped_release>());
}
