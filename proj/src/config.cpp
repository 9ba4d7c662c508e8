#include "d2d/config.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <vector>

namespace d2d {

namespace {

struct UnitVariant {
  std::string_view key;
  double scale;  // SI value = raw * scale, unless `convert` is set
  double (*convert)(double) = nullptr;
};

struct FieldSpec {
  std::string_view name;  // human-readable field name used in messages
  std::vector<UnitVariant> variants;
};

double dbm_convert(double v) { return dbm_to_watt(v); }
double db_convert(double v) { return std::pow(10.0, v / 10.0); }

// Order matches SystemConfig. The first variant is the SI key used by serialize().
const std::vector<FieldSpec>& field_specs() {
  static const std::vector<FieldSpec> specs = {
      {"user_density", {{"user_density", 1.0}}},
      {"collab_distance", {{"collab_distance_m", 1.0}}},
      {"battery_fraction", {{"battery_fraction", 1.0}}},
      {"bandwidth", {{"bandwidth_hz", 1.0}, {"bandwidth_mhz", 1e6}}},
      {"noise_power", {{"noise_power_w", 1.0}, {"noise_power_dbm", 0.0, dbm_convert}}},
      {"pathloss_exponent", {{"pathloss_exponent", 1.0}}},
      {"pathloss_gain", {{"pathloss_gain", 1.0}, {"pathloss_gain_db", 0.0, db_convert}}},
      {"file_size", {{"file_size_bits", 1.0}, {"file_size_mbytes", 8e6}}},
      {"catalog_size", {{"catalog_size", 1.0}}},
      {"zipf_exponent", {{"zipf_exponent", 1.0}}},
      {"max_tx_power", {{"max_tx_power_w", 1.0}, {"max_tx_power_mw", 1e-3}}},
      {"tx_circuit_power", {{"tx_circuit_power_w", 1.0}, {"tx_circuit_power_mw", 1e-3}}},
      {"idle_power", {{"idle_power_w", 1.0}, {"idle_power_mw", 1e-3}}},
      {"pa_efficiency", {{"pa_efficiency", 1.0}}},
      {"battery_capacity", {{"battery_capacity_c", 1.0}, {"battery_capacity_mah", 0.0, mah_to_coulomb}}},
      {"operating_voltage", {{"operating_voltage_v", 1.0}}},
      {"cell_side", {{"cell_side_m", 1.0}}},
      {"interference_truncation", {{"interference_truncation_m", 1.0}}},
      {"cache_slots", {{"cache_slots", 1.0}}},
  };
  return specs;
}

const FieldSpec* field_for_key(std::string_view key) {
  for (const auto& f : field_specs())
    for (const auto& v : f.variants)
      if (v.key == key) return &f;
  return nullptr;
}

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

double parse_number(std::string_view key, std::string_view text) {
  text = trim(text);
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || text.empty())
    throw ConfigError("parameter '" + std::string(key) + "' is not a number: '" + std::string(text) + "'");
  return value;
}

std::string format_exact(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

void require_positive(std::string_view name, double v) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw ConfigError(std::string(name) + " must be positive");
}

std::size_t require_count(std::string_view name, double v) {
  if (!(v >= 1.0) || v != std::floor(v) || v > 1e9)
    throw ConfigError(std::string(name) + " must be an integer >= 1");
  return static_cast<std::size_t>(v);
}

}  // namespace

double dbm_to_watt(double dbm) { return std::pow(10.0, dbm / 10.0) * 1e-3; }
double mah_to_coulomb(double mah) { return mah * 3.6; }

SystemConfig validate(const ParameterMap& raw) {
  for (const auto& [key, _] : raw)
    if (field_for_key(key) == nullptr) throw ConfigError("unknown parameter '" + key + "'");

  std::vector<double> values;
  for (const auto& field : field_specs()) {
    std::optional<double> value;
    std::string_view seen;
    for (const auto& variant : field.variants) {
      auto it = raw.find(std::string(variant.key));
      if (it == raw.end()) continue;
      if (value)
        throw ConfigError("parameter '" + std::string(field.name) + "' given twice ('" + std::string(seen) +
                          "' and '" + std::string(variant.key) + "')");
      const double x = parse_number(variant.key, it->second);
      value = variant.convert ? variant.convert(x) : x * variant.scale;
      seen = variant.key;
    }
    if (!value) throw ConfigError("missing parameter '" + std::string(field.variants.front().key) + "'");
    values.push_back(*value);
  }

  SystemConfig c;
  std::size_t k = 0;
  c.user_density = values[k++];
  c.collab_distance = values[k++];
  c.battery_fraction = values[k++];
  c.bandwidth = values[k++];
  c.noise_power = values[k++];
  c.pathloss_exponent = values[k++];
  c.pathloss_gain = values[k++];
  c.file_size = values[k++];
  const double catalog = values[k++];
  c.zipf_exponent = values[k++];
  c.max_tx_power = values[k++];
  c.tx_circuit_power = values[k++];
  c.idle_power = values[k++];
  c.pa_efficiency = values[k++];
  c.battery_capacity = values[k++];
  c.operating_voltage = values[k++];
  c.cell_side = values[k++];
  c.interference_truncation = values[k++];
  const double slots = values[k++];

  require_positive("user_density", c.user_density);
  require_positive("collab_distance", c.collab_distance);
  require_positive("battery_fraction", c.battery_fraction);
  require_positive("bandwidth", c.bandwidth);
  require_positive("noise_power", c.noise_power);
  require_positive("pathloss_gain", c.pathloss_gain);
  require_positive("file_size", c.file_size);
  require_positive("max_tx_power", c.max_tx_power);
  require_positive("tx_circuit_power", c.tx_circuit_power);
  require_positive("pa_efficiency", c.pa_efficiency);
  require_positive("battery_capacity", c.battery_capacity);
  require_positive("operating_voltage", c.operating_voltage);
  require_positive("cell_side", c.cell_side);
  require_positive("interference_truncation", c.interference_truncation);
  if (!(c.pathloss_exponent >= 2.0) || !std::isfinite(c.pathloss_exponent))
    throw ConfigError("pathloss_exponent must be >= 2");
  if (!(c.zipf_exponent >= 0.0) || !std::isfinite(c.zipf_exponent))
    throw ConfigError("zipf_exponent must be >= 0");
  if (!(c.idle_power >= 0.0) || !std::isfinite(c.idle_power))
    throw ConfigError("idle_power must be non-negative");
  if (c.pa_efficiency > 1.0) throw ConfigError("pa_efficiency must be in (0, 1]");
  c.catalog_size = require_count("catalog_size", catalog);
  c.cache_slots = require_count("cache_slots", slots);
  if (c.cache_slots > c.catalog_size) throw ConfigError("cache_slots must not exceed catalog_size");
  if (!std::isfinite(c.budget_joules())) throw ConfigError("battery budget must be finite");
  return c;
}

ParameterMap default_parameters() {
  return {
      {"user_density", "0.01"},
      {"collab_distance_m", "100"},
      {"battery_fraction", "0.01"},
      {"bandwidth_mhz", "20"},
      {"noise_power_dbm", "-100"},
      {"pathloss_exponent", "3.68"},
      {"pathloss_gain_db", "-37.6"},
      {"file_size_mbytes", "30"},
      {"catalog_size", "1000"},
      {"zipf_exponent", "1"},
      {"max_tx_power_mw", "200"},
      {"tx_circuit_power_mw", "115.9"},
      {"idle_power_mw", "25"},
      {"pa_efficiency", "0.5"},
      {"battery_capacity_mah", "1800"},
      {"operating_voltage_v", "4"},
      {"cell_side_m", "500"},
      {"interference_truncation_m", "100"},
      {"cache_slots", "1"},
  };
}

SystemConfig default_config() { return validate(default_parameters()); }

ParameterMap serialize(const SystemConfig& c) {
  const std::array<double, 19> v = {c.user_density,
                                    c.collab_distance,
                                    c.battery_fraction,
                                    c.bandwidth,
                                    c.noise_power,
                                    c.pathloss_exponent,
                                    c.pathloss_gain,
                                    c.file_size,
                                    static_cast<double>(c.catalog_size),
                                    c.zipf_exponent,
                                    c.max_tx_power,
                                    c.tx_circuit_power,
                                    c.idle_power,
                                    c.pa_efficiency,
                                    c.battery_capacity,
                                    c.operating_voltage,
                                    c.cell_side,
                                    c.interference_truncation,
                                    static_cast<double>(c.cache_slots)};
  ParameterMap out;
  const auto& specs = field_specs();
  for (std::size_t i = 0; i < specs.size(); ++i)
    out.emplace(std::string(specs[i].variants.front().key), format_exact(v[i]));
  return out;
}

std::string to_config_text(const SystemConfig& cfg) {
  std::ostringstream os;
  for (const auto& [k, v] : serialize(cfg)) os << k << " = " << v << '\n';
  return os.str();
}

ParameterMap parse_config_text(std::string_view text) {
  ParameterMap out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    const auto key = std::string(trim(line.substr(0, eq)));
    const auto value = std::string(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (!out.emplace(key, value).second) throw ConfigError("duplicate key '" + key + "'");
  }
  return out;
}

ParameterMap load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void apply_override(ParameterMap& raw, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw ConfigError("override must look like key=value");
  const std::string key(trim(assignment.substr(0, eq)));
  const std::string value(trim(assignment.substr(eq + 1)));
  const FieldSpec* field = field_for_key(key);
  if (field == nullptr) throw ConfigError("unknown parameter '" + key + "'");
  for (const auto& v : field->variants) raw.erase(std::string(v.key));
  raw[key] = value;
}

double a_coefficient(const SystemConfig& cfg, double battery_fraction) {
  return cfg.file_size * std::numbers::ln2 /
         (cfg.bandwidth * battery_fraction * cfg.battery_energy() * cfg.pa_efficiency);
}

DerivedQuantities derived(const SystemConfig& cfg, double tx_power) {
  if (!(tx_power > 0.0)) throw ConfigError("transmit power must be positive");
  return {cfg.noise_power / (tx_power * cfg.pathloss_gain), cfg.budget_joules(),
          a_coefficient(cfg, cfg.battery_fraction), cfg.cell_area()};
}

}  // namespace d2d
