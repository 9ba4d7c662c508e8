#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

namespace d2d {

/// Raised for any malformed, missing or out-of-range parameter.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raw key/value parameters as read from a config file or the command line.
/// Values are kept as text until validation so unit suffixes in the key name
/// decide how they are converted.
using ParameterMap = std::map<std::string, std::string>;

/// Validated physical and system parameters, all in SI units.
struct SystemConfig {
  double user_density = 0.0;             // users / m^2
  double collab_distance = 0.0;          // m
  double battery_fraction = 0.0;         // rho
  double bandwidth = 0.0;                // Hz
  double noise_power = 0.0;              // W
  double pathloss_exponent = 0.0;        // alpha
  double pathloss_gain = 0.0;            // linear gain at 1 m
  double file_size = 0.0;                // bits
  std::size_t catalog_size = 0;          // N_f
  double zipf_exponent = 0.0;            // beta
  double max_tx_power = 0.0;             // W
  double tx_circuit_power = 0.0;         // W
  double idle_power = 0.0;               // W
  double pa_efficiency = 0.0;            // eta
  double battery_capacity = 0.0;         // coulomb
  double operating_voltage = 0.0;        // V
  double cell_side = 0.0;                // m
  double interference_truncation = 0.0;  // m, used by the alpha = 2 model
  std::size_t cache_slots = 1;           // files per user

  /// Total battery energy Q * V0 in joules.
  [[nodiscard]] double battery_energy() const { return battery_capacity * operating_voltage; }
  /// Per-request energy budget rho * Q * V0 in joules.
  [[nodiscard]] double budget_joules() const { return battery_fraction * battery_energy(); }
  [[nodiscard]] double cell_area() const { return cell_side * cell_side; }

  friend bool operator==(const SystemConfig&, const SystemConfig&) = default;
};

struct DerivedQuantities {
  double normalized_noise;  // sigma^2 / (P_t K)
  double budget_joules;     // rho Q V0
  double a_coeff;           // F ln2 / (W rho Q V0 eta), 1/W
  double cell_area;         // m^2
};

/// Converts and checks a raw parameter map. Every field must be given exactly
/// once, either in SI form or in one of the documented unit variants
/// (see configs/defaults.conf).
SystemConfig validate(const ParameterMap& raw);

/// Parameters of the reference scenario, in natural units.
ParameterMap default_parameters();
SystemConfig default_config();

/// Serializes in SI keys; validate(serialize(c)) == c holds exactly.
ParameterMap serialize(const SystemConfig& cfg);
std::string to_config_text(const SystemConfig& cfg);

/// Flat "key = value" text; '#' starts a comment.
ParameterMap parse_config_text(std::string_view text);
ParameterMap load_config_file(const std::filesystem::path& path);

/// Applies "key=value". A key that names the same field under another unit
/// replaces that entry.
void apply_override(ParameterMap& raw, std::string_view assignment);

DerivedQuantities derived(const SystemConfig& cfg, double tx_power);

/// Shannon-threshold coefficient a = F ln2 / (W rho Q V0 eta) at a given rho.
double a_coefficient(const SystemConfig& cfg, double battery_fraction);

double dbm_to_watt(double dbm);
double mah_to_coulomb(double mah);

}  // namespace d2d
