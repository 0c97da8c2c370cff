#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "locfield/bandwidth.hpp"
#include "locfield/bayesrisk.hpp"
#include "locfield/covariance.hpp"
#include "locfield/kernels.hpp"
#include "locfield/simulate.hpp"
#include "locfield/wll.hpp"

namespace locfield {

enum class ValueType { string, integer, count, real, boolean, expression, real_list, name_list };

struct ConfigKey {
  std::string name;
  ValueType type;
  std::vector<std::string> choices;  // allowed values for enumerations
  std::string help;
};

/// Every accepted key, in documentation order.
const std::vector<ConfigKey>& config_schema();

const std::vector<std::string>& preset_names();
/// Key-value entries of a preset; throws ConfigError for unknown names.
std::map<std::string, std::string> preset_entries(const std::string& name);

/// Flat `key = value` configuration. `#` starts a comment; `preset = figN` pulls in a
/// preset's entries, which explicit keys then override. Every key and value is
/// checked against the schema on construction.
class ExperimentConfig {
 public:
  ExperimentConfig() = default;
  explicit ExperimentConfig(std::map<std::string, std::string> entries);

  static ExperimentConfig parse(std::istream& in);
  static ExperimentConfig parse_text(const std::string& text);
  static ExperimentConfig load(const std::string& path);

  [[nodiscard]] bool has(const std::string& key) const { return entries_.count(key) != 0; }
  [[nodiscard]] const std::map<std::string, std::string>& entries() const { return entries_; }
  void set(const std::string& key, const std::string& value);

  [[nodiscard]] std::string get_string(const std::string& key, const std::string& fallback) const;
  [[nodiscard]] double get_real(const std::string& key, double fallback) const;
  [[nodiscard]] long long get_integer(const std::string& key, long long fallback) const;
  [[nodiscard]] std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  [[nodiscard]] bool get_bool(const std::string& key, bool fallback) const;
  [[nodiscard]] std::vector<double> get_reals(const std::string& key) const;
  [[nodiscard]] std::vector<std::string> get_names(const std::string& key) const;
  /// Throws ConfigError when the key is absent.
  [[nodiscard]] std::string require(const std::string& key) const;

  /// Canonical `key = value` lines, sorted by key.
  [[nodiscard]] std::string echo() const;
  /// 64-bit FNV-1a of echo().
  [[nodiscard]] std::uint64_t hash() const;

 private:
  std::map<std::string, std::string> entries_;
};

std::uint64_t fnv1a64(const std::string& bytes);

// Builders from a validated configuration.
std::uint64_t config_seed(const ExperimentConfig& cfg);
LocationSpec location_spec(const ExperimentConfig& cfg);
std::vector<Location> config_locations(const ExperimentConfig& cfg);
DomainBox config_domain(const ExperimentConfig& cfg);
MaternParams config_matern(const ExperimentConfig& cfg);
/// The generating model; variance modulation is the reparameterized model with
/// constant smoothness and range.
NonstatModel config_truth(const ExperimentConfig& cfg);
/// Simulated responses at `locs`.
Eigen::VectorXd config_sample(const ExperimentConfig& cfg, const std::vector<Location>& locs,
                              std::uint64_t seed);
LocalModelFamily config_family(const ExperimentConfig& cfg);
WeightScheme config_weights(const ExperimentConfig& cfg);
BandwidthPolicy config_policy(const ExperimentConfig& cfg, const std::vector<Location>& locs);
BandwidthSetup config_bandwidth_setup(const ExperimentConfig& cfg,
                                      const std::vector<Location>& locs);
PriorSpec config_prior(const ExperimentConfig& cfg);
std::vector<double> config_risk_lambdas(const ExperimentConfig& cfg);

}  // namespace locfield
