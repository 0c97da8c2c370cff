#include "locfield/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "locfield/dataset_io.hpp"
#include "locfield/expression.hpp"

namespace locfield {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

std::optional<double> parse_real(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<long long> parse_integer(const std::string& s) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<bool> parse_bool(const std::string& s) {
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  return std::nullopt;
}

const std::vector<std::string> kWeightNames = {"K2", "K4", "K6", "K8", "K10", "hard", "constrained"};
const std::vector<std::string> kKernelNames = {"K2", "K4", "K6", "K8", "K10", "hard"};

const ConfigKey* find_key(const std::string& name) {
  for (const auto& k : config_schema()) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

void check_value(const ConfigKey& key, const std::string& value) {
  auto bad = [&](const std::string& why) {
    throw ConfigError("config key '" + key.name + "': " + why + " (got '" + value + "')");
  };
  auto check_choice = [&](const std::string& v) {
    if (!key.choices.empty() &&
        std::find(key.choices.begin(), key.choices.end(), v) == key.choices.end()) {
      std::string all;
      for (const auto& c : key.choices) all += (all.empty() ? "" : ", ") + c;
      bad("expected one of " + all);
    }
  };
  switch (key.type) {
    case ValueType::string:
      if (value.empty()) bad("empty value");
      check_choice(value);
      break;
    case ValueType::integer:
      if (!parse_integer(value) || *parse_integer(value) < 0) bad("expected a non-negative integer");
      break;
    case ValueType::count:
      if (!parse_integer(value) || *parse_integer(value) < 1) bad("expected a positive integer");
      break;
    case ValueType::real:
      if (!parse_real(value)) bad("expected a finite number");
      break;
    case ValueType::boolean:
      if (!parse_bool(value)) bad("expected true or false");
      break;
    case ValueType::expression:
      Expression::parse(value);
      break;
    case ValueType::real_list:
      for (const auto& v : split_list(value)) {
        if (!parse_real(v)) bad("expected a comma-separated list of numbers");
      }
      break;
    case ValueType::name_list:
      for (const auto& v : split_list(value)) {
        if (v.empty()) bad("empty list entry");
        check_choice(v);
      }
      break;
  }
}

std::vector<Location> read_locations_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open locations file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("locations file '" + path + "' is empty");
  const auto header = split_csv_line(line);
  const std::size_t d = header.size();
  if (d < 1 || d > 2 || header[0] != "x" || (d == 2 && header[1] != "y")) {
    throw ConfigError("locations file header must be 'x' or 'x,y'");
  }
  std::vector<Location> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != d) throw ConfigError("locations file row " + std::to_string(row) + ": wrong field count");
    Location t(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) {
      const auto v = parse_real(cells[i]);
      if (!v) throw ConfigError("locations file row " + std::to_string(row) + ": bad number");
      t(static_cast<Eigen::Index>(i)) = *v;
    }
    out.push_back(t);
  }
  validate_locations(out);
  return out;
}

LocalParamFunction expr_param(const ExperimentConfig& cfg, const std::string& key,
                              double fallback) {
  if (!cfg.has(key)) return {fallback};
  return to_param_function(Expression::parse(cfg.require(key)));
}

}  // namespace

const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> schema = {
      {"preset", ValueType::string, {"fig1", "fig2", "fig3", "fig4", "fig5", "fig6"}, "start from a named preset"},
      {"seed", ValueType::integer, {}, "base seed (u64)"},
      {"out_dir", ValueType::string, {}, "output directory"},
      {"dataset", ValueType::string, {}, "dataset CSV for estimate/bandwidth; simulated from the model when absent"},
      {"model", ValueType::string, {"variance_modulated", "reparam_K", "smoothness_only", "full_R"}, "generating model"},
      {"sigma", ValueType::expression, {}, "local standard deviation sigma(x[,y])"},
      {"nu", ValueType::expression, {}, "local smoothness nu(x[,y])"},
      {"rho", ValueType::expression, {}, "local range rho(x[,y])"},
      {"alpha", ValueType::expression, {}, "isotropic anisotropy scale for full_R"},
      {"matern_sigma2", ValueType::real, {}, "stationary Matern variance (known parameter)"},
      {"matern_nu", ValueType::real, {}, "stationary Matern smoothness (known parameter)"},
      {"matern_rho", ValueType::real, {}, "stationary Matern range (known parameter)"},
      {"nugget", ValueType::real, {}, "diagonal nugget added when simulating"},
      {"locations", ValueType::string, {"even_1d", "uniform_2d", "file"}, "sampling locations"},
      {"n", ValueType::count, {}, "number of generated locations"},
      {"domain", ValueType::real_list, {}, "a,b for 1D or x0,x1,y0,y1 for 2D"},
      {"locations_file", ValueType::string, {}, "CSV with header x or x,y"},
      {"family", ValueType::string, {"variance", "smoothness"}, "local model family"},
      {"family_lo", ValueType::real, {}, "lower bound of the free parameter"},
      {"family_hi", ValueType::real, {}, "upper bound of the free parameter"},
      {"weights", ValueType::string, kWeightNames, "weight scheme"},
      {"lambda", ValueType::real, {}, "bandwidth for estimate"},
      {"lambdas", ValueType::real_list, {}, "bandwidth grid for bandwidth selection"},
      {"lambda_count", ValueType::count, {}, "size of the default bandwidth grid"},
      {"boundary_correction", ValueType::boolean, {}, "scale the bandwidth near the domain boundary"},
      {"k_max", ValueType::count, {}, "maximum neighborhood size"},
      {"grid_per_axis", ValueType::count, {}, "estimation grid nodes per axis"},
      {"replicates", ValueType::count, {}, "calibration replicates"},
      {"nu_grid_points", ValueType::count, {}, "log-nu grid size for the smoothness family"},
      {"risk_mode", ValueType::string, {"curve", "grid"}, "risk curves per kernel, or the improvement heat map"},
      {"risk_points", ValueType::count, {}, "even design points i/n on [0,1)"},
      {"risk_t0", ValueType::real, {}, "estimation point"},
      {"risk_c0", ValueType::real, {}, "prior sigma(t0)"},
      {"risk_N", ValueType::integer, {}, "prior polynomial order"},
      {"risk_tau2", ValueType::real, {}, "prior coefficient variance"},
      {"risk_nu", ValueType::real, {}, "field smoothness for risk curves"},
      {"risk_rho", ValueType::real, {}, "field range for risk curves"},
      {"risk_kernels", ValueType::name_list, kKernelNames, "kernels for risk curves"},
      {"risk_nu_grid", ValueType::real_list, {}, "heat-map rows"},
      {"risk_rho_grid", ValueType::real_list, {}, "heat-map columns"},
      {"kernel_a", ValueType::string, kKernelNames, "heat-map kernel"},
      {"kernel_b", ValueType::string, kKernelNames, "heat-map baseline kernel"},
      {"risk_lambdas", ValueType::real_list, {}, "explicit bandwidths for risk evaluation"},
      {"risk_lambda_min", ValueType::real, {}, "smallest bandwidth of the log grid"},
      {"risk_lambda_max", ValueType::real, {}, "largest bandwidth of the log grid"},
      {"risk_lambda_count", ValueType::count, {}, "size of the log grid"},
  };
  return schema;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"fig1", "fig2", "fig3", "fig4", "fig5", "fig6"};
  return names;
}

std::map<std::string, std::string> preset_entries(const std::string& name) {
  const std::map<std::string, std::string> modulated = {
      {"model", "variance_modulated"}, {"sigma", "2*sin(x/0.015) + 2.8"},
      {"matern_sigma2", "1"},          {"locations", "even_1d"},
      {"domain", "0, 0.1"},            {"family", "variance"},
      {"weights", "K6"},               {"seed", "1"},
  };
  const std::map<std::string, std::string> risk = {
      {"risk_t0", "0.5"},          {"risk_c0", "2"},
      {"risk_N", "4"},             {"risk_tau2", "4"},
      {"risk_lambda_min", "0.01"}, {"risk_lambda_max", "0.5"},
      {"risk_lambda_count", "40"},
  };
  std::map<std::string, std::string> out;
  if (name == "fig1") {
    out = modulated;
    out.insert({{"matern_nu", "0.8"}, {"matern_rho", "0.2"}, {"n", "200"}, {"lambda", "0.01"}});
  } else if (name == "fig2") {
    out = risk;
    out.insert({{"risk_mode", "curve"},
                {"risk_points", "150"},
                {"risk_nu", "0.8"},
                {"risk_rho", "0.8"},
                {"risk_kernels", "K2, K4, K6, K8, hard"}});
  } else if (name == "fig3") {
    out = risk;
    out.insert({{"risk_mode", "grid"},
                {"risk_points", "100"},
                {"kernel_a", "K6"},
                {"kernel_b", "hard"},
                {"risk_nu_grid", "0.5, 1, 1.5, 2"},
                {"risk_rho_grid", "0.4, 0.8, 1.2"}});
  } else if (name == "fig4" || name == "fig5") {
    out = modulated;
    out.insert({{"matern_nu", name == "fig4" ? "0.5" : "1"},
                {"matern_rho", "0.5"},
                {"n", "1000"},
                {"lambda", "0.01"},
                {"replicates", "50"},
                {"k_max", "500"}});
  } else if (name == "fig6") {
    out = {{"model", "smoothness_only"},
           {"nu", "1.5 + 0.9*sin(3*x + 2*y - 2.5)"},
           {"matern_sigma2", "1"},
           {"matern_rho", "0.5"},
           {"locations", "uniform_2d"},
           {"n", "800"},
           {"domain", "0, 1, 0, 1"},
           {"family", "smoothness"},
           {"weights", "constrained"},
           {"boundary_correction", "true"},
           {"k_max", "150"},
           {"lambda", "0.15"},
           {"replicates", "20"},
           {"seed", "1"}};
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  out["preset"] = name;
  return out;
}

ExperimentConfig::ExperimentConfig(std::map<std::string, std::string> entries) {
  if (auto it = entries.find("preset"); it != entries.end()) {
    check_value(*find_key("preset"), it->second);
    for (auto& [k, v] : preset_entries(it->second)) entries.emplace(k, v);
  }
  for (const auto& [k, v] : entries) {
    const ConfigKey* key = find_key(k);
    if (key == nullptr) throw ConfigError("unknown config key '" + k + "'");
    check_value(*key, v);
  }
  entries_ = std::move(entries);
}

ExperimentConfig ExperimentConfig::parse(std::istream& in) {
  std::map<std::string, std::string> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    if (!entries.emplace(key, value).second) {
      throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
  }
  return ExperimentConfig(std::move(entries));
}

ExperimentConfig ExperimentConfig::parse_text(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return parse(in);
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  const ConfigKey* k = find_key(key);
  if (k == nullptr) throw ConfigError("unknown config key '" + key + "'");
  check_value(*k, value);
  entries_[key] = value;
}

std::string ExperimentConfig::require(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("missing config key '" + key + "'");
  return it->second;
}

std::string ExperimentConfig::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? require(key) : fallback;
}

double ExperimentConfig::get_real(const std::string& key, double fallback) const {
  return has(key) ? *parse_real(require(key)) : fallback;
}

long long ExperimentConfig::get_integer(const std::string& key, long long fallback) const {
  return has(key) ? *parse_integer(require(key)) : fallback;
}

std::uint64_t ExperimentConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const std::string s = require(key);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError("bad u64 for '" + key + "'");
  return v;
}

bool ExperimentConfig::get_bool(const std::string& key, bool fallback) const {
  return has(key) ? *parse_bool(require(key)) : fallback;
}

std::vector<double> ExperimentConfig::get_reals(const std::string& key) const {
  std::vector<double> out;
  if (!has(key)) return out;
  for (const auto& v : split_list(require(key))) out.push_back(*parse_real(v));
  return out;
}

std::vector<std::string> ExperimentConfig::get_names(const std::string& key) const {
  return has(key) ? split_list(require(key)) : std::vector<std::string>{};
}

std::string ExperimentConfig::echo() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
  return out;
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a64(echo()); }

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t config_seed(const ExperimentConfig& cfg) { return cfg.get_u64("seed", 0); }

DomainBox config_domain(const ExperimentConfig& cfg) {
  const auto d = cfg.get_reals("domain");
  if (d.size() == 2 && d[1] > d[0]) return {make_location({d[0]}), make_location({d[1]})};
  if (d.size() == 4 && d[1] > d[0] && d[3] > d[2]) {
    return {make_location({d[0], d[2]}), make_location({d[1], d[3]})};
  }
  throw ConfigError("domain must be 'a, b' or 'x0, x1, y0, y1' with nonempty extent");
}

LocationSpec location_spec(const ExperimentConfig& cfg) {
  const std::string kind = cfg.require("locations");
  if (kind == "file") return LocationSpec::explicit_list(read_locations_csv(cfg.require("locations_file")));
  const auto n = static_cast<std::size_t>(cfg.get_integer("n", 0));
  if (n == 0) throw ConfigError("missing config key 'n'");
  const DomainBox box = config_domain(cfg);
  if (kind == "even_1d") {
    if (box.lo.size() != 1) throw ConfigError("even_1d needs a 1D domain");
    return LocationSpec::even_1d(n, box.lo(0), box.hi(0));
  }
  if (box.lo.size() != 2) throw ConfigError("uniform_2d needs a 2D domain");
  return LocationSpec::uniform_2d(n, box);
}

std::vector<Location> config_locations(const ExperimentConfig& cfg) {
  return gen_locations(location_spec(cfg), config_seed(cfg));
}

MaternParams config_matern(const ExperimentConfig& cfg) {
  MaternParams p{cfg.get_real("matern_sigma2", 1.0), cfg.get_real("matern_nu", 0.5),
                 cfg.get_real("matern_rho", 1.0)};
  p.validate();
  return p;
}

NonstatModel config_truth(const ExperimentConfig& cfg) {
  const std::string model = cfg.require("model");
  const MaternParams w = config_matern(cfg);
  if (model == "variance_modulated") {
    const LocalParamFunction sigma = expr_param(cfg, "sigma", 1.0);
    const double scale = std::sqrt(w.sigma2);
    if (sigma.is_constant()) return NonstatModel::reparam_K(sigma.constant_value() * scale, w.nu, w.rho);
    return NonstatModel::reparam_K(
        LocalParamFunction([sigma, scale](const Location& t) { return scale * sigma(t); }, sigma.label()),
        w.nu, w.rho);
  }
  if (model == "smoothness_only") {
    return NonstatModel::smoothness_only(w.sigma2, w.rho, expr_param(cfg, "nu", w.nu));
  }
  if (model == "reparam_K") {
    return NonstatModel::reparam_K(expr_param(cfg, "sigma", std::sqrt(w.sigma2)),
                                   expr_param(cfg, "nu", w.nu), expr_param(cfg, "rho", w.rho));
  }
  return NonstatModel::full_R(expr_param(cfg, "sigma", std::sqrt(w.sigma2)),
                              expr_param(cfg, "nu", w.nu),
                              AnisotropyFunction::isotropic(expr_param(cfg, "alpha", 1.0)));
}

Eigen::VectorXd config_sample(const ExperimentConfig& cfg, const std::vector<Location>& locs,
                              std::uint64_t seed) {
  if (cfg.require("model") == "variance_modulated") {
    return sample_variance_modulated(expr_param(cfg, "sigma", 1.0), config_matern(cfg), locs, seed);
  }
  const double nugget = cfg.get_real("nugget", 0.0);
  if (nugget < 0.0) throw ConfigError("nugget must be non-negative");
  return sample_field(config_truth(cfg), locs, seed, nugget);
}

LocalModelFamily config_family(const ExperimentConfig& cfg) {
  const MaternParams w = config_matern(cfg);
  if (cfg.require("family") == "variance") {
    return LocalModelFamily::variance_scale(w.nu, w.rho, cfg.get_real("family_lo", 1e-6),
                                            cfg.get_real("family_hi", 1e6));
  }
  return LocalModelFamily::matern_smoothness(w.sigma2, w.rho, cfg.get_real("family_lo", 0.05),
                                             cfg.get_real("family_hi", 10.0));
}

WeightScheme config_weights(const ExperimentConfig& cfg) {
  return WeightScheme::parse(cfg.get_string("weights", "K6"));
}

BandwidthPolicy config_policy(const ExperimentConfig& cfg, const std::vector<Location>& locs) {
  BandwidthPolicy p;
  p.lambda = cfg.get_real("lambda", 0.0);
  if (!(p.lambda > 0.0)) throw ConfigError("config key 'lambda' must be positive");
  p.boundary_correction = cfg.get_bool("boundary_correction", false);
  p.domain_box = cfg.has("domain") ? config_domain(cfg) : DomainBox::bounding(locs);
  return p;
}

BandwidthSetup config_bandwidth_setup(const ExperimentConfig& cfg,
                                      const std::vector<Location>& locs) {
  BandwidthSetup s;
  s.family = config_family(cfg);
  s.scheme = config_weights(cfg);
  s.boundary_correction = cfg.get_bool("boundary_correction", false);
  s.domain_box = cfg.has("domain") ? config_domain(cfg) : DomainBox::bounding(locs);
  s.k_max = static_cast<std::size_t>(cfg.get_integer("k_max", 500));
  s.lambdas = cfg.has("lambdas")
                  ? cfg.get_reals("lambdas")
                  : default_lambda_grid(locs, static_cast<int>(cfg.get_integer("lambda_count", 25)));
  s.replicates = static_cast<int>(cfg.get_integer("replicates", 50));
  s.seed = config_seed(cfg);
  s.nu_grid_points = static_cast<int>(cfg.get_integer("nu_grid_points", 41));
  s.grid_per_axis = static_cast<int>(cfg.get_integer("grid_per_axis", 0));
  for (double l : s.lambdas) {
    if (!(l > 0.0)) throw ConfigError("bandwidths must be positive");
  }
  return s;
}

PriorSpec config_prior(const ExperimentConfig& cfg) {
  PriorSpec p = PriorSpec::gaussian(cfg.get_real("risk_c0", 2.0),
                                    static_cast<int>(cfg.get_integer("risk_N", 4)),
                                    cfg.get_real("risk_tau2", 4.0));
  p.validate();
  return p;
}

std::vector<double> config_risk_lambdas(const ExperimentConfig& cfg) {
  if (cfg.has("risk_lambdas")) {
    auto l = cfg.get_reals("risk_lambdas");
    for (double v : l) {
      if (!(v > 0.0)) throw ConfigError("risk bandwidths must be positive");
    }
    return l;
  }
  const double lo = cfg.get_real("risk_lambda_min", 0.01);
  const double hi = cfg.get_real("risk_lambda_max", 0.5);
  const auto n = static_cast<int>(cfg.get_integer("risk_lambda_count", 40));
  if (!(lo > 0.0) || !(hi > lo)) throw ConfigError("need 0 < risk_lambda_min < risk_lambda_max");
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double f = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
    out[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, f);
  }
  return out;
}

}  // namespace locfield
