#include "qwloc/config.hpp"

#include <algorithm>

namespace qwloc::config {

void require_keys(const Json& j, const std::vector<std::string>& required,
                  const std::vector<std::string>& optional, const std::string& context) {
  if (!j.is_object()) throw std::invalid_argument(context + ": config must be a JSON object");
  for (const auto& key : required) {
    if (!j.contains(key))
      throw std::invalid_argument(context + ": missing required key '" + key + "'");
  }
  for (const auto& item : j.items()) {
    const std::string& key = item.key();
    if (std::find(required.begin(), required.end(), key) == required.end() &&
        std::find(optional.begin(), optional.end(), key) == optional.end())
      throw std::invalid_argument(context + ": unknown key '" + key + "'");
  }
}

int get_int(const Json& j, const std::string& key, long long min_value, long long max_value) {
  const auto& v = j.at(key);
  if (!v.is_number_integer())
    throw std::invalid_argument("config: '" + key + "' must be an integer");
  const auto value = v.get<long long>();
  if (value < min_value || value > max_value)
    throw std::invalid_argument("config: '" + key + "' = " + std::to_string(value) +
                                " outside [" + std::to_string(min_value) + ", " +
                                std::to_string(max_value) + "]");
  return static_cast<int>(value);
}

double get_double(const Json& j, const std::string& key, double min_value, double max_value) {
  const auto& v = j.at(key);
  if (!v.is_number()) throw std::invalid_argument("config: '" + key + "' must be a number");
  const double value = v.get<double>();
  if (!(value >= min_value && value <= max_value))
    throw std::invalid_argument("config: '" + key + "' = " + std::to_string(value) +
                                " outside [" + std::to_string(min_value) + ", " +
                                std::to_string(max_value) + "]");
  return value;
}

bool get_bool(const Json& j, const std::string& key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean())
    throw std::invalid_argument("config: '" + key + "' must be a boolean");
  return j.at(key).get<bool>();
}

std::uint64_t get_seed(const Json& j, std::optional<std::uint64_t> override_seed) {
  if (override_seed) return *override_seed;
  if (!j.contains("seed")) return 0;  // deterministic subcommands may omit it
  const auto& v = j.at("seed");
  if (!v.is_number_unsigned() && !v.is_number_integer())
    throw std::invalid_argument("config: 'seed' must be a nonnegative integer");
  const auto s = v.get<long long>();
  if (s < 0) throw std::invalid_argument("config: 'seed' must be nonnegative");
  return static_cast<std::uint64_t>(s);
}

int get_dimension(const Json& j) { return get_int(j, "dimension", 1, kMaxDim); }

Permutation get_permutation(const Json& j, int d) {
  if (!j.contains("permutation")) throw std::invalid_argument("config: missing 'permutation'");
  return permutation_from_json(j.at("permutation"), d);
}

PhaseDistribution get_distribution(const Json& j) {
  if (!j.contains("distribution")) return PhaseDistribution::uniform();
  return distribution_from_json(j.at("distribution"));
}

std::vector<int> get_int_list(const Json& j, const std::string& key, long long min_value,
                              long long max_value) {
  const auto& v = j.at(key);
  if (!v.is_array() || v.empty())
    throw std::invalid_argument("config: '" + key + "' must be a nonempty array");
  std::vector<int> out;
  for (const auto& e : v) {
    if (!e.is_number_integer())
      throw std::invalid_argument("config: '" + key + "' entries must be integers");
    const auto value = e.get<long long>();
    if (value < min_value || value > max_value)
      throw std::invalid_argument("config: '" + key + "' entry " + std::to_string(value) +
                                  " outside [" + std::to_string(min_value) + ", " +
                                  std::to_string(max_value) + "]");
    out.push_back(static_cast<int>(value));
  }
  return out;
}

std::vector<double> get_double_list(const Json& j, const std::string& key, double min_value,
                                    double max_value) {
  const auto& v = j.at(key);
  if (!v.is_array() || v.empty())
    throw std::invalid_argument("config: '" + key + "' must be a nonempty array");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number())
      throw std::invalid_argument("config: '" + key + "' entries must be numbers");
    const double value = e.get<double>();
    if (!(value >= min_value && value <= max_value))
      throw std::invalid_argument("config: '" + key + "' entry " + std::to_string(value) +
                                  " outside [" + std::to_string(min_value) + ", " +
                                  std::to_string(max_value) + "]");
    out.push_back(value);
  }
  return out;
}

Complex get_complex(const Json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw std::invalid_argument("config: '" + key + "' must be [re, im]");
  return Complex(v[0].get<double>(), v[1].get<double>());
}

}  // namespace qwloc::config
