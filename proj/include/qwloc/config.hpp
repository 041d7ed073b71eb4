#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qwloc/io.hpp"

namespace qwloc {

// Strict config access: unknown keys are rejected so a typo in a physics
// parameter can never silently fall back to a default.
namespace config {

void require_keys(const Json& j, const std::vector<std::string>& required,
                  const std::vector<std::string>& optional, const std::string& context);

int get_int(const Json& j, const std::string& key, long long min_value, long long max_value);
double get_double(const Json& j, const std::string& key, double min_value, double max_value);
bool get_bool(const Json& j, const std::string& key, bool fallback);
std::uint64_t get_seed(const Json& j, std::optional<std::uint64_t> override_seed);

int get_dimension(const Json& j);
Permutation get_permutation(const Json& j, int d);
PhaseDistribution get_distribution(const Json& j);  // default: uniform

std::vector<int> get_int_list(const Json& j, const std::string& key, long long min_value,
                              long long max_value);
std::vector<double> get_double_list(const Json& j, const std::string& key, double min_value,
                                    double max_value);
Complex get_complex(const Json& j, const std::string& key);

}  // namespace config

}  // namespace qwloc
