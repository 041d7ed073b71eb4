#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qwloc/io.hpp"

namespace qwloc {

inline constexpr const char* kVersion = "1.0.0";

const std::vector<std::string>& subcommand_names();

// Validates the config, runs the experiment, writes its data files and a
// manifest.json into out_dir. Throws std::invalid_argument for bad
// configs and std::runtime_error for execution failures; partial outputs
// are removed before the exception escapes.
void run_subcommand(const std::string& subcommand, const Json& conf, const std::string& out_dir,
                    std::optional<std::uint64_t> seed_override);

}  // namespace qwloc
