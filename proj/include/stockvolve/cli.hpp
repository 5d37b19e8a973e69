#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace stockvolve::cli {

// Full default configuration of a subcommand; it doubles as the schema.
// Every key a user config may contain appears here, and each value's JSON
// type is the type the user value must have. A null default marks an
// optional value of free type (path, number or list as documented).
nlohmann::json default_config(std::string_view command);

// Throws ConfigError naming the offending key.
void validate_config(const nlohmann::json& schema, const nlohmann::json& config,
                     const std::string& where = "");

// Recursively overlays `patch` on `base`.
void merge_config(nlohmann::json& base, const nlohmann::json& patch);

// "a.b.c=value"; value is parsed as JSON when possible, else taken as a string.
void apply_override(nlohmann::json& config, std::string_view assignment);

struct RunContext {
  nlohmann::json config;
  std::uint64_t seed = 1;
  std::filesystem::path out_dir = ".";
  unsigned threads = 1;
};

// Each command writes its files below ctx.out_dir and a short summary to `log`.
void cmd_simulate_kinetics(const RunContext& ctx, std::ostream& log);
void cmd_simulate_market(const RunContext& ctx, std::ostream& log);
void cmd_fit_returns(const RunContext& ctx, std::ostream& log);
void cmd_fisher_pry(const RunContext& ctx, std::ostream& log);

// Parses argv and dispatches. Returns 0 on success, 1 for usage, config and
// IO errors, 2 for model-domain errors.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace stockvolve::cli
