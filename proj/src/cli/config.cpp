#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "stockvolve/cli.hpp"
#include "stockvolve/error.hpp"

namespace stockvolve::cli {

using nlohmann::json;

json default_config(std::string_view command) {
  if (command == "simulate-kinetics") {
    return {
        {"seed", nullptr},
        {"grid", {{"p_min", 0.0}, {"p_max", 200.0}, {"points", 512}}},
        {"model", {{"mu", 100.0}, {"mu_m", 1.0}, {"eps", 0.01}}},
        {"n_total", 1000.0},
        {"eta", 0.001},
        {"rates", "logistic"},
        {"demand_rate", 1.0},
        {"supply_rate", 1.0},
        {"initial", "perturbed"},  // or "stationary"
        {"perturbation", 0.2},
        {"tol", 1e-6},
        {"max_steps", 1000000},
        {"record_every", 10},
        {"trajectory", "kinetics_trajectory.csv"},
        {"snapshot", "kinetics_snapshot.csv"},
        {"report", "kinetics_report.json"},
    };
  }
  if (command == "simulate-market") {
    return {
        {"seed", nullptr},
        {"mode", "replicator"},
        {"mu0", {1.0, 1.0}},
        {"fitness_schedule", json::array({json{{"t", 0.0}, {"fitness", {0.02, 0.0}}}})},
        {"dt", 1e-3},
        {"horizon", 10.0},
        {"record_every", 100},
        {"sigma_prime", 0.0},
        {"paths", 0},
        {"trajectory", "market_trajectory.csv"},
        {"summary", "market_summary.json"},
    };
  }
  if (command == "fit-returns") {
    return {
        {"seed", nullptr},
        {"input", nullptr},
        {"kind", "prices"},
        {"date_column", "Date"},
        {"price_column", "Adj Close"},
        {"step", 1},
        {"families", {"normal", "laplace", "ged"}},
        {"restarts", 10},
        {"max_iterations", 2000},
        {"bins", 60},
        {"exclude", json::array()},
        {"output", "fit_results.json"},
        {"density", "return_density.csv"},
    };
  }
  if (command == "fisher-pry") {
    return {
        {"seed", nullptr},
        {"stock", nullptr},
        {"index", nullptr},
        {"date_column", "Date"},
        {"price_column", "Adj Close"},
        {"stock_label", ""},
        {"index_label", ""},
        {"max_segments", 6},
        {"penalty", nullptr},
        {"min_segment_length", 60},
        {"neutral_threshold", 0.02},
        {"report", "trend_report.json"},
        {"plot", "fisher_pry.csv"},
        {"svg", nullptr},
    };
  }
  fail(ErrorCode::ConfigError, "unknown command '" + std::string(command) + "'");
}

void validate_config(const json& schema, const json& config, const std::string& where) {
  const std::string at = where.empty() ? "config" : where;
  if (schema.is_null()) return;
  if (schema.is_number()) {
    require(config.is_number(), ErrorCode::ConfigError, at + " must be a number");
    return;
  }
  require(schema.type() == config.type(), ErrorCode::ConfigError,
          at + " must be of type " + std::string(schema.type_name()) + ", got " + config.type_name());
  if (schema.is_object()) {
    for (const auto& [key, value] : config.items()) {
      const std::string sub = where.empty() ? key : where + "." + key;
      require(schema.contains(key), ErrorCode::ConfigError, "unknown config key '" + sub + "'");
      validate_config(schema.at(key), value, sub);
    }
  } else if (schema.is_array() && !schema.empty()) {
    for (std::size_t i = 0; i < config.size(); ++i) {
      validate_config(schema.front(), config[i], at + "[" + std::to_string(i) + "]");
    }
  }
}

void merge_config(json& base, const json& patch) {
  if (!base.is_object() || !patch.is_object()) {
    base = patch;
    return;
  }
  for (const auto& [key, value] : patch.items()) {
    if (base.contains(key) && base[key].is_object() && value.is_object()) {
      merge_config(base[key], value);
    } else {
      base[key] = value;
    }
  }
}

void apply_override(json& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  require(eq != std::string_view::npos && eq > 0, ErrorCode::ConfigError,
          "--set expects KEY=VALUE, got '" + std::string(assignment) + "'");
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &config;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    require(!part.empty(), ErrorCode::ConfigError, "malformed override key '" + key + "'");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    if (!node->contains(part) || !(*node)[part].is_object()) (*node)[part] = json::object();
    node = &(*node)[part];
    start = dot + 1;
  }
}

namespace {

json read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::IoError, "cannot open config '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ConfigError, "config '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Evolutionary stock-market model: kinetics, market evolution, return fits, trend analysis",
               "stockvolve"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  unsigned threads = 1;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--out", out_dir, "output directory (default: $STOCKVOLVE_OUT or .)");
  app.add_option("--threads", threads, "worker threads for independent Monte-Carlo replicas")
      ->check(CLI::Range(1u, 1024u));
  app.add_option("--set", overrides, "override a config value, KEY=VALUE (dotted keys for nesting)");

  struct Command {
    const char* name;
    const char* help;
    void (*fn)(const RunContext&, std::ostream&);
  };
  static constexpr Command commands[] = {
      {"simulate-kinetics", "relax purchase kinetics to the stationary state", cmd_simulate_kinetics},
      {"simulate-market", "evolve mean prices by replicator or random growth dynamics", cmd_simulate_market},
      {"fit-returns", "fit return distributions by maximum likelihood", cmd_fit_returns},
      {"fisher-pry", "segment the semi-log relative price of a stock against an index", cmd_fisher_pry},
  };
  for (const auto& c : commands) app.add_subcommand(c.name, c.help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  const Command* chosen = nullptr;
  for (const auto& c : commands) {
    if (app.got_subcommand(c.name)) chosen = &c;
  }

  try {
    RunContext ctx;
    ctx.config = default_config(chosen->name);
    const json schema = ctx.config;
    if (!config_path.empty()) {
      const json user = read_config_file(config_path);
      require(user.is_object(), ErrorCode::ConfigError, "config root must be a JSON object");
      validate_config(schema, user);
      merge_config(ctx.config, user);
    }
    for (const auto& o : overrides) apply_override(ctx.config, o);
    validate_config(schema, ctx.config);

    if (seed) {
      ctx.seed = *seed;
    } else if (ctx.config["seed"].is_number_unsigned()) {
      ctx.seed = ctx.config["seed"].get<std::uint64_t>();
    } else {
      require(ctx.config["seed"].is_null(), ErrorCode::ConfigError, "seed must be a non-negative integer");
    }
    if (!out_dir.empty()) {
      ctx.out_dir = out_dir;
    } else if (const char* env = std::getenv("STOCKVOLVE_OUT"); env && *env) {
      ctx.out_dir = env;
    }
    ctx.threads = threads;
    std::error_code ec;
    std::filesystem::create_directories(ctx.out_dir, ec);
    require(!ec, ErrorCode::IoError, "cannot create output directory '" + ctx.out_dir.string() + "'");

    chosen->fn(ctx, out);
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_io_error(e.code()) ? 1 : 2;
  } catch (const json::exception& e) {
    err << "error: ConfigError: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace stockvolve::cli
