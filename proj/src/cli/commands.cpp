#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "stockvolve/analysis.hpp"
#include "stockvolve/cli.hpp"
#include "stockvolve/csv.hpp"
#include "stockvolve/error.hpp"
#include "stockvolve/evolution.hpp"
#include "stockvolve/kinetics.hpp"
#include "stockvolve/price_dist.hpp"
#include "stockvolve/random.hpp"
#include "stockvolve/returns.hpp"

namespace stockvolve::cli {

using nlohmann::json;

namespace {

double number(const json& c, const char* key) { return c.at(key).get<double>(); }

std::size_t count(const json& c, const char* key, std::size_t minimum = 1) {
  const double v = c.at(key).get<double>();
  require(v == std::floor(v) && v >= static_cast<double>(minimum), ErrorCode::ConfigError,
          std::string(key) + " must be an integer >= " + std::to_string(minimum));
  return static_cast<std::size_t>(v);
}

std::string text(const json& c, const char* key) {
  require(c.at(key).is_string(), ErrorCode::ConfigError, std::string(key) + " must be a string");
  return c.at(key).get<std::string>();
}

std::string required_path(const json& c, const char* key) {
  require(c.at(key).is_string() && !c.at(key).get<std::string>().empty(), ErrorCode::ConfigError,
          std::string(key) + " must name an input file");
  return c.at(key).get<std::string>();
}

std::ofstream open_output(const RunContext& ctx, const std::string& name) {
  const auto path = ctx.out_dir / name;
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCode::IoError, "cannot write '" + path.string() + "'");
  return out;
}

void write_json(const RunContext& ctx, const std::string& name, const json& j) {
  auto out = open_output(ctx, name);
  out << j.dump(2) << "\n";
}

}  // namespace

void cmd_simulate_kinetics(const RunContext& ctx, std::ostream& log) {
  const json& c = ctx.config;
  const json& g = c.at("grid");
  const json& m = c.at("model");
  const PriceGrid grid(number(g, "p_min"), number(g, "p_max"), count(g, "points"));
  const price::LogisticPriceModel model(number(m, "mu"), number(m, "mu_m"), number(m, "eps"));
  const double n_total = number(c, "n_total");
  const double eta = number(c, "eta");
  const double tol = number(c, "tol");
  const std::size_t max_steps = count(c, "max_steps");
  const std::size_t record_every = count(c, "record_every");

  kinetics::MarketState state = kinetics::logistic_state(model, n_total, grid, eta);
  const std::string rates = text(c, "rates");
  if (rates == "constant") {
    std::fill(state.demand_rate.begin(), state.demand_rate.end(), number(c, "demand_rate"));
    std::fill(state.supply_rate.begin(), state.supply_rate.end(), number(c, "supply_rate"));
  } else {
    require(rates == "logistic", ErrorCode::ConfigError, "rates must be \"logistic\" or \"constant\"");
  }
  const std::string initial = text(c, "initial");
  if (initial == "perturbed") {
    const double a = number(c, "perturbation");
    require(a >= 0.0 && a < 1.0, ErrorCode::ConfigError, "perturbation must lie in [0, 1)");
    Rng rng(ctx.seed, 0);
    for (auto& v : state.n) v *= 1.0 + a * (2.0 * rng.uniform_open() - 1.0);
    for (auto& v : state.z) v *= 1.0 + a * (2.0 * rng.uniform_open() - 1.0);
  } else {
    require(initial == "stationary", ErrorCode::ConfigError, "initial must be \"perturbed\" or \"stationary\"");
  }
  state.validate();

  auto traj = open_output(ctx, text(c, "trajectory"));
  traj << "step,tau,residual,n_total,z_total,y_total\n";
  double tau = 0.0;
  std::size_t last_step = 0;
  // relax() picks each step size from the pre-step state.
  double pending = kinetics::max_stable_step(state);
  auto tracking = [&](std::size_t k, const kinetics::MarketState& s, double residual) {
    if (k > 0) {
      tau += pending;
      pending = kinetics::max_stable_step(s);
    }
    last_step = k;
    if (k % record_every != 0) return;
    const auto t = kinetics::totals(s);
    csv::write_row(traj, {static_cast<double>(k), tau, residual, t.n_total, t.z_total, t.y_total});
  };
  const kinetics::MarketState relaxed = kinetics::relax(state, tol, max_steps, tracking);
  const double residual = kinetics::stationarity_residual(relaxed);
  if (last_step % record_every != 0) {
    const auto t = kinetics::totals(relaxed);
    csv::write_row(traj, {static_cast<double>(last_step), tau, residual, t.n_total, t.z_total, t.y_total});
  }

  {
    auto snap = open_output(ctx, text(c, "snapshot"));
    kinetics::write_snapshot(snap, relaxed);
  }

  // Stability at the node closest to the mean price, plus the slowest
  // relaxation rate over the grid.
  const auto pts = grid.points();
  std::size_t centre = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (std::abs(pts[i] - model.mu()) < std::abs(pts[centre] - model.mu())) centre = i;
  }
  const auto rep = kinetics::stability_eigenvalues(relaxed.n[centre], relaxed.z[centre], eta);
  double slowest = -std::numeric_limits<double>::infinity();
  std::string worst = "stable";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto r = kinetics::stability_eigenvalues(relaxed.n[i], relaxed.z[i], eta);
    slowest = std::max(slowest, r.lambda_negative);
    if (r.classification != kinetics::Stability::stable) worst = kinetics::to_string(r.classification);
  }
  const auto tot = kinetics::totals(relaxed);
  json report = {
      {"converged", true},
      {"steps", last_step},
      {"tau", tau},
      {"residual", residual},
      {"tol", tol},
      {"totals", {{"n", tot.n_total}, {"z", tot.z_total}, {"y", tot.y_total}}},
      {"stability",
       {{"price", pts[centre]},
        {"n0", relaxed.n[centre]},
        {"z0", relaxed.z[centre]},
        {"lambda_negative", rep.lambda_negative},
        {"lambda_zero", rep.lambda_zero},
        {"numeric_eigenvalues", {rep.numeric_eigenvalues[0], rep.numeric_eigenvalues[1]}},
        {"classification", kinetics::to_string(rep.classification)},
        {"zero_mode_note", rep.zero_mode_note},
        {"slowest_lambda_negative", slowest},
        {"grid_classification", worst}}},
  };
  write_json(ctx, text(c, "report"), report);
  log << "stationary after " << last_step << " steps, residual " << csv::format_double(residual)
      << " < tol " << csv::format_double(tol) << "\n";
}

namespace {

struct ScheduleEntry {
  double t;
  std::vector<double> fitness;
};

std::vector<ScheduleEntry> read_schedule(const json& c, std::size_t stocks) {
  std::vector<ScheduleEntry> out;
  for (const auto& e : c.at("fitness_schedule")) {
    ScheduleEntry s{e.at("t").get<double>(), e.at("fitness").get<std::vector<double>>()};
    require(s.fitness.size() == stocks, ErrorCode::ConfigError,
            "every fitness_schedule entry needs one fitness per stock");
    require(out.empty() || s.t > out.back().t, ErrorCode::ConfigError,
            "fitness_schedule times must be strictly increasing");
    out.push_back(std::move(s));
  }
  require(!out.empty() && out.front().t <= 0.0, ErrorCode::ConfigError,
          "fitness_schedule must start at t <= 0");
  return out;
}

const std::vector<double>& fitness_at(const std::vector<ScheduleEntry>& schedule, double t) {
  const ScheduleEntry* cur = &schedule.front();
  for (const auto& s : schedule) {
    if (s.t <= t) cur = &s;
  }
  return cur->fitness;
}

void write_market_row(std::ostream& out, double t, std::span<const double> mu, std::span<const double> w) {
  std::vector<double> row{t};
  row.insert(row.end(), mu.begin(), mu.end());
  row.insert(row.end(), w.begin(), w.end());
  csv::write_row(out, row);
}

}  // namespace

void cmd_simulate_market(const RunContext& ctx, std::ostream& log) {
  const json& c = ctx.config;
  const auto mu0 = c.at("mu0").get<std::vector<double>>();
  require(!mu0.empty(), ErrorCode::ConfigError, "mu0 needs at least one stock");
  const std::size_t B = mu0.size();
  const auto schedule = read_schedule(c, B);
  const double dt = number(c, "dt");
  const double horizon = number(c, "horizon");
  require(dt > 0.0 && horizon > 0.0, ErrorCode::ConfigError, "dt and horizon must be positive");
  const std::size_t steps = static_cast<std::size_t>(std::llround(horizon / dt));
  const std::size_t record_every = count(c, "record_every");
  const std::string mode = text(c, "mode");
  require(mode == "replicator" || mode == "gbm", ErrorCode::ConfigError,
          "mode must be \"replicator\" or \"gbm\"");

  auto traj = open_output(ctx, text(c, "trajectory"));
  traj << "t";
  for (std::size_t j = 1; j <= B; ++j) traj << ",mu_" << j;
  for (std::size_t j = 1; j <= B; ++j) traj << ",w_" << j;
  traj << "\n";

  json summary = {{"mode", mode}, {"stocks", B}, {"steps", steps}, {"dt", dt}, {"horizon", horizon}};
  std::vector<double> rec_t, rec_w1, rec_w2;
  auto record = [&](std::size_t k, std::span<const double> mu, std::span<const double> w) {
    const double t = static_cast<double>(k) * dt;
    if (k % record_every == 0 || k == steps) {
      write_market_row(traj, t, mu, w);
      if (B >= 2) {
        rec_t.push_back(t);
        rec_w1.push_back(w[0]);
        rec_w2.push_back(w[1]);
      }
    }
  };

  if (mode == "replicator") {
    evolution::MarketEnsemble ens(mu0, fitness_at(schedule, 0.0));
    double drift = 0.0;
    record(0, ens.mu(), ens.w());
    for (std::size_t k = 1; k <= steps; ++k) {
      ens.set_fitness(fitness_at(schedule, static_cast<double>(k - 1) * dt));
      ens = evolution::replicator_step(ens, dt);
      double sum = 0.0;
      for (double v : ens.w()) sum += v;
      drift = std::max(drift, std::abs(sum - 1.0));
      record(k, ens.mu(), ens.w());
    }
    summary["final_mu"] = std::vector<double>(ens.mu().begin(), ens.mu().end());
    summary["final_w"] = std::vector<double>(ens.w().begin(), ens.w().end());
    summary["max_sum_w_drift"] = drift;
    if (B == 2 && schedule.size() == 1) {
      const double w10 = mu0[0] / (mu0[0] + mu0[1]);
      const double df = schedule.front().fitness[0] - schedule.front().fitness[1];
      summary["closed_form_final_w1"] = evolution::two_stock_share(w10, df, static_cast<double>(steps) * dt);
    }
  } else {
    const double sigma = number(c, "sigma_prime");
    require(sigma >= 0.0, ErrorCode::ConfigError, "sigma_prime must be >= 0");
    std::vector<double> mu = mu0;
    std::vector<Rng> rngs;
    for (std::size_t j = 0; j < B; ++j) rngs.emplace_back(ctx.seed, j);
    std::vector<double> w(B);
    auto shares = [&] {
      double total = 0.0;
      for (double v : mu) total += v;
      for (std::size_t j = 0; j < B; ++j) w[j] = mu[j] / total;
    };
    shares();
    record(0, mu, w);
    const double root_dt = std::sqrt(dt);
    for (std::size_t k = 1; k <= steps; ++k) {
      const auto& f = fitness_at(schedule, static_cast<double>(k - 1) * dt);
      for (std::size_t j = 0; j < B; ++j) {
        double factor = 0.0;
        for (int attempt = 0; attempt < 100 && !(factor > 0.0); ++attempt) {
          factor = 1.0 + f[j] * dt + (sigma > 0.0 ? sigma * root_dt * rngs[j].normal() : 0.0);
        }
        require(factor > 0.0, ErrorCode::StepTooLarge, "price multiplier stayed non-positive; reduce dt");
        mu[j] *= factor;
      }
      shares();
      record(k, mu, w);
    }
    summary["final_mu"] = mu;
    summary["final_w"] = w;

    const std::size_t paths = count(c, "paths", 0);
    if (paths > 0) {
      require(schedule.size() == 1, ErrorCode::ConfigError,
              "terminal-return statistics need a constant fitness schedule");
      json stats = json::array();
      for (std::size_t j = 0; j < B; ++j) {
        const evolution::GbmParams p{schedule.front().fitness[j], sigma, mu0[j]};
        const auto r = evolution::gbm_terminal_log_returns(p, horizon, dt, paths,
                                                           ctx.seed + 0x9E3779B97F4A7C15ull * (j + 1),
                                                           ctx.threads);
        double mean = 0.0;
        for (double v : r) mean += v;
        mean /= static_cast<double>(r.size());
        double var = 0.0;
        for (double v : r) var += (v - mean) * (v - mean);
        var /= static_cast<double>(r.size() > 1 ? r.size() - 1 : 1);
        stats.push_back({{"stock", j + 1},
                         {"mean_log_return", mean},
                         {"variance_log_return", var},
                         {"ito_rho", (p.mean_growth - 0.5 * sigma * sigma) * horizon},
                         {"ito_omega_sq", sigma * sigma * horizon}});
      }
      summary["paths"] = paths;
      summary["terminal"] = stats;
    }
  }

  if (B == 2 && rec_t.size() >= 3) {
    const auto adv = evolution::fitness_advantage(rec_t, rec_w1, rec_w2);
    summary["fitted_delta_f"] = adv.delta_f;
    summary["fitted_r_squared"] = adv.r_squared;
  }
  write_json(ctx, text(c, "summary"), summary);
  log << mode << " run: " << B << (B == 1 ? " stock, " : " stocks, ") << steps << " steps\n";
}

void cmd_fit_returns(const RunContext& ctx, std::ostream& log) {
  const json& c = ctx.config;
  const std::string input = required_path(c, "input");
  const std::string kind = text(c, "kind");
  returns::ReturnSeries series;
  if (kind == "prices") {
    const auto prices = analysis::load_price_csv(input, text(c, "date_column"), text(c, "price_column"));
    std::vector<analysis::DateRange> excluded;
    for (const auto& e : c.at("exclude")) {
      require(e.is_object() && e.contains("from") && e.contains("to") && e.size() == 2,
              ErrorCode::ConfigError, "exclude entries must be {\"from\": date, \"to\": date}");
      excluded.push_back({analysis::parse_iso_date(e.at("from").get<std::string>(), "exclude.from"),
                          analysis::parse_iso_date(e.at("to").get<std::string>(), "exclude.to")});
    }
    const std::size_t step = count(c, "step");
    if (step == 1) {
      series = analysis::masked_log_returns(prices, excluded);
    } else {
      require(excluded.empty(), ErrorCode::ConfigError, "exclude requires step = 1");
      series = returns::log_returns(prices.prices, step);
    }
    if (prices.dropped_rows > 0) log << "dropped " << prices.dropped_rows << " rows without a usable price\n";
  } else {
    require(kind == "returns", ErrorCode::ConfigError, "kind must be \"prices\" or \"returns\"");
    std::ifstream in(input);
    require(static_cast<bool>(in), ErrorCode::IoError, "cannot open '" + input + "'");
    series = returns::read_return_csv(in, input);
  }

  returns::FitOptions options;
  options.restarts = static_cast<int>(count(c, "restarts"));
  options.max_iterations = static_cast<int>(count(c, "max_iterations"));
  std::vector<returns::FitResult> fits;
  for (const auto& name : c.at("families")) {
    const auto family = returns::parse_family(name.get<std::string>());
    fits.push_back(returns::fit_mle(series, family, std::nullopt, options));
  }
  require(!fits.empty(), ErrorCode::ConfigError, "families must list at least one family");
  std::stable_sort(fits.begin(), fits.end(), [](const auto& a, const auto& b) { return a.aic < b.aic; });

  json out = {{"input", input},
              {"observations", series.size()},
              {"skewness", returns::sample_skewness(series.values)},
              {"excess_kurtosis", returns::sample_excess_kurtosis(series.values)},
              {"fits", json::array()}};
  for (const auto& f : fits) out["fits"].push_back(returns::to_json(f));
  write_json(ctx, text(c, "output"), out);

  const std::size_t bins = count(c, "bins", 2);
  const auto [lo_it, hi_it] = std::minmax_element(series.values.begin(), series.values.end());
  const double lo = *lo_it, width = (*hi_it - *lo_it) / static_cast<double>(bins);
  std::vector<double> counts(bins, 0.0);
  for (double v : series.values) {
    const auto b = std::min(bins - 1, static_cast<std::size_t>((v - lo) / width));
    counts[b] += 1.0;
  }
  auto dens = open_output(ctx, text(c, "density"));
  dens << "r,empirical";
  for (const auto& f : fits) dens << "," << returns::family_name(returns::family_of(f.spec));
  dens << "\n";
  const double norm = 1.0 / (static_cast<double>(series.size()) * width);
  for (std::size_t b = 0; b < bins; ++b) {
    const double r = lo + (static_cast<double>(b) + 0.5) * width;
    std::vector<double> row{r, counts[b] * norm};
    for (const auto& f : fits) row.push_back(returns::pdf(f.spec, r - f.location));
    csv::write_row(dens, row);
  }

  for (const auto& f : fits) {
    log << returns::family_name(returns::family_of(f.spec)) << ": log-likelihood "
        << csv::format_double(f.log_likelihood) << ", AIC " << csv::format_double(f.aic) << "\n";
  }
}

void cmd_fisher_pry(const RunContext& ctx, std::ostream& log) {
  const json& c = ctx.config;
  const std::string stock_path = required_path(c, "stock");
  const std::string index_path = required_path(c, "index");
  auto label_for = [&](const char* key, const std::string& path) {
    const std::string l = text(c, key);
    return l.empty() ? std::filesystem::path(path).stem().string() : l;
  };
  const auto stock = analysis::load_price_csv(stock_path, text(c, "date_column"), text(c, "price_column"),
                                              label_for("stock_label", stock_path));
  const auto index = analysis::load_price_csv(index_path, text(c, "date_column"), text(c, "price_column"),
                                              label_for("index_label", index_path));
  const auto pair = analysis::align(stock, index);
  const auto w = analysis::relative_price(pair.stock, pair.index);
  const auto y = analysis::fisher_pry_transform(w);
  const auto t = analysis::years_since_start(pair.stock.dates);

  const double penalty = c.at("penalty").is_null() ? analysis::default_penalty(y) : number(c, "penalty");
  const auto segments = analysis::segment_trends(y, t, count(c, "max_segments"), penalty,
                                                 count(c, "min_segment_length", 2));
  auto report = analysis::trend_report(segments, stock.label, index.label, pair.stock.dates,
                                       number(c, "neutral_threshold"));
  report.penalty = penalty;
  write_json(ctx, text(c, "report"), analysis::to_json(report));

  const auto fitted = analysis::fitted_values(segments, t);
  {
    auto plot = open_output(ctx, text(c, "plot"));
    analysis::write_plot_csv(plot, t, y, fitted);
  }
  if (!c.at("svg").is_null()) {
    auto svg = open_output(ctx, text(c, "svg"));
    analysis::write_svg(svg, t, y, fitted, stock.label + " / " + index.label);
  }
  log << analysis::to_text(report);
}

}  // namespace stockvolve::cli
