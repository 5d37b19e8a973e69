#include "stockvolve/kinetics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "stockvolve/csv.hpp"
#include "stockvolve/error.hpp"
#include "stockvolve/simd/kernels.hpp"

namespace stockvolve::kinetics {
namespace {

constexpr double kStepSafety = 0.1;
constexpr double kClampEpsilons = 10.0;

double relative_sup(const std::vector<double>& rate, const std::vector<double>& y) {
  const double scale = simd::max_value(rate);
  const double diff = simd::max_abs_diff(rate, y);
  return scale > 0.0 ? diff / scale : diff;
}

void clamp_or_throw(std::vector<double>& x, double lowest, double scale, const char* name) {
  if (lowest >= 0.0) return;
  const double limit = -kClampEpsilons * std::numeric_limits<double>::epsilon() * scale;
  if (lowest < limit) {
    std::ostringstream msg;
    msg << name << " would become " << lowest << " (clamp limit " << limit << ")";
    fail(ErrorCode::StepTooLarge, msg.str());
  }
  for (double& v : x) v = std::max(v, 0.0);
}

}  // namespace

void MarketState::validate() const {
  const std::size_t len = grid.size();
  require(n.size() == len && z.size() == len && demand_rate.size() == len &&
              supply_rate.size() == len,
          ErrorCode::InvalidParameters, "market state arrays must match the grid");
  require(eta > 0.0 && std::isfinite(eta), ErrorCode::InvalidParameters, "eta must be > 0");
  for (const auto* arr : {&n, &z, &demand_rate, &supply_rate}) {
    for (double v : *arr) {
      require(v >= 0.0 && std::isfinite(v), ErrorCode::InvalidParameters,
              "market state entries must be finite and >= 0");
    }
  }
}

std::string to_string(Stability s) {
  switch (s) {
    case Stability::stable: return "stable";
    case Stability::marginal: return "marginal";
    case Stability::unstable: return "unstable";
  }
  return "unknown";
}

std::vector<double> purchase_rate(const MarketState& state) {
  std::vector<double> y(state.n.size());
  simd::mass_action(state.eta, state.n, state.z, y);
  return y;
}

double max_stable_step(const MarketState& state) {
  const double extent = simd::max_value(state.n) + simd::max_value(state.z);
  if (!(extent > 0.0)) return std::numeric_limits<double>::infinity();
  return kStepSafety / (state.eta * extent);
}

MarketState step(const MarketState& state, double dtau) {
  require(dtau > 0.0 && std::isfinite(dtau), ErrorCode::InvalidParameters, "dtau must be > 0");
  const double bound = max_stable_step(state);
  if (dtau > bound) {
    std::ostringstream msg;
    msg << "dtau = " << dtau << " exceeds the stability bound " << bound;
    fail(ErrorCode::StepTooLarge, msg.str());
  }
  const auto y = purchase_rate(state);
  MarketState next = state;
  const double n_low = simd::euler_update(state.n, state.demand_rate, y, dtau, next.n);
  const double z_low = simd::euler_update(state.z, state.supply_rate, y, dtau, next.z);
  const double scale = std::max({simd::max_value(state.n), simd::max_value(state.z), 1.0});
  clamp_or_throw(next.n, n_low, scale, "n");
  clamp_or_throw(next.z, z_low, scale, "z");
  return next;
}

double stationarity_residual(const MarketState& state) {
  const auto y = purchase_rate(state);
  return std::max(relative_sup(state.demand_rate, y), relative_sup(state.supply_rate, y));
}

MarketState relax(const MarketState& state, double tol, std::size_t max_steps,
                  const RelaxObserver& observer) {
  state.validate();
  require(tol > 0.0, ErrorCode::InvalidParameters, "relax tolerance must be > 0");
  const double rate_scale = std::max(simd::max_value(state.demand_rate), simd::max_value(state.supply_rate));
  const double imbalance = simd::max_abs_diff(state.demand_rate, state.supply_rate);
  if (imbalance > tol * (rate_scale > 0.0 ? rate_scale : 1.0)) {
    std::ostringstream msg;
    msg << "max|D - S| = " << imbalance << " exceeds tol * max rate; no fixed point exists";
    fail(ErrorCode::NoStationaryState, msg.str());
  }

  MarketState current = state;
  double residual = stationarity_residual(current);
  if (observer) observer(0, current, residual);
  for (std::size_t k = 1; residual > tol; ++k) {
    if (k > max_steps) {
      std::ostringstream msg;
      msg << "residual " << residual << " > tol " << tol << " after " << max_steps << " steps";
      fail(ErrorCode::NotConverged, msg.str());
    }
    const double dtau = max_stable_step(current);
    require(std::isfinite(dtau), ErrorCode::NotConverged,
            "empty market with nonzero rates cannot be stepped");
    current = step(current, dtau);
    residual = stationarity_residual(current);
    if (observer) observer(k, current, residual);
  }
  return current;
}

StabilityReport stability_eigenvalues(double n0, double z0, double eta) {
  require(n0 >= 0.0 && z0 >= 0.0 && eta > 0.0, ErrorCode::InvalidParameters,
          "stability analysis requires n0, z0 >= 0 and eta > 0");
  StabilityReport r;
  r.lambda_negative = -eta * (z0 + n0);
  r.lambda_zero = 0.0;

  // Linearization of d(dn)/dtau = d(dz)/dtau = -eta (n0 dz + z0 dn).
  const double j11 = -eta * z0, j12 = -eta * n0;
  const double j21 = -eta * z0, j22 = -eta * n0;
  const double trace = j11 + j22;
  const double det = j11 * j22 - j12 * j21;
  const double disc = std::sqrt(std::max(0.0, 0.25 * trace * trace - det));
  // Stable root pairing: the large-magnitude root first, the other from det / root.
  const double big = 0.5 * trace - (trace <= 0.0 ? disc : -disc);
  const double small = big != 0.0 ? det / big : 0.0;
  r.numeric_eigenvalues[0] = std::min(big, small);
  r.numeric_eigenvalues[1] = std::max(big, small);

  const double tol = 1e-12 * std::max(1.0, std::abs(trace));
  if (r.numeric_eigenvalues[1] > tol) {
    r.classification = Stability::unstable;
  } else if (r.lambda_negative < 0.0) {
    r.classification = Stability::stable;
    r.zero_mode_note = "zero eigenvalue direction: marginal (nonlinearly stable through -eta dn dz)";
  } else {
    r.classification = Stability::marginal;
    r.zero_mode_note = "empty market: both eigenvalues vanish";
  }
  return r;
}

Totals totals(const MarketState& state) {
  const double dx = state.grid.spacing();
  const auto y = purchase_rate(state);
  return {simd::trapezoid(state.n, dx), simd::trapezoid(state.z, dx), simd::trapezoid(y, dx)};
}

MarketState logistic_state(const price::LogisticPriceModel& model, double n_total,
                           const PriceGrid& grid, double eta) {
  const auto curves = price::build_curves(model, n_total, n_total, grid);
  MarketState s{grid, curves.demand(), curves.supply(), {}, {}, eta};
  s.demand_rate = purchase_rate(s);
  s.supply_rate = s.demand_rate;
  s.validate();
  return s;
}

void write_snapshot(std::ostream& out, const MarketState& state) {
  const auto y = purchase_rate(state);
  out << "p,n,z,D,S,y\n";
  for (std::size_t i = 0; i < state.grid.size(); ++i) {
    csv::write_row(out, {state.grid[i], state.n[i], state.z[i], state.demand_rate[i],
                         state.supply_rate[i], y[i]});
  }
}

MarketState read_snapshot(std::istream& in, double eta, const std::string& source_name) {
  const csv::Table t = csv::parse_table(in, source_name);
  const std::size_t cp = t.column("p"), cn = t.column("n"), cz = t.column("z"),
                    cd = t.column("D"), cs = t.column("S");
  std::vector<double> p, n, z, d, s;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string where = source_name + ":" + std::to_string(t.line_numbers[r]);
    p.push_back(csv::parse_double(t.rows[r][cp], where));
    n.push_back(csv::parse_double(t.rows[r][cn], where));
    z.push_back(csv::parse_double(t.rows[r][cz], where));
    d.push_back(csv::parse_double(t.rows[r][cd], where));
    s.push_back(csv::parse_double(t.rows[r][cs], where));
  }
  require(p.size() >= PriceGrid::kMinPoints, ErrorCode::ParseError,
          source_name + ": snapshot has fewer than 16 grid points");
  PriceGrid grid(p.front(), p.back(), p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double tol = 1e-9 * std::max(1.0, std::abs(grid[i]));
    require(std::abs(grid[i] - p[i]) <= tol, ErrorCode::ParseError,
            source_name + ": grid column is not uniformly spaced");
  }
  MarketState state{grid, std::move(n), std::move(z), std::move(d), std::move(s), eta};
  state.validate();
  return state;
}

}  // namespace stockvolve::kinetics
