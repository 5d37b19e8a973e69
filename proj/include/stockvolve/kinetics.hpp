#pragma once

// Fast-timescale purchase kinetics on a price grid:
//   dn/dtau = D - y,  dz/dtau = S - y,  y = eta n z.
// Integrated with explicit Euler until the stationary state D = S = y.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "stockvolve/grid.hpp"
#include "stockvolve/price_dist.hpp"

namespace stockvolve::kinetics {

struct MarketState {
  PriceGrid grid;
  std::vector<double> n;             // demanded units n(p)
  std::vector<double> z;             // supplied units z(p)
  std::vector<double> demand_rate;   // D(p)
  std::vector<double> supply_rate;   // S(p)
  double eta = 1.0;                  // preference rate

  // Throws InvalidParameters on size mismatch, negative entries or eta <= 0.
  void validate() const;
};

enum class Stability { stable, marginal, unstable };

std::string to_string(Stability s);

struct StabilityReport {
  double lambda_negative = 0.0;  // -eta (z0 + n0)
  double lambda_zero = 0.0;      // exactly 0
  double numeric_eigenvalues[2] = {0.0, 0.0};  // from the assembled Jacobian, ascending
  Stability classification = Stability::marginal;
  // The zero-eigenvalue direction is only nonlinearly stable through the
  // -eta dn dz term; it is reported, not asserted to decay.
  std::string zero_mode_note;
};

struct Totals {
  double n_total = 0.0;
  double z_total = 0.0;
  double y_total = 0.0;
};

std::vector<double> purchase_rate(const MarketState& state);

// Largest step the integrator accepts: 0.1 / (eta (max n + max z)).
double max_stable_step(const MarketState& state);

// One explicit Euler step. Values that go negative by no more than
// 10 machine epsilons of the state scale are clamped to 0; anything larger
// (or a dtau above max_stable_step) throws StepTooLarge.
MarketState step(const MarketState& state, double dtau);

// max(max|D - y| / max D, max|S - y| / max S); rates that are identically
// zero are measured on an absolute scale.
double stationarity_residual(const MarketState& state);

using RelaxObserver = std::function<void(std::size_t step, const MarketState&, double residual)>;

// Iterates step() at max_stable_step() until stationarity_residual <= tol.
// Throws NoStationaryState when D != S beyond tol, NotConverged after max_steps.
MarketState relax(const MarketState& state, double tol, std::size_t max_steps,
                  const RelaxObserver& observer = {});

StabilityReport stability_eigenvalues(double n0, double z0, double eta);

Totals totals(const MarketState& state);

// Stationary curves n = n_total (1 - F), z = n_total F with D = S = eta n z.
MarketState logistic_state(const price::LogisticPriceModel& model, double n_total,
                           const PriceGrid& grid, double eta);

// Snapshot CSV with header p,n,z,D,S,y and 17 significant digits.
void write_snapshot(std::ostream& out, const MarketState& state);
MarketState read_snapshot(std::istream& in, double eta, const std::string& source_name = "snapshot");

}  // namespace stockvolve::kinetics
