#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "lvi/model.hpp"
#include "lvi/rng.hpp"

namespace lvi {

/// One realization of the subordinator L on a uniform grid.
///
/// The increments are the primary data: each one is strictly positive. Cumulative
/// values are recovered on demand; with very heavy jumps a later increment can fall
/// below the spacing of doubles at L's current level, so consumers that need
/// per-bin masses (covariance quadrature, noise scaling) read increments directly.
struct SubordinatorPath {
  TimeGrid grid;
  std::vector<double> increments;  ///< increments[i] = L(t_{i+1}) - L(t_i)
  std::uint64_t seed = 0;

  /// L at every grid point; values[0] = 0.
  std::vector<double> values() const;
  /// L at the grid point with index i.
  double value_at(std::size_t i) const;
};

/// Draw of the standard one-sided stable law with E[exp(-lam S)] = exp(-lam^alpha)
/// (Kanter's representation through a uniform angle and an exponential variable).
double sample_standard_positive_stable(double alpha, Rng& rng);

/// One increment L(t+dt) - L(t) for the subordinator with Laplace exponent
/// gamma_bar^alpha lam^alpha / cos(pi alpha / 2). Strictly positive: a draw that
/// underflows is clamped to the smallest normal double.
double sample_stable_increment(double alpha, double gamma_bar, double dt, Rng& rng);

/// Multiplier turning a standard positive stable draw into an increment over dt.
double stable_increment_scale(double alpha, double gamma_bar, double dt);

/// Cumulative path on `grid`, deterministic in (spec, grid, seed).
SubordinatorPath sample_subordinator_path(const ProblemSpec& spec, const TimeGrid& grid,
                                          std::uint64_t seed);

/// gamma_bar^alpha lam^alpha / cos(pi alpha / 2), so E[exp(-lam L_t)] = exp(-t * exponent).
double laplace_exponent(double alpha, double gamma_bar, double lam);

struct SamplerCheckRow {
  double lam = 0.0;
  double empirical = 0.0;  ///< mean of exp(-lam L_1) over the draws
  double analytic = 0.0;
  double std_error = 0.0;
  bool flagged = false;    ///< |empirical - analytic| > 3 std_error
};

/// Monte Carlo check of the sampler against the Laplace transform of L_1.
/// `analytic` overrides the reference curve (used for negative controls).
std::vector<SamplerCheckRow> validate_sampler(
    double alpha, double gamma_bar, std::size_t n_samples, std::span<const double> lams,
    std::uint64_t seed, const std::function<double(double)>& analytic = {});

}  // namespace lvi
