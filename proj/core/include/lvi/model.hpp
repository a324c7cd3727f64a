#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace lvi {

/// Problem configuration: subordinator law, diagonal drift/noise operators, horizon.
///
/// The linear part is A = -diag(lambdas) and the noise covariance Q = diag(sigmas^2).
/// Both stay diagonal everywhere, so every operator below is an elementwise vector.
struct ProblemSpec {
  double alpha = 0.75;        ///< stability index of the subordinator, in (1/2, 1)
  double gamma_bar = 1.0;     ///< subordinator scale
  std::size_t dim = 1;        ///< N
  std::vector<double> lambdas;  ///< ascending, strictly positive
  std::vector<double> sigmas;   ///< strictly positive
  double horizon = 1.0;       ///< T

  /// lambda_k = k^2, sigma_k = 1, gamma_bar = 1, T = 1.
  static ProblemSpec with_defaults(double alpha, std::size_t dim);

  /// Throws DomainError when an invariant is violated.
  void validate() const;

  /// FNV-1a over the fields a simulation bank depends on (alpha, gamma_bar, dim,
  /// lambdas, horizon). sigmas are excluded: banks are stored at unit noise.
  std::uint64_t bank_hash() const;
};

/// Diagonal N x N operator stored as its diagonal.
class DiagonalOperator {
 public:
  DiagonalOperator() = default;
  explicit DiagonalOperator(std::vector<double> entries) : entries_(std::move(entries)) {}

  std::size_t size() const { return entries_.size(); }
  double operator[](std::size_t k) const { return entries_[k]; }
  double& operator[](std::size_t k) { return entries_[k]; }
  std::span<const double> entries() const { return entries_; }

  /// out = D * x (elementwise).
  void apply(std::span<const double> x, std::span<double> out) const;
  std::vector<double> apply(std::span<const double> x) const;

 private:
  std::vector<double> entries_;
};

/// Uniform partition of [start, end] with the given step.
class TimeGrid {
 public:
  static constexpr double kTolerance = 1e-9;

  TimeGrid(double start, double end, double step);

  double start() const { return start_; }
  double end() const { return end_; }
  double step() const { return step_; }
  std::size_t num_steps() const { return steps_; }
  std::size_t num_points() const { return steps_ + 1; }
  double point(std::size_t i) const;

  /// Index of the grid point within kTolerance (in step units) of t, if any.
  std::optional<std::size_t> index_of(double t) const;
  /// Like index_of but throws DomainError for off-grid times.
  std::size_t require_index(double t, const char* what) const;

 private:
  double start_;
  double end_;
  double step_;
  std::size_t steps_;
};

/// True when `coarse` is a positive integer multiple of `fine` (tolerance 1e-9 relative).
std::optional<std::size_t> integer_ratio(double coarse, double fine);

/// e^{tau A}: entry k = exp(-lambda_k tau). Throws DomainError for tau < 0.
DiagonalOperator propagator(const ProblemSpec& spec, double tau);

/// Closed form of the covariance integral for the clock l(r) = r:
/// sigma_k^2 (1 - exp(-2 lambda_k (t-u))) / (2 lambda_k). Throws DomainError for u >= t.
DiagonalOperator covariance_deterministic_clock(const ProblemSpec& spec, double u, double t);

/// 1 when |x| > radius (strict), 0 otherwise.
double indicator_observable(std::span<const double> x, double radius);

// Small elementwise helpers shared by the numerical modules.

/// (1 - e^{-z}) / z, accurate for small z >= 0.
double phi1(double z);
/// Integral of s*e^{-z(1-s)} over [0,1]: weight of the right endpoint for linear data.
double exp_trapezoid_right(double z);
/// Integral of (1-s)*e^{-z(1-s)} over [0,1]: weight of the left endpoint for linear data.
double exp_trapezoid_left(double z);

}  // namespace lvi
