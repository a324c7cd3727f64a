#pragma once

#include <span>
#include <vector>

#include "lvi/fields.hpp"
#include "lvi/model.hpp"

namespace lvi {

enum class FlowScheme {
  kExponentialRk4,  ///< ETDRK4 (Cox-Matthews); exact for the linear part
  kEuler,           ///< explicit Euler; stable only while lambda_max * step <= 2
};

/// Deterministic flow x(.) started at (s, x), held constant on [0, s], and the forcing
/// f(t) = B0(t, x(t)) sampled on a uniform grid over [0, T].
class TimeShift {
 public:
  TimeShift(TimeGrid grid, double origin_time, std::vector<double> origin,
            std::vector<double> values, std::vector<double> flow_values, bool zero);

  const TimeGrid& grid() const { return grid_; }
  std::size_t dim() const { return origin_.size(); }
  double origin_time() const { return origin_time_; }
  std::span<const double> origin() const { return origin_; }
  /// True when f vanishes identically (no time-shift).
  bool is_zero() const { return zero_; }

  std::span<const double> value(std::size_t i) const;
  std::span<const double> flow(std::size_t i) const;
  /// f(t) / x(t) for t on the grid; DomainError otherwise.
  std::span<const double> value_at(double t) const;
  std::span<const double> flow_at(double t) const;

 private:
  TimeGrid grid_;
  double origin_time_;
  std::vector<double> origin_;
  std::vector<double> values_;
  std::vector<double> flow_values_;
  bool zero_;
};

/// Integrates x' = A x + B0(t, x) from (s, x) on `grid` (step <= 1e-3, grid over [0, T]).
TimeShift solve_flow(const ProblemSpec& spec, const VectorFieldSpec& field, double s,
                     std::span<const double> x, const TimeGrid& grid,
                     FlowScheme scheme = FlowScheme::kExponentialRk4);

/// f = 0; the recorded flow is the linear one, e^{(t-s)A} x.
TimeShift zero_shift(const ProblemSpec& spec, double s, std::span<const double> x,
                     const TimeGrid& grid);

/// F_{s,t} = int_s^t e^{(t-r)A} f(r) dr with f linear inside each grid bin; the
/// exponential factor is integrated exactly, so constant f is reproduced for any lambda.
std::vector<double> forcing_convolution(const ProblemSpec& spec, const TimeShift& shift, double s,
                                        double t);
void forcing_convolution(const ProblemSpec& spec, const TimeShift& shift, std::size_t from,
                         std::size_t to, std::span<double> out);

}  // namespace lvi
