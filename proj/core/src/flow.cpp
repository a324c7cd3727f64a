#include "lvi/flow.hpp"

#include <algorithm>
#include <cmath>

#include "lvi/errors.hpp"

namespace lvi {

namespace {

// phi_k(c) = sum_j c^j / (j+k)!  for c = -z <= 0.
double phi_series(double z, int k) {
  double fact = 1.0;
  for (int i = 2; i <= k; ++i) fact *= i;
  double term = 1.0 / fact;
  double sum = 0.0;
  for (int j = 0; j < 30; ++j) {
    sum += term;
    term *= -z / static_cast<double>(j + k + 1);
  }
  return sum;
}

double phi2_neg(double z) {
  if (z < 1.0) return phi_series(z, 2);
  return (std::exp(-z) - 1.0 + z) / (z * z);
}

double phi3_neg(double z) {
  if (z < 1.0) return phi_series(z, 3);
  return (std::exp(-z) - 1.0 + z - 0.5 * z * z) / (-z * z * z);
}

struct EtdCoefficients {
  std::vector<double> e, e_half, q_half, f1, f2, f3;
};

EtdCoefficients etd_coefficients(const ProblemSpec& spec, double h) {
  const std::size_t n = spec.dim;
  EtdCoefficients c{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n),
                    std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t k = 0; k < n; ++k) {
    const double z = spec.lambdas[k] * h;
    const double p1 = phi1(z);
    const double p2 = phi2_neg(z);
    const double p3 = phi3_neg(z);
    c.e[k] = std::exp(-z);
    c.e_half[k] = std::exp(-0.5 * z);
    c.q_half[k] = 0.5 * h * phi1(0.5 * z);
    c.f1[k] = h * (p1 - 3.0 * p2 + 4.0 * p3);
    c.f2[k] = h * (p2 - 2.0 * p3);
    c.f3[k] = h * (-p2 + 4.0 * p3);
  }
  return c;
}

}  // namespace

TimeShift::TimeShift(TimeGrid grid, double origin_time, std::vector<double> origin,
                     std::vector<double> values, std::vector<double> flow_values, bool zero)
    : grid_(grid),
      origin_time_(origin_time),
      origin_(std::move(origin)),
      values_(std::move(values)),
      flow_values_(std::move(flow_values)),
      zero_(zero) {}

std::span<const double> TimeShift::value(std::size_t i) const {
  return std::span<const double>(values_).subspan(i * dim(), dim());
}

std::span<const double> TimeShift::flow(std::size_t i) const {
  return std::span<const double>(flow_values_).subspan(i * dim(), dim());
}

std::span<const double> TimeShift::value_at(double t) const {
  return value(grid_.require_index(t, "shift time"));
}

std::span<const double> TimeShift::flow_at(double t) const {
  return flow(grid_.require_index(t, "flow time"));
}

namespace {

std::size_t check_flow_inputs(const ProblemSpec& spec, double s, std::span<const double> x,
                              const TimeGrid& grid) {
  spec.validate();
  if (x.size() != spec.dim) throw DomainError("initial point has wrong dimension");
  if (grid.start() != 0.0 || std::abs(grid.end() - spec.horizon) > TimeGrid::kTolerance) {
    throw DomainError("flow grid must span [0, T]");
  }
  if (grid.step() > 1e-3 * (1.0 + 1e-9)) throw DomainError("flow grid step must be <= 1e-3");
  const std::size_t s_idx = grid.require_index(s, "flow start s");
  if (s_idx >= grid.num_steps()) throw DomainError("flow start must satisfy s < T");
  return s_idx;
}

}  // namespace

TimeShift solve_flow(const ProblemSpec& spec, const VectorFieldSpec& field, double s,
                     std::span<const double> x, const TimeGrid& grid, FlowScheme scheme) {
  const std::size_t s_idx = check_flow_inputs(spec, s, x, grid);
  field.validate(spec.dim);
  const std::size_t n = spec.dim;
  const std::size_t points = grid.num_points();
  const double h = grid.step();

  std::vector<double> flow(points * n);
  std::vector<double> values(points * n);
  for (std::size_t i = 0; i <= s_idx; ++i) std::copy(x.begin(), x.end(), flow.begin() + i * n);

  std::vector<double> u(x.begin(), x.end());
  std::vector<double> nu(n), a(n), na(n), b(n), nb(n), c(n), nc(n), scratch(n);
  const EtdCoefficients coef =
      scheme == FlowScheme::kExponentialRk4 ? etd_coefficients(spec, h) : EtdCoefficients{};

  for (std::size_t i = s_idx; i < grid.num_steps(); ++i) {
    const double t = grid.point(i);
    eval_field(field, t, u, nu, scratch);
    if (scheme == FlowScheme::kEuler) {
      for (std::size_t k = 0; k < n; ++k) u[k] += h * (-spec.lambdas[k] * u[k] + nu[k]);
    } else {
      for (std::size_t k = 0; k < n; ++k) a[k] = coef.e_half[k] * u[k] + coef.q_half[k] * nu[k];
      eval_field(field, t + 0.5 * h, a, na, scratch);
      for (std::size_t k = 0; k < n; ++k) b[k] = coef.e_half[k] * u[k] + coef.q_half[k] * na[k];
      eval_field(field, t + 0.5 * h, b, nb, scratch);
      for (std::size_t k = 0; k < n; ++k) {
        c[k] = coef.e_half[k] * a[k] + coef.q_half[k] * (2.0 * nb[k] - nu[k]);
      }
      eval_field(field, t + h, c, nc, scratch);
      for (std::size_t k = 0; k < n; ++k) {
        u[k] = coef.e[k] * u[k] + coef.f1[k] * nu[k] + 2.0 * coef.f2[k] * (na[k] + nb[k]) +
               coef.f3[k] * nc[k];
      }
    }
    std::copy(u.begin(), u.end(), flow.begin() + (i + 1) * n);
  }

  for (std::size_t i = 0; i < points; ++i) {
    std::span<const double> xi(flow.data() + i * n, n);
    eval_field(field, grid.point(i), xi, std::span<double>(values.data() + i * n, n), scratch);
  }
  return TimeShift(grid, s, std::vector<double>(x.begin(), x.end()), std::move(values),
                   std::move(flow), field.kind == FieldKind::kZero);
}

TimeShift zero_shift(const ProblemSpec& spec, double s, std::span<const double> x,
                     const TimeGrid& grid) {
  const std::size_t s_idx = check_flow_inputs(spec, s, x, grid);
  const std::size_t n = spec.dim;
  const std::size_t points = grid.num_points();
  std::vector<double> flow(points * n);
  for (std::size_t i = 0; i < points; ++i) {
    const double lag = i <= s_idx ? 0.0 : grid.point(i) - s;
    for (std::size_t k = 0; k < n; ++k) flow[i * n + k] = std::exp(-spec.lambdas[k] * lag) * x[k];
  }
  return TimeShift(grid, s, std::vector<double>(x.begin(), x.end()),
                   std::vector<double>(points * n, 0.0), std::move(flow), true);
}

void forcing_convolution(const ProblemSpec& spec, const TimeShift& shift, std::size_t from,
                         std::size_t to, std::span<double> out) {
  const std::size_t n = spec.dim;
  std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n), 0.0);
  if (shift.is_zero() || from >= to) return;
  const double h = shift.grid().step();
  std::vector<double> decay(n), w_left(n), w_right(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double z = spec.lambdas[k] * h;
    decay[k] = std::exp(-z);
    w_left[k] = h * exp_trapezoid_left(z);
    w_right[k] = h * exp_trapezoid_right(z);
  }
  for (std::size_t i = from; i < to; ++i) {
    const auto f0 = shift.value(i);
    const auto f1 = shift.value(i + 1);
    for (std::size_t k = 0; k < n; ++k) {
      out[k] = decay[k] * out[k] + w_left[k] * f0[k] + w_right[k] * f1[k];
    }
  }
}

std::vector<double> forcing_convolution(const ProblemSpec& spec, const TimeShift& shift, double s,
                                        double t) {
  if (!(s < t)) throw DomainError("forcing convolution needs s < t");
  if (shift.dim() != spec.dim) throw DomainError("shift dimension mismatch");
  const std::size_t from = shift.grid().require_index(s, "s");
  const std::size_t to = shift.grid().require_index(t, "t");
  std::vector<double> out(spec.dim);
  forcing_convolution(spec, shift, from, to, out);
  return out;
}

}  // namespace lvi
