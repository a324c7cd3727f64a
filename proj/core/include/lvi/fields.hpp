#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace lvi {

class TimeShift;

enum class FieldKind { kZero, kSine, kBoundedCubic, kCustom };

/// Drift nonlinearity B0(t, x).
struct VectorFieldSpec {
  using Hook = std::function<void(double t, std::span<const double> x, std::span<double> out)>;

  FieldKind kind = FieldKind::kZero;

  // bounded cubic parameters
  double b0 = 2.0;
  std::vector<double> y_bar;
  double sharpness = 1e4;  ///< a

  // custom kind: evaluation hook plus a declared sup-norm bound
  Hook custom;
  double custom_bound = 0.0;

  static VectorFieldSpec zero() { return {}; }
  static VectorFieldSpec sine();
  static VectorFieldSpec bounded_cubic(double b0, std::vector<double> y_bar, double sharpness);
  static VectorFieldSpec make_custom(Hook hook, double bound);

  /// Throws DomainError for missing parameters or an undeclared custom bound.
  void validate(std::size_t dim) const;

  /// A bound M with |B0(t, x)|_inf <= M.
  double sup_bound() const;

  std::string name() const;
};

/// sum x_i e^{a x_i} / sum e^{a x_i}, evaluated around the largest entry.
double soft_max(std::span<const double> x, double a);

/// out_k = x_k tanh(a x_k).
void soft_abs(std::span<const double> x, double a, std::span<double> out);
std::vector<double> soft_abs(std::span<const double> x, double a);

/// out = B0(t, x). `scratch` must hold dim doubles for the bounded cubic kind.
void eval_field(const VectorFieldSpec& field, double t, std::span<const double> x,
                std::span<double> out, std::span<double> scratch);
std::vector<double> eval_field(const VectorFieldSpec& field, double t, std::span<const double> x);

/// B(t, x) = B0(t, x) - f(t); f is read from the shift at the grid point of t.
std::vector<double> effective_drift(const VectorFieldSpec& field, const TimeShift& shift,
                                    double t, std::span<const double> x);

}  // namespace lvi
