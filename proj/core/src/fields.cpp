#include "lvi/fields.hpp"

#include <algorithm>
#include <cmath>

#include "lvi/errors.hpp"
#include "lvi/flow.hpp"

namespace lvi {

VectorFieldSpec VectorFieldSpec::sine() {
  VectorFieldSpec f;
  f.kind = FieldKind::kSine;
  return f;
}

VectorFieldSpec VectorFieldSpec::bounded_cubic(double b0, std::vector<double> y_bar,
                                               double sharpness) {
  VectorFieldSpec f;
  f.kind = FieldKind::kBoundedCubic;
  f.b0 = b0;
  f.y_bar = std::move(y_bar);
  f.sharpness = sharpness;
  return f;
}

VectorFieldSpec VectorFieldSpec::make_custom(Hook hook, double bound) {
  VectorFieldSpec f;
  f.kind = FieldKind::kCustom;
  f.custom = std::move(hook);
  f.custom_bound = bound;
  return f;
}

void VectorFieldSpec::validate(std::size_t dim) const {
  switch (kind) {
    case FieldKind::kZero:
    case FieldKind::kSine:
      return;
    case FieldKind::kBoundedCubic:
      if (!(b0 > 0.0)) throw DomainError("bounded cubic field needs b0 > 0");
      if (!(sharpness > 0.0)) throw DomainError("bounded cubic field needs a > 0");
      if (y_bar.size() != dim) throw DomainError("bounded cubic field needs y_bar of length N");
      return;
    case FieldKind::kCustom:
      if (!custom) throw DomainError("custom field has no evaluation hook");
      if (!(custom_bound > 0.0) || !std::isfinite(custom_bound)) {
        throw DomainError("custom field must declare a finite bound M_B");
      }
      return;
  }
}

double VectorFieldSpec::sup_bound() const {
  switch (kind) {
    case FieldKind::kZero:
      return 0.0;
    case FieldKind::kSine:
      return 1.0;
    case FieldKind::kBoundedCubic: {
      double inf_norm = 0.0;
      for (double y : y_bar) inf_norm = std::max(inf_norm, std::abs(y));
      return b0 * inf_norm;
    }
    case FieldKind::kCustom:
      return custom_bound;
  }
  return 0.0;
}

std::string VectorFieldSpec::name() const {
  switch (kind) {
    case FieldKind::kZero:
      return "zero";
    case FieldKind::kSine:
      return "sine";
    case FieldKind::kBoundedCubic:
      return "bounded_cubic";
    case FieldKind::kCustom:
      return "custom";
  }
  return "unknown";
}

double soft_max(std::span<const double> x, double a) {
  if (x.empty()) return 0.0;
  const double top = *std::max_element(x.begin(), x.end());
  // top + sum (x_i - top) w_i / sum w_i with w_i = e^{a (x_i - top)} in (0, 1]
  double num = 0.0;
  double den = 0.0;
  for (double v : x) {
    const double w = std::exp(a * (v - top));
    num += (v - top) * w;
    den += w;
  }
  return top + num / den;
}

void soft_abs(std::span<const double> x, double a, std::span<double> out) {
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = x[k] * std::tanh(a * x[k]);
}

std::vector<double> soft_abs(std::span<const double> x, double a) {
  std::vector<double> out(x.size());
  soft_abs(x, a, out);
  return out;
}

void eval_field(const VectorFieldSpec& field, double t, std::span<const double> x,
                std::span<double> out, std::span<double> scratch) {
  const std::size_t n = x.size();
  switch (field.kind) {
    case FieldKind::kZero:
      std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n), 0.0);
      return;
    case FieldKind::kSine:
      for (std::size_t k = 0; k < n; ++k) out[k] = std::sin(x[k]);
      return;
    case FieldKind::kBoundedCubic: {
      const double scale = field.sup_bound();  // b0 |y_bar|_inf
      for (std::size_t k = 0; k < n; ++k) out[k] = field.y_bar[k] - x[k];
      soft_abs(out.first(n), field.sharpness, scratch.first(n));
      const double smooth_max = soft_max(scratch.first(n), field.sharpness);
      const double den = scale + smooth_max * smooth_max * smooth_max;
      for (std::size_t k = 0; k < n; ++k) {
        const double d = out[k];
        out[k] = scale * d * (d * d) / den;
      }
      return;
    }
    case FieldKind::kCustom:
      field.custom(t, x, out);
      return;
  }
}

std::vector<double> eval_field(const VectorFieldSpec& field, double t, std::span<const double> x) {
  std::vector<double> out(x.size());
  std::vector<double> scratch(x.size());
  eval_field(field, t, x, out, scratch);
  return out;
}

std::vector<double> effective_drift(const VectorFieldSpec& field, const TimeShift& shift,
                                    double t, std::span<const double> x) {
  std::vector<double> out = eval_field(field, t, x);
  const auto f = shift.value_at(t);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] -= f[k];
  return out;
}

}  // namespace lvi
