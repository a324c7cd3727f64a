#include "lvi/model.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "lvi/errors.hpp"

namespace lvi {

namespace {

class Fnv1a {
 public:
  void add(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      hash_ ^= (v >> (8 * i)) & 0xffU;
      hash_ *= 0x100000001b3ULL;
    }
  }
  void add(double v) { add(std::bit_cast<std::uint64_t>(v)); }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

}  // namespace

ProblemSpec ProblemSpec::with_defaults(double alpha, std::size_t dim) {
  ProblemSpec spec;
  spec.alpha = alpha;
  spec.gamma_bar = 1.0;
  spec.dim = dim;
  spec.lambdas.resize(dim);
  spec.sigmas.assign(dim, 1.0);
  for (std::size_t k = 0; k < dim; ++k) {
    const double idx = static_cast<double>(k + 1);
    spec.lambdas[k] = idx * idx;
  }
  spec.horizon = 1.0;
  return spec;
}

void ProblemSpec::validate() const {
  if (!(alpha > 0.5 && alpha < 1.0)) {
    throw DomainError("alpha must lie in (1/2, 1), got " + std::to_string(alpha));
  }
  if (!(gamma_bar > 0.0)) throw DomainError("gamma_bar must be positive");
  if (dim == 0) throw DomainError("dimension must be positive");
  if (lambdas.size() != dim || sigmas.size() != dim) {
    throw DomainError("lambdas and sigmas must have length dim");
  }
  for (std::size_t k = 0; k < dim; ++k) {
    if (!(lambdas[k] > 0.0) || !std::isfinite(lambdas[k])) {
      throw DomainError("lambdas must be positive and finite");
    }
    if (k > 0 && lambdas[k] < lambdas[k - 1]) throw DomainError("lambdas must be ascending");
    if (!(sigmas[k] > 0.0) || !std::isfinite(sigmas[k])) {
      throw DomainError("sigmas must be positive and finite");
    }
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("horizon must be positive");
}

std::uint64_t ProblemSpec::bank_hash() const {
  Fnv1a h;
  h.add(alpha);
  h.add(gamma_bar);
  h.add(static_cast<std::uint64_t>(dim));
  for (double l : lambdas) h.add(l);
  h.add(horizon);
  return h.value();
}

void DiagonalOperator::apply(std::span<const double> x, std::span<double> out) const {
  for (std::size_t k = 0; k < entries_.size(); ++k) out[k] = entries_[k] * x[k];
}

std::vector<double> DiagonalOperator::apply(std::span<const double> x) const {
  std::vector<double> out(entries_.size());
  apply(x, out);
  return out;
}

TimeGrid::TimeGrid(double start, double end, double step) : start_(start), end_(end), step_(step) {
  if (!(step > 0.0) || !(start < end)) {
    throw DomainError("time grid needs start < end and step > 0");
  }
  const double ratio = (end - start) / step;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > kTolerance * std::max(1.0, rounded)) {
    throw DomainError("time grid step does not divide the interval");
  }
  steps_ = static_cast<std::size_t>(rounded);
}

double TimeGrid::point(std::size_t i) const {
  return i == steps_ ? end_ : start_ + static_cast<double>(i) * step_;
}

std::optional<std::size_t> TimeGrid::index_of(double t) const {
  const double pos = (t - start_) / step_;
  const double rounded = std::round(pos);
  if (rounded < 0.0 || rounded > static_cast<double>(steps_)) return std::nullopt;
  if (std::abs(pos - rounded) > kTolerance * std::max(1.0, rounded)) return std::nullopt;
  return static_cast<std::size_t>(rounded);
}

std::size_t TimeGrid::require_index(double t, const char* what) const {
  auto idx = index_of(t);
  if (!idx) {
    throw DomainError(std::string(what) + " = " + std::to_string(t) +
                      " is not on the grid with step " + std::to_string(step_));
  }
  return *idx;
}

std::optional<std::size_t> integer_ratio(double coarse, double fine) {
  if (!(coarse > 0.0) || !(fine > 0.0)) return std::nullopt;
  const double ratio = coarse / fine;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * rounded) return std::nullopt;
  return static_cast<std::size_t>(rounded);
}

DiagonalOperator propagator(const ProblemSpec& spec, double tau) {
  if (!(tau >= 0.0)) throw DomainError("propagator needs tau >= 0");
  std::vector<double> e(spec.dim);
  for (std::size_t k = 0; k < spec.dim; ++k) e[k] = std::exp(-spec.lambdas[k] * tau);
  return DiagonalOperator(std::move(e));
}

DiagonalOperator covariance_deterministic_clock(const ProblemSpec& spec, double u, double t) {
  if (!(u < t)) throw DomainError("covariance needs u < t");
  std::vector<double> c(spec.dim);
  for (std::size_t k = 0; k < spec.dim; ++k) {
    const double two_l = 2.0 * spec.lambdas[k];
    c[k] = spec.sigmas[k] * spec.sigmas[k] * (-std::expm1(-two_l * (t - u))) / two_l;
  }
  return DiagonalOperator(std::move(c));
}

double indicator_observable(std::span<const double> x, double radius) {
  double sq = 0.0;
  for (double v : x) sq += v * v;
  return std::sqrt(sq) > radius ? 1.0 : 0.0;
}

double phi1(double z) {
  if (z == 0.0) return 1.0;
  return -std::expm1(-z) / z;
}

namespace {

// sum_j (-z)^j / (j! * d(j)) for |z| < 1.
template <class Denominator>
double series(double z, Denominator d) {
  double term = 1.0;
  double sum = 0.0;
  for (int j = 0; j < 30; ++j) {
    sum += term / d(j);
    term *= -z / static_cast<double>(j + 1);
  }
  return sum;
}

}  // namespace

double exp_trapezoid_left(double z) {
  if (z < 1.0) return series(z, [](int j) { return static_cast<double>(j + 2); });
  return (1.0 - (1.0 + z) * std::exp(-z)) / (z * z);
}

double exp_trapezoid_right(double z) {
  if (z < 1.0) {
    return series(z, [](int j) { return static_cast<double>((j + 1) * (j + 2)); });
  }
  return phi1(z) - exp_trapezoid_left(z);
}

}  // namespace lvi
