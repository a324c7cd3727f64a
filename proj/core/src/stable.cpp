#include "lvi/stable.hpp"

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "lvi/errors.hpp"
#include "lvi/stats.hpp"

namespace lvi {

namespace {

void check_stable_params(double alpha, double gamma_bar) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("stable sampler needs 0 < alpha < 1");
  if (!(gamma_bar > 0.0)) throw DomainError("stable sampler needs gamma_bar > 0");
}

}  // namespace

std::vector<double> SubordinatorPath::values() const {
  std::vector<double> v(increments.size() + 1, 0.0);
  for (std::size_t i = 0; i < increments.size(); ++i) v[i + 1] = v[i] + increments[i];
  return v;
}

double SubordinatorPath::value_at(std::size_t i) const {
  double acc = 0.0;
  for (std::size_t j = 0; j < i; ++j) acc += increments[j];
  return acc;
}

double sample_standard_positive_stable(double alpha, Rng& rng) {
  boost::random::uniform_01<double> unif;
  boost::random::exponential_distribution<double> expo(1.0);
  double u = 0.0;
  do {
    u = unif(rng);
  } while (u <= 0.0);
  double e = 0.0;
  do {
    e = expo(rng);
  } while (e <= 0.0);
  const double angle = std::numbers::pi * u;
  const double beta = 1.0 - alpha;
  // Zolotarev's function in log form:
  //   A(angle) = sin(alpha angle)^{alpha/beta} sin(beta angle) / sin(angle)^{1/beta}
  const double log_a = (alpha / beta) * std::log(std::sin(alpha * angle)) +
                       std::log(std::sin(beta * angle)) - std::log(std::sin(angle)) / beta;
  return std::exp((beta / alpha) * (log_a - std::log(e)));
}

double stable_increment_scale(double alpha, double gamma_bar, double dt) {
  check_stable_params(alpha, gamma_bar);
  if (!(dt > 0.0)) throw DomainError("stable increment needs dt > 0");
  // (scale)^alpha = gamma_bar^alpha dt / cos(pi alpha / 2)
  const double c = std::cos(std::numbers::pi * alpha / 2.0);
  return gamma_bar * std::pow(dt / c, 1.0 / alpha);
}

double sample_stable_increment(double alpha, double gamma_bar, double dt, Rng& rng) {
  const double scale = stable_increment_scale(alpha, gamma_bar, dt);
  const double draw = scale * sample_standard_positive_stable(alpha, rng);
  if (!(draw >= std::numeric_limits<double>::min())) return std::numeric_limits<double>::min();
  return draw;
}

SubordinatorPath sample_subordinator_path(const ProblemSpec& spec, const TimeGrid& grid,
                                          std::uint64_t seed) {
  check_stable_params(spec.alpha, spec.gamma_bar);
  if (grid.start() != 0.0 || grid.end() + TimeGrid::kTolerance < spec.horizon) {
    throw DomainError("subordinator grid must cover [0, T]");
  }
  const double scale = stable_increment_scale(spec.alpha, spec.gamma_bar, grid.step());
  Rng rng(seed);
  SubordinatorPath path{grid, std::vector<double>(grid.num_steps()), seed};
  for (double& inc : path.increments) {
    const double draw = scale * sample_standard_positive_stable(spec.alpha, rng);
    inc = draw >= std::numeric_limits<double>::min() ? draw : std::numeric_limits<double>::min();
  }
  return path;
}

double laplace_exponent(double alpha, double gamma_bar, double lam) {
  if (!(lam >= 0.0)) throw DomainError("laplace exponent needs lam >= 0");
  if (lam == 0.0) return 0.0;
  return std::pow(gamma_bar * lam, alpha) / std::cos(std::numbers::pi * alpha / 2.0);
}

std::vector<SamplerCheckRow> validate_sampler(double alpha, double gamma_bar,
                                              std::size_t n_samples,
                                              std::span<const double> lams, std::uint64_t seed,
                                              const std::function<double(double)>& analytic) {
  check_stable_params(alpha, gamma_bar);
  if (n_samples < 1000) throw DomainError("validate_sampler needs at least 1000 samples");
  std::vector<double> draws(n_samples);
  Rng rng(derive_seed(seed, StreamDomain::kSampler, 0));
  for (double& d : draws) d = sample_stable_increment(alpha, gamma_bar, 1.0, rng);

  std::vector<SamplerCheckRow> rows;
  std::vector<double> transformed(n_samples);
  for (double lam : lams) {
    for (std::size_t i = 0; i < n_samples; ++i) transformed[i] = std::exp(-lam * draws[i]);
    const SampleSummary summary = summarize(transformed);
    SamplerCheckRow row;
    row.lam = lam;
    row.empirical = summary.mean;
    row.std_error = summary.std_error;
    row.analytic = analytic ? analytic(lam) : std::exp(-laplace_exponent(alpha, gamma_bar, lam));
    row.flagged = std::abs(row.empirical - row.analytic) > 3.0 * row.std_error;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace lvi
