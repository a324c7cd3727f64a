#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "lvi/errors.hpp"
#include "lvi/rng.hpp"
#include "lvi/stable.hpp"

using namespace lvi;

namespace {

double laplace_oracle(double alpha, double gamma_bar, double lam, double t) {
  return std::exp(-t * std::pow(gamma_bar * lam, alpha) / std::cos(std::numbers::pi * alpha / 2.0));
}

struct MeanSe {
  double mean, se;
};

MeanSe mean_se(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  return {m, sd / std::sqrt(static_cast<double>(v.size()))};
}

// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

double ks_critical_1pct(std::size_t n, std::size_t m) {
  const double nn = static_cast<double>(n), mm = static_cast<double>(m);
  return 1.628 * std::sqrt((nn + mm) / (nn * mm));
}

}  // namespace

TEST_CASE("laplace exponent examples") {
  CHECK(laplace_exponent(0.75, 1.0, 0.0) == 0.0);
  CHECK(laplace_exponent(0.5, 1.0, 1.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(laplace_exponent(0.5, 2.0, 1.0) / laplace_exponent(0.5, 1.0, 1.0) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("increment law matches the Laplace transform at alpha = 1/2") {
  // alpha = 1/2 sits outside the model range but inside the sampler's.
  Rng rng = make_stream(3, StreamDomain::kSampler, 0);
  std::vector<double> e(100000);
  for (double& v : e) v = std::exp(-sample_stable_increment(0.5, 1.0, 1.0, rng));
  const MeanSe r = mean_se(e);
  CHECK(std::fabs(r.mean - std::exp(-std::sqrt(2.0))) <= 3.0 * r.se);
}

TEST_CASE("increment law over the table alphas and several lambdas") {
  for (double alpha : {0.55, 0.65, 0.75, 0.85}) {
    Rng rng = make_stream(17, StreamDomain::kSampler, 1);
    std::vector<double> draws(100000);
    for (double& v : draws) v = sample_stable_increment(alpha, 1.0, 1.0, rng);
    for (double lam : {0.5, 1.0, 2.0}) {
      std::vector<double> e(draws.size());
      for (std::size_t i = 0; i < e.size(); ++i) e[i] = std::exp(-lam * draws[i]);
      const MeanSe r = mean_se(e);
      CHECK_MESSAGE(std::fabs(r.mean - laplace_oracle(alpha, 1.0, lam, 1.0)) <= 3.0 * r.se,
                    "alpha=" << alpha << " lam=" << lam);
    }
  }
}

TEST_CASE("self-similarity: dt = 2^alpha draws look like twice the dt = 1 draws") {
  const double alpha = 0.7;
  Rng a = make_stream(5, StreamDomain::kSampler, 2);
  Rng b = make_stream(5, StreamDomain::kSampler, 3);
  std::vector<double> big(10000), doubled(10000);
  for (double& v : big) v = sample_stable_increment(alpha, 1.0, std::pow(2.0, alpha), a);
  for (double& v : doubled) v = 2.0 * sample_stable_increment(alpha, 1.0, 1.0, b);
  CHECK(ks_statistic(big, doubled) < ks_critical_1pct(big.size(), doubled.size()));
}

TEST_CASE("increments are strictly positive") {
  Rng rng = make_stream(9, StreamDomain::kSampler, 4);
  const double params[][3] = {{0.01, 1.0, 1e-9}, {0.55, 1e-3, 1e-4}, {0.85, 5.0, 1.0},
                              {0.99, 1.0, 1e-3}};
  for (const auto& p : params) {
    for (int i = 0; i < 250000; ++i) REQUIRE(sample_stable_increment(p[0], p[1], p[2], rng) > 0.0);
  }
}

TEST_CASE("sampler parameter checks") {
  Rng rng(1);
  CHECK_THROWS_AS(sample_stable_increment(1.0, 1.0, 1.0, rng), DomainError);
  CHECK_THROWS_AS(sample_stable_increment(0.0, 1.0, 1.0, rng), DomainError);
  CHECK_THROWS_AS(sample_stable_increment(0.7, 0.0, 1.0, rng), DomainError);
  CHECK_THROWS_AS(sample_stable_increment(0.7, 1.0, 0.0, rng), DomainError);
}

TEST_CASE("paths: deterministic, start at zero, strictly increasing") {
  const ProblemSpec spec = ProblemSpec::with_defaults(0.75, 3);
  const TimeGrid grid(0.0, 1.0, 1e-3);
  const SubordinatorPath p1 = sample_subordinator_path(spec, grid, 77);
  const SubordinatorPath p2 = sample_subordinator_path(spec, grid, 77);
  CHECK(p1.increments == p2.increments);
  const auto v = p1.values();
  REQUIRE(v.size() == grid.num_points());
  CHECK(v[0] == 0.0);
  for (double inc : p1.increments) REQUIRE(inc > 0.0);
  CHECK(p1.value_at(1000) == v.back());
  const SubordinatorPath p3 = sample_subordinator_path(spec, grid, 78);
  CHECK(p1.increments != p3.increments);
}

TEST_CASE("path endpoint law and grid refinement") {
  const ProblemSpec spec = ProblemSpec::with_defaults(0.75, 1);
  const TimeGrid coarse(0.0, 1.0, 0.1);
  const TimeGrid fine(0.0, 1.0, 0.05);
  std::vector<double> e(100000), end_coarse(10000), end_fine(10000);
  for (std::size_t i = 0; i < e.size(); ++i) {
    const auto p = sample_subordinator_path(spec, coarse, derive_seed(1, StreamDomain::kSubordinatorPath, i));
    e[i] = std::exp(-p.value_at(coarse.num_steps()));
    if (i < end_coarse.size()) end_coarse[i] = p.value_at(coarse.num_steps());
  }
  for (std::size_t i = 0; i < end_fine.size(); ++i) {
    end_fine[i] = sample_subordinator_path(spec, fine, derive_seed(2, StreamDomain::kSubordinatorPath, i))
                      .value_at(fine.num_steps());
  }
  const MeanSe r = mean_se(e);
  CHECK(std::fabs(r.mean - laplace_oracle(0.75, 1.0, 1.0, 1.0)) <= 3.0 * r.se);
  CHECK(ks_statistic(end_coarse, end_fine) < ks_critical_1pct(end_coarse.size(), end_fine.size()));
}

TEST_CASE("increments over disjoint bins are uncorrelated") {
  const ProblemSpec spec = ProblemSpec::with_defaults(0.55, 1);
  const TimeGrid grid(0.0, 1.0, 1e-5);
  const SubordinatorPath p = sample_subordinator_path(spec, grid, 4);
  REQUIRE(p.increments.size() == 100000);
  const std::vector<double>& u = p.increments;
  const MeanSe m = mean_se(u);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i + 1 < u.size(); ++i) num += (u[i] - m.mean) * (u[i + 1] - m.mean);
  for (double x : u) den += (x - m.mean) * (x - m.mean);
  CHECK(std::fabs(num / den) < 0.02);
}

TEST_CASE("validate_sampler report") {
  const double lams[] = {0.0, 1.0};
  const auto rows = validate_sampler(0.55, 1.0, 100000, lams, 21);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].empirical == 1.0);
  CHECK(rows[0].analytic == 1.0);
  CHECK_FALSE(rows[0].flagged);
  CHECK_FALSE(rows[1].flagged);
  CHECK(rows[1].analytic == doctest::Approx(laplace_oracle(0.55, 1.0, 1.0, 1.0)).epsilon(1e-14));

  const double one[] = {1.0};
  const auto wrong = validate_sampler(0.55, 1.0, 100000, one, 21, [](double lam) {
    return std::exp(-0.5 * std::pow(lam, 0.55) / std::cos(std::numbers::pi * 0.55 / 2.0));
  });
  CHECK(wrong[0].flagged);
  CHECK_THROWS_AS(validate_sampler(0.55, 1.0, 999, one, 1), DomainError);
}

TEST_CASE("seed derivation is injective over used ranges and domains are disjoint") {
  std::vector<std::uint64_t> seen;
  for (auto d : {StreamDomain::kSubordinatorPath, StreamDomain::kRecordClock,
                 StreamDomain::kRecordGauss, StreamDomain::kBenchmarkClock,
                 StreamDomain::kBenchmarkGauss, StreamDomain::kPairing, StreamDomain::kSampler}) {
    for (std::uint64_t i = 0; i < 100000; ++i) seen.push_back(derive_seed(12345, d, i));
  }
  std::sort(seen.begin(), seen.end());
  CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
  CHECK_THROWS_AS(derive_seed(1, StreamDomain::kSampler, kMaxStreamIndex + 1), DomainError);
}
