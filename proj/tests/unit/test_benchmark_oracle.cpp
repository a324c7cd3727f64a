#include <doctest.h>

#include <cmath>

#include "lvi/bank.hpp"
#include "lvi/estimators.hpp"

using namespace lvi;

// One mode, where the benchmark is cheap enough to run at 1e5 paths with step 1e-4.
TEST_CASE("one-dimensional benchmark oracle for the truncated series") {
  ProblemSpec spec = ProblemSpec::with_defaults(0.75, 1);
  const std::size_t m = 100000;
  const auto bank = generate_bank(spec, 1e-3, 1e-2, m, m, 42);
  QueryParams q;
  q.x = {1.0};
  q.field = VectorFieldSpec::sine();
  q.sigma_scale = 0.5;
  q.use_shift = true;

  const auto p = em_benchmark(spec, q, m, 1e-4, 7);
  const TimeShift shift = make_shift(spec, q, 1e-3);
  const auto v0 = v0_estimate(bank, spec, shift, q);
  const auto v1 = v1_estimate(bank, spec, shift, q, 1e-2, m, 0);
  const auto v2 = vn_estimate(bank, spec, shift, q, 2, 2e-2, m / 2, 0);

  const double r0 = p.value - v0.value;
  const double r1 = r0 - v1.value;
  const double r2 = r1 - v2.value;
  const double se1 = std::sqrt(p.std_error * p.std_error + v0.std_error * v0.std_error +
                               v1.std_error * v1.std_error);
  const double se2 = std::sqrt(se1 * se1 + v2.std_error * v2.std_error);
  MESSAGE("P=" << p.value << " v0=" << v0.value << " v1=" << v1.value << " v2=" << v2.value);
  MESSAGE("P-v0=" << r0 << " P-v0-v1=" << r1 << " (se " << se1 << ") P-v0-v1-v2=" << r2
                  << " (se " << se2 << ")");

  CHECK(std::fabs(r1) < std::fabs(r0));
  CHECK(std::fabs(r2) <= 3.0 * se2);
}
