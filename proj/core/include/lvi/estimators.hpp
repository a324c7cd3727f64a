#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lvi/bank.hpp"
#include "lvi/fields.hpp"
#include "lvi/flow.hpp"
#include "lvi/model.hpp"

namespace lvi {

using Observable = std::function<double(std::span<const double>)>;

struct QueryParams {
  double s = 0.0;
  double t = 1.0;
  std::vector<double> x;
  double sigma_scale = 1.0;
  double radius = 1.0;
  VectorFieldSpec field;
  bool use_shift = true;
  /// Replaces the indicator 1{|x| > radius} when set.
  std::optional<Observable> observable;

  /// Throws DomainError unless 0 <= s < t <= horizon and x has the right size.
  void validate(const ProblemSpec& spec) const;
  double observe(std::span<const double> y) const;
};

struct EstimateMeta {
  double s = 0.0;
  double t = 0.0;
  std::string x_descriptor;
  double sigma = 0.0;
  std::string field;
  bool shift = false;
};

struct IterateEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
  int order = 0;  ///< -1 for the Euler-Maruyama benchmark
  EstimateMeta meta;
};

enum class EmScheme {
  kExponential,  ///< linear part and conditional noise integrated exactly over each step
  kExplicit,     ///< X + (A X + B0) dt + sigma dW_L; stable only while lambda_max * dt <= 2
};

struct EmOptions {
  EmScheme scheme = EmScheme::kExponential;
  unsigned threads = 1;
};

/// Reference probability E[u0(X_t)] from fresh paths of the semilinear SDE started at (s, x).
/// Path p draws its clock from (seed, kBenchmarkClock, p) and its Gaussians from
/// (seed, kBenchmarkGauss, p). The time-shift plays no role here.
IterateEstimate em_benchmark(const ProblemSpec& spec, const QueryParams& q, std::size_t n_paths,
                             double dt, std::uint64_t seed, const EmOptions& options = {});

/// Same paths observed at every time in `times` (ascending, each > q.s); q.t is ignored.
std::vector<IterateEstimate> em_benchmark_series(const ProblemSpec& spec, const QueryParams& q,
                                                 std::span<const double> times,
                                                 std::size_t n_paths, double dt,
                                                 std::uint64_t seed, const EmOptions& options = {});

/// Shift used by the iterates: the flow from (q.s, q.x) when q.use_shift, else f = 0.
/// The grid spans [0, T] with the given step.
TimeShift make_shift(const ProblemSpec& spec, const QueryParams& q, double step,
                     FlowScheme scheme = FlowScheme::kExponentialRk4);

struct IterateOptions {
  unsigned threads = 1;
};

/// Mean of u0(ou_endpoint) over all bank records.
IterateEstimate v0_estimate(const SimulationBank& bank, const ProblemSpec& spec,
                            const TimeShift& shift, const QueryParams& q,
                            const IterateOptions& options = {});

/// First iterate. Pair i combines record i with subordinator path perm[i], where perm is
/// the identity for seed 0 and a seeded shuffle of the sub paths otherwise.
IterateEstimate v1_estimate(const SimulationBank& bank, const ProblemSpec& spec,
                            const TimeShift& shift, const QueryParams& q, double mesh,
                            std::size_t n_pairs, std::uint64_t seed,
                            const IterateOptions& options = {});

/// Iterate of the given order (1 <= order <= LVI_MAX_ITERATE_ORDER) by the general formula.
/// Tuple i uses record i; the clock for the interval paired with omega_{j-1} is sub path
/// perm[i + (j - 1) n_tuples]. Order 1 reproduces v1_estimate.
IterateEstimate vn_estimate(const SimulationBank& bank, const ProblemSpec& spec,
                            const TimeShift& shift, const QueryParams& q, int order, double mesh,
                            std::size_t n_tuples, std::uint64_t seed,
                            const IterateOptions& options = {});

/// Directional derivative <grad v0(x), h> by the Gaussian integration-by-parts formula.
IterateEstimate ou_gradient(const SimulationBank& bank, const ProblemSpec& spec,
                            const TimeShift& shift, const QueryParams& q,
                            std::span<const double> h, const IterateOptions& options = {});

struct PartialSumRow {
  int order = 0;
  double partial_sum = 0.0;
  double partial_sum_se = 0.0;
  double rel_error = 0.0;  ///< (P - partial_sum) / P
  double rel_error_se = 0.0;
};

/// Rows for orders 0..n of `estimates` (sorted by order). Standard errors treat the
/// estimates as independent. DomainError on an empty list, NumericalError when the
/// benchmark value is zero.
std::vector<PartialSumRow> partial_sums(std::span<const IterateEstimate> estimates,
                                        const IterateEstimate& benchmark);

/// Permutation of [0, n) used for pairing; identity when seed == 0.
std::vector<std::size_t> pairing_permutation(std::size_t n, std::uint64_t seed);

}  // namespace lvi
