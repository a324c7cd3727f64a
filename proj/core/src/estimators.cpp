#include "lvi/estimators.hpp"

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "iterate_support.hpp"
#include "lvi/errors.hpp"
#include "lvi/rng.hpp"
#include "lvi/stable.hpp"
#include "lvi/stats.hpp"

namespace lvi {

void QueryParams::validate(const ProblemSpec& spec) const {
  if (!(s >= 0.0 && s < t && t <= spec.horizon * (1.0 + 1e-12))) {
    throw DomainError("query needs 0 <= s < t <= T");
  }
  if (x.size() != spec.dim) throw DomainError("query point has the wrong dimension");
  if (!(sigma_scale > 0.0)) throw DomainError("sigma_scale must be positive");
  if (!observable && !(radius >= 0.0)) throw DomainError("radius must be nonnegative");
  field.validate(spec.dim);
}

double QueryParams::observe(std::span<const double> y) const {
  if (observable) return (*observable)(y);
  if (radius == 0.0) {
    for (double v : y) {
      if (v != 0.0) return 1.0;
    }
    return 0.0;
  }
  return indicator_observable(y, radius);
}

namespace detail {

MeshLayout make_layout(const SimulationBank& bank, const TimeShift& shift, double s, double t,
                       double mesh) {
  const double dc = bank.header.delta_coarse;
  const auto coarse_stride = integer_ratio(mesh, dc);
  if (!coarse_stride) throw ConfigError("mesh must be a multiple of the bank checkpoint step");
  const auto shift_stride = integer_ratio(mesh, shift.grid().step());
  if (!shift_stride) throw ConfigError("mesh must be a multiple of the shift grid step");
  const auto intervals = integer_ratio(t - s, mesh);
  if (!intervals) throw DomainError("t - s must be a positive multiple of the mesh");
  MeshLayout l;
  l.intervals = *intervals;
  l.mesh = mesh;
  l.s = s;
  l.coarse_offset = bank.coarse_grid().require_index(s, "s");
  l.coarse_stride = *coarse_stride;
  l.fine_offset = l.coarse_offset * bank.fine_per_coarse();
  l.fine_stride = l.coarse_stride * bank.fine_per_coarse();
  l.shift_offset = shift.grid().require_index(s, "s");
  l.shift_stride = *shift_stride;
  return l;
}

std::size_t QueryTables::forcing_offset(std::size_t a, std::size_t b) const {
  // Row a holds b = a+1..K; the rows before it hold sum_{r<a} (K - r) entries.
  const std::size_t before = a * intervals - (a * (a - 1)) / 2;
  return (before + (b - a - 1)) * dim;
}

QueryTables make_tables(const ProblemSpec& spec, const TimeShift& shift,
                        const MeshLayout& layout) {
  const std::size_t n = spec.dim;
  const std::size_t k_max = layout.intervals;
  QueryTables tb;
  tb.dim = n;
  tb.intervals = k_max;
  tb.prop.resize((k_max + 1) * n);
  tb.prop2.resize((k_max + 1) * n);
  for (std::size_t d = 0; d <= k_max; ++d) {
    const double tau = static_cast<double>(d) * layout.mesh;
    for (std::size_t k = 0; k < n; ++k) {
      tb.prop[d * n + k] = std::exp(-spec.lambdas[k] * tau);
      tb.prop2[d * n + k] = std::exp(-2.0 * spec.lambdas[k] * tau);
    }
  }
  std::vector<double> blocks(k_max * n);
  for (std::size_t c = 0; c < k_max; ++c) {
    forcing_convolution(spec, shift, layout.shift(c), layout.shift(c + 1),
                        std::span<double>(blocks).subspan(c * n, n));
  }
  tb.forcing.resize(k_max * (k_max + 1) / 2 * n);
  const auto one = tb.propagator(1);
  for (std::size_t a = 0; a < k_max; ++a) {
    std::vector<double> acc(n, 0.0);
    for (std::size_t b = a + 1; b <= k_max; ++b) {
      const double* g = blocks.data() + (b - 1) * n;
      for (std::size_t k = 0; k < n; ++k) acc[k] = one[k] * acc[k] + g[k];
      std::copy(acc.begin(), acc.end(), tb.forcing.begin() + static_cast<std::ptrdiff_t>(tb.forcing_offset(a, b)));
    }
  }
  return tb;
}

void CovarianceRows::reset(const SubordinatorPath& path, double sigma_scale) {
  const std::size_t n = spec_->dim;
  const std::size_t k_max = layout_->intervals;
  const double step = path.grid.step();
  blocks_.assign(k_max * n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double z = 2.0 * spec_->lambdas[k] * step;
    const double decay = std::exp(-z);
    const double weight = phi1(z);
    const double sk = sigma_scale * spec_->sigmas[k];
    for (std::size_t c = 0; c < k_max; ++c) {
      const std::size_t from = layout_->fine(c);
      const std::size_t to = layout_->fine(c + 1);
      double acc = 0.0;
      for (std::size_t i = from; i < to; ++i) acc = decay * acc + weight * path.increments[i];
      blocks_[c * n + k] = sk * sk * acc;
    }
  }
  rows_.resize(k_max + 1);
  ready_.assign(k_max + 1, 0);
}

std::span<const double> CovarianceRows::root(std::size_t a, std::size_t b) {
  const std::size_t n = spec_->dim;
  if (!ready_[b]) {
    std::vector<double>& row = rows_[b];
    row.resize(b * n);
    std::vector<double> acc(n, 0.0);
    for (std::size_t c = b; c-- > 0;) {
      const auto p2 = tables_->propagator2(b - 1 - c);
      const double* j = blocks_.data() + c * n;
      for (std::size_t k = 0; k < n; ++k) {
        acc[k] += p2[k] * j[k];
        row[c * n + k] = std::sqrt(std::max(acc[k], kCovarianceFloor));
      }
    }
    ready_[b] = 1;
  }
  return std::span<const double>(rows_[b]).subspan(a * n, n);
}

void segment(const ProblemSpec& spec, const QueryTables& tables, const MeshLayout& layout,
             const ConvolutionRecord& record, double sigma_scale, std::size_t a, std::size_t b,
             std::span<double> out) {
  const std::size_t n = spec.dim;
  const auto za = record.checkpoint(layout.coarse(a), n);
  const auto zb = record.checkpoint(layout.coarse(b), n);
  const auto p = tables.propagator(b - a);
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = sigma_scale * spec.sigmas[k] * (zb[k] - p[k] * za[k]);
  }
}

void drift(const QueryParams& q, const TimeShift& shift, const MeshLayout& layout, std::size_t a,
           std::span<const double> y, std::span<double> out, std::span<double> scratch) {
  eval_field(q.field, layout.time(a), y, out, scratch);
  if (shift.is_zero()) return;
  const auto f = shift.value(layout.shift(a));
  for (std::size_t k = 0; k < out.size(); ++k) out[k] -= f[k];
}

void check_bank(const SimulationBank& bank, const ProblemSpec& spec, const QueryParams& q,
                const TimeShift& shift) {
  spec.validate();
  bank.require_compatible(spec);
  q.validate(spec);
  if (shift.dim() != spec.dim) throw DomainError("shift dimension mismatch");
  if (bank.records.empty()) throw ConfigError("bank has no convolution records");
}

EstimateMeta make_meta(const ProblemSpec& spec, const QueryParams& q) {
  EstimateMeta m;
  m.s = q.s;
  m.t = q.t;
  m.sigma = q.sigma_scale;
  m.field = q.field.name();
  m.shift = q.use_shift;
  const bool constant =
      !q.x.empty() && std::all_of(q.x.begin(), q.x.end(), [&](double v) { return v == q.x[0]; });
  char buf[64];
  if (constant) {
    std::snprintf(buf, sizeof buf, "%.17g*e", q.x[0]);
    m.x_descriptor = buf;
  } else {
    std::snprintf(buf, sizeof buf, "vector[%zu]", spec.dim);
    m.x_descriptor = buf;
  }
  return m;
}

IterateEstimate finish(std::span<const double> samples, int order, EstimateMeta meta) {
  for (double v : samples) {
    if (std::isnan(v)) throw NumericalError("NaN encountered in estimator samples");
  }
  const SampleSummary sum = summarize(samples);
  if (std::isnan(sum.mean) || std::isnan(sum.std_error)) {
    throw NumericalError("NaN encountered in estimator summary");
  }
  return IterateEstimate{sum.mean, sum.std_error, sum.n, order, std::move(meta)};
}

}  // namespace detail

namespace {

struct EmCoefficients {
  std::vector<double> decay, linear, noise;
};

EmCoefficients em_coefficients(const ProblemSpec& spec, double sigma_scale, double dt,
                               EmScheme scheme) {
  const std::size_t n = spec.dim;
  EmCoefficients c{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t k = 0; k < n; ++k) {
    const double z = spec.lambdas[k] * dt;
    const double sk = sigma_scale * spec.sigmas[k];
    if (scheme == EmScheme::kExponential) {
      c.decay[k] = std::exp(-z);
      c.linear[k] = dt * phi1(z);
      c.noise[k] = sk * std::sqrt(phi1(2.0 * z));
    } else {
      c.decay[k] = 1.0 - z;
      c.linear[k] = dt;
      c.noise[k] = sk;
    }
  }
  return c;
}

}  // namespace

std::vector<IterateEstimate> em_benchmark_series(const ProblemSpec& spec, const QueryParams& q,
                                                 std::span<const double> times,
                                                 std::size_t n_paths, double dt,
                                                 std::uint64_t seed, const EmOptions& options) {
  spec.validate();
  if (times.empty()) throw DomainError("benchmark needs at least one observation time");
  if (n_paths == 0) throw ConfigError("benchmark needs at least one path");
  if (!(dt > 0.0)) throw DomainError("benchmark step must be positive");
  QueryParams probe = q;
  probe.t = times.back();
  probe.validate(spec);
  if (options.scheme == EmScheme::kExplicit && spec.lambdas.back() * dt > 2.0) {
    throw ConfigError("explicit Euler-Maruyama is unstable: lambda_max * dt > 2");
  }
  const TimeGrid grid(q.s, times.back(), dt);
  std::vector<std::size_t> marks(times.size());
  for (std::size_t m = 0; m < times.size(); ++m) {
    if (!(times[m] > q.s)) throw DomainError("observation times must exceed s");
    marks[m] = grid.require_index(times[m], "observation time");
    if (m > 0 && marks[m] <= marks[m - 1]) throw DomainError("observation times must ascend");
  }

  const std::size_t n = spec.dim;
  const EmCoefficients c = em_coefficients(spec, q.sigma_scale, dt, options.scheme);
  std::vector<double> samples(times.size() * n_paths);
  parallel_for(n_paths, options.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> x(n), b(n), scratch(n);
    boost::random::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t p = begin; p < end; ++p) {
      Rng clock = make_stream(seed, StreamDomain::kBenchmarkClock, p);
      Rng noise = make_stream(seed, StreamDomain::kBenchmarkGauss, p);
      std::copy(q.x.begin(), q.x.end(), x.begin());
      std::size_t next = 0;
      for (std::size_t i = 0; i < marks.back(); ++i) {
        const double root =
            std::sqrt(sample_stable_increment(spec.alpha, spec.gamma_bar, dt, clock));
        eval_field(q.field, grid.point(i), x, b, scratch);
        for (std::size_t k = 0; k < n; ++k) {
          x[k] = c.decay[k] * x[k] + c.linear[k] * b[k] + c.noise[k] * root * gauss(noise);
        }
        while (next < marks.size() && marks[next] == i + 1) {
          samples[next * n_paths + p] = q.observe(x);
          ++next;
        }
      }
    }
  });

  std::vector<IterateEstimate> out;
  out.reserve(times.size());
  for (std::size_t m = 0; m < times.size(); ++m) {
    QueryParams at = q;
    at.t = times[m];
    EstimateMeta meta = detail::make_meta(spec, at);
    meta.shift = false;
    out.push_back(detail::finish(std::span<const double>(samples).subspan(m * n_paths, n_paths),
                                 -1, std::move(meta)));
  }
  return out;
}

IterateEstimate em_benchmark(const ProblemSpec& spec, const QueryParams& q, std::size_t n_paths,
                             double dt, std::uint64_t seed, const EmOptions& options) {
  const double times[] = {q.t};
  return em_benchmark_series(spec, q, times, n_paths, dt, seed, options).front();
}

TimeShift make_shift(const ProblemSpec& spec, const QueryParams& q, double step,
                     FlowScheme scheme) {
  const TimeGrid grid(0.0, spec.horizon, step);
  if (q.use_shift) return solve_flow(spec, q.field, q.s, q.x, grid, scheme);
  return zero_shift(spec, q.s, q.x, grid);
}

IterateEstimate v0_estimate(const SimulationBank& bank, const ProblemSpec& spec,
                            const TimeShift& shift, const QueryParams& q,
                            const IterateOptions& options) {
  detail::check_bank(bank, spec, q, shift);
  const detail::MeshLayout layout =
      detail::make_layout(bank, shift, q.s, q.t, q.t - q.s);
  const detail::QueryTables tables = detail::make_tables(spec, shift, layout);
  const std::size_t n = spec.dim;
  std::vector<double> mean(n);
  const auto p = tables.propagator(1);
  const auto f = tables.forcing_between(0, 1);
  for (std::size_t k = 0; k < n; ++k) mean[k] = p[k] * q.x[k] + f[k];

  std::vector<double> samples(bank.records.size());
  parallel_for(samples.size(), options.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> y(n);
    for (std::size_t j = begin; j < end; ++j) {
      detail::segment(spec, tables, layout, bank.records[j], q.sigma_scale, 0, 1, y);
      for (std::size_t k = 0; k < n; ++k) y[k] += mean[k];
      samples[j] = q.observe(y);
    }
  });
  return detail::finish(samples, 0, detail::make_meta(spec, q));
}

IterateEstimate ou_gradient(const SimulationBank& bank, const ProblemSpec& spec,
                            const TimeShift& shift, const QueryParams& q,
                            std::span<const double> h, const IterateOptions& options) {
  detail::check_bank(bank, spec, q, shift);
  if (h.size() != spec.dim) throw DomainError("direction has the wrong dimension");
  const detail::MeshLayout layout =
      detail::make_layout(bank, shift, q.s, q.t, q.t - q.s);
  const detail::QueryTables tables = detail::make_tables(spec, shift, layout);
  const std::size_t n = spec.dim;
  std::vector<double> mean(n);
  const auto p = tables.propagator(1);
  const auto f = tables.forcing_between(0, 1);
  for (std::size_t k = 0; k < n; ++k) mean[k] = p[k] * q.x[k] + f[k];

  std::vector<double> samples(bank.records.size());
  parallel_for(samples.size(), options.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> seg(n), y(n);
    detail::CovarianceRows rows(spec, tables, layout);
    for (std::size_t j = begin; j < end; ++j) {
      const ConvolutionRecord& rec = bank.records[j];
      rows.reset(rec.sub, q.sigma_scale);
      const auto root = rows.root(0, 1);
      detail::segment(spec, tables, layout, rec, q.sigma_scale, 0, 1, seg);
      double inner = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        y[k] = mean[k] + seg[k];
        inner += p[k] * h[k] / (root[k] * root[k]) * seg[k];
      }
      samples[j] = q.observe(y) * inner;
    }
  });
  IterateEstimate est = detail::finish(samples, 0, detail::make_meta(spec, q));
  return est;
}

std::vector<PartialSumRow> partial_sums(std::span<const IterateEstimate> estimates,
                                        const IterateEstimate& benchmark) {
  if (estimates.empty()) throw DomainError("partial_sums needs at least one iterate");
  if (benchmark.value == 0.0) {
    throw NumericalError("benchmark probability is zero; relative errors are undefined");
  }
  const double p = benchmark.value;
  const double p_se = benchmark.std_error;
  std::vector<PartialSumRow> rows;
  double sum = 0.0;
  double var = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    if (i > 0 && estimates[i].order <= estimates[i - 1].order) {
      throw DomainError("iterates must be sorted by increasing order");
    }
    sum += estimates[i].value;
    var += estimates[i].std_error * estimates[i].std_error;
    PartialSumRow r;
    r.order = estimates[i].order;
    r.partial_sum = sum;
    r.partial_sum_se = std::sqrt(var);
    r.rel_error = (p - sum) / p;
    const double ds = r.partial_sum_se / p;
    const double dp = sum * p_se / (p * p);
    r.rel_error_se = std::sqrt(ds * ds + dp * dp);
    rows.push_back(r);
  }
  return rows;
}

std::vector<std::size_t> pairing_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  if (seed == 0 || n < 2) return perm;
  Rng rng = make_stream(seed, StreamDomain::kPairing, 0);
  for (std::size_t i = n - 1; i > 0; --i) {
    boost::random::uniform_int_distribution<std::size_t> pick(0, i);
    std::swap(perm[i], perm[pick(rng)]);
  }
  return perm;
}

}  // namespace lvi
