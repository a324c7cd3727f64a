#include <cmath>
#include <string>

#include "iterate_support.hpp"
#include "lvi/errors.hpp"
#include "lvi/estimators.hpp"
#include "lvi/stats.hpp"

namespace lvi {

namespace {

struct Prepared {
  detail::MeshLayout layout;
  detail::QueryTables tables;
  std::vector<double> zx;  ///< e^{(m_a - s) A} x + F_{s, m_a}, a = 0..K
  std::vector<std::size_t> perm;
};

Prepared prepare(const SimulationBank& bank, const ProblemSpec& spec, const TimeShift& shift,
                 const QueryParams& q, int order, double mesh, std::size_t n_tuples,
                 std::uint64_t seed) {
  detail::check_bank(bank, spec, q, shift);
  if (n_tuples == 0) throw ConfigError("need at least one Monte Carlo tuple");
  const auto m = static_cast<std::size_t>(order);
  if (n_tuples > bank.records.size() || m * n_tuples > bank.sub_paths.size()) {
    throw ConfigError("bank too small: order " + std::to_string(order) + " with " +
                      std::to_string(n_tuples) + " tuples needs " + std::to_string(n_tuples) +
                      " records and " + std::to_string(m * n_tuples) + " subordinator paths");
  }
  Prepared p{detail::make_layout(bank, shift, q.s, q.t, mesh), {}, {}, {}};
  if (p.layout.intervals < m) {
    throw DomainError("mesh too coarse for the requested order on (s, t)");
  }
  p.tables = detail::make_tables(spec, shift, p.layout);
  const std::size_t n = spec.dim;
  p.zx.assign((p.layout.intervals + 1) * n, 0.0);
  for (std::size_t a = 0; a <= p.layout.intervals; ++a) {
    const auto prop = p.tables.propagator(a);
    for (std::size_t k = 0; k < n; ++k) {
      p.zx[a * n + k] = prop[k] * q.x[k] + (a > 0 ? p.tables.forcing_between(0, a)[k] : 0.0);
    }
  }
  p.perm = pairing_permutation(bank.sub_paths.size(), seed);
  return p;
}

/// Z^{s,x}_{m_a} on one record.
void record_state(const ProblemSpec& spec, const Prepared& p, const ConvolutionRecord& rec,
                  double sigma_scale, std::size_t a, std::span<double> out) {
  const std::size_t n = spec.dim;
  if (a == 0) {
    std::copy_n(p.zx.begin(), n, out.begin());
    return;
  }
  detail::segment(spec, p.tables, p.layout, rec, sigma_scale, 0, a, out);
  for (std::size_t k = 0; k < n; ++k) out[k] += p.zx[a * n + k];
}

void check_order(int order) {
  if (order < 1 || order > LVI_MAX_ITERATE_ORDER) {
    throw DomainError("unsupported iterate order " + std::to_string(order) + " (built for 1.." +
                      std::to_string(LVI_MAX_ITERATE_ORDER) + ")");
  }
}

/// Per-worker state of the general-order recursion.
class TupleEngine {
 public:
  TupleEngine(const ProblemSpec& spec, const QueryParams& q, const TimeShift& shift,
              const Prepared& p, std::size_t order)
      : spec_(spec), q_(q), shift_(shift), p_(p), m_(order), n_(spec.dim),
        rec_rows_(spec, p.tables, p.layout),
        states_(order + 1, std::vector<double>(spec.dim)),
        drifts_(order + 1, std::vector<double>(spec.dim)),
        eta_(spec.dim), scratch_(spec.dim) {
    for (std::size_t q_level = 0; q_level < order; ++q_level) {
      sub_rows_.emplace_back(spec, p.tables, p.layout);
    }
  }

  /// Sum over the simplex grid of u0(X_m) * prod of inner products (mesh^m not applied).
  double run(const ConvolutionRecord& rec, std::span<const SubordinatorPath* const> subs) {
    rec_ = &rec;
    rec_rows_.reset(rec.sub, q_.sigma_scale);
    for (std::size_t l = 0; l < m_; ++l) sub_rows_[l].reset(*subs[l], q_.sigma_scale);
    double total = 0.0;
    const std::size_t k_max = p_.layout.intervals;
    for (std::size_t a = 0; a + m_ <= k_max; ++a) {
      record_state(spec_, p_, rec, q_.sigma_scale, a, states_[0]);
      total += level(1, a, 1.0);
    }
    return total;
  }

 private:
  // Interval `lvl` starts at mesh index a from state X_{lvl-1}.
  double level(std::size_t lvl, std::size_t a, double product) {
    const std::size_t k_max = p_.layout.intervals;
    std::vector<double>& b_vec = drifts_[lvl - 1];
    detail::drift(q_, shift_, p_.layout, a, states_[lvl - 1], b_vec, scratch_);
    const std::size_t b_first = lvl == m_ ? k_max : a + 1;
    const std::size_t b_last = k_max - (m_ - lvl);
    double total = 0.0;
    for (std::size_t b = b_first; b <= b_last; ++b) {
      const auto prop = p_.tables.propagator(b - a);
      const auto r_rec = rec_rows_.root(a, b);
      const auto r_sub = sub_rows_[lvl - 1].root(a, b);
      const auto f = p_.tables.forcing_between(a, b);
      detail::segment(spec_, p_.tables, p_.layout, *rec_, q_.sigma_scale, a, b, eta_);
      const std::vector<double>& prev = states_[lvl - 1];
      std::vector<double>& next = states_[lvl];
      double inner = 0.0;
      for (std::size_t k = 0; k < n_; ++k) {
        const double eta = eta_[k] / r_rec[k];
        inner += prop[k] * b_vec[k] / r_sub[k] * eta;
        next[k] = prop[k] * prev[k] + (r_sub[k] * eta + f[k]);
      }
      if (lvl == m_) {
        total += q_.observe(next) * (product * inner);
      } else {
        total += level(lvl + 1, b, product * inner);
      }
    }
    return total;
  }

  const ProblemSpec& spec_;
  const QueryParams& q_;
  const TimeShift& shift_;
  const Prepared& p_;
  std::size_t m_;
  std::size_t n_;
  const ConvolutionRecord* rec_ = nullptr;
  detail::CovarianceRows rec_rows_;
  std::vector<detail::CovarianceRows> sub_rows_;
  std::vector<std::vector<double>> states_;
  std::vector<std::vector<double>> drifts_;
  std::vector<double> eta_;
  std::vector<double> scratch_;
};

}  // namespace

IterateEstimate v1_estimate(const SimulationBank& bank, const ProblemSpec& spec,
                            const TimeShift& shift, const QueryParams& q, double mesh,
                            std::size_t n_pairs, std::uint64_t seed,
                            const IterateOptions& options) {
  const Prepared p = prepare(bank, spec, shift, q, 1, mesh, n_pairs, seed);
  const std::size_t n = spec.dim;
  const std::size_t k_max = p.layout.intervals;
  std::vector<double> samples(n_pairs);
  parallel_for(n_pairs, options.threads, [&](std::size_t begin, std::size_t end) {
    detail::CovarianceRows rec_rows(spec, p.tables, p.layout);
    detail::CovarianceRows sub_rows(spec, p.tables, p.layout);
    std::vector<double> z(n), d(n), b_vec(n), arg(n), scratch(n);
    for (std::size_t i = begin; i < end; ++i) {
      const ConvolutionRecord& rec = bank.records[i];
      rec_rows.reset(rec.sub, q.sigma_scale);
      sub_rows.reset(bank.sub_paths[p.perm[i]], q.sigma_scale);
      double total = 0.0;
      for (std::size_t a = 0; a < k_max; ++a) {
        record_state(spec, p, rec, q.sigma_scale, a, z);
        detail::drift(q, shift, p.layout, a, z, b_vec, scratch);
        detail::segment(spec, p.tables, p.layout, rec, q.sigma_scale, a, k_max, d);
        const auto prop = p.tables.propagator(k_max - a);
        const auto r_rec = rec_rows.root(a, k_max);
        const auto r_sub = sub_rows.root(a, k_max);
        const auto f = p.tables.forcing_between(a, k_max);
        double inner = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double eta = d[k] / r_rec[k];
          inner += prop[k] * b_vec[k] / r_sub[k] * eta;
          arg[k] = prop[k] * z[k] + (r_sub[k] * eta + f[k]);
        }
        total += q.observe(arg) * (1.0 * inner);
      }
      samples[i] = mesh * total;
    }
  });
  return detail::finish(samples, 1, detail::make_meta(spec, q));
}

IterateEstimate vn_estimate(const SimulationBank& bank, const ProblemSpec& spec,
                            const TimeShift& shift, const QueryParams& q, int order, double mesh,
                            std::size_t n_tuples, std::uint64_t seed,
                            const IterateOptions& options) {
  check_order(order);
  const Prepared p = prepare(bank, spec, shift, q, order, mesh, n_tuples, seed);
  const auto m = static_cast<std::size_t>(order);
  const double weight = std::pow(mesh, order);
  std::vector<double> samples(n_tuples);
  parallel_for(n_tuples, options.threads, [&](std::size_t begin, std::size_t end) {
    TupleEngine engine(spec, q, shift, p, m);
    std::vector<const SubordinatorPath*> subs(m);
    for (std::size_t i = begin; i < end; ++i) {
      // Interval lvl (1-based from s) pairs with omega_{m - lvl}.
      for (std::size_t lvl = 1; lvl <= m; ++lvl) {
        subs[lvl - 1] = &bank.sub_paths[p.perm[i + (m - lvl) * n_tuples]];
      }
      samples[i] = weight * engine.run(bank.records[i], subs);
    }
  });
  return detail::finish(samples, order, detail::make_meta(spec, q));
}

}  // namespace lvi
