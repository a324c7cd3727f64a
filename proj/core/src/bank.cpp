#include "lvi/bank.hpp"

#include <boost/random/normal_distribution.hpp>
#include <algorithm>
#include <cmath>
#include <string>

#include "lvi/errors.hpp"
#include "lvi/rng.hpp"
#include "lvi/stats.hpp"

namespace lvi {

TimeGrid SimulationBank::fine_grid() const { return TimeGrid(0.0, spec.horizon, header.delta_fine); }

TimeGrid SimulationBank::coarse_grid() const {
  return TimeGrid(0.0, spec.horizon, header.delta_coarse);
}

std::size_t SimulationBank::fine_per_coarse() const {
  return *integer_ratio(header.delta_coarse, header.delta_fine);
}

void SimulationBank::require_compatible(const ProblemSpec& other) const {
  if (other.bank_hash() != header.spec_hash) {
    throw ConfigError("simulation bank was generated for a different problem specification");
  }
}

namespace {

struct Grids {
  TimeGrid fine;
  TimeGrid coarse;
  std::size_t ratio;
};

Grids make_grids(const ProblemSpec& spec, double delta_fine, double delta_coarse) {
  const auto ratio = integer_ratio(delta_coarse, delta_fine);
  if (!ratio) {
    throw ConfigError("delta_coarse must be an integer multiple of delta_fine");
  }
  try {
    return Grids{TimeGrid(0.0, spec.horizon, delta_fine), TimeGrid(0.0, spec.horizon, delta_coarse),
                 *ratio};
  } catch (const DomainError& e) {
    throw ConfigError(std::string("bank grids incompatible with the horizon: ") + e.what());
  }
}

SubordinatorPath clock_path(const ProblemSpec& spec, const TimeGrid& fine, std::uint64_t seed,
                            bool deterministic) {
  if (!deterministic) return sample_subordinator_path(spec, fine, seed);
  return SubordinatorPath{fine, std::vector<double>(fine.num_steps(), fine.step()), seed};
}

}  // namespace

SimulationBank generate_bank(const ProblemSpec& spec, double delta_fine, double delta_coarse,
                             std::size_t m_sub, std::size_t m_ou, std::uint64_t base_seed,
                             const BankOptions& options) {
  spec.validate();
  if (m_sub + m_ou == 0) throw ConfigError("bank needs at least one path or record");
  const Grids grids = make_grids(spec, delta_fine, delta_coarse);
  const std::size_t n = spec.dim;

  SimulationBank bank;
  bank.spec = spec;
  bank.header.spec_hash = spec.bank_hash();
  bank.header.delta_fine = delta_fine;
  bank.header.delta_coarse = delta_coarse;
  bank.header.m_sub = m_sub;
  bank.header.m_ou = m_ou;
  bank.header.base_seed = base_seed;
  bank.header.precision = options.precision;

  bank.sub_paths.resize(m_sub, SubordinatorPath{grids.fine, {}, 0});
  parallel_for(m_sub, options.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto seed = derive_seed(base_seed, StreamDomain::kSubordinatorPath, i);
      bank.sub_paths[i] = clock_path(spec, grids.fine, seed, options.deterministic_clock);
    }
  });

  // Exact conditional OU step over one fine bin with L linear inside the bin:
  //   Z <- e^{-lambda delta} Z + sqrt(dL (1 - e^{-2 lambda delta}) / (2 lambda delta)) xi
  std::vector<double> decay(n), noise_coef(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double z = 2.0 * spec.lambdas[k] * delta_fine;
    decay[k] = std::exp(-spec.lambdas[k] * delta_fine);
    noise_coef[k] = std::sqrt(phi1(z));
  }

  const std::size_t n_ckpt = grids.coarse.num_points();
  bank.records.resize(m_ou, ConvolutionRecord{SubordinatorPath{grids.fine, {}, 0}, {}, 0});
  parallel_for(m_ou, options.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> z(n);
    boost::random::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t j = begin; j < end; ++j) {
      ConvolutionRecord& rec = bank.records[j];
      rec.seed = derive_seed(base_seed, StreamDomain::kRecordClock, j);
      rec.sub = clock_path(spec, grids.fine, rec.seed, options.deterministic_clock);
      Rng rng = make_stream(base_seed, StreamDomain::kRecordGauss, j);
      rec.checkpoints.assign(n_ckpt * n, 0.0);
      std::fill(z.begin(), z.end(), 0.0);
      for (std::size_t i = 0; i < grids.fine.num_steps(); ++i) {
        const double root = std::sqrt(rec.sub.increments[i]);
        for (std::size_t k = 0; k < n; ++k) {
          z[k] = decay[k] * z[k] + root * noise_coef[k] * gauss(rng);
        }
        if ((i + 1) % grids.ratio == 0) {
          double* row = rec.checkpoints.data() + ((i + 1) / grids.ratio) * n;
          for (std::size_t k = 0; k < n; ++k) {
            row[k] = options.precision == StoragePrecision::kFloat32
                         ? static_cast<double>(static_cast<float>(z[k]))
                         : z[k];
          }
        }
      }
    }
  });
  return bank;
}

DiagonalOperator covariance_integral(const SubordinatorPath& path, const ProblemSpec& spec,
                                     double sigma_scale, double u, double t) {
  if (!(u < t)) throw DomainError("covariance integral needs u < t");
  const TimeGrid& grid = path.grid;
  const double step = grid.step();
  const double from_pos = std::ceil((u - grid.start()) / step - TimeGrid::kTolerance);
  const double to_pos = std::floor((t - grid.start()) / step + TimeGrid::kTolerance);
  if (from_pos < 0.0 || to_pos > static_cast<double>(grid.num_steps()) || !(from_pos < to_pos)) {
    throw DomainError("covariance integral interval has no fine bins inside the path grid");
  }
  const auto from = static_cast<std::size_t>(from_pos);
  const auto to = static_cast<std::size_t>(to_pos);
  std::vector<double> out(spec.dim);
  for (std::size_t k = 0; k < spec.dim; ++k) {
    const double z = 2.0 * spec.lambdas[k] * step;
    const double decay = std::exp(-z);
    const double weight = phi1(z);
    double acc = 0.0;
    for (std::size_t i = from; i < to; ++i) acc = decay * acc + weight * path.increments[i];
    const double s = sigma_scale * spec.sigmas[k];
    out[k] = s * s * acc;
  }
  return DiagonalOperator(std::move(out));
}

std::vector<double> convolution_segment(const SimulationBank& bank, const ConvolutionRecord& record,
                                        double sigma_scale, double s, double t) {
  if (s > t) throw DomainError("convolution segment needs s <= t");
  const TimeGrid coarse = bank.coarse_grid();
  const std::size_t is = coarse.require_index(s, "segment start");
  const std::size_t it = coarse.require_index(t, "segment end");
  const std::size_t n = bank.spec.dim;
  std::vector<double> out(n, 0.0);
  if (is == it) return out;
  const auto zs = record.checkpoint(is, n);
  const auto zt = record.checkpoint(it, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double prop = std::exp(-bank.spec.lambdas[k] * (t - s));
    out[k] = sigma_scale * bank.spec.sigmas[k] * (zt[k] - prop * zs[k]);
  }
  return out;
}

std::vector<double> ou_endpoint(const SimulationBank& bank, const ConvolutionRecord& record,
                                double sigma_scale, const TimeShift& shift, double s,
                                std::span<const double> x, double t) {
  if (!(s < t)) throw DomainError("ou_endpoint needs s < t");
  if (x.size() != bank.spec.dim || shift.dim() != bank.spec.dim) {
    throw DomainError("ou_endpoint dimension mismatch");
  }
  std::vector<double> out = convolution_segment(bank, record, sigma_scale, s, t);
  const std::vector<double> forcing = forcing_convolution(bank.spec, shift, s, t);
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] += std::exp(-bank.spec.lambdas[k] * (t - s)) * x[k] + forcing[k];
  }
  return out;
}

}  // namespace lvi
