#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "lvi/flow.hpp"
#include "lvi/model.hpp"
#include "lvi/stable.hpp"

namespace lvi {

enum class StoragePrecision : std::uint8_t { kFloat64 = 0, kFloat32 = 1 };

/// One clock realization plus the unit-noise stochastic convolution
/// Z~(t) = int_0^t e^{(t-r)A} dW_{L_r} sampled at the coarse checkpoints.
struct ConvolutionRecord {
  SubordinatorPath sub;
  std::vector<double> checkpoints;  ///< (num checkpoints) x N, row 0 is zero
  std::uint64_t seed = 0;

  std::span<const double> checkpoint(std::size_t j, std::size_t dim) const {
    return std::span<const double>(checkpoints).subspan(j * dim, dim);
  }
};

struct BankHeader {
  static constexpr std::uint32_t kVersion = 1;

  std::uint32_t version = kVersion;
  std::uint64_t spec_hash = 0;
  double delta_fine = 1e-3;
  double delta_coarse = 1e-2;
  std::uint64_t m_sub = 0;
  std::uint64_t m_ou = 0;
  std::uint64_t base_seed = 0;
  StoragePrecision precision = StoragePrecision::kFloat64;

  bool operator==(const BankHeader&) const = default;
};

/// The reusable batch: subordinator-only paths (for the omega_0 ... draws of the
/// iterates) and convolution records (for the OU side). Read-only after construction.
struct SimulationBank {
  ProblemSpec spec;
  BankHeader header;
  std::vector<SubordinatorPath> sub_paths;
  std::vector<ConvolutionRecord> records;

  TimeGrid fine_grid() const;
  TimeGrid coarse_grid() const;
  std::size_t fine_per_coarse() const;
  /// Throws ConfigError when `other` does not hash like the bank's spec.
  void require_compatible(const ProblemSpec& other) const;
};

struct BankOptions {
  StoragePrecision precision = StoragePrecision::kFloat64;
  unsigned threads = 1;
  /// Test hook: replaces every clock increment by the bin width (L(r) = r).
  bool deterministic_clock = false;
};

/// Streams: sub path i uses (base, kSubordinatorPath, i); record j draws its clock from
/// (base, kRecordClock, j) and its Gaussians from (base, kRecordGauss, j).
SimulationBank generate_bank(const ProblemSpec& spec, double delta_fine, double delta_coarse,
                             std::size_t m_sub, std::size_t m_ou, std::uint64_t base_seed,
                             const BankOptions& options = {});

/// sigma_scale^2 sigma_k^2 sum_{bins in [u,t)} e^{-2 lambda_k (t - r_{i+1})}
///   (1 - e^{-2 lambda_k delta}) / (2 lambda_k) dL_i.
/// u is snapped up and t down to the fine grid (1e-9 tolerance in step units).
DiagonalOperator covariance_integral(const SubordinatorPath& path, const ProblemSpec& spec,
                                     double sigma_scale, double u, double t);

/// sigma_scale sqrt(Q) (Z~_t - e^{(t-s)A} Z~_s); s and t must be checkpoints.
std::vector<double> convolution_segment(const SimulationBank& bank, const ConvolutionRecord& record,
                                        double sigma_scale, double s, double t);

/// e^{(t-s)A} x + F_{s,t} + convolution_segment(s, t).
std::vector<double> ou_endpoint(const SimulationBank& bank, const ConvolutionRecord& record,
                                double sigma_scale, const TimeShift& shift, double s,
                                std::span<const double> x, double t);

/// Binary little-endian file, layout documented in docs/bank_format.md.
void save_bank(const SimulationBank& bank, const std::filesystem::path& path);

/// Validates magic, version, spec hash and total size against `spec`.
/// Throws ConfigError on a mismatched spec or version, IoError on unreadable or
/// truncated files.
SimulationBank load_bank(const std::filesystem::path& path, const ProblemSpec& spec);

/// Reads only the fixed-size header.
BankHeader read_bank_header(const std::filesystem::path& path);

/// Number of load_bank calls in this process (bank reuse diagnostics).
std::size_t bank_load_count();

}  // namespace lvi
