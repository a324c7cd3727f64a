#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lvi/bank.hpp"
#include "lvi/estimators.hpp"

namespace lvi::detail {

inline constexpr double kCovarianceFloor = 1e-300;

/// Left-Riemann mesh s = m_0 < m_1 < ... < m_K = t laid over the bank and shift grids.
struct MeshLayout {
  std::size_t intervals = 0;  ///< K
  double mesh = 0.0;
  double s = 0.0;
  std::size_t coarse_offset = 0;
  std::size_t coarse_stride = 0;
  std::size_t fine_offset = 0;
  std::size_t fine_stride = 0;
  std::size_t shift_offset = 0;
  std::size_t shift_stride = 0;

  std::size_t coarse(std::size_t a) const { return coarse_offset + a * coarse_stride; }
  std::size_t fine(std::size_t a) const { return fine_offset + a * fine_stride; }
  std::size_t shift(std::size_t a) const { return shift_offset + a * shift_stride; }
  double time(std::size_t a) const { return s + static_cast<double>(a) * mesh; }
};

MeshLayout make_layout(const SimulationBank& bank, const TimeShift& shift, double s, double t,
                       double mesh);

/// Query-wide tables: propagators over whole mesh multiples and the forcing
/// convolutions F between every pair of mesh points.
struct QueryTables {
  std::size_t dim = 0;
  std::size_t intervals = 0;
  std::vector<double> prop;   ///< (K+1) x N, e^{-lambda d mesh}
  std::vector<double> prop2;  ///< (K+1) x N, e^{-2 lambda d mesh}
  std::vector<double> forcing;  ///< F_{a,b} for a < b, row-major upper triangle

  std::span<const double> propagator(std::size_t d) const {
    return std::span<const double>(prop).subspan(d * dim, dim);
  }
  std::span<const double> propagator2(std::size_t d) const {
    return std::span<const double>(prop2).subspan(d * dim, dim);
  }
  std::size_t forcing_offset(std::size_t a, std::size_t b) const;
  std::span<const double> forcing_between(std::size_t a, std::size_t b) const {
    return std::span<const double>(forcing).subspan(forcing_offset(a, b), dim);
  }
};

QueryTables make_tables(const ProblemSpec& spec, const TimeShift& shift, const MeshLayout& layout);

/// Square roots of I^L_{a,b} (floored) for one clock, rows built on demand by end index.
class CovarianceRows {
 public:
  CovarianceRows(const ProblemSpec& spec, const QueryTables& tables, const MeshLayout& layout)
      : spec_(&spec), tables_(&tables), layout_(&layout) {}

  /// Rebinds to a new clock; drops cached rows.
  void reset(const SubordinatorPath& path, double sigma_scale);
  /// sqrt(I_{a,b}) for a < b.
  std::span<const double> root(std::size_t a, std::size_t b);

 private:
  const ProblemSpec* spec_;
  const QueryTables* tables_;
  const MeshLayout* layout_;
  std::vector<double> blocks_;  ///< K x N, I over single mesh intervals
  std::vector<std::vector<double>> rows_;
  std::vector<char> ready_;
};

/// sigma_scale sigma_k (Z~_{m_b} - e^{(m_b - m_a) A} Z~_{m_a}).
void segment(const ProblemSpec& spec, const QueryTables& tables, const MeshLayout& layout,
             const ConvolutionRecord& record, double sigma_scale, std::size_t a, std::size_t b,
             std::span<double> out);

/// B(m_a, y) = B0(m_a, y) - f(m_a).
void drift(const QueryParams& q, const TimeShift& shift, const MeshLayout& layout, std::size_t a,
           std::span<const double> y, std::span<double> out, std::span<double> scratch);

void check_bank(const SimulationBank& bank, const ProblemSpec& spec, const QueryParams& q,
                const TimeShift& shift);

EstimateMeta make_meta(const ProblemSpec& spec, const QueryParams& q);

/// Summary of per-sample values; NumericalError on NaN.
IterateEstimate finish(std::span<const double> samples, int order, EstimateMeta meta);

}  // namespace lvi::detail
