#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <vector>

#include "lvi/bank.hpp"
#include "lvi/errors.hpp"

#ifndef LVI_TEST_DATA_DIR
#error "LVI_TEST_DATA_DIR must point at tests/data"
#endif

using namespace lvi;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "lvi_bank_tests";
  fs::create_directories(dir);
  return dir / name;
}

std::vector<char> bytes_of(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ProblemSpec small_spec(std::size_t n = 3) { return ProblemSpec::with_defaults(0.7, n); }

// The golden bank: N = 2, T = 1, fine 0.1, coarse 0.2, two paths and two records.
SimulationBank golden_bank() {
  return generate_bank(small_spec(2), 0.1, 0.2, 2, 2, 20240601);
}

}  // namespace

TEST_CASE("generation is deterministic down to the file bytes") {
  const ProblemSpec spec = small_spec();
  const auto a = generate_bank(spec, 1e-3, 1e-2, 3, 4, 99);
  const auto b = generate_bank(spec, 1e-3, 1e-2, 3, 4, 99, BankOptions{StoragePrecision::kFloat64, 3, false});
  save_bank(a, scratch("a.lvib"));
  save_bank(b, scratch("b.lvib"));
  CHECK(bytes_of(scratch("a.lvib")) == bytes_of(scratch("b.lvib")));
  const auto c = generate_bank(spec, 1e-3, 1e-2, 3, 4, 100);
  CHECK(c.records[0].checkpoints != a.records[0].checkpoints);
}

TEST_CASE("bank layout invariants") {
  const auto bank = generate_bank(small_spec(), 1e-3, 1e-2, 2, 2, 5);
  CHECK(bank.fine_per_coarse() == 10);
  for (const auto& rec : bank.records) {
    REQUIRE(rec.checkpoints.size() == 101 * 3);
    for (std::size_t k = 0; k < 3; ++k) CHECK(rec.checkpoint(0, 3)[k] == 0.0);
    for (double inc : rec.sub.increments) REQUIRE(inc > 0.0);
  }
  CHECK(bank.sub_paths[0].seed != bank.records[0].seed);
  CHECK_THROWS_AS(generate_bank(small_spec(), 1e-3, 1.5e-3, 1, 1, 5), ConfigError);
  CHECK_THROWS_AS(generate_bank(small_spec(), 1e-3, 0.3, 1, 1, 5), ConfigError);
  const auto only_paths = generate_bank(small_spec(), 1e-3, 1e-2, 2, 0, 5);
  CHECK(only_paths.records.empty());
  save_bank(only_paths, scratch("paths_only.lvib"));
  CHECK(load_bank(scratch("paths_only.lvib"), small_spec()).sub_paths.size() == 2);
}

TEST_CASE("deterministic clock: convolution variance matches the closed form") {
  ProblemSpec spec = ProblemSpec::with_defaults(0.7, 4);
  spec.lambdas = {1.0, 25.0, 400.0, 1e4};
  const std::size_t m = 100000;
  const auto bank = generate_bank(spec, 1e-3, 1e-1, 0, m, 8, BankOptions{StoragePrecision::kFloat64, 2, true});
  const auto exact = covariance_deterministic_clock(spec, 0.0, 1.0);
  for (std::size_t k = 0; k < 4; ++k) {
    double m2 = 0.0, m4 = 0.0;
    for (const auto& rec : bank.records) {
      const double z = rec.checkpoint(10, 4)[k];
      m2 += z * z;
      m4 += z * z * z * z;
    }
    m2 /= static_cast<double>(m);
    m4 /= static_cast<double>(m);
    const double se = std::sqrt((m4 - m2 * m2) / static_cast<double>(m));
    CHECK_MESSAGE(std::fabs(m2 - exact[k]) <= 3.0 * se, "lambda=" << spec.lambdas[k]);
  }
}

TEST_CASE("covariance integral: deterministic clock is exact for every lambda") {
  const ProblemSpec spec = ProblemSpec::with_defaults(0.75, 100);
  const TimeGrid grid(0.0, 1.0, 1e-3);
  const SubordinatorPath clock{grid, std::vector<double>(1000, 1e-3), 0};
  for (auto [u, t] : {std::pair{0.0, 1.0}, std::pair{0.25, 0.5}, std::pair{0.999, 1.0}}) {
    const auto quad = covariance_integral(clock, spec, 1.0, u, t);
    const auto exact = covariance_deterministic_clock(spec, u, t);
    for (std::size_t k = 0; k < 100; ++k) {
      CHECK(std::fabs(quad[k] - exact[k]) <= 1e-10 * exact[k]);
      CHECK(quad[k] > 0.0);
    }
  }
  CHECK_THROWS_AS(covariance_integral(clock, spec, 1.0, 0.5, 0.5), DomainError);
}

TEST_CASE("covariance integral: splitting identity on a random clock") {
  const ProblemSpec spec = ProblemSpec::with_defaults(0.6, 100);
  const TimeGrid grid(0.0, 1.0, 1e-3);
  const SubordinatorPath path = sample_subordinator_path(spec, grid, 31);
  const double u = 0.12, v = 0.47, t = 0.83;
  const auto full = covariance_integral(path, spec, 1.3, u, t);
  const auto left = covariance_integral(path, spec, 1.3, u, v);
  const auto right = covariance_integral(path, spec, 1.3, v, t);
  for (std::size_t k = 0; k < 100; ++k) {
    const double p2 = std::exp(-2.0 * spec.lambdas[k] * (t - v));
    CHECK(std::fabs(p2 * left[k] + right[k] - full[k]) <= 1e-12 * full[k]);
  }
}

TEST_CASE("covariance integral: one unit jump in the last bin") {
  ProblemSpec spec = ProblemSpec::with_defaults(0.6, 1);
  spec.sigmas = {0.8};
  const TimeGrid grid(0.0, 1.0, 1e-3);
  std::vector<double> inc(1000, 0.0);
  inc[499] = 1.0;
  const SubordinatorPath path{grid, inc, 0};
  const double expected = 0.64 * (1.0 - std::exp(-2e-3)) / 2e-3;
  CHECK(covariance_integral(path, spec, 1.0, 0.2, 0.5)[0] == doctest::Approx(expected).epsilon(1e-14));
  CHECK(expected == doctest::Approx(0.64 * 0.999000666).epsilon(1e-9));
  // snapping: u rounds up, t rounds down to the fine grid
  CHECK(covariance_integral(path, spec, 1.0, 0.2, 0.5004)[0] == covariance_integral(path, spec, 1.0, 0.2, 0.5)[0]);
}

TEST_CASE("convolution segments") {
  const ProblemSpec spec = ProblemSpec::with_defaults(0.7, 5);
  const auto bank = generate_bank(spec, 1e-3, 1e-2, 0, 3, 12);
  const auto& rec = bank.records[1];
  for (double v : convolution_segment(bank, rec, 1.0, 0.4, 0.4)) CHECK(v == 0.0);
  const auto from0 = convolution_segment(bank, rec, 0.7, 0.0, 0.6);
  for (std::size_t k = 0; k < 5; ++k) CHECK(from0[k] == 0.7 * rec.checkpoint(60, 5)[k]);
  const auto st = convolution_segment(bank, rec, 1.0, 0.1, 0.9);
  const auto su = convolution_segment(bank, rec, 1.0, 0.1, 0.35);
  const auto ut = convolution_segment(bank, rec, 1.0, 0.35, 0.9);
  for (std::size_t k = 0; k < 5; ++k) {
    const double chained = std::exp(-spec.lambdas[k] * 0.55) * su[k] + ut[k];
    CHECK(chained == doctest::Approx(st[k]).epsilon(1e-13));
  }
  CHECK_THROWS_AS(convolution_segment(bank, rec, 1.0, 0.105, 0.9), DomainError);
  CHECK_THROWS_AS(convolution_segment(bank, rec, 1.0, 0.5, 0.4), DomainError);
}

TEST_CASE("unit-noise storage gives exact sigma ratios") {
  const ProblemSpec spec = ProblemSpec::with_defaults(0.7, 6);
  const auto bank = generate_bank(spec, 1e-3, 1e-2, 0, 2, 13);
  const auto& rec = bank.records[0];
  const auto a = convolution_segment(bank, rec, 0.4, 0.2, 0.8);
  const auto b = convolution_segment(bank, rec, 1.6, 0.2, 0.8);
  const auto ca = covariance_integral(rec.sub, spec, 0.4, 0.2, 0.8);
  const auto cb = covariance_integral(rec.sub, spec, 1.6, 0.2, 0.8);
  for (std::size_t k = 0; k < 6; ++k) {
    CHECK(a[k] / b[k] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(ca[k] / cb[k] == doctest::Approx(0.0625).epsilon(1e-15));
  }
}

TEST_CASE("OU endpoints") {
  const ProblemSpec spec = ProblemSpec::with_defaults(0.75, 10);
  const TimeGrid grid(0.0, 1.0, 1e-3);
  const std::vector<double> x(10, 1.0);
  const TimeShift shift = solve_flow(spec, VectorFieldSpec::sine(), 0.0, x, grid);
  const auto bank = generate_bank(spec, 1e-3, 1e-2, 0, 10000, 14, BankOptions{StoragePrecision::kFloat64, 2, false});
  const auto f = forcing_convolution(spec, shift, 0.0, 1.0);
  std::vector<double> mean(10);
  for (std::size_t k = 0; k < 10; ++k) mean[k] = std::exp(-spec.lambdas[k]) * x[k] + f[k];

  const auto quiet = ou_endpoint(bank, bank.records[0], 0.0, shift, 0.0, x, 1.0);
  for (std::size_t k = 0; k < 10; ++k) CHECK(quiet[k] == doctest::Approx(mean[k]).epsilon(1e-15));

  std::vector<double> sum(10, 0.0), sum2(10, 0.0);
  for (const auto& rec : bank.records) {
    const auto y = ou_endpoint(bank, rec, 1.0, shift, 0.0, x, 1.0);
    for (std::size_t k = 0; k < 10; ++k) {
      sum[k] += y[k] - mean[k];
      sum2[k] += (y[k] - mean[k]) * (y[k] - mean[k]);
    }
  }
  const double n = static_cast<double>(bank.records.size());
  for (std::size_t k = 0; k < 10; ++k) {
    const double m = sum[k] / n;
    const double se = std::sqrt((sum2[k] / n - m * m) / (n - 1.0));
    CHECK_MESSAGE(std::fabs(m) <= 3.0 * se, "k=" << k);
  }

  const std::vector<double> origin(10, 0.0);
  const TimeShift none = zero_shift(spec, 0.0, origin, grid);
  const auto y = ou_endpoint(bank, bank.records[3], 0.9, none, 0.0, origin, 0.7);
  for (std::size_t k = 0; k < 10; ++k) CHECK(y[k] == 0.9 * bank.records[3].checkpoint(70, 10)[k]);
}

TEST_CASE("save and load round trip") {
  const ProblemSpec spec = small_spec();
  const auto bank = generate_bank(spec, 1e-3, 1e-2, 3, 2, 15);
  const std::size_t before = bank_load_count();
  save_bank(bank, scratch("rt.lvib"));
  const auto back = load_bank(scratch("rt.lvib"), spec);
  CHECK(bank_load_count() == before + 1);
  CHECK(back.header == bank.header);
  for (std::size_t i = 0; i < 3; ++i) CHECK(back.sub_paths[i].increments == bank.sub_paths[i].increments);
  for (std::size_t j = 0; j < 2; ++j) {
    CHECK(back.records[j].checkpoints == bank.records[j].checkpoints);
    CHECK(back.records[j].sub.increments == bank.records[j].sub.increments);
    CHECK(back.records[j].seed == bank.records[j].seed);
  }

  const auto f32 = generate_bank(spec, 1e-3, 1e-2, 1, 2, 15, BankOptions{StoragePrecision::kFloat32, 1, false});
  save_bank(f32, scratch("rt32.lvib"));
  const auto back32 = load_bank(scratch("rt32.lvib"), spec);
  CHECK(back32.records[1].checkpoints == f32.records[1].checkpoints);
  CHECK(fs::file_size(scratch("rt32.lvib")) < fs::file_size(scratch("rt.lvib")));
  for (double v : f32.records[1].checkpoints) CHECK(v == static_cast<double>(static_cast<float>(v)));
}

TEST_CASE("corrupted or mismatched bank files are rejected") {
  const ProblemSpec spec = small_spec();
  save_bank(generate_bank(spec, 1e-3, 1e-2, 1, 1, 16), scratch("good.lvib"));
  auto raw = bytes_of(scratch("good.lvib"));

  {
    std::ofstream out(scratch("trunc.lvib"), std::ios::binary);
    out.write(raw.data(), static_cast<std::streamsize>(raw.size() - 9));
  }
  CHECK_THROWS_AS(load_bank(scratch("trunc.lvib"), spec), IoError);
  {
    std::ofstream out(scratch("stub.lvib"), std::ios::binary);
    out.write(raw.data(), 20);
  }
  CHECK_THROWS_AS(load_bank(scratch("stub.lvib"), spec), IoError);

  ProblemSpec other = spec;
  other.alpha = 0.8;
  CHECK_THROWS_AS(load_bank(scratch("good.lvib"), other), ConfigError);
  ProblemSpec louder = spec;
  louder.sigmas.assign(3, 2.0);
  CHECK_NOTHROW(load_bank(scratch("good.lvib"), louder));

  auto bad_version = raw;
  bad_version[4] = 9;
  {
    std::ofstream out(scratch("ver.lvib"), std::ios::binary);
    out.write(bad_version.data(), static_cast<std::streamsize>(bad_version.size()));
  }
  CHECK_THROWS_AS(load_bank(scratch("ver.lvib"), spec), ConfigError);
  auto bad_magic = raw;
  bad_magic[0] = 'X';
  {
    std::ofstream out(scratch("magic.lvib"), std::ios::binary);
    out.write(bad_magic.data(), static_cast<std::streamsize>(bad_magic.size()));
  }
  CHECK_THROWS_AS(load_bank(scratch("magic.lvib"), spec), IoError);
  CHECK_THROWS_AS(load_bank(scratch("missing.lvib"), spec), IoError);
}

TEST_CASE("golden bank file") {
  const fs::path golden = fs::path(LVI_TEST_DATA_DIR) / "golden_bank.lvib";
  save_bank(golden_bank(), scratch("golden_now.lvib"));
  REQUIRE(fs::exists(golden));
  CHECK(bytes_of(golden) == bytes_of(scratch("golden_now.lvib")));

  const BankHeader h = read_bank_header(golden);
  CHECK(h.version == 1);
  CHECK(h.spec_hash == small_spec(2).bank_hash());
  CHECK(h.delta_fine == 0.1);
  CHECK(h.delta_coarse == 0.2);
  CHECK(h.m_sub == 2);
  CHECK(h.m_ou == 2);
  CHECK(h.base_seed == 20240601);
  CHECK(h.precision == StoragePrecision::kFloat64);
  // 64-byte header, 2 x (8 + 10 x 8) path bytes, 2 x (8 + 10 x 8 + 6 x 2 x 8) record bytes
  CHECK(fs::file_size(golden) == 64 + 2 * 88 + 2 * (88 + 96));
  const auto raw = bytes_of(golden);
  CHECK(std::string(raw.begin(), raw.begin() + 4) == "LVIB");
}
