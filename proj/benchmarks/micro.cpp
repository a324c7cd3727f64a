#include <benchmark/benchmark.h>

#include <vector>

#include "lvi/bank.hpp"
#include "lvi/estimators.hpp"
#include "lvi/fields.hpp"
#include "lvi/rng.hpp"
#include "lvi/stable.hpp"

namespace {

void BM_StableIncrement(benchmark::State& state) {
  lvi::Rng rng = lvi::make_stream(1, lvi::StreamDomain::kSampler, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lvi::sample_stable_increment(0.75, 1.0, 1e-3, rng));
  }
}
BENCHMARK(BM_StableIncrement);

void BM_FieldEval(benchmark::State& state) {
  const std::size_t n = 100;
  const auto field = state.range(0) == 0
                         ? lvi::VectorFieldSpec::sine()
                         : lvi::VectorFieldSpec::bounded_cubic(2.0, std::vector<double>(n, 2.0), 1e4);
  std::vector<double> x(n, 1.0), out(n), scratch(n);
  for (auto _ : state) {
    lvi::eval_field(field, 0.0, x, out, scratch);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_FieldEval)->Arg(0)->Arg(1);

void BM_GenerateBank(benchmark::State& state) {
  const auto spec = lvi::ProblemSpec::with_defaults(0.75, 100);
  const auto records = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    auto bank = lvi::generate_bank(spec, 1e-3, 1e-2, records, records, 3);
    benchmark::DoNotOptimize(bank.records.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GenerateBank)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_FirstIterate(benchmark::State& state) {
  const auto spec = lvi::ProblemSpec::with_defaults(0.75, 100);
  const auto pairs = static_cast<std::size_t>(state.range(0));
  const auto bank = lvi::generate_bank(spec, 1e-3, 1e-2, pairs, pairs, 4);
  lvi::QueryParams q;
  q.x.assign(100, 1.0);
  q.field = lvi::VectorFieldSpec::sine();
  const auto shift = lvi::make_shift(spec, q, 1e-3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lvi::v1_estimate(bank, spec, shift, q, 1e-2, pairs, 0).value);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FirstIterate)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
