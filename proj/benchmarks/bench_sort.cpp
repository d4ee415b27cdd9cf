#include <benchmark/benchmark.h>

#include "ordsel/extsort.hpp"

using namespace ordsel;

namespace {

SortSpec spec() {
  SortSpec s;
  s.key_arity = 2;
  s.prefix_len = 1;
  s.memory_records = 1 << 12;
  return s;
}

template <SortResult (*Sort)(const std::vector<Record>&, const SortSpec&)>
void sort_segments(benchmark::State& state) {
  const auto data = generate_dataset({1 << 16, static_cast<std::size_t>(state.range(0)), 1, 1'000'000, 16});
  std::uint64_t comparisons = 0, written = 0;
  for (auto _ : state) {
    auto r = Sort(data, spec());
    comparisons = r.metrics.comparisons;
    written = r.metrics.blocks_written;
    benchmark::DoNotOptimize(r.output.data());
  }
  state.counters["comparisons"] = static_cast<double>(comparisons);
  state.counters["blocks_written"] = static_cast<double>(written);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(data.size()));
}

}  // namespace

BENCHMARK(sort_segments<sort_srs>)->Name("srs")->RangeMultiplier(4)->Range(1, 4096)->Unit(benchmark::kMillisecond);
BENCHMARK(sort_segments<sort_mrs>)->Name("mrs")->RangeMultiplier(4)->Range(1, 4096)->Unit(benchmark::kMillisecond);
