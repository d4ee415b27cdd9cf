#include <benchmark/benchmark.h>

#include <string>

#include "ordsel/json_io.hpp"
#include "ordsel/optimizer.hpp"

using namespace ordsel;

namespace {

struct Fixture {
  Catalog catalog;
  Query query;

  explicit Fixture(const std::string& stem)
      : catalog(load_catalog(std::string(ORDSEL_BENCH_DATA) + "/" + stem + "_catalog.json")),
        query(load_query(std::string(ORDSEL_BENCH_DATA) + "/" + stem + "_query.json", catalog)) {}
};

void optimize_fixture(benchmark::State& state, const char* stem, OrderStrategy strategy, bool phase2) {
  const Fixture f(stem);
  for (auto _ : state) {
    auto plan = optimize(f.query, f.catalog.params, {strategy, {}});
    if (phase2) plan = refine(f.query, f.catalog.params, plan);
    benchmark::DoNotOptimize(plan.get());
  }
}

}  // namespace

BENCHMARK_CAPTURE(optimize_fixture, car_favorable, "car", OrderStrategy::Favorable, false);
BENCHMARK_CAPTURE(optimize_fixture, car_exhaustive, "car", OrderStrategy::Exhaustive, false);
BENCHMARK_CAPTURE(optimize_fixture, b1_favorable, "b1", OrderStrategy::Favorable, false);
BENCHMARK_CAPTURE(optimize_fixture, chain_favorable, "chain", OrderStrategy::Favorable, false);
BENCHMARK_CAPTURE(optimize_fixture, chain_refined, "chain", OrderStrategy::Favorable, true);
BENCHMARK_CAPTURE(optimize_fixture, small_ford_min, "small", OrderStrategy::FordMinExact, false);
