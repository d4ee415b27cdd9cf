#include <benchmark/benchmark.h>

#include <random>

#include "ordsel/prefix_solver.hpp"

using namespace ordsel;

namespace {

AttributeSet random_set(std::mt19937_64& rng, std::size_t size) {
  AttributeSet s;
  while (s.size() < size) s.insert(Attribute({}, "a" + std::to_string(rng() % (2 * size))));
  return s;
}

PrefixInstance path(std::size_t n, std::size_t set_size) {
  std::mt19937_64 rng(n);
  PrefixInstance inst;
  for (std::size_t i = 0; i < n; ++i) inst.sets.push_back(random_set(rng, set_size));
  for (std::size_t i = 0; i + 1 < n; ++i) inst.edges.emplace_back(i, i + 1);
  return inst;
}

PrefixInstance complete_binary_tree(std::size_t n, std::size_t set_size) {
  auto inst = path(n, set_size);
  inst.edges.clear();
  for (std::size_t i = 1; i < n; ++i) inst.edges.emplace_back((i - 1) / 2, i);
  return inst;
}

void path_dp(benchmark::State& state) {
  const auto inst = path(static_cast<std::size_t>(state.range(0)), 6);
  for (auto _ : state) benchmark::DoNotOptimize(solve_path(inst).benefit);
  state.SetComplexityN(state.range(0));
}

void tree_approx(benchmark::State& state) {
  const auto inst = complete_binary_tree(static_cast<std::size_t>(state.range(0)), 6);
  for (auto _ : state) benchmark::DoNotOptimize(solve_tree_half_approx(inst).benefit);
  state.SetComplexityN(state.range(0));
}

}  // namespace

BENCHMARK(path_dp)->RangeMultiplier(2)->Range(4, 64)->Complexity();
BENCHMARK(tree_approx)->RangeMultiplier(2)->Range(4, 256)->Complexity();
BENCHMARK_MAIN();
