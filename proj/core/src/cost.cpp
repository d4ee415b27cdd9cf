#include "ordsel/cost.hpp"

#include <algorithm>
#include <cmath>

#include "ordsel/error.hpp"

namespace ordsel {

void CostParams::validate() const {
  if (memory_blocks < 3) {
    throw Error(ErrorCode::Validation, "memory_blocks must be at least 3", "memory_blocks");
  }
  if (block_size == 0) throw Error(ErrorCode::Validation, "block_size must be positive", "block_size");
  if (cpu_comparison_cost < 0.0) {
    throw Error(ErrorCode::Validation, "cpu_comparison_cost must be non-negative", "cpu_comparison_cost");
  }
  if (merge_pass_constant < 0.0) {
    throw Error(ErrorCode::Validation, "merge_pass_constant must be non-negative", "merge_pass_constant");
  }
}

std::uint64_t ceil_log(std::uint64_t base, std::uint64_t numerator, std::uint64_t denominator) {
  // smallest p with base^p * denominator >= numerator
  std::uint64_t p = 0;
  std::uint64_t power = std::max<std::uint64_t>(denominator, 1);
  while (power < numerator) {
    ++p;
    if (power > numerator / base) break;
    power *= base;
  }
  return p;
}

double cpu_sort_cost(double tuples, const CostParams& params) {
  if (tuples <= 0.0) return 0.0;
  return params.cpu_comparison_cost * tuples * std::log2(std::max(tuples, 2.0));
}

namespace {

std::uint64_t to_count(double x) { return x <= 0.0 ? 0 : static_cast<std::uint64_t>(std::ceil(x)); }

double merge_io(double blocks, std::uint64_t run_blocks, const CostParams& params) {
  const auto passes = ceil_log(params.memory_blocks - 1, run_blocks, params.memory_blocks);
  return blocks * static_cast<double>(2 * passes + 1);
}

}  // namespace

CostEstimate sort_cost_full(double tuples, double blocks, const CostParams& params) {
  CostEstimate c;
  if (tuples <= 0.0) return c;
  c.cpu_units = cpu_sort_cost(tuples, params);
  const auto b = to_count(blocks);
  if (b > params.memory_blocks) c.io_blocks = merge_io(static_cast<double>(b), b, params);
  return c;
}

CostEstimate segmented_sort_cost(double tuples, double blocks, double segments, const CostParams& params) {
  CostEstimate c;
  if (tuples <= 0.0) return c;
  segments = std::clamp(segments, 1.0, std::max(tuples, 1.0));
  const auto seg_tuples = to_count(tuples / segments);
  const auto seg_blocks = to_count(blocks / segments);
  c.cpu_units = params.cpu_comparison_cost * tuples * std::log2(std::max(static_cast<double>(seg_tuples), 2.0));
  if (seg_blocks > params.memory_blocks) c.io_blocks = merge_io(std::ceil(blocks), seg_blocks, params);
  return c;
}

CostEstimate sort_cost_partial(double tuples, double blocks, double prefix_distinct, const SortOrder& known,
                               const SortOrder& target, const CostParams& params) {
  if (tuples <= 0.0 || subsumes(known, target)) return {};
  const bool shared = !lcp(target, known).empty();
  return segmented_sort_cost(tuples, blocks, shared ? prefix_distinct : 1.0, params);
}

CostEstimate merge_join_cost(const InputStats& left, const InputStats& right, const CostParams& params) {
  CostEstimate c;
  c.io_blocks = std::max(left.blocks, 0.0) + std::max(right.blocks, 0.0);
  c.cpu_units = params.cpu_comparison_cost * params.merge_pass_constant *
                (std::max(left.tuples, 0.0) + std::max(right.tuples, 0.0));
  return c;
}

}  // namespace ordsel
