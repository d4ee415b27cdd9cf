#pragma once

// Block-I/O + CPU cost arithmetic for sorting and merging. All costs are in
// block-transfer units; CPU work is converted through cpu_comparison_cost.

#include <cstdint>

#include "ordsel/order.hpp"

namespace ordsel {

struct CostParams {
  std::uint64_t memory_blocks = 10000;  // M
  std::uint64_t block_size = 4096;      // bytes
  double cpu_comparison_cost = 1e-6;    // I/O units per tuple comparison
  double merge_pass_constant = 1.0;     // multiplier on the per-tuple merge CPU term

  /// Throws Error{Validation} if M < 3 or any cost is negative.
  void validate() const;
};

struct CostEstimate {
  double io_blocks = 0.0;
  double cpu_units = 0.0;

  double total() const { return io_blocks + cpu_units; }

  CostEstimate& operator+=(const CostEstimate& o) {
    io_blocks += o.io_blocks;
    cpu_units += o.cpu_units;
    return *this;
  }
  friend CostEstimate operator+(CostEstimate a, const CostEstimate& b) { return a += b; }
  friend CostEstimate operator*(double k, CostEstimate a) {
    a.io_blocks *= k;
    a.cpu_units *= k;
    return a;
  }
};

/// Cardinality of an input, as seen by the cost functions.
struct InputStats {
  double tuples = 0.0;  // N
  double blocks = 0.0;  // B
};

/// ceil(log_base(x)) for x >= 1 in exact integer arithmetic; 0 when x <= 1.
std::uint64_t ceil_log(std::uint64_t base, std::uint64_t numerator, std::uint64_t denominator);

/// CPU cost of sorting N tuples: unit * N * log2(max(N, 2)). Depends only on
/// the tuple count, never on which permutation is requested.
double cpu_sort_cost(double tuples, const CostParams& params);

/// Cost of sorting unordered input into `target` (coe(e, eps, o)).
CostEstimate sort_cost_full(double tuples, double blocks, const CostParams& params);

/// Cost of producing `target` from input already ordered on `known`.
/// `prefix_distinct` is D(e, attrs(target ^ known)); it is ignored (taken as 1)
/// when that common prefix is empty. Zero when `known` subsumes `target`.
CostEstimate sort_cost_partial(double tuples, double blocks, double prefix_distinct, const SortOrder& known,
                               const SortOrder& target, const CostParams& params);

/// Sorting input made of `segments` equal, independently sorted groups.
/// segments = 1 is a full sort.
CostEstimate segmented_sort_cost(double tuples, double blocks, double segments, const CostParams& params);

/// Merge of two inputs sorted on a common order: B_l + B_r transfers plus a
/// linear CPU term. Independent of which order the inputs share.
CostEstimate merge_join_cost(const InputStats& left, const InputStats& right, const CostParams& params);

}  // namespace ordsel
