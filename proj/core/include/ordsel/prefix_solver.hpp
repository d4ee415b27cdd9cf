#pragma once

// The common prefix problem: pick a permutation of every vertex's attribute
// set so that the summed benefit f(|p_i ^ p_j|) over tree edges is maximal.

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "ordsel/order.hpp"

namespace ordsel {

/// Benefit of a shared prefix of the given length. Must satisfy f(0) == 0
/// and be non-decreasing.
using BenefitFn = std::function<double(std::size_t)>;

BenefitFn identity_benefit();

struct PrefixInstance {
  std::vector<AttributeSet> sets;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  BenefitFn f = identity_benefit();
  /// Optional per-edge benefit, parallel to `edges`; overrides `f`.
  std::vector<BenefitFn> edge_f;

  double edge_benefit(std::size_t edge, std::size_t shared) const;

  /// Throws Error{Validation} unless the edges form a tree over the vertices
  /// and every benefit function is zero at 0 and non-decreasing up to the
  /// largest set size.
  void validate() const;
};

struct Assignment {
  std::vector<SortOrder> perms;
  double benefit = 0.0;
};

/// Sum over edges of f(|lcp(p_i, p_j)|). Throws Error{InvalidAssignment} if a
/// permutation does not cover exactly its vertex's set.
double benefit(const PrefixInstance& inst, const std::vector<SortOrder>& perms);

/// Exact O(n^3) dynamic program for instances whose edges are exactly
/// (i, i+1) for consecutive vertices. Throws Error{NotAPath} otherwise.
Assignment solve_path(const PrefixInstance& inst);

/// Splits the tree (rooted at `root`, depth 0 = even) into the edges whose
/// parent sits on an odd level and those whose parent sits on an even level.
/// Each class is a set of vertex-disjoint paths solved exactly; the better of
/// the two complete assignments is returned. Guarantees at least half the
/// optimal benefit. Throws Error{NotABinaryTree} if a vertex has more than
/// two children.
Assignment solve_tree_half_approx(const PrefixInstance& inst, std::size_t root = 0);

/// Exhaustive maximum; ties go to the lexicographically least tuple of
/// permutations. Throws Error{TooLarge} when the product of |s_i|! exceeds
/// `limit`.
Assignment brute_force(const PrefixInstance& inst, double limit = 1e7);

/// The edge-parity classes used by solve_tree_half_approx: {even, odd}, each
/// a list of edge indices into inst.edges.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> parity_edge_classes(const PrefixInstance& inst,
                                                                                    std::size_t root = 0);

}  // namespace ordsel
