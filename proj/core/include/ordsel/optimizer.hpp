#pragma once

// Two-phase sort-order selection over a fixed join tree.
//
// Phase 1 is a memoized top-down search over goals (expression, required
// order). Joins are merge joins and group-bys are sort-based; each tries the
// interesting orders of its attribute set, and any plan whose output order
// does not subsume the goal's order gets a (full or partial) sort enforcer.
// Phase 2 reworks the attributes of each chosen order that no input order
// fixed, coordinating adjacent operators through the tree approximation.

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ordsel/catalog.hpp"
#include "ordsel/cost.hpp"
#include "ordsel/favorable.hpp"

namespace ordsel {

enum class PlanKind { TableAccess, Filter, Project, SortEnforcer, MergeJoin, GroupBy };

std::string_view to_string(PlanKind kind);
PlanKind plan_kind_from_string(std::string_view s);

struct PlanNode;
using PlanPtr = std::shared_ptr<const PlanNode>;

struct PlanNode {
  PlanKind kind = PlanKind::TableAccess;
  NodeId expr = 0;

  std::string relation;  // TableAccess
  std::string access;    // TableAccess: "clustered", "heap", or the index name
  double blocks_read = 0.0;

  SortOrder order;       // MergeJoin / GroupBy: chosen permutation
  SortOrder from, to;    // SortEnforcer
  bool partial = false;  // SortEnforcer: lcp(from, to) non-empty
  double segments = 1.0; // SortEnforcer: D(e, attrs(lcp(from, to)))

  SortOrder output_order;
  InputStats stats;  // of this operator's output
  CostEstimate local;
  CostEstimate total;
  std::vector<PlanPtr> children;
};

/// Local cost of one operator from its own fields and its children's stats.
CostEstimate local_cost(const PlanNode& node, const CostParams& params);

/// Recomputes the subtree cost bottom-up from local costs.
CostEstimate cost_plan(const PlanNode& plan, const CostParams& params);

enum class OrderStrategy {
  Favorable,     // interesting orders from afm
  FordMinExact,  // interesting orders from exact minimal favorable orders
  Exhaustive,    // every permutation of the attribute set
};

struct OptimizerOptions {
  OrderStrategy strategy = OrderStrategy::Favorable;
  /// Expression node -> the only order its merge join / group-by may use.
  std::map<NodeId, SortOrder> forced_orders;
};

class Optimizer {
 public:
  Optimizer(const Query& query, CostParams params, OptimizerOptions options = {});

  /// Best plan for the root, satisfying the query's order-by.
  PlanPtr optimize();

  /// cbp(e, o): best plan for `id` whose output subsumes `required`.
  PlanPtr best(NodeId id, const SortOrder& required);

  const std::vector<FavorableOrderSet>& afm() const noexcept { return afm_; }

  /// The orders a sort-based node tries for goal (id, required).
  std::vector<SortOrder> candidate_orders(NodeId id, const SortOrder& required);

  /// Exact ford-min(e): orders over schema(e) with positive benefit that
  /// satisfy both minimality conditions. Throws Error{TooLarge} above
  /// `limit` candidate orders.
  FavorableOrderSet ford_min(NodeId id, double limit = 1e5);

  /// Interesting-order sets generated so far, per node and required order.
  const std::map<NodeId, std::map<SortOrder, std::vector<SortOrder>>>& explored() const noexcept { return explored_; }

  const Query& query() const noexcept { return query_; }
  const CostParams& params() const noexcept { return params_; }
  std::size_t memo_size() const noexcept { return memo_.size(); }
  void clear_memo() { memo_.clear(); }

 private:
  std::vector<PlanPtr> natural_plans(NodeId id, const SortOrder& required);
  PlanPtr enforce(const PlanPtr& input, const SortOrder& target);
  const FavorableOrderSet& favorable_of(NodeId id);

  const Query& query_;
  CostParams params_;
  OptimizerOptions options_;
  std::vector<FavorableOrderSet> afm_;
  std::map<std::pair<NodeId, SortOrder>, PlanPtr> memo_;
  std::map<NodeId, FavorableOrderSet> ford_min_;
  std::map<NodeId, std::map<SortOrder, std::vector<SortOrder>>> explored_;
  std::unique_ptr<Optimizer> exhaustive_;  // cost oracle for ford_min
};

PlanPtr optimize(const Query& query, const CostParams& params, const OptimizerOptions& options = {});

/// Exact minimal favorable orders of node `id` (test oracle; small inputs).
FavorableOrderSet ford_min_exact(const Query& query, NodeId id, const CostParams& params, double limit = 1e5);

struct RefineOptions {
  bool refine_groupby = false;
  bool identity_benefit = false;  // f(l) = l instead of the cost-derived benefit
};

/// Phase 2. Never returns a plan costlier than `plan`.
PlanPtr refine(const Query& query, const CostParams& params, const PlanPtr& plan, const RefineOptions& options = {},
               const OptimizerOptions& base = {});

/// Orders chosen by every merge join / group-by in `plan`, keyed by node.
std::map<NodeId, SortOrder> chosen_orders(const PlanNode& plan);

/// All nodes of `plan` in pre-order.
std::vector<const PlanNode*> flatten(const PlanNode& plan);

}  // namespace ordsel
