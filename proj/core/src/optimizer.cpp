#include "ordsel/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "ordsel/error.hpp"
#include "ordsel/prefix_solver.hpp"

namespace ordsel {

namespace {

bool cheaper(const CostEstimate& a, const CostEstimate& b) {
  const double ta = a.total(), tb = b.total();
  return ta < tb - 1e-9 * std::max({1.0, std::abs(ta), std::abs(tb)});
}

bool same_cost(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)}); }

std::shared_ptr<PlanNode> finish(std::shared_ptr<PlanNode> node, const CostParams& params) {
  node->local = local_cost(*node, params);
  node->total = node->local;
  for (const auto& c : node->children) node->total += c->total;
  return node;
}

double count_orders(std::size_t n) {
  double total = 0.0, term = 1.0;
  for (std::size_t k = 1; k <= n; ++k) {
    term *= static_cast<double>(n - k + 1);
    total += term;
  }
  return total;
}

}  // namespace

std::string_view to_string(PlanKind kind) {
  switch (kind) {
    case PlanKind::TableAccess: return "table_access";
    case PlanKind::Filter: return "filter";
    case PlanKind::Project: return "project";
    case PlanKind::SortEnforcer: return "sort";
    case PlanKind::MergeJoin: return "merge_join";
    case PlanKind::GroupBy: return "group_by";
  }
  return "unknown";
}

PlanKind plan_kind_from_string(std::string_view s) {
  for (auto k : {PlanKind::TableAccess, PlanKind::Filter, PlanKind::Project, PlanKind::SortEnforcer,
                 PlanKind::MergeJoin, PlanKind::GroupBy}) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorCode::Validation, "unknown plan node kind " + std::string(s), "kind");
}

CostEstimate local_cost(const PlanNode& node, const CostParams& params) {
  auto input = [&](std::size_t i) -> const InputStats& {
    if (node.children.size() <= i) {
      throw Error(ErrorCode::Validation, std::string(to_string(node.kind)) + " node is missing an input");
    }
    return node.children[i]->stats;
  };
  switch (node.kind) {
    case PlanKind::TableAccess:
      return {node.blocks_read, 0.0};
    case PlanKind::Filter:
    case PlanKind::Project:
    case PlanKind::GroupBy:
      return {0.0, params.cpu_comparison_cost * input(0).tuples};
    case PlanKind::SortEnforcer:
      return sort_cost_partial(node.stats.tuples, node.stats.blocks, node.segments, node.from, node.to, params);
    case PlanKind::MergeJoin:
      return merge_join_cost(input(0), input(1), params);
  }
  return {};
}

CostEstimate cost_plan(const PlanNode& plan, const CostParams& params) {
  CostEstimate total = local_cost(plan, params);
  for (const auto& c : plan.children) total += cost_plan(*c, params);
  return total;
}

std::vector<const PlanNode*> flatten(const PlanNode& plan) {
  std::vector<const PlanNode*> out;
  std::function<void(const PlanNode&)> walk = [&](const PlanNode& n) {
    out.push_back(&n);
    for (const auto& c : n.children) walk(*c);
  };
  walk(plan);
  return out;
}

std::map<NodeId, SortOrder> chosen_orders(const PlanNode& plan) {
  std::map<NodeId, SortOrder> out;
  for (const auto* n : flatten(plan)) {
    if (n->kind == PlanKind::MergeJoin || n->kind == PlanKind::GroupBy) out.emplace(n->expr, n->order);
  }
  return out;
}

// ---------------------------------------------------------------------------

Optimizer::Optimizer(const Query& query, CostParams params, OptimizerOptions options)
    : query_(query), params_(params), options_(std::move(options)) {
  params_.validate();
  afm_ = approximate_favorable_orders(query_);
}

PlanPtr Optimizer::optimize() { return best(query_.root(), query_.equivalences().rewrite(query_.order_by())); }

PlanPtr Optimizer::best(NodeId id, const SortOrder& required) {
  const auto key = std::make_pair(id, required);
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;

  PlanPtr chosen;
  for (const auto& plan : natural_plans(id, required)) {
    PlanPtr candidate = subsumes(plan->output_order, required) ? plan : enforce(plan, required);
    if (!chosen || cheaper(candidate->total, chosen->total)) chosen = std::move(candidate);
  }
  memo_.emplace(key, chosen);
  return chosen;
}

PlanPtr Optimizer::enforce(const PlanPtr& input, const SortOrder& target) {
  auto node = std::make_shared<PlanNode>();
  node->kind = PlanKind::SortEnforcer;
  node->expr = input->expr;
  node->from = input->output_order;
  node->to = target;
  const SortOrder shared = lcp(node->from, target);
  node->partial = !shared.empty();
  node->segments = node->partial ? query_.distinct(input->expr, shared.attr_set()) : 1.0;
  node->output_order = target;
  node->stats = input->stats;
  node->children = {input};
  return finish(node, params_);
}

const FavorableOrderSet& Optimizer::favorable_of(NodeId id) {
  if (options_.strategy == OrderStrategy::FordMinExact) {
    if (!ford_min_.contains(id)) ford_min_.emplace(id, ford_min(id));
    return ford_min_.at(id);
  }
  return afm_.at(id);
}

std::vector<SortOrder> Optimizer::candidate_orders(NodeId id, const SortOrder& required) {
  const auto& n = query_.node(id);
  const auto& eq = query_.equivalences();
  const AttributeSet attrs = n.kind == NodeKind::Join
                                 ? representative_join_set(n, eq)
                                 : eq.rewrite(AttributeSet(n.attrs.begin(), n.attrs.end()));

  std::vector<SortOrder> orders;
  if (auto it = options_.forced_orders.find(id); it != options_.forced_orders.end()) {
    if (it->second.attr_set() != attrs) {
      throw Error(ErrorCode::Validation, "forced order " + it->second.str() + " is not a permutation of " +
                                             canonical_permutation(attrs).str(),
                  "/forced_orders/" + std::to_string(id));
    }
    orders = {it->second};
  } else if (options_.strategy == OrderStrategy::Exhaustive) {
    orders = all_permutations(attrs);
  } else {
    std::vector<FavorableOrderSet> inputs;
    for (auto c : n.children) inputs.push_back(favorable_of(c));
    orders = interesting_orders(attrs, required, inputs);
  }
  explored_[id][required] = orders;
  return orders;
}

std::vector<PlanPtr> Optimizer::natural_plans(NodeId id, const SortOrder& required) {
  const auto& n = query_.node(id);
  const auto& eq = query_.equivalences();
  std::vector<PlanPtr> out;

  auto make = [&](PlanKind kind) {
    auto node = std::make_shared<PlanNode>();
    node->kind = kind;
    node->expr = id;
    node->stats = n.stats();
    return node;
  };

  switch (n.kind) {
    case NodeKind::Relation: {
      const auto& rel = query_.catalog().at(n.relation);
      auto scan = make(PlanKind::TableAccess);
      scan->relation = rel.name;
      scan->access = rel.clustering.empty() ? "heap" : "clustered";
      scan->blocks_read = n.blocks;
      scan->output_order = eq.rewrite(rel.clustering);
      out.push_back(finish(scan, params_));
      for (const auto& idx : rel.indices) {
        if (!index_covers(idx, rel, query_)) continue;
        auto access = make(PlanKind::TableAccess);
        access->relation = rel.name;
        access->access = idx.name;
        const double width = static_cast<double>(idx.columns().size()) / static_cast<double>(n.schema.size());
        access->blocks_read =
            n.tuples <= 0.0
                ? 0.0
                : std::max(1.0, std::ceil(n.tuples * n.tuple_bytes * width / static_cast<double>(params_.block_size)));
        access->output_order = eq.rewrite(idx.key);
        out.push_back(finish(access, params_));
      }
      break;
    }
    case NodeKind::Select:
    case NodeKind::Project: {
      // Enforcing above a unary operator only ever needs a prefix of the
      // required order from below.
      const AttributeSet keep = eq.rewrite(n.schema);
      for (std::size_t len = required.size() + 1; len-- > 0;) {
        auto child = best(n.children[0], required.prefix(len));
        auto node = make(n.kind == NodeKind::Select ? PlanKind::Filter : PlanKind::Project);
        node->output_order = n.kind == NodeKind::Select ? child->output_order : lcp_in_set(child->output_order, keep);
        node->children = {child};
        out.push_back(finish(node, params_));
      }
      break;
    }
    case NodeKind::Join: {
      for (const auto& p : candidate_orders(id, required)) {
        auto node = make(PlanKind::MergeJoin);
        node->order = p;
        node->output_order = p;
        node->children = {best(n.children[0], p), best(n.children[1], p)};
        out.push_back(finish(node, params_));
      }
      break;
    }
    case NodeKind::GroupBy: {
      for (const auto& p : candidate_orders(id, required)) {
        auto node = make(PlanKind::GroupBy);
        node->order = p;
        node->output_order = p;
        node->children = {best(n.children[0], p)};
        out.push_back(finish(node, params_));
      }
      break;
    }
  }
  return out;
}

FavorableOrderSet Optimizer::ford_min(NodeId id, double limit) {
  const AttributeSet schema = query_.rep_schema(id);
  if (count_orders(schema.size()) > limit) {
    throw Error(ErrorCode::TooLarge, "too many orders to enumerate over " + std::to_string(schema.size()) +
                                         " attributes");
  }
  if (!exhaustive_) exhaustive_ = std::make_unique<Optimizer>(query_, params_, OptimizerOptions{OrderStrategy::Exhaustive, {}});
  auto& oracle = *exhaustive_;

  const auto& n = query_.node(id);
  const double unordered = oracle.best(id, {})->total.total();
  const double full_sort = sort_cost_full(n.tuples, n.blocks, params_).total();
  auto cbp = [&](const SortOrder& o) { return oracle.best(id, o)->total.total(); };

  std::vector<SortOrder> ford;
  for (const auto& o : all_orders(schema)) {
    const double gain = unordered + full_sort - cbp(o);
    if (gain > 1e-9 * std::max(1.0, unordered + full_sort)) ford.push_back(o);
  }

  FavorableOrderSet out;
  for (const auto& o : ford) {
    const double c = cbp(o);
    bool minimal = true;
    for (const auto& other : ford) {
      if (other.size() < o.size() && subsumes(o, other)) {
        const SortOrder shared = other;  // lcp(o, other) == other
        const double coe =
            sort_cost_partial(n.tuples, n.blocks, query_.distinct(id, shared.attr_set()), other, o, params_).total();
        if (same_cost(cbp(other) + coe, c)) minimal = false;
      } else if (other.size() > o.size() && subsumes(other, o)) {
        if (same_cost(cbp(other), c)) minimal = false;
      }
      if (!minimal) break;
    }
    if (minimal) out.push_back(o);
  }
  return out;
}

PlanPtr optimize(const Query& query, const CostParams& params, const OptimizerOptions& options) {
  return Optimizer(query, params, options).optimize();
}

FavorableOrderSet ford_min_exact(const Query& query, NodeId id, const CostParams& params, double limit) {
  return Optimizer(query, params, {OrderStrategy::Exhaustive, {}}).ford_min(id, limit);
}

// ---------------------------------------------------------------------------
// Phase 2

namespace {

struct SortNode {
  NodeId expr;
  SortOrder order;
  SortOrder fixed;
  AttributeSet free;
  std::size_t parent;  // index into the node list, or npos
  NodeId via;          // parent's input expression on the path to this node
};

constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

/// Savings on the enforcer between a child and its parent when their orders
/// share `fixed` plus `extra` further attributes. Uses the attributes with the
/// fewest distinct values first, so the estimate never overstates the gain.
BenefitFn edge_savings(const Query& query, const CostParams& params, const SortNode& child, const SortNode& parent) {
  if (child.fixed != parent.fixed) return [](std::size_t) { return 0.0; };
  const auto& via = query.node(child.via);

  std::vector<Attribute> shared;
  for (const auto& a : child.free) {
    if (parent.free.contains(a)) shared.push_back(a);
  }
  std::vector<double> ds;
  try {
    for (const auto& a : shared) ds.push_back(query.distinct(child.via, {a}));
    std::vector<std::size_t> idx(shared.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](auto x, auto y) { return ds[x] < ds[y]; });

    std::vector<double> cost;  // cost[l] = enforcer cost with fixed + l shared
    AttributeSet prefix = child.fixed.attr_set();
    auto segmented = [&] {
      return prefix.empty() ? 1.0 : query.distinct(child.via, prefix);
    };
    cost.push_back(segmented_sort_cost(via.tuples, via.blocks, segmented(), params).total());
    for (std::size_t l = 0; l < idx.size(); ++l) {
      prefix.insert(shared[idx[l]]);
      const bool complete = prefix == parent.order.attr_set() && prefix == child.order.attr_set();
      cost.push_back(complete ? 0.0 : segmented_sort_cost(via.tuples, via.blocks, segmented(), params).total());
    }
    for (std::size_t l = 1; l < cost.size(); ++l) cost[l] = std::min(cost[l], cost[l - 1]);
    return [cost](std::size_t l) { return cost[0] - cost[std::min(l, cost.size() - 1)]; };
  } catch (const Error&) {
    return [](std::size_t) { return 0.0; };
  }
}

}  // namespace

PlanPtr refine(const Query& query, const CostParams& params, const PlanPtr& plan, const RefineOptions& options,
               const OptimizerOptions& base) {
  const auto afm = approximate_favorable_orders(query);
  const auto chosen = chosen_orders(*plan);

  auto is_vertex = [&](NodeId id) {
    if (!chosen.contains(id)) return false;
    return query.node(id).kind == NodeKind::Join || options.refine_groupby;
  };

  std::vector<SortNode> nodes;
  std::map<NodeId, std::size_t> index;
  for (const auto& [id, order] : chosen) {
    if (!is_vertex(id)) continue;
    SortNode v{id, order, {}, {}, npos, id};
    std::size_t best_len = 0;
    for (auto c : query.node(id).children) {
      for (const auto& q : afm[c]) {
        const auto shared = lcp(order, q);
        if (shared.size() > best_len) {
          best_len = shared.size();
          v.fixed = shared;
        }
      }
    }
    for (const auto& a : order) {
      if (!v.fixed.contains(a)) v.free.insert(a);
    }
    index.emplace(id, nodes.size());
    nodes.push_back(std::move(v));
  }

  // Link each vertex to its nearest sort-based ancestor; a sort-based node
  // that is not itself a vertex breaks the chain.
  for (auto& v : nodes) {
    NodeId cur = v.expr;
    while (cur != query.root()) {
      const NodeId up = query.parent(cur);
      if (chosen.contains(up)) {
        if (is_vertex(up)) {
          v.parent = index.at(up);
          v.via = cur;
        }
        break;
      }
      cur = up;
    }
  }

  std::map<NodeId, SortOrder> proposed;
  for (std::size_t r = 0; r < nodes.size(); ++r) {
    if (nodes[r].parent != npos) continue;
    // Collect the component in BFS order so the root becomes vertex 0.
    std::vector<std::size_t> members{r};
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (std::size_t j = 0; j < nodes.size(); ++j) {
        if (nodes[j].parent == members[i]) members.push_back(j);
      }
    }
    PrefixInstance inst;
    std::map<std::size_t, std::size_t> local;
    for (auto m : members) {
      local.emplace(m, inst.sets.size());
      inst.sets.push_back(nodes[m].free);
    }
    for (auto m : members) {
      if (m == r) continue;
      inst.edges.emplace_back(local.at(nodes[m].parent), local.at(m));
      if (!options.identity_benefit) {
        inst.edge_f.push_back(edge_savings(query, params, nodes[m], nodes[nodes[m].parent]));
      }
    }
    if (inst.edges.empty()) continue;
    // Any vertex may serve as the root; which one decides how the edges
    // split into parity classes, so keep the best.
    std::optional<Assignment> solved;
    for (std::size_t root = 0; root < inst.sets.size(); ++root) {
      try {
        auto a = solve_tree_half_approx(inst, root);
        if (!solved || a.benefit > solved->benefit) solved = std::move(a);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NotABinaryTree) throw;
      }
    }
    if (!solved) continue;
    for (auto m : members) {
      auto order = concat(nodes[m].fixed, solved->perms[local.at(m)]);
      if (order != nodes[m].order) proposed.emplace(nodes[m].expr, std::move(order));
    }
  }
  if (proposed.empty()) return plan;

  auto run = [&](const std::map<NodeId, SortOrder>& forced) {
    OptimizerOptions opts = base;
    opts.forced_orders = forced;
    return Optimizer(query, params, opts).optimize();
  };

  std::map<NodeId, SortOrder> current = chosen;
  PlanPtr best_plan = plan;

  std::map<NodeId, SortOrder> all = current;
  for (const auto& [id, o] : proposed) all[id] = o;
  auto together = run(all);
  if (cheaper(together->total, best_plan->total)) {
    current = all;
    best_plan = together;
    // Drop any change that does not pay for itself.
    for (const auto& [id, _] : proposed) {
      auto trial = current;
      trial[id] = chosen.at(id);
      auto p = run(trial);
      if (cheaper(p->total, best_plan->total)) {
        current = trial;
        best_plan = p;
      }
    }
  } else {
    for (const auto& [id, o] : proposed) {
      auto trial = current;
      trial[id] = o;
      auto p = run(trial);
      if (cheaper(p->total, best_plan->total)) {
        current = trial;
        best_plan = p;
      }
    }
  }
  return best_plan;
}

}  // namespace ordsel
