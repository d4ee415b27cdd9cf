#include "ordsel/prefix_solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

#include "ordsel/error.hpp"

namespace ordsel {

BenefitFn identity_benefit() {
  return [](std::size_t n) { return static_cast<double>(n); };
}

double PrefixInstance::edge_benefit(std::size_t edge, std::size_t shared) const {
  if (shared == 0) return 0.0;
  return edge_f.empty() ? f(shared) : edge_f.at(edge)(shared);
}

void PrefixInstance::validate() const {
  const std::size_t n = sets.size();
  if (!edge_f.empty() && edge_f.size() != edges.size()) {
    throw Error(ErrorCode::Validation, "per-edge benefit list does not match the edge list", "edge_f");
  }
  if (n == 0) {
    if (!edges.empty()) throw Error(ErrorCode::Validation, "edges without vertices", "edges");
    return;
  }
  if (edges.size() != n - 1) throw Error(ErrorCode::Validation, "a tree on n vertices has n-1 edges", "edges");

  std::vector<std::size_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t e = 0; e < edges.size(); ++e) {
    auto [u, v] = edges[e];
    if (u >= n || v >= n || u == v) {
      throw Error(ErrorCode::Validation, "edge endpoint out of range", "edges/" + std::to_string(e));
    }
    auto ru = find(u), rv = find(v);
    if (ru == rv) throw Error(ErrorCode::Validation, "edges contain a cycle", "edges/" + std::to_string(e));
    parent[ru] = rv;
  }

  std::size_t max_len = 0;
  for (const auto& s : sets) max_len = std::max(max_len, s.size());
  auto check = [&](const BenefitFn& fn, const std::string& where) {
    if (fn(0) != 0.0) throw Error(ErrorCode::Validation, "benefit function must be zero at 0", where);
    double prev = 0.0;
    for (std::size_t len = 1; len <= max_len; ++len) {
      const double v = fn(len);
      if (!(v >= prev) || v < 0.0) throw Error(ErrorCode::Validation, "benefit function must be non-decreasing", where);
      prev = v;
    }
  };
  if (edge_f.empty()) {
    check(f, "f");
  } else {
    for (std::size_t e = 0; e < edge_f.size(); ++e) check(edge_f[e], "edge_f/" + std::to_string(e));
  }
}

double benefit(const PrefixInstance& inst, const std::vector<SortOrder>& perms) {
  if (perms.size() != inst.sets.size()) {
    throw Error(ErrorCode::InvalidAssignment, "assignment does not cover every vertex");
  }
  for (std::size_t i = 0; i < perms.size(); ++i) {
    if (perms[i].size() != inst.sets[i].size() || perms[i].attr_set() != inst.sets[i]) {
      throw Error(ErrorCode::InvalidAssignment,
                  "permutation " + perms[i].str() + " does not match the attribute set of vertex " + std::to_string(i),
                  "perms/" + std::to_string(i));
    }
  }
  double total = 0.0;
  for (std::size_t e = 0; e < inst.edges.size(); ++e) {
    auto [u, v] = inst.edges[e];
    total += inst.edge_benefit(e, lcp(perms[u], perms[v]).size());
  }
  return total;
}

namespace {

AttributeSet intersect(const AttributeSet& a, const AttributeSet& b) {
  AttributeSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
  return out;
}

/// Path DP over `sets` (vertex k adjacent to k+1). `split_benefit(k, len)` is
/// the benefit of a shared prefix of length `len` on edge (k, k+1).
std::vector<SortOrder> order_path(const std::vector<AttributeSet>& sets,
                                  const std::function<double(std::size_t, std::size_t)>& split_benefit) {
  const std::size_t n = sets.size();
  std::vector<SortOrder> perms(n);
  if (n == 0) return perms;

  // Segment (i, j) memo: common attributes, best benefit, best split point.
  std::vector<std::vector<AttributeSet>> common(n, std::vector<AttributeSet>(n));
  std::vector<std::vector<double>> best(n, std::vector<double>(n, 0.0));
  std::vector<std::vector<std::size_t>> split(n, std::vector<std::size_t>(n, 0));

  for (std::size_t i = 0; i < n; ++i) common[i][i] = sets[i];
  for (std::size_t len = 1; len < n; ++len) {
    for (std::size_t i = 0; i + len < n; ++i) {
      const std::size_t j = i + len;
      common[i][j] = intersect(common[i][j - 1], sets[j]);
      const std::size_t c = common[i][j].size();
      double top = -1.0;
      for (std::size_t k = i; k < j; ++k) {
        const double ben = best[i][k] + best[k + 1][j] + split_benefit(k, c);
        if (ben > top) {
          top = ben;
          split[i][j] = k;
        }
      }
      best[i][j] = top;
    }
  }

  // Prefix every vertex of a segment with the segment's common attributes
  // not already placed by an enclosing segment, then recurse on the split.
  std::vector<std::vector<Attribute>> built(n);
  std::function<void(std::size_t, std::size_t)> make = [&](std::size_t i, std::size_t j) {
    AttributeSet fresh = common[i][j];
    for (const auto& a : built[i]) fresh.erase(a);
    for (std::size_t x = i; x <= j; ++x) built[x].insert(built[x].end(), fresh.begin(), fresh.end());
    if (i == j) return;
    const std::size_t k = split[i][j];
    make(i, k);
    make(k + 1, j);
  };
  make(0, n - 1);
  for (std::size_t i = 0; i < n; ++i) perms[i] = SortOrder(std::move(built[i]));
  return perms;
}

struct RootedTree {
  std::vector<std::vector<std::size_t>> children;  // child vertices
  std::vector<std::vector<std::size_t>> child_edges;  // parallel edge indices
  std::vector<std::size_t> depth;
};

RootedTree root_tree(const PrefixInstance& inst, std::size_t root) {
  const std::size_t n = inst.sets.size();
  RootedTree t{std::vector<std::vector<std::size_t>>(n), std::vector<std::vector<std::size_t>>(n),
               std::vector<std::size_t>(n, 0)};
  if (n == 0) return t;
  if (root >= n) throw Error(ErrorCode::Validation, "root out of range", "root");
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(n);
  for (std::size_t e = 0; e < inst.edges.size(); ++e) {
    auto [u, v] = inst.edges[e];
    adj[u].emplace_back(v, e);
    adj[v].emplace_back(u, e);
  }
  std::vector<bool> seen(n, false);
  std::deque<std::size_t> queue{root};
  seen[root] = true;
  while (!queue.empty()) {
    const auto u = queue.front();
    queue.pop_front();
    for (auto [v, e] : adj[u]) {
      if (seen[v]) continue;
      seen[v] = true;
      t.depth[v] = t.depth[u] + 1;
      t.children[u].push_back(v);
      t.child_edges[u].push_back(e);
      queue.push_back(v);
    }
    if (t.children[u].size() > 2) {
      throw Error(ErrorCode::NotABinaryTree, "vertex " + std::to_string(u) + " has more than two children");
    }
  }
  return t;
}

}  // namespace

Assignment solve_path(const PrefixInstance& inst) {
  inst.validate();
  const std::size_t n = inst.sets.size();
  // edge index for (k, k+1)
  std::vector<std::size_t> edge_at(n > 0 ? n - 1 : 0, inst.edges.size());
  for (std::size_t e = 0; e < inst.edges.size(); ++e) {
    auto [u, v] = inst.edges[e];
    const auto lo = std::min(u, v), hi = std::max(u, v);
    if (hi != lo + 1 || edge_at[lo] != inst.edges.size()) {
      throw Error(ErrorCode::NotAPath, "vertices do not form a path in index order", "edges/" + std::to_string(e));
    }
    edge_at[lo] = e;
  }
  Assignment out;
  out.perms = order_path(inst.sets, [&](std::size_t k, std::size_t len) { return inst.edge_benefit(edge_at[k], len); });
  out.benefit = benefit(inst, out.perms);
  return out;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> parity_edge_classes(const PrefixInstance& inst,
                                                                                    std::size_t root) {
  inst.validate();
  const auto tree = root_tree(inst, root);
  std::pair<std::vector<std::size_t>, std::vector<std::size_t>> out;
  for (std::size_t u = 0; u < inst.sets.size(); ++u) {
    auto& bucket = tree.depth[u] % 2 == 0 ? out.first : out.second;
    bucket.insert(bucket.end(), tree.child_edges[u].begin(), tree.child_edges[u].end());
  }
  std::sort(out.first.begin(), out.first.end());
  std::sort(out.second.begin(), out.second.end());
  return out;
}

Assignment solve_tree_half_approx(const PrefixInstance& inst, std::size_t root) {
  inst.validate();
  const std::size_t n = inst.sets.size();
  if (n == 0) return {};
  const auto tree = root_tree(inst, root);

  auto solve_class = [&](std::size_t parity) {
    std::vector<SortOrder> perms(n);
    std::vector<bool> covered(n, false);
    for (std::size_t u = 0; u < n; ++u) {
      if (tree.depth[u] % 2 != parity || tree.children[u].empty()) continue;
      // child - parent - child cherry, or parent - child
      std::vector<std::size_t> path;
      std::vector<std::size_t> path_edges;
      const auto& ch = tree.children[u];
      const auto& ce = tree.child_edges[u];
      if (ch.size() == 2) {
        path = {ch[0], u, ch[1]};
        path_edges = {ce[0], ce[1]};
      } else {
        path = {u, ch[0]};
        path_edges = {ce[0]};
      }
      std::vector<AttributeSet> sets;
      for (auto v : path) sets.push_back(inst.sets[v]);
      auto solved = order_path(sets, [&](std::size_t k, std::size_t len) { return inst.edge_benefit(path_edges[k], len); });
      for (std::size_t x = 0; x < path.size(); ++x) {
        perms[path[x]] = std::move(solved[x]);
        covered[path[x]] = true;
      }
    }
    for (std::size_t u = 0; u < n; ++u) {
      if (!covered[u]) perms[u] = canonical_permutation(inst.sets[u]);
    }
    Assignment a;
    a.benefit = benefit(inst, perms);
    a.perms = std::move(perms);
    return a;
  };

  auto even = solve_class(0);
  auto odd = solve_class(1);
  return odd.benefit > even.benefit ? odd : even;
}

Assignment brute_force(const PrefixInstance& inst, double limit) {
  inst.validate();
  const std::size_t n = inst.sets.size();
  double space = 1.0;
  for (const auto& s : inst.sets) space *= std::tgamma(static_cast<double>(s.size()) + 1.0);
  if (space > limit) {
    throw Error(ErrorCode::TooLarge, "brute force would enumerate " + std::to_string(space) + " assignments");
  }
  if (n == 0) return {};

  std::vector<std::vector<SortOrder>> options(n);
  for (std::size_t i = 0; i < n; ++i) options[i] = all_permutations(inst.sets[i]);

  // Benefit tables per edge, indexed [option of u][option of v].
  std::vector<std::vector<std::vector<double>>> table(inst.edges.size());
  for (std::size_t e = 0; e < inst.edges.size(); ++e) {
    auto [u, v] = inst.edges[e];
    table[e].assign(options[u].size(), std::vector<double>(options[v].size()));
    for (std::size_t a = 0; a < options[u].size(); ++a) {
      for (std::size_t b = 0; b < options[v].size(); ++b) {
        table[e][a][b] = inst.edge_benefit(e, lcp(options[u][a], options[v][b]).size());
      }
    }
  }

  std::vector<std::size_t> pick(n, 0), best_pick(n, 0);
  double best = -1.0;
  while (true) {
    double total = 0.0;
    for (std::size_t e = 0; e < inst.edges.size(); ++e) {
      total += table[e][pick[inst.edges[e].first]][pick[inst.edges[e].second]];
    }
    if (total > best) {
      best = total;
      best_pick = pick;
    }
    // odometer, last vertex fastest: visits tuples in lexicographic order
    std::size_t i = n;
    while (i > 0) {
      --i;
      if (++pick[i] < options[i].size()) break;
      pick[i] = 0;
      if (i == 0) {
        i = n + 1;
        break;
      }
    }
    if (i == n + 1) break;
  }

  Assignment out;
  for (std::size_t i = 0; i < n; ++i) out.perms.push_back(options[i][best_pick[i]]);
  out.benefit = benefit(inst, out.perms);
  return out;
}

}  // namespace ordsel
