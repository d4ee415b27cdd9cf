#include "ordsel/favorable.hpp"

#include <algorithm>
#include <functional>
#include <map>

namespace ordsel {

bool add_unique(FavorableOrderSet& set, const SortOrder& o) {
  if (std::find(set.begin(), set.end(), o) != set.end()) return false;
  set.push_back(o);
  return true;
}

bool index_covers(const IndexEntry& index, const RelationEntry& relation, const Query& query) {
  const auto stored = index.columns();
  for (const auto& a : query.referenced()) {
    if (a.qualifier == relation.name && !stored.contains(a)) return false;
  }
  return true;
}

namespace {

/// { o ^ s + <s - attrs(o ^ s)> : o in inputs, o ^ s non-empty }, or just
/// <s> when every o ^ s is empty.
void add_extensions(FavorableOrderSet& out, const FavorableOrderSet& inputs, const AttributeSet& s) {
  bool extended = false;
  for (const auto& o : inputs) {
    const auto head = lcp_in_set(o, s);
    if (head.empty()) continue;
    extended = true;
    add_unique(out, extend_canonically(head, s));
  }
  if (!extended) add_unique(out, canonical_permutation(s));
}

}  // namespace

std::vector<FavorableOrderSet> approximate_favorable_orders(const Query& query) {
  const auto& eq = query.equivalences();
  std::vector<FavorableOrderSet> afm(query.nodes().size());

  std::function<void(NodeId)> visit = [&](NodeId id) {
    const auto& n = query.node(id);
    for (auto c : n.children) visit(c);
    auto& out = afm[id];
    switch (n.kind) {
      case NodeKind::Relation: {
        const auto& rel = query.catalog().at(n.relation);
        if (!rel.clustering.empty()) add_unique(out, eq.rewrite(rel.clustering));
        for (const auto& idx : rel.indices) {
          if (index_covers(idx, rel, query)) add_unique(out, eq.rewrite(idx.key));
        }
        break;
      }
      case NodeKind::Select:
        out = afm[n.children[0]];
        break;
      case NodeKind::Project: {
        const auto keep = eq.rewrite(AttributeSet(n.attrs.begin(), n.attrs.end()));
        for (const auto& o : afm[n.children[0]]) {
          auto head = lcp_in_set(o, keep);
          if (!head.empty()) add_unique(out, head);
        }
        break;
      }
      case NodeKind::Join: {
        for (auto c : n.children) {
          for (const auto& o : afm[c]) add_unique(out, o);
        }
        const FavorableOrderSet inputs = out;
        add_extensions(out, inputs, representative_join_set(n, eq));
        break;
      }
      case NodeKind::GroupBy:
        add_extensions(out, afm[n.children[0]], eq.rewrite(AttributeSet(n.attrs.begin(), n.attrs.end())));
        break;
    }
  };
  visit(query.root());
  return afm;
}

std::vector<SortOrder> interesting_orders(const AttributeSet& attrs, const SortOrder& required,
                                          std::span<const FavorableOrderSet> inputs) {
  FavorableOrderSet collected;
  for (const auto& set : inputs) {
    for (const auto& o : set) add_unique(collected, lcp_in_set(o, attrs));
  }
  add_unique(collected, lcp_in_set(required, attrs));

  FavorableOrderSet kept;
  for (const auto& o : collected) {
    const bool dominated = std::any_of(collected.begin(), collected.end(), [&](const SortOrder& other) {
      return other.size() > o.size() && subsumes(other, o);
    });
    if (!dominated) kept.push_back(o);
  }

  std::vector<SortOrder> out;
  for (const auto& o : kept) add_unique(out, extend_canonically(o, attrs));
  return out;
}

FavorableOrderSet parameter_sort_orders(std::span<const FavorableOrderSet> inner,
                                        const std::vector<std::pair<Attribute, Attribute>>& correlations,
                                        const FavorableOrderSet& outer, const AttributeSet& bound) {
  // attribute -> least parameter it is equated to
  std::map<Attribute, Attribute> to_param;
  for (const auto& [attr, param] : correlations) {
    auto [it, fresh] = to_param.emplace(attr, param);
    if (!fresh && param < it->second) it->second = param;
  }

  FavorableOrderSet out;
  for (const auto& set : inner) {
    for (const auto& o : set) {
      std::vector<Attribute> mapped;
      AttributeSet seen;
      for (const auto& a : o) {
        auto it = to_param.find(a);
        if (it == to_param.end()) break;
        if (seen.insert(it->second).second) mapped.push_back(it->second);
      }
      if (!mapped.empty()) add_unique(out, SortOrder(std::move(mapped)));
    }
  }
  for (const auto& o : outer) {
    auto head = lcp_in_set(o, bound);
    if (!head.empty()) add_unique(out, head);
  }
  return out;
}

}  // namespace ordsel
