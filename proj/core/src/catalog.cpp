#include "ordsel/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "ordsel/error.hpp"

namespace ordsel {

namespace {

[[noreturn]] void invalid(const std::string& message, const std::string& path) {
  throw Error(ErrorCode::Validation, message, path);
}

double block_count(double tuples, double tuple_bytes, std::uint64_t block_size) {
  if (tuples <= 0.0) return 0.0;
  return std::max(1.0, std::ceil(tuples * tuple_bytes / static_cast<double>(block_size)));
}

}  // namespace

AttributeSet IndexEntry::columns() const {
  AttributeSet out = key.attr_set();
  out.insert(include.begin(), include.end());
  return out;
}

AttributeSet RelationEntry::schema() const {
  AttributeSet out;
  for (const auto& c : columns) out.emplace(name, c);
  return out;
}

void RelationEntry::validate(const std::string& where) const {
  if (name.empty()) invalid("relation has an empty name", where + "/name");
  if (columns.empty()) invalid("relation " + name + " has no columns", where + "/columns");
  const AttributeSet cols = schema();
  if (cols.size() != columns.size()) invalid("relation " + name + " repeats a column", where + "/columns");
  if (tuples < 0.0) invalid("tuple count must be non-negative", where + "/tuples");
  if (tuples > 0.0 && blocks < 1.0) {
    invalid("relation " + name + " has tuples but fewer than one block", where + "/blocks");
  }
  if (avg_tuple_bytes < 0.0) invalid("avg_tuple_bytes must be non-negative", where + "/avg_tuple_bytes");
  for (const auto& a : clustering) {
    if (!cols.contains(a)) invalid("clustering attribute " + a.str() + " not in schema", where + "/clustering");
  }
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto path = where + "/indices/" + std::to_string(i);
    if (indices[i].key.empty()) invalid("index key must not be empty", path + "/key");
    for (const auto& a : indices[i].columns()) {
      if (!cols.contains(a)) invalid("index attribute " + a.str() + " not in schema", path);
    }
  }
  for (const auto& [set, d] : distinct) {
    for (const auto& a : set) {
      if (!cols.contains(a)) invalid("distinct-count attribute " + a.str() + " not in schema", where + "/distinct");
    }
    if (set.empty() || d < 1.0) invalid("distinct counts must be >= 1 over a non-empty set", where + "/distinct");
  }
}

const RelationEntry* Catalog::find(const std::string& name) const {
  auto it = std::find_if(relations.begin(), relations.end(), [&](const auto& r) { return r.name == name; });
  return it == relations.end() ? nullptr : &*it;
}

const RelationEntry& Catalog::at(const std::string& name) const {
  if (const auto* r = find(name)) return *r;
  invalid("unknown relation " + name, "relations");
}

void Catalog::validate() const {
  params.validate();
  std::set<std::string> names;
  for (std::size_t i = 0; i < relations.size(); ++i) {
    const auto where = "/relations/" + std::to_string(i);
    relations[i].validate(where);
    if (!names.insert(relations[i].name).second) invalid("duplicate relation " + relations[i].name, where + "/name");
  }
}

// ---------------------------------------------------------------------------

void EquivalenceClasses::add(const Attribute& a) {
  if (index_.contains(a)) return;
  index_.emplace(a, members_.size());
  parent_.push_back(members_.size());
  members_.push_back(a);
}

std::size_t EquivalenceClasses::find_root(std::size_t i) const {
  while (parent_[i] != i) {
    parent_[i] = parent_[parent_[i]];
    i = parent_[i];
  }
  return i;
}

std::size_t EquivalenceClasses::index_of(const Attribute& a) const {
  auto it = index_.find(a);
  return it == index_.end() ? members_.size() : it->second;
}

void EquivalenceClasses::unite(const Attribute& a, const Attribute& b) {
  add(a);
  add(b);
  auto ra = find_root(index_of(a));
  auto rb = find_root(index_of(b));
  if (ra == rb) return;
  // The root is always the least member, so H is a root lookup.
  if (members_[rb] < members_[ra]) std::swap(ra, rb);
  parent_[rb] = ra;
}

Attribute EquivalenceClasses::representative(const Attribute& a) const {
  const auto i = index_of(a);
  if (i == members_.size()) return a;
  return members_[find_root(i)];
}

bool EquivalenceClasses::same_class(const Attribute& a, const Attribute& b) const {
  return representative(a) == representative(b);
}

SortOrder EquivalenceClasses::rewrite(const SortOrder& o) const {
  std::vector<Attribute> out;
  AttributeSet seen;
  for (const auto& a : o) {
    auto h = representative(a);
    if (seen.insert(h).second) out.push_back(std::move(h));
  }
  return SortOrder(std::move(out));
}

AttributeSet EquivalenceClasses::rewrite(const AttributeSet& s) const {
  AttributeSet out;
  for (const auto& a : s) out.insert(representative(a));
  return out;
}

std::vector<AttributeSet> EquivalenceClasses::classes() const {
  std::map<Attribute, AttributeSet> by_rep;
  for (std::size_t i = 0; i < members_.size(); ++i) by_rep[members_[find_root(i)]].insert(members_[i]);
  std::vector<AttributeSet> out;
  for (auto& [_, cls] : by_rep) out.push_back(std::move(cls));
  return out;
}

EquivalenceClasses build_equivalence_classes(const std::vector<ExprNode>& nodes, NodeId root) {
  EquivalenceClasses eq;
  std::function<void(NodeId)> visit = [&](NodeId id) {
    const auto& n = nodes.at(id);
    for (const auto& a : n.schema) eq.add(a);
    for (const auto& [l, r] : n.join_on) eq.unite(l, r);
    for (auto c : n.children) visit(c);
  };
  visit(root);
  return eq;
}

AttributeSet representative_join_set(const ExprNode& join, const EquivalenceClasses& eq) {
  AttributeSet out;
  for (const auto& [l, r] : join.join_on) {
    out.insert(eq.representative(l));
    out.insert(eq.representative(r));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Relation: return "relation";
    case NodeKind::Select: return "select";
    case NodeKind::Project: return "project";
    case NodeKind::Join: return "join";
    case NodeKind::GroupBy: return "group_by";
  }
  return "unknown";
}

Attribute Aggregate::output() const {
  return Attribute({}, function + "(" + (argument ? argument->str() : std::string("*")) + ")");
}

Query::Query(std::vector<ExprNode> nodes, NodeId root, SortOrder order_by, std::vector<Attribute> output,
             const Catalog& catalog)
    : nodes_(std::move(nodes)),
      root_(root),
      order_by_(std::move(order_by)),
      output_(std::move(output)),
      catalog_(catalog) {
  validate_and_derive();
}

void Query::validate_and_derive() {
  if (root_ >= nodes_.size()) invalid("query root out of range", "/tree");
  parents_.assign(nodes_.size(), nodes_.size());
  parents_[root_] = root_;
  std::set<std::string> used_relations;
  const auto block_size = catalog_.params.block_size;

  std::function<void(NodeId, const std::string&)> derive = [&](NodeId id, const std::string& path) {
    auto& n = nodes_[id];
    for (auto c : n.children) {
      if (c >= nodes_.size() || parents_[c] != nodes_.size() || c == root_) {
        invalid("expression is not a tree", path);
      }
      parents_[c] = id;
    }
    const std::size_t expected_children = n.kind == NodeKind::Relation ? 0 : n.kind == NodeKind::Join ? 2 : 1;
    if (n.children.size() != expected_children) invalid("wrong number of inputs", path);

    for (std::size_t i = 0; i < n.children.size(); ++i) {
      derive(n.children[i], path + "/" + (n.kind == NodeKind::Join ? (i == 0 ? "left" : "right") : "input"));
    }

    auto require_in = [&](const Attribute& a, const AttributeSet& schema, const std::string& where) {
      if (!schema.contains(a)) invalid("unknown column " + a.str(), where);
    };

    switch (n.kind) {
      case NodeKind::Relation: {
        const auto* rel = catalog_.find(n.relation);
        if (!rel) invalid("unknown relation " + n.relation, path + "/relation");
        if (!used_relations.insert(n.relation).second) {
          invalid("relation " + n.relation + " used twice", path + "/relation");
        }
        n.schema = rel->schema();
        break;
      }
      case NodeKind::Select: {
        const auto& c = nodes_[n.children[0]];
        if (n.selectivity < 0.0 || n.selectivity > 1.0) invalid("selectivity outside [0,1]", path + "/selectivity");
        for (const auto& a : n.predicate_attrs) require_in(a, c.schema, path + "/attrs");
        n.schema = c.schema;
        break;
      }
      case NodeKind::Project:
      case NodeKind::GroupBy: {
        const auto& c = nodes_[n.children[0]];
        if (n.attrs.empty()) invalid("attribute list must not be empty", path + "/attrs");
        AttributeSet list;
        for (const auto& a : n.attrs) {
          require_in(a, c.schema, path + "/attrs");
          if (!list.insert(a).second) invalid("attribute " + a.str() + " listed twice", path + "/attrs");
        }
        for (const auto& agg : n.aggregates) {
          if (agg.argument) require_in(*agg.argument, c.schema, path + "/aggregates");
          list.insert(agg.output());
        }
        n.schema = list;
        break;
      }
      case NodeKind::Join: {
        const auto& l = nodes_[n.children[0]];
        const auto& r = nodes_[n.children[1]];
        if (n.join_on.empty()) invalid("join without predicates (cross product) is not supported", path + "/on");
        for (auto& [a, b] : n.join_on) {
          if (!l.schema.contains(a) && l.schema.contains(b) && r.schema.contains(a)) std::swap(a, b);
          require_in(a, l.schema, path + "/on");
          require_in(b, r.schema, path + "/on");
        }
        n.schema = l.schema;
        n.schema.insert(r.schema.begin(), r.schema.end());
        break;
      }
    }
  };
  derive(root_, "/tree");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (parents_[i] == nodes_.size()) invalid("expression node not reachable from the root", "/tree");
  }

  eq_ = build_equivalence_classes(nodes_, root_);

  std::function<void(NodeId)> estimate = [&](NodeId id) {
    auto& n = nodes_[id];
    for (auto c : n.children) estimate(c);
    n.attr_distinct.clear();
    switch (n.kind) {
      case NodeKind::Relation: {
        const auto& rel = catalog_.at(n.relation);
        n.tuples = rel.tuples;
        n.blocks = rel.blocks;
        n.tuple_bytes = rel.avg_tuple_bytes;
        for (const auto& a : n.schema) {
          auto it = rel.distinct.find(AttributeSet{a});
          n.attr_distinct[a] = std::min(it == rel.distinct.end() ? n.tuples : it->second, n.tuples);
        }
        return;
      }
      case NodeKind::Select:
      case NodeKind::Project: {
        const auto& c = nodes_[n.children[0]];
        if (n.kind == NodeKind::Select) {
          n.tuples = std::ceil(c.tuples * n.selectivity);
          n.tuple_bytes = c.tuple_bytes;
        } else {
          n.tuples = c.tuples;
          n.tuple_bytes = c.tuple_bytes * static_cast<double>(n.schema.size()) / static_cast<double>(c.schema.size());
        }
        n.blocks = block_count(n.tuples, n.tuple_bytes, block_size);
        for (const auto& a : n.schema) n.attr_distinct[a] = std::min(c.attr_distinct.at(a), n.tuples);
        return;
      }
      case NodeKind::GroupBy: {
        const auto& c = nodes_[n.children[0]];
        n.tuples = distinct(n.children[0], AttributeSet(n.attrs.begin(), n.attrs.end()));
        n.tuple_bytes = c.tuple_bytes * static_cast<double>(n.schema.size()) / static_cast<double>(c.schema.size());
        n.blocks = block_count(n.tuples, n.tuple_bytes, block_size);
        for (const auto& a : n.attrs) n.attr_distinct[a] = std::min(c.attr_distinct.at(a), n.tuples);
        for (const auto& agg : n.aggregates) n.attr_distinct[agg.output()] = n.tuples;
        return;
      }
      case NodeKind::Join: {
        const auto& l = nodes_[n.children[0]];
        const auto& r = nodes_[n.children[1]];
        // selectivity 1/max(D_l, D_r) per equated class
        std::map<Attribute, std::pair<double, double>> per_class;
        for (const auto& [a, b] : n.join_on) {
          const auto h = eq_.representative(a);
          auto [it, fresh] = per_class.try_emplace(h, l.attr_distinct.at(a), r.attr_distinct.at(b));
          if (!fresh) {
            it->second.first = std::min(it->second.first, l.attr_distinct.at(a));
            it->second.second = std::min(it->second.second, r.attr_distinct.at(b));
          }
        }
        double n_out = l.tuples * r.tuples;
        for (const auto& [_, d] : per_class) n_out /= std::max({d.first, d.second, 1.0});
        n.tuples = std::ceil(n_out);
        n.tuple_bytes = l.tuple_bytes + r.tuple_bytes;
        n.blocks = block_count(n.tuples, n.tuple_bytes, block_size);
        for (const auto& [a, d] : l.attr_distinct) n.attr_distinct[a] = std::min(d, n.tuples);
        for (const auto& [a, d] : r.attr_distinct) n.attr_distinct[a] = std::min(d, n.tuples);
        for (const auto& [a, b] : n.join_on) {
          const double d = std::min(n.attr_distinct[a], n.attr_distinct[b]);
          n.attr_distinct[a] = d;
          n.attr_distinct[b] = d;
        }
        return;
      }
    }
  };
  estimate(root_);

  auto reference = [&](const Attribute& a) {
    if (!a.qualifier.empty()) referenced_.insert(a);
  };
  for (const auto& n : nodes_) {
    for (const auto& a : n.predicate_attrs) reference(a);
    for (const auto& a : n.attrs) reference(a);
    for (const auto& [a, b] : n.join_on) {
      reference(a);
      reference(b);
    }
    for (const auto& agg : n.aggregates) {
      if (agg.argument) reference(*agg.argument);
    }
  }
  const auto& root_schema = nodes_[root_].schema;
  for (const auto& a : order_by_) {
    if (!root_schema.contains(a)) invalid("order-by column " + a.str() + " not in the query output", "/order_by");
    reference(a);
  }
  AttributeSet all_columns;
  for (const auto& n : nodes_) {
    if (n.kind == NodeKind::Relation) all_columns.insert(n.schema.begin(), n.schema.end());
  }
  for (const auto& a : output_) {
    if (!all_columns.contains(a)) invalid("unknown output column " + a.str(), "/output");
    reference(a);
  }
}

AttributeSet Query::rep_schema(NodeId id) const { return eq_.rewrite(node(id).schema); }

double Query::distinct(NodeId id, const AttributeSet& s) const {
  const auto& n = node(id);
  if (s.empty() || n.tuples <= 0.0) return 1.0;

  // Resolve each (possibly representative) attribute to the schema member of
  // its class with the fewest distinct values.
  AttributeSet resolved;
  double product = 1.0;
  for (const auto& x : s) {
    const auto h = eq_.representative(x);
    const Attribute* best = nullptr;
    for (const auto& [a, d] : n.attr_distinct) {
      if (eq_.representative(a) == h && (!best || d < n.attr_distinct.at(*best))) best = &a;
    }
    if (!best) throw Error(ErrorCode::Validation, "attribute " + x.str() + " not available at this node");
    resolved.insert(*best);
    product *= n.attr_distinct.at(*best);
  }
  if (n.kind == NodeKind::Relation) {
    const auto& rel = catalog_.at(n.relation);
    if (auto it = rel.distinct.find(resolved); it != rel.distinct.end()) return std::min(it->second, n.tuples);
  }
  return std::min(product, n.tuples);
}

}  // namespace ordsel
