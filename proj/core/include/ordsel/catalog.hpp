#pragma once

// Relations, indices, statistics, query trees, and attribute equivalence
// classes.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ordsel/cost.hpp"
#include "ordsel/order.hpp"

namespace ordsel {

struct IndexEntry {
  std::string name;
  SortOrder key;          // o(I)
  AttributeSet include;   // extra columns stored in the leaves

  AttributeSet columns() const;
};

struct RelationEntry {
  std::string name;
  std::vector<std::string> columns;
  double tuples = 0.0;
  double blocks = 0.0;
  double avg_tuple_bytes = 0.0;
  SortOrder clustering;  // o_R, may be empty
  std::vector<IndexEntry> indices;
  std::map<AttributeSet, double> distinct;  // optional D(R, s) entries

  AttributeSet schema() const;
  /// Throws Error{Validation}; `where` prefixes the reported path.
  void validate(const std::string& where) const;
};

struct Catalog {
  CostParams params;
  std::vector<RelationEntry> relations;

  const RelationEntry* find(const std::string& name) const;
  const RelationEntry& at(const std::string& name) const;
  void validate() const;
};

/// Union-find over attributes, driven by equality join predicates. The
/// representative of a class is its least member.
class EquivalenceClasses {
 public:
  void add(const Attribute& a);
  void unite(const Attribute& a, const Attribute& b);

  /// H(a). Attributes never added are their own representative.
  Attribute representative(const Attribute& a) const;
  bool same_class(const Attribute& a, const Attribute& b) const;

  /// Maps every attribute through H, dropping attributes whose representative
  /// already occurred earlier in the order.
  SortOrder rewrite(const SortOrder& o) const;
  AttributeSet rewrite(const AttributeSet& s) const;

  /// All classes (including singletons), ordered by representative.
  std::vector<AttributeSet> classes() const;

 private:
  std::size_t index_of(const Attribute& a) const;
  std::size_t find_root(std::size_t i) const;

  std::map<Attribute, std::size_t> index_;
  std::vector<Attribute> members_;
  mutable std::vector<std::size_t> parent_;
};

enum class NodeKind { Relation, Select, Project, Join, GroupBy };

std::string_view to_string(NodeKind kind);

struct Aggregate {
  std::string function;
  std::optional<Attribute> argument;

  Attribute output() const;
};

using NodeId = std::size_t;

struct ExprNode {
  NodeKind kind = NodeKind::Relation;
  std::vector<NodeId> children;

  std::string relation;                                   // Relation
  std::string predicate;                                  // Select
  double selectivity = 1.0;                               // Select
  std::vector<Attribute> predicate_attrs;                 // Select
  std::vector<Attribute> attrs;                           // Project L, GroupBy L
  std::vector<std::pair<Attribute, Attribute>> join_on;   // Join: (left, right)
  std::vector<Aggregate> aggregates;                      // GroupBy

  AttributeSet schema;
  double tuples = 0.0;
  double blocks = 0.0;
  double tuple_bytes = 0.0;
  std::map<Attribute, double> attr_distinct;  // per-attribute D, capped at tuples

  InputStats stats() const { return {tuples, blocks}; }
};

/// A validated query: expression tree (nodes in post-order, root last),
/// required output order, and derived statistics.
class Query {
 public:
  /// Builds and validates against `catalog`; computes schemas, statistics and
  /// equivalence classes. `output` lists additionally referenced columns.
  Query(std::vector<ExprNode> nodes, NodeId root, SortOrder order_by, std::vector<Attribute> output,
        const Catalog& catalog);

  const std::vector<ExprNode>& nodes() const noexcept { return nodes_; }
  const ExprNode& node(NodeId id) const { return nodes_.at(id); }
  NodeId root() const noexcept { return root_; }
  const SortOrder& order_by() const noexcept { return order_by_; }
  const std::vector<Attribute>& output() const noexcept { return output_; }
  const EquivalenceClasses& equivalences() const noexcept { return eq_; }
  const Catalog& catalog() const noexcept { return catalog_; }

  /// Every catalog attribute the query mentions anywhere.
  const AttributeSet& referenced() const noexcept { return referenced_; }

  /// schema(e) mapped through H.
  AttributeSet rep_schema(NodeId id) const;

  /// D(e, s). Attributes of `s` may be representatives; each is resolved to
  /// the schema attributes of its class. Uses a catalog entry for the exact
  /// set on base relations, otherwise the product of per-attribute counts
  /// capped at N(e). The empty set has one distinct value.
  double distinct(NodeId id, const AttributeSet& s) const;

  /// Parent of each node; the root maps to itself.
  NodeId parent(NodeId id) const { return parents_.at(id); }

 private:
  void validate_and_derive();

  std::vector<ExprNode> nodes_;
  NodeId root_;
  SortOrder order_by_;
  std::vector<Attribute> output_;
  Catalog catalog_;
  EquivalenceClasses eq_;
  AttributeSet referenced_;
  std::vector<NodeId> parents_;
};

/// Union-find over all equality predicates of the tree rooted at `root`.
EquivalenceClasses build_equivalence_classes(const std::vector<ExprNode>& nodes, NodeId root);

/// L_v = { H(a) : a appears in v's join predicates }.
AttributeSet representative_join_set(const ExprNode& join, const EquivalenceClasses& eq);

}  // namespace ordsel
