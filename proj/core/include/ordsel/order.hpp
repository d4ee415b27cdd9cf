#pragma once

// Sort orders and the prefix algebra over them.

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <iosfwd>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace ordsel {

/// A column, optionally qualified by its relation. Equality and ordering are
/// on the exact (qualifier, column) pair; an empty qualifier sorts first.
struct Attribute {
  std::string qualifier;
  std::string column;

  Attribute() = default;
  Attribute(std::string q, std::string c);

  /// Parses "REL.col" or "col". The qualifier ends at the first '.'.
  static Attribute parse(std::string_view text);

  std::string str() const;

  friend auto operator<=>(const Attribute&, const Attribute&) = default;
  friend bool operator==(const Attribute&, const Attribute&) = default;
};

std::ostream& operator<<(std::ostream& os, const Attribute& a);

using AttributeSet = std::set<Attribute>;

/// An ordered sequence of distinct attributes. The empty order is epsilon.
class SortOrder {
 public:
  SortOrder() = default;
  /// Throws Error{DuplicateAttribute} if an attribute repeats.
  explicit SortOrder(std::vector<Attribute> attrs);
  SortOrder(std::initializer_list<Attribute> attrs);

  /// Builds from "REL.col"/"col" strings.
  static SortOrder parse(const std::vector<std::string>& names);

  const std::vector<Attribute>& attrs() const noexcept { return attrs_; }
  std::size_t size() const noexcept { return attrs_.size(); }
  bool empty() const noexcept { return attrs_.empty(); }
  const Attribute& operator[](std::size_t i) const { return attrs_[i]; }
  auto begin() const noexcept { return attrs_.begin(); }
  auto end() const noexcept { return attrs_.end(); }

  /// First n attributes (n clamped to size()).
  SortOrder prefix(std::size_t n) const;
  AttributeSet attr_set() const;
  bool contains(const Attribute& a) const;

  /// "(a,b,c)"; epsilon prints as "()".
  std::string str() const;
  std::vector<std::string> names() const;

  friend auto operator<=>(const SortOrder&, const SortOrder&) = default;
  friend bool operator==(const SortOrder&, const SortOrder&) = default;

 private:
  struct Unchecked {};
  SortOrder(Unchecked, std::vector<Attribute> attrs) : attrs_(std::move(attrs)) {}
  friend SortOrder concat(const SortOrder&, const SortOrder&);
  friend SortOrder subtract(const SortOrder&, const SortOrder&);
  friend SortOrder canonical_permutation(const AttributeSet&);

  std::vector<Attribute> attrs_;
};

std::ostream& operator<<(std::ostream& os, const SortOrder& o);

/// True iff `shorter` is a prefix of `longer`.
bool subsumes(const SortOrder& longer, const SortOrder& shorter);

/// Longest common prefix.
SortOrder lcp(const SortOrder& o1, const SortOrder& o2);

/// Longest prefix of `o` whose attributes all belong to `s`.
SortOrder lcp_in_set(const SortOrder& o, const AttributeSet& s);

/// o1 followed by o2. Throws Error{DuplicateAttribute} when they overlap.
SortOrder concat(const SortOrder& o1, const SortOrder& o2);

/// The suffix o' with concat(o2, o') == o1. Throws Error{NotAPrefix} unless
/// subsumes(o1, o2).
SortOrder subtract(const SortOrder& o1, const SortOrder& o2);

/// Deterministic permutation of `s`: ascending (qualifier, column).
SortOrder canonical_permutation(const AttributeSet& s);

/// o + <s - attrs(o)>: extends `o` with the canonical permutation of the
/// remaining attributes of `s`. Requires attrs(o) to be a subset of `s`.
SortOrder extend_canonically(const SortOrder& o, const AttributeSet& s);

/// Every permutation of `s`, in lexicographic order of the sequences.
std::vector<SortOrder> all_permutations(const AttributeSet& s);

/// Every non-empty sequence of distinct attributes drawn from `s`, ordered
/// by length then lexicographically.
std::vector<SortOrder> all_orders(const AttributeSet& s);

}  // namespace ordsel
