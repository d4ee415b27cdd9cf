#include "ordsel/order.hpp"

#include <algorithm>
#include <ostream>

#include "ordsel/error.hpp"

namespace ordsel {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateAttribute: return "DuplicateAttribute";
    case ErrorCode::NotAPrefix: return "NotAPrefix";
    case ErrorCode::Validation: return "Validation";
    case ErrorCode::Io: return "Io";
    case ErrorCode::InvalidAssignment: return "InvalidAssignment";
    case ErrorCode::NotAPath: return "NotAPath";
    case ErrorCode::NotABinaryTree: return "NotABinaryTree";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::InputNotSorted: return "InputNotSorted";
  }
  return "Unknown";
}

Attribute::Attribute(std::string q, std::string c) : qualifier(std::move(q)), column(std::move(c)) {
  if (column.empty()) {
    throw Error(ErrorCode::Validation, "attribute has an empty column name", qualifier);
  }
}

Attribute Attribute::parse(std::string_view text) {
  auto dot = text.find('.');
  if (dot == std::string_view::npos) return Attribute({}, std::string(text));
  return Attribute(std::string(text.substr(0, dot)), std::string(text.substr(dot + 1)));
}

std::string Attribute::str() const {
  return qualifier.empty() ? column : qualifier + "." + column;
}

std::ostream& operator<<(std::ostream& os, const Attribute& a) { return os << a.str(); }

SortOrder::SortOrder(std::vector<Attribute> attrs) : attrs_(std::move(attrs)) {
  AttributeSet seen;
  for (const auto& a : attrs_) {
    if (!seen.insert(a).second) {
      throw Error(ErrorCode::DuplicateAttribute, "attribute " + a.str() + " appears twice in a sort order");
    }
  }
}

SortOrder::SortOrder(std::initializer_list<Attribute> attrs) : SortOrder(std::vector<Attribute>(attrs)) {}

SortOrder SortOrder::parse(const std::vector<std::string>& names) {
  std::vector<Attribute> attrs;
  attrs.reserve(names.size());
  for (const auto& n : names) attrs.push_back(Attribute::parse(n));
  return SortOrder(std::move(attrs));
}

SortOrder SortOrder::prefix(std::size_t n) const {
  n = std::min(n, attrs_.size());
  return SortOrder(Unchecked{}, std::vector<Attribute>(attrs_.begin(), attrs_.begin() + static_cast<std::ptrdiff_t>(n)));
}

AttributeSet SortOrder::attr_set() const { return AttributeSet(attrs_.begin(), attrs_.end()); }

bool SortOrder::contains(const Attribute& a) const {
  return std::find(attrs_.begin(), attrs_.end(), a) != attrs_.end();
}

std::string SortOrder::str() const {
  std::string out = "(";
  for (std::size_t i = 0; i < attrs_.size(); ++i) {
    if (i) out += ",";
    out += attrs_[i].str();
  }
  return out + ")";
}

std::vector<std::string> SortOrder::names() const {
  std::vector<std::string> out;
  out.reserve(attrs_.size());
  for (const auto& a : attrs_) out.push_back(a.str());
  return out;
}

std::ostream& operator<<(std::ostream& os, const SortOrder& o) { return os << o.str(); }

bool subsumes(const SortOrder& longer, const SortOrder& shorter) {
  if (shorter.size() > longer.size()) return false;
  return std::equal(shorter.begin(), shorter.end(), longer.begin());
}

SortOrder lcp(const SortOrder& o1, const SortOrder& o2) {
  auto [it, _] = std::mismatch(o1.begin(), o1.end(), o2.begin(), o2.end());
  return o1.prefix(static_cast<std::size_t>(it - o1.begin()));
}

SortOrder lcp_in_set(const SortOrder& o, const AttributeSet& s) {
  auto it = std::find_if(o.begin(), o.end(), [&](const Attribute& a) { return !s.contains(a); });
  return o.prefix(static_cast<std::size_t>(it - o.begin()));
}

SortOrder concat(const SortOrder& o1, const SortOrder& o2) {
  std::vector<Attribute> attrs = o1.attrs();
  for (const auto& a : o2) {
    if (o1.contains(a)) {
      throw Error(ErrorCode::DuplicateAttribute, "cannot concatenate " + o1.str() + " and " + o2.str() +
                                                     ": " + a.str() + " occurs in both");
    }
    attrs.push_back(a);
  }
  return SortOrder(SortOrder::Unchecked{}, std::move(attrs));
}

SortOrder subtract(const SortOrder& o1, const SortOrder& o2) {
  if (!subsumes(o1, o2)) {
    throw Error(ErrorCode::NotAPrefix, o2.str() + " is not a prefix of " + o1.str());
  }
  return SortOrder(SortOrder::Unchecked{},
                   std::vector<Attribute>(o1.begin() + static_cast<std::ptrdiff_t>(o2.size()), o1.end()));
}

SortOrder canonical_permutation(const AttributeSet& s) {
  return SortOrder(SortOrder::Unchecked{}, std::vector<Attribute>(s.begin(), s.end()));
}

SortOrder extend_canonically(const SortOrder& o, const AttributeSet& s) {
  AttributeSet rest = s;
  for (const auto& a : o) rest.erase(a);
  return concat(o, canonical_permutation(rest));
}

std::vector<SortOrder> all_permutations(const AttributeSet& s) {
  std::vector<Attribute> attrs(s.begin(), s.end());
  std::vector<SortOrder> out;
  do {
    out.emplace_back(attrs);
  } while (std::next_permutation(attrs.begin(), attrs.end()));
  return out;
}

namespace {

void extend_orders(std::vector<Attribute>& current, const std::vector<Attribute>& pool, std::vector<bool>& used,
                   std::size_t length, std::vector<SortOrder>& out) {
  if (current.size() == length) {
    out.emplace_back(current);
    return;
  }
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (used[i]) continue;
    used[i] = true;
    current.push_back(pool[i]);
    extend_orders(current, pool, used, length, out);
    current.pop_back();
    used[i] = false;
  }
}

}  // namespace

std::vector<SortOrder> all_orders(const AttributeSet& s) {
  std::vector<Attribute> pool(s.begin(), s.end());
  std::vector<SortOrder> out;
  for (std::size_t len = 1; len <= pool.size(); ++len) {
    std::vector<Attribute> current;
    std::vector<bool> used(pool.size(), false);
    extend_orders(current, pool, used, len, out);
  }
  return out;
}

}  // namespace ordsel
