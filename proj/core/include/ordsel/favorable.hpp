#pragma once

// Favorable-order inference. All orders produced here are expressed over
// equivalence-class representatives, so orders that differ only by equated
// attributes collapse into one.

#include <span>
#include <utility>
#include <vector>

#include "ordsel/catalog.hpp"
#include "ordsel/order.hpp"

namespace ordsel {

/// Deduplicated orders in first-derived order.
using FavorableOrderSet = std::vector<SortOrder>;

/// Appends `o` unless already present. Returns true if it was added.
bool add_unique(FavorableOrderSet& set, const SortOrder& o);

/// An index covers the query when its key and included columns contain every
/// column of its relation that the query references anywhere.
bool index_covers(const IndexEntry& index, const RelationEntry& relation, const Query& query);

/// Approximate minimal favorable orders (afm) for every node, computed in one
/// bottom-up pass. Indexed by NodeId.
///  - base relation: clustering order and the keys of covering indices;
///  - select: the input's orders;
///  - project L: longest prefix of each input order inside L;
///  - join on S: the inputs' orders, plus each order's longest prefix inside
///    S extended canonically to all of S;
///  - group-by L: each input order's longest prefix inside L extended to L.
/// The canonical permutation of S (or L) itself is added only when no input
/// order has a non-empty prefix inside it.
std::vector<FavorableOrderSet> approximate_favorable_orders(const Query& query);

/// Candidate full permutations of `attrs` for a sort-based operator whose
/// output must satisfy `required`:
///  1. collect every input order's longest prefix inside `attrs`, and
///     `required`'s, in that sequence;
///  2. drop each collected order that is a proper prefix of another;
///  3. extend every survivor canonically to a permutation of `attrs`.
/// Never empty: with nothing favorable, the result is the canonical
/// permutation.
std::vector<SortOrder> interesting_orders(const AttributeSet& attrs, const SortOrder& required,
                                          std::span<const FavorableOrderSet> inputs);

/// Interesting sort orders on the parameters of a nested expression.
/// `inner` holds favorable orders of inner sub-expressions, `correlations`
/// the (attribute, parameter) pairs of attribute = parameter predicates.
/// Each inner order contributes its longest prefix whose attributes are all
/// correlated, rewritten in parameter names; each outer order contributes its
/// longest prefix inside `bound`. Empty orders are dropped.
FavorableOrderSet parameter_sort_orders(std::span<const FavorableOrderSet> inner,
                                        const std::vector<std::pair<Attribute, Attribute>>& correlations,
                                        const FavorableOrderSet& outer, const AttributeSet& bound);

}  // namespace ordsel
