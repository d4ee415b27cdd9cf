#include <doctest.h>

#include "ordsel/error.hpp"
#include "ordsel/order.hpp"
#include "support.hpp"

using namespace ordsel;
using ordsel::testing::attrs;
using ordsel::testing::order;

TEST_SUITE("order") {
  TEST_CASE("subsumes") {
    CHECK(subsumes(order({"a", "b", "c"}), order({"a", "b"})));
    CHECK(subsumes(order({"a", "b"}), order({"a", "b"})));
    CHECK_FALSE(subsumes(order({"a", "b"}), order({"b"})));
    CHECK(subsumes(order({"a"}), SortOrder{}));
    CHECK_FALSE(subsumes(SortOrder{}, order({"a"})));
  }

  TEST_CASE("lcp") {
    CHECK(lcp(order({"a", "b", "c"}), order({"a", "b", "d"})) == order({"a", "b"}));
    CHECK(lcp(order({"a"}), order({"b"})).empty());
    CHECK(lcp(order({"m", "co", "c", "y"}), order({"m", "y"})) == order({"m"}));
  }

  TEST_CASE("lcp_in_set") {
    CHECK(lcp_in_set(order({"m", "co", "c", "y"}), attrs({"m", "y"})) == order({"m"}));
    CHECK(lcp_in_set(order({"y", "co", "c", "m"}), attrs({"y", "co", "c", "m"})) == order({"y", "co", "c", "m"}));
    CHECK(lcp_in_set(order({"a", "b"}), {}).empty());
  }

  TEST_CASE("concat") {
    CHECK(concat(order({"a"}), order({"b", "c"})) == order({"a", "b", "c"}));
    CHECK(concat(SortOrder{}, order({"x"})) == order({"x"}));
    try {
      concat(order({"a"}), order({"a"}));
      FAIL("expected DuplicateAttribute");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DuplicateAttribute);
    }
  }

  TEST_CASE("subtract") {
    CHECK(subtract(order({"a", "b", "c"}), order({"a"})) == order({"b", "c"}));
    CHECK(subtract(order({"a", "b"}), order({"a", "b"})).empty());
    try {
      subtract(order({"a", "b"}), order({"b"}));
      FAIL("expected NotAPrefix");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NotAPrefix);
    }
  }

  TEST_CASE("canonical permutation") {
    CHECK(canonical_permutation(attrs({"c", "a", "b"})) == order({"a", "b", "c"}));
    CHECK(canonical_permutation({}).empty());
    CHECK(canonical_permutation(attrs({"z"})) == order({"z"}));
    // unqualified names sort before qualified ones
    CHECK(canonical_permutation(attrs({"R.a", "b"})) == order({"b", "R.a"}));
  }

  TEST_CASE("duplicate attribute rejected") {
    CHECK_THROWS_AS(order({"a", "b", "a"}), Error);
    CHECK(Attribute::parse("R.x.y").qualifier == "R");
    CHECK(Attribute::parse("R.x.y").column == "x.y");
  }

  TEST_CASE("enumeration sizes") {
    const auto s = attrs({"a", "b", "c", "d"});
    CHECK(all_permutations(s).size() == 24);
    CHECK(all_orders(s).size() == 4 + 12 + 24 + 24);
    const auto perms = all_permutations(s);
    CHECK(std::is_sorted(perms.begin(), perms.end()));
    CHECK(all_permutations({}).size() == 1);
  }

  // Exhaustive over every order drawn from four attributes, plus epsilon.
  TEST_CASE("prefix algebra properties") {
    auto orders = all_orders(attrs({"a", "b", "c", "d"}));
    orders.insert(orders.begin(), SortOrder{});

    auto brute_lcp = [](const SortOrder& x, const SortOrder& y) {
      SortOrder best;
      for (std::size_t n = 0; n <= x.size(); ++n) {
        const auto p = x.prefix(n);
        if (y.size() >= n && y.prefix(n) == p) best = p;
      }
      return best;
    };

    for (const auto& x : orders) {
      CHECK(subsumes(x, x));
      for (const auto& y : orders) {
        if (subsumes(x, y) && subsumes(y, x)) CHECK(x == y);
        const auto l = lcp(x, y);
        CHECK(l == lcp(y, x));
        CHECK(subsumes(x, l));
        CHECK(subsumes(y, l));
        CHECK(l == brute_lcp(x, y));
        if (subsumes(x, y)) CHECK(concat(y, subtract(x, y)) == x);
        bool disjoint = true;
        for (const auto& a : y) disjoint = disjoint && !x.contains(a);
        if (disjoint) CHECK(subtract(concat(x, y), x) == y);
      }
    }

    // transitivity on a sample small enough to run in full
    const auto small = all_orders(attrs({"a", "b", "c"}));
    for (const auto& x : small)
      for (const auto& y : small)
        for (const auto& z : small)
          if (subsumes(x, y) && subsumes(y, z)) CHECK(subsumes(x, z));
  }

  TEST_CASE("lcp_in_set matches a linear scan") {
    const auto universe = attrs({"a", "b", "c", "d"});
    const auto orders = all_orders(universe);
    std::vector<AttributeSet> subsets;
    for (unsigned mask = 0; mask < 16; ++mask) {
      AttributeSet s;
      unsigned bit = 0;
      for (const auto& a : universe) {
        if (mask & (1u << bit)) s.insert(a);
        ++bit;
      }
      subsets.push_back(s);
    }
    for (const auto& o : orders) {
      for (const auto& s : subsets) {
        std::size_t n = 0;
        while (n < o.size() && s.contains(o[n])) ++n;
        CHECK(lcp_in_set(o, s) == o.prefix(n));
      }
    }
  }

  TEST_CASE("extend canonically") {
    CHECK(extend_canonically(order({"c"}), attrs({"a", "b", "c"})) == order({"c", "a", "b"}));
    CHECK(extend_canonically(SortOrder{}, attrs({"b", "a"})) == order({"a", "b"}));
  }
}
