#include <doctest.h>

#include "ordsel/error.hpp"
#include "ordsel/favorable.hpp"
#include "ordsel/optimizer.hpp"
#include "support.hpp"

using namespace ordsel;
using ordsel::testing::attrs;
using ordsel::testing::order;

namespace {

bool same_set(FavorableOrderSet a, FavorableOrderSet b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

std::string single_relation(const std::string& clustering, const std::string& indices) {
  return R"({"block_size": 4096, "memory_blocks": 10, "relations": [
    {"name": "R", "columns": ["a", "b", "c", "d"], "tuples": 100000, "blocks": 1000,
     "clustering": )" + clustering + R"(, "indices": )" + indices + R"(,
     "distinct": {"R.a": 100, "R.b": 100, "R.c": 100, "R.d": 100}}]})";
}

const char* kRelationQuery = R"({"tree": {"relation": "R"}, "order_by": [], "output": ["R.a", "R.b"]})";

}  // namespace

TEST_SUITE("favorable") {
  TEST_CASE("car catalog afm and interesting orders") {
    const auto f = ordsel::testing::load_fixture("car");
    const auto& q = f.query;
    const auto y = "catalog1.year", m = "catalog1.make", c = "catalog1.city", co = "catalog1.color";

    Optimizer opt(q, q.catalog().params);
    opt.optimize();
    const auto& afm = opt.afm();
    // post-order ids: catalog1, catalog2, ct1 join ct2, rating, root
    CHECK(same_set(afm[0], {order({y})}));
    CHECK(same_set(afm[1], {order({m})}));
    CHECK(same_set(afm[3], {order({m})}));
    CHECK(same_set(afm[2], {order({y}), order({m}), order({y, c, co, m}), order({m, c, co, y})}));
    auto expected_root = afm[2];
    expected_root.push_back(order({y, m}));
    expected_root.push_back(order({m, y}));
    CHECK(same_set(afm[4], expected_root));

    const auto& explored = opt.explored();
    REQUIRE(explored.contains(4));
    for (const auto& [required, orders] : explored.at(4)) CHECK(same_set(orders, {order({y, m}), order({m, y})}));
    REQUIRE(explored.contains(2));
    CHECK(explored.at(2).size() == 2);
    CHECK(same_set(explored.at(2).at(order({m, y})), {order({y, c, co, m}), order({m, y, c, co})}));
    CHECK(same_set(explored.at(2).at(order({y, m})), {order({m, c, co, y}), order({y, m, c, co})}));
    // across both goals: the four candidate permutations
    FavorableOrderSet all;
    for (const auto& [required, orders] : explored.at(2))
      for (const auto& o : orders) add_unique(all, o);
    CHECK(same_set(all, {order({y, c, co, m}), order({m, c, co, y}), order({y, m, c, co}), order({m, y, c, co})}));
  }

  TEST_CASE("base relation rule") {
    const ordsel::testing::Loaded l(single_relation(R"(["R.a"])", R"([{"key": ["R.b", "R.c"], "include": ["R.a"]}])"), kRelationQuery);
    CHECK(same_set(approximate_favorable_orders(l.query)[0], {order({"R.a"}), order({"R.b", "R.c"})}));

    // an index missing a referenced column is ignored
    const ordsel::testing::Loaded partial(single_relation(R"(["R.a"])", R"([{"key": ["R.b", "R.c"]}])"), kRelationQuery);
    CHECK(same_set(approximate_favorable_orders(partial.query)[0], {order({"R.a"})}));
  }

  TEST_CASE("project rule") {
    const ordsel::testing::Loaded l(single_relation(R"(["R.a", "R.b", "R.c"])", "[]"),
                   R"({"tree": {"project": {"input": {"relation": "R"}, "attrs": ["R.a", "R.c"]}}, "order_by": []})");
    CHECK(same_set(approximate_favorable_orders(l.query)[l.query.root()], {order({"R.a"})}));
  }

  TEST_CASE("interesting orders") {
    const FavorableOrderSet none[] = {{}, {}};
    CHECK(interesting_orders(attrs({"b", "a"}), order({"z"}), none) == std::vector{order({"a", "b"})});

    const FavorableOrderSet inputs[] = {{order({"a"})}, {order({"a", "b"})}};
    CHECK(interesting_orders(attrs({"a", "b"}), {}, inputs) == std::vector{order({"a", "b"})});
  }

  TEST_CASE("ford-min examples") {
    const ordsel::testing::Loaded clustered(single_relation(R"(["R.a"])", "[]"), kRelationQuery);
    const auto params = clustered.catalog.params;
    CHECK(same_set(ford_min_exact(clustered.query, 0, params), {order({"R.a"})}));

    const ordsel::testing::Loaded heap(single_relation("[]", "[]"), kRelationQuery);
    CHECK(ford_min_exact(heap.query, 0, params).empty());

    const ordsel::testing::Loaded indexed(single_relation(R"(["R.a"])", R"([{"key": ["R.a", "R.b"]}])"), kRelationQuery);
    CHECK(same_set(ford_min_exact(indexed.query, 0, params), {order({"R.a", "R.b"})}));
  }

  TEST_CASE("ford-min size guard") {
    const ordsel::testing::Loaded l(single_relation(R"(["R.a"])", "[]"), kRelationQuery);
    try {
      ford_min_exact(l.query, 0, l.catalog.params, 10);
      FAIL("expected TooLarge");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::TooLarge);
    }
  }

  TEST_CASE("parameter sort orders") {
    const Attribute ok("lineitem", "l_orderkey"), param("", "o_orderkey");
    const FavorableOrderSet inner[] = {{SortOrder{ok}}};
    CHECK(parameter_sort_orders(inner, {{ok, param}}, {}, {}) == FavorableOrderSet{SortOrder{param}});

    const FavorableOrderSet outer = {order({"p", "q"}), order({"z"})};
    CHECK(parameter_sort_orders(inner, {}, outer, attrs({"p"})) == FavorableOrderSet{order({"p"})});

    const FavorableOrderSet ab[] = {{order({"a", "b"})}};
    CHECK(parameter_sort_orders(ab, {{Attribute::parse("a"), Attribute::parse("p_a")}}, {}, {}) ==
          FavorableOrderSet{order({"p_a"})});
  }

  TEST_CASE("afm size bound and interesting-order shape") {
    for (const char* stem : {"car", "b1", "chain"}) {
      const auto f = ordsel::testing::load_fixture(stem);
      const auto& q = f.query;
      const auto afm = approximate_favorable_orders(q);
      CHECK(afm == approximate_favorable_orders(q));
      for (NodeId id = 0; id < q.nodes().size(); ++id) {
        const auto& n = q.node(id);
        if (n.kind != NodeKind::Join) continue;
        const auto& l = afm[n.children[0]];
        const auto& r = afm[n.children[1]];
        FavorableOrderSet u = l;
        for (const auto& o : r) add_unique(u, o);
        CHECK(afm[id].size() <= l.size() + r.size() + u.size() + 1);

        const auto s = representative_join_set(n, q.equivalences());
        const FavorableOrderSet inputs[] = {l, r};
        for (const auto& required : {SortOrder{}, q.equivalences().rewrite(q.order_by())}) {
          const auto orders = interesting_orders(s, required, inputs);
          CHECK_FALSE(orders.empty());
          for (const auto& o : orders) CHECK(o.attr_set() == s);
        }
      }
    }
  }

  TEST_CASE("dominance pass") {
    std::mt19937_64 rng(8);
    const auto universe = attrs({"a", "b", "c", "d"});
    const auto pool = all_orders(universe);
    for (int t = 0; t < 300; ++t) {
      FavorableOrderSet in[2];
      for (auto& set : in)
        for (std::size_t k = rng() % 4; k > 0; --k) add_unique(set, pool[rng() % pool.size()]);
      const auto s = ordsel::testing::random_set(rng, 4, 4);
      const auto required = pool[rng() % pool.size()];
      const auto orders = interesting_orders(s, required, in);

      // oracle: restrict, drop strict prefixes, extend
      FavorableOrderSet restricted;
      for (const auto& set : in)
        for (const auto& o : set) add_unique(restricted, lcp_in_set(o, s));
      add_unique(restricted, lcp_in_set(required, s));
      FavorableOrderSet expected;
      for (const auto& o : restricted) {
        bool strict_prefix = false;
        for (const auto& p : restricted) strict_prefix = strict_prefix || (p != o && subsumes(p, o));
        if (!strict_prefix) add_unique(expected, extend_canonically(o, s));
      }
      CHECK(orders == expected);
    }
  }
}
