#include <doctest.h>

#include <json.hpp>

#include "ordsel/error.hpp"
#include "ordsel/json_io.hpp"
#include "ordsel/optimizer.hpp"
#include "support.hpp"

using namespace ordsel;
using ordsel::testing::attrs;
using nlohmann::json;

TEST_SUITE("json_io") {
  TEST_CASE("prefix instance parsing") {
    const auto inst = parse_prefix_instance(
        R"({"vertices": [["a"], ["a", "b"], ["b"]], "edges": [[0, 1], [1, 2]], "f": "identity"})");
    CHECK(inst.sets.size() == 3);
    CHECK(inst.sets[1] == attrs({"a", "b"}));
    CHECK(inst.edge_benefit(0, 2) == 2.0);

    const auto table = parse_prefix_instance(R"({"vertices": [["a", "b"], ["a", "b"]], "edges": [[0, 1]],
                                                 "f": [0, 5, 6]})");
    CHECK(table.edge_benefit(0, 1) == 5.0);
    CHECK(table.edge_benefit(0, 2) == 6.0);

    CHECK_THROWS_AS(parse_prefix_instance(R"({"vertices": [["a"]], "edges": [], "f": "square"})"), Error);
    CHECK_THROWS_AS(parse_prefix_instance(R"({"vertices": [["a"]], "edges": [[0, 3]]})"), Error);
    CHECK_THROWS_AS(parse_prefix_instance("{not json"), Error);
  }

  TEST_CASE("malformed JSON is a validation error") {
    try {
      parse_catalog("[1, 2");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Validation);
    }
  }

  TEST_CASE("unknown query field reports its pointer") {
    const auto f = ordsel::testing::load_fixture("chain");
    try {
      parse_query(R"({"tree": {"relation": "R1", "alias": "x"}, "order_by": []})", f.catalog);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Validation);
      CHECK(e.path() == "/tree/alias");
    }
  }

  TEST_CASE("plan JSON shape") {
    const auto f = ordsel::testing::load_fixture("b1");
    const auto plan = optimize(f.query, f.catalog.params);
    const auto j = json::parse(plan_to_json(*plan));
    CHECK(j["kind"] == "group_by");
    for (const char* key : {"kind", "expr", "output_order", "stats", "local", "cost", "children"}) CHECK(j.contains(key));
    CHECK(j["cost"]["total"].get<double>() == doctest::Approx(plan->total.total()));
    CHECK(plan_to_json(*plan) == plan_to_json(*plan_from_json(plan_to_json(*plan))));
    CHECK_THROWS_AS(plan_from_json(R"({"kind": "teleport"})"), Error);
  }

  TEST_CASE("text and dot renderings") {
    const auto f = ordsel::testing::load_fixture("car");
    const auto plan = optimize(f.query, f.catalog.params);
    const auto text = plan_to_text(*plan);
    CHECK(text.find("merge_join") != std::string::npos);
    CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(flatten(*plan).size()));
    const auto dot = plan_to_dot(*plan);
    CHECK(dot.rfind("digraph", 0) == 0);
    CHECK(dot.find("->") != std::string::npos);
  }

  TEST_CASE("explain lists afm per node and the interesting orders") {
    const auto f = ordsel::testing::load_fixture("car");
    Optimizer opt(f.query, f.catalog.params);
    opt.optimize();
    const auto j = json::parse(explain_to_json(f.query, opt));
    CHECK(j["afm"].size() == f.query.nodes().size());
    CHECK(j["afm"][0]["relation"] == "catalog1");
    CHECK(j["afm"][0]["orders"] == json::parse(R"([["catalog1.year"]])"));
    bool saw_root = false;
    for (const auto& entry : j["interesting"]) {
      if (entry["node"] != 4) continue;
      saw_root = true;
      CHECK(entry["orders"].size() == 2);
    }
    CHECK(saw_root);
  }
}
