#pragma once

#include <algorithm>
#include <filesystem>
#include <random>
#include <string>

#include "ordsel/catalog.hpp"
#include "ordsel/json_io.hpp"
#include "ordsel/prefix_solver.hpp"

namespace ordsel::testing {

inline std::filesystem::path data(const std::string& name) { return std::filesystem::path(ORDSEL_TEST_DATA) / name; }

inline SortOrder order(std::initializer_list<const char*> names) {
  std::vector<std::string> v(names.begin(), names.end());
  return SortOrder::parse(v);
}

inline AttributeSet attrs(std::initializer_list<const char*> names) {
  AttributeSet s;
  for (const char* n : names) s.insert(Attribute::parse(n));
  return s;
}

// Keeps the catalog alive next to the query built against it.
struct Loaded {
  Catalog catalog;
  Query query;

  Loaded(const std::string& catalog_json, const std::string& query_json)
      : catalog(parse_catalog(catalog_json)), query(parse_query(query_json, catalog)) {}
};

inline Loaded load_fixture(const std::string& stem) {
  return Loaded(read_file(data(stem + "_catalog.json")), read_file(data(stem + "_query.json")));
}

// Random attribute sets over a small shared alphabet, so neighbours overlap.
inline AttributeSet random_set(std::mt19937_64& rng, std::size_t max_size, std::size_t alphabet = 5) {
  std::vector<std::string> pool;
  for (std::size_t i = 0; i < alphabet; ++i) pool.push_back(std::string(1, static_cast<char>('a' + i)));
  std::shuffle(pool.begin(), pool.end(), rng);
  const std::size_t n = 1 + rng() % max_size;
  AttributeSet s;
  for (std::size_t i = 0; i < n && i < pool.size(); ++i) s.insert(Attribute({}, pool[i]));
  return s;
}

inline PrefixInstance random_path(std::mt19937_64& rng, std::size_t max_n, std::size_t max_set) {
  PrefixInstance inst;
  const std::size_t n = 1 + rng() % max_n;
  for (std::size_t i = 0; i < n; ++i) inst.sets.push_back(random_set(rng, max_set));
  for (std::size_t i = 0; i + 1 < n; ++i) inst.edges.emplace_back(i, i + 1);
  return inst;
}

// Rooted at 0; every vertex gets at most two children.
inline PrefixInstance random_binary_tree(std::mt19937_64& rng, std::size_t max_n, std::size_t max_set) {
  PrefixInstance inst;
  const std::size_t n = 1 + rng() % max_n;
  std::vector<std::size_t> children(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    inst.sets.push_back(random_set(rng, max_set));
    if (i == 0) continue;
    std::size_t parent;
    do parent = rng() % i;
    while (children[parent] >= 2);
    ++children[parent];
    inst.edges.emplace_back(parent, i);
  }
  return inst;
}

struct RandomCase {
  std::string catalog;
  std::string query;
};

// Left-deep chains of 1..max_joins+1 relations over columns c1..c3, with
// random sizes, clusterings, covering indices and a random order-by.
inline RandomCase random_case(std::uint64_t seed, std::size_t max_joins) {
  std::mt19937_64 rng(seed);
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
  const std::size_t rels = 1 + pick(max_joins + 1);
  const std::vector<std::string> all_cols = {"c1", "c2", "c3"};

  std::vector<std::vector<std::string>> cols(rels);
  std::string catalog = R"({"block_size": 4096, "memory_blocks": )" + std::to_string(3 + pick(40)) +
                        R"(, "cpu_comparison_cost": 1e-4, "relations": [)";
  for (std::size_t r = 0; r < rels; ++r) {
    const std::string name = "R" + std::to_string(r);
    cols[r] = all_cols;
    std::shuffle(cols[r].begin(), cols[r].end(), rng);
    cols[r].resize(2 + pick(2));
    std::sort(cols[r].begin(), cols[r].end());
    const std::size_t tuples = 500 + pick(60000);
    const std::size_t bytes = 20 + pick(200);
    const std::size_t blocks = std::max<std::size_t>(1, (tuples * bytes + 4095) / 4096);

    auto qualified = [&](std::vector<std::string> v, std::size_t n) {
      std::shuffle(v.begin(), v.end(), rng);
      v.resize(n);
      std::string out = "[";
      for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", \"" : "\"") + name + "." + v[i] + "\"";
      return out + "]";
    };
    std::string col_list = "[";
    std::string distinct = "{";
    for (std::size_t i = 0; i < cols[r].size(); ++i) {
      col_list += (i ? ", \"" : "\"") + cols[r][i] + "\"";
      distinct += (i ? ", \"" : "\"") + name + "." + cols[r][i] + "\": " + std::to_string(1 + pick(tuples / 4));
    }
    col_list += "]";
    distinct += "}";
    const std::size_t clustered = pick(3);  // 0 = heap
    std::string indices = "[]";
    if (pick(3) == 0) {
      const auto key = qualified(cols[r], 1 + pick(cols[r].size()));
      std::string include = "[";
      for (std::size_t i = 0; i < cols[r].size(); ++i) include += (i ? ", \"" : "\"") + name + "." + cols[r][i] + "\"";
      indices = R"([{"key": )" + key + R"(, "include": )" + include + "]}]";
    }
    catalog += (r ? ", " : "") + std::string(R"({"name": ")") + name + R"(", "columns": )" + col_list +
               R"(, "tuples": )" + std::to_string(tuples) + R"(, "blocks": )" + std::to_string(blocks) +
               R"(, "avg_tuple_bytes": )" + std::to_string(bytes) + R"(, "clustering": )" +
               (clustered ? qualified(cols[r], std::min(clustered, cols[r].size())) : std::string("[]")) +
               R"(, "indices": )" + indices + R"(, "distinct": )" + distinct + "}";
  }
  catalog += "]}";

  std::string tree = R"({"relation": "R0"})";
  std::vector<std::pair<std::size_t, std::string>> left_cols;  // (relation, column) available on the left
  for (const auto& c : cols[0]) left_cols.emplace_back(0, c);
  for (std::size_t r = 1; r < rels; ++r) {
    std::vector<std::pair<std::string, std::string>> on;
    for (const auto& c : cols[r]) {
      std::vector<std::size_t> sources;
      for (const auto& [lr, lc] : left_cols)
        if (lc == c) sources.push_back(lr);
      if (sources.empty() || (pick(3) == 0 && !on.empty())) continue;
      const auto src = sources[pick(sources.size())];
      on.emplace_back("R" + std::to_string(src) + "." + c, "R" + std::to_string(r) + "." + c);
    }
    if (on.empty()) {
      // guarantee a predicate: every relation has two of the three columns, so
      // one of them is shared with the left side
      for (const auto& c : cols[r]) {
        for (const auto& [lr, lc] : left_cols) {
          if (lc == c && on.empty()) on.emplace_back("R" + std::to_string(lr) + "." + c, "R" + std::to_string(r) + "." + c);
        }
      }
    }
    std::string on_json = "[";
    for (std::size_t i = 0; i < on.size(); ++i)
      on_json += (i ? ", " : "") + std::string("[\"") + on[i].first + "\", \"" + on[i].second + "\"]";
    on_json += "]";
    tree = R"({"join": {"left": )" + tree + R"(, "right": {"relation": "R)" + std::to_string(r) + R"("}, "on": )" +
           on_json + "}}";
    for (const auto& c : cols[r]) left_cols.emplace_back(r, c);
  }

  std::shuffle(left_cols.begin(), left_cols.end(), rng);
  std::string order_by = "[";
  const std::size_t n_order = pick(3);
  for (std::size_t i = 0; i < n_order && i < left_cols.size(); ++i) {
    order_by += (i ? ", \"R" : "\"R") + std::to_string(left_cols[i].first) + "." + left_cols[i].second + "\"";
  }
  order_by += "]";
  return {catalog, R"({"tree": )" + tree + R"(, "order_by": )" + order_by + "}"};
}

}  // namespace ordsel::testing
