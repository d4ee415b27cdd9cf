#pragma once

// JSON and text formats for catalogs, queries, plans, and prefix instances.
// Readers reject unknown fields and report the offending JSON pointer in
// Error::path().

#include <filesystem>
#include <string>

#include "ordsel/catalog.hpp"
#include "ordsel/optimizer.hpp"
#include "ordsel/prefix_solver.hpp"

namespace ordsel {

Catalog parse_catalog(const std::string& text);
Catalog load_catalog(const std::filesystem::path& path);
std::string serialize_catalog(const Catalog& catalog);

Query parse_query(const std::string& text, const Catalog& catalog);
Query load_query(const std::filesystem::path& path, const Catalog& catalog);
std::string serialize_query(const Query& query);

std::string plan_to_json(const PlanNode& plan, int indent = 2);
PlanPtr plan_from_json(const std::string& text);

/// Indented one-line-per-operator rendering.
std::string plan_to_text(const PlanNode& plan);
std::string plan_to_dot(const PlanNode& plan);

/// afm per expression node and every interesting-order set the optimizer
/// generated.
std::string explain_to_json(const Query& query, const Optimizer& optimizer, int indent = 2);

/// {"vertices": [["a","b"], ...], "edges": [[0,1], ...], "f": "identity" | [f(0), f(1), ...]}
PrefixInstance parse_prefix_instance(const std::string& text);
PrefixInstance load_prefix_instance(const std::filesystem::path& path);

/// Reads a whole file; throws Error{Io}.
std::string read_file(const std::filesystem::path& path);

}  // namespace ordsel
