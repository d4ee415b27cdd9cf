#include "ordsel/json_io.hpp"

#include <fstream>
#include <functional>
#include <iomanip>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ordsel/error.hpp"

namespace ordsel {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void invalid(const std::string& message, const std::string& path) {
  throw Error(ErrorCode::Validation, message, path);
}

void only_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& path) {
  if (!obj.is_object()) invalid("expected an object", path);
  for (const auto& [k, _] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }) == allowed.end()) {
      invalid("unknown field \"" + k + "\"", path + "/" + k);
    }
  }
}

const json& need(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) invalid(std::string("missing field \"") + key + "\"", path + "/" + key);
  return *it;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) invalid("expected a number", path);
  return v.get<double>();
}

std::uint64_t count(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) invalid("expected a non-negative integer", path);
  return v.get<std::uint64_t>();
}

std::string text(const json& v, const std::string& path) {
  if (!v.is_string()) invalid("expected a string", path);
  return v.get<std::string>();
}

const json& array(const json& v, const std::string& path) {
  if (!v.is_array()) invalid("expected an array", path);
  return v;
}

Attribute attribute(const json& v, const std::string& path, const std::string& default_qualifier = {}) {
  auto a = Attribute::parse(text(v, path));
  if (a.qualifier.empty()) a.qualifier = default_qualifier;
  return a;
}

std::vector<Attribute> attributes(const json& v, const std::string& path, const std::string& qualifier = {}) {
  std::vector<Attribute> out;
  for (std::size_t i = 0; i < array(v, path).size(); ++i) out.push_back(attribute(v[i], path + "/" + std::to_string(i), qualifier));
  return out;
}

SortOrder order(const json& v, const std::string& path, const std::string& qualifier = {}) {
  try {
    return SortOrder(attributes(v, path, qualifier));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::DuplicateAttribute) invalid(e.what(), path);
    throw;
  }
}

ordered_json order_json(const SortOrder& o) { return o.names(); }

json cost_json(const CostEstimate& c) { return {{"io", c.io_blocks}, {"cpu", c.cpu_units}, {"total", c.total()}}; }

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string(), path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::Io, "cannot read " + path.string(), path.string());
  return ss.str();
}

namespace {

json parse_json(const std::string& s) {
  try {
    return json::parse(s);
  } catch (const json::parse_error& e) {
    invalid(std::string("malformed JSON: ") + e.what(), "");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Catalog

Catalog parse_catalog(const std::string& s) {
  const json j = parse_json(s);
  only_keys(j, {"block_size", "memory_blocks", "cpu_comparison_cost", "merge_pass_constant", "relations"}, "");
  Catalog c;
  if (j.contains("block_size")) c.params.block_size = count(j["block_size"], "/block_size");
  if (j.contains("memory_blocks")) c.params.memory_blocks = count(j["memory_blocks"], "/memory_blocks");
  if (j.contains("cpu_comparison_cost")) c.params.cpu_comparison_cost = number(j["cpu_comparison_cost"], "/cpu_comparison_cost");
  if (j.contains("merge_pass_constant")) c.params.merge_pass_constant = number(j["merge_pass_constant"], "/merge_pass_constant");

  const auto& rels = array(need(j, "relations", ""), "/relations");
  for (std::size_t i = 0; i < rels.size(); ++i) {
    const auto p = "/relations/" + std::to_string(i);
    const auto& r = rels[i];
    only_keys(r, {"name", "columns", "tuples", "blocks", "avg_tuple_bytes", "clustering", "indices", "distinct"}, p);
    RelationEntry e;
    e.name = text(need(r, "name", p), p + "/name");
    for (std::size_t k = 0; k < array(need(r, "columns", p), p + "/columns").size(); ++k) {
      e.columns.push_back(text(r["columns"][k], p + "/columns/" + std::to_string(k)));
    }
    e.tuples = number(need(r, "tuples", p), p + "/tuples");
    e.blocks = number(need(r, "blocks", p), p + "/blocks");
    if (r.contains("avg_tuple_bytes")) {
      e.avg_tuple_bytes = number(r["avg_tuple_bytes"], p + "/avg_tuple_bytes");
    } else if (e.tuples > 0.0) {
      e.avg_tuple_bytes = e.blocks * static_cast<double>(c.params.block_size) / e.tuples;
    }
    if (r.contains("clustering")) e.clustering = order(r["clustering"], p + "/clustering", e.name);
    if (r.contains("indices")) {
      const auto& idx = array(r["indices"], p + "/indices");
      for (std::size_t k = 0; k < idx.size(); ++k) {
        const auto ip = p + "/indices/" + std::to_string(k);
        only_keys(idx[k], {"name", "key", "include"}, ip);
        IndexEntry ie;
        ie.name = idx[k].contains("name") ? text(idx[k]["name"], ip + "/name") : e.name + "_idx" + std::to_string(k);
        ie.key = order(need(idx[k], "key", ip), ip + "/key", e.name);
        if (idx[k].contains("include")) {
          for (auto& a : attributes(idx[k]["include"], ip + "/include", e.name)) ie.include.insert(a);
        }
        e.indices.push_back(std::move(ie));
      }
    }
    if (r.contains("distinct")) {
      const auto& d = r["distinct"];
      if (!d.is_object()) invalid("expected an object", p + "/distinct");
      for (const auto& [k, v] : d.items()) {
        AttributeSet set;
        std::stringstream ss(k);
        std::string part;
        while (std::getline(ss, part, ',')) {
          auto a = Attribute::parse(part);
          if (a.qualifier.empty()) a.qualifier = e.name;
          set.insert(a);
        }
        e.distinct[set] = number(v, p + "/distinct/" + k);
      }
    }
    c.relations.push_back(std::move(e));
  }
  c.validate();
  return c;
}

Catalog load_catalog(const std::filesystem::path& path) {
  const auto s = read_file(path);
  try {
    return parse_catalog(s);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what(), e.path());
  }
}

std::string serialize_catalog(const Catalog& c) {
  ordered_json j;
  j["block_size"] = c.params.block_size;
  j["memory_blocks"] = c.params.memory_blocks;
  j["cpu_comparison_cost"] = c.params.cpu_comparison_cost;
  j["merge_pass_constant"] = c.params.merge_pass_constant;
  j["relations"] = ordered_json::array();
  for (const auto& r : c.relations) {
    ordered_json e;
    e["name"] = r.name;
    e["columns"] = r.columns;
    e["tuples"] = r.tuples;
    e["blocks"] = r.blocks;
    e["avg_tuple_bytes"] = r.avg_tuple_bytes;
    e["clustering"] = r.clustering.names();
    e["indices"] = ordered_json::array();
    for (const auto& idx : r.indices) {
      std::vector<std::string> include;
      for (const auto& a : idx.include) include.push_back(a.str());
      e["indices"].push_back({{"name", idx.name}, {"key", idx.key.names()}, {"include", include}});
    }
    e["distinct"] = ordered_json::object();
    for (const auto& [set, d] : r.distinct) {
      std::string key;
      for (const auto& a : set) key += (key.empty() ? "" : ",") + a.str();
      e["distinct"][key] = d;
    }
    j["relations"].push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Query

namespace {

NodeId parse_node(const json& j, const std::string& p, std::vector<ExprNode>& nodes) {
  static constexpr std::initializer_list<const char*> kinds = {"relation", "select", "project", "join", "group_by"};
  if (j.is_object() && j.size() > 1) {
    for (const auto& [k, v] : j.items()) {
      if (std::find_if(kinds.begin(), kinds.end(), [&](const char* n) { return k == n; }) == kinds.end()) {
        invalid("unknown field \"" + k + "\"", p + "/" + k);
      }
    }
  }
  if (!j.is_object() || j.size() != 1) invalid("expected exactly one of relation/select/project/join/group_by", p);
  const auto& [kind, body] = *j.items().begin();
  ExprNode n;
  const auto bp = p + "/" + kind;
  if (kind == "relation") {
    n.kind = NodeKind::Relation;
    n.relation = text(body, bp);
  } else if (kind == "select") {
    only_keys(body, {"input", "predicate", "selectivity", "attrs"}, bp);
    n.kind = NodeKind::Select;
    n.children.push_back(parse_node(need(body, "input", bp), bp + "/input", nodes));
    if (body.contains("predicate")) n.predicate = text(body["predicate"], bp + "/predicate");
    if (body.contains("selectivity")) n.selectivity = number(body["selectivity"], bp + "/selectivity");
    if (body.contains("attrs")) n.predicate_attrs = attributes(body["attrs"], bp + "/attrs");
  } else if (kind == "project") {
    only_keys(body, {"input", "attrs"}, bp);
    n.kind = NodeKind::Project;
    n.children.push_back(parse_node(need(body, "input", bp), bp + "/input", nodes));
    n.attrs = attributes(need(body, "attrs", bp), bp + "/attrs");
  } else if (kind == "join") {
    only_keys(body, {"left", "right", "on"}, bp);
    n.kind = NodeKind::Join;
    n.children.push_back(parse_node(need(body, "left", bp), bp + "/left", nodes));
    n.children.push_back(parse_node(need(body, "right", bp), bp + "/right", nodes));
    const auto& on = array(need(body, "on", bp), bp + "/on");
    for (std::size_t i = 0; i < on.size(); ++i) {
      const auto pp = bp + "/on/" + std::to_string(i);
      if (!on[i].is_array() || on[i].size() != 2) invalid("expected a pair of columns", pp);
      n.join_on.emplace_back(attribute(on[i][0], pp + "/0"), attribute(on[i][1], pp + "/1"));
    }
  } else if (kind == "group_by") {
    only_keys(body, {"input", "attrs", "aggregates"}, bp);
    n.kind = NodeKind::GroupBy;
    n.children.push_back(parse_node(need(body, "input", bp), bp + "/input", nodes));
    n.attrs = attributes(need(body, "attrs", bp), bp + "/attrs");
    if (body.contains("aggregates")) {
      const auto& aggs = array(body["aggregates"], bp + "/aggregates");
      for (std::size_t i = 0; i < aggs.size(); ++i) {
        const auto ap = bp + "/aggregates/" + std::to_string(i);
        only_keys(aggs[i], {"function", "argument"}, ap);
        Aggregate a;
        a.function = text(need(aggs[i], "function", ap), ap + "/function");
        if (aggs[i].contains("argument")) a.argument = attribute(aggs[i]["argument"], ap + "/argument");
        n.aggregates.push_back(std::move(a));
      }
    }
  } else {
    invalid("unknown node kind \"" + kind + "\"", bp);
  }
  nodes.push_back(std::move(n));
  return nodes.size() - 1;
}

ordered_json node_json(const Query& q, NodeId id) {
  const auto& n = q.node(id);
  ordered_json body;
  switch (n.kind) {
    case NodeKind::Relation:
      return {{"relation", n.relation}};
    case NodeKind::Select:
      body["input"] = node_json(q, n.children[0]);
      if (!n.predicate.empty()) body["predicate"] = n.predicate;
      body["selectivity"] = n.selectivity;
      if (!n.predicate_attrs.empty()) {
        body["attrs"] = ordered_json::array();
        for (const auto& a : n.predicate_attrs) body["attrs"].push_back(a.str());
      }
      return {{"select", body}};
    case NodeKind::Project:
      body["input"] = node_json(q, n.children[0]);
      body["attrs"] = ordered_json::array();
      for (const auto& a : n.attrs) body["attrs"].push_back(a.str());
      return {{"project", body}};
    case NodeKind::Join:
      body["left"] = node_json(q, n.children[0]);
      body["right"] = node_json(q, n.children[1]);
      body["on"] = ordered_json::array();
      for (const auto& [l, r] : n.join_on) body["on"].push_back({l.str(), r.str()});
      return {{"join", body}};
    case NodeKind::GroupBy:
      body["input"] = node_json(q, n.children[0]);
      body["attrs"] = ordered_json::array();
      for (const auto& a : n.attrs) body["attrs"].push_back(a.str());
      if (!n.aggregates.empty()) {
        body["aggregates"] = ordered_json::array();
        for (const auto& agg : n.aggregates) {
          ordered_json a{{"function", agg.function}};
          if (agg.argument) a["argument"] = agg.argument->str();
          body["aggregates"].push_back(a);
        }
      }
      return {{"group_by", body}};
  }
  return {};
}

}  // namespace

Query parse_query(const std::string& s, const Catalog& catalog) {
  const json j = parse_json(s);
  only_keys(j, {"tree", "order_by", "output"}, "");
  std::vector<ExprNode> nodes;
  const NodeId root = parse_node(need(j, "tree", ""), "/tree", nodes);
  SortOrder order_by = j.contains("order_by") ? order(j["order_by"], "/order_by") : SortOrder{};
  std::vector<Attribute> output = j.contains("output") ? attributes(j["output"], "/output") : std::vector<Attribute>{};
  return Query(std::move(nodes), root, std::move(order_by), std::move(output), catalog);
}

Query load_query(const std::filesystem::path& path, const Catalog& catalog) {
  const auto s = read_file(path);
  try {
    return parse_query(s, catalog);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what(), e.path());
  }
}

std::string serialize_query(const Query& q) {
  ordered_json j;
  j["tree"] = node_json(q, q.root());
  j["order_by"] = q.order_by().names();
  if (!q.output().empty()) {
    j["output"] = ordered_json::array();
    for (const auto& a : q.output()) j["output"].push_back(a.str());
  }
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Plans

namespace {

ordered_json plan_json(const PlanNode& n) {
  ordered_json j;
  j["kind"] = std::string(to_string(n.kind));
  j["expr"] = n.expr;
  switch (n.kind) {
    case PlanKind::TableAccess:
      j["relation"] = n.relation;
      j["access"] = n.access;
      j["blocks_read"] = n.blocks_read;
      break;
    case PlanKind::SortEnforcer:
      j["from"] = n.from.names();
      j["to"] = n.to.names();
      j["partial"] = n.partial;
      j["segments"] = n.segments;
      break;
    case PlanKind::MergeJoin:
    case PlanKind::GroupBy:
      j["order"] = n.order.names();
      break;
    case PlanKind::Filter:
    case PlanKind::Project:
      break;
  }
  j["output_order"] = n.output_order.names();
  j["stats"] = {{"tuples", n.stats.tuples}, {"blocks", n.stats.blocks}};
  j["local"] = cost_json(n.local);
  j["cost"] = cost_json(n.total);
  j["children"] = ordered_json::array();
  for (const auto& c : n.children) j["children"].push_back(plan_json(*c));
  return j;
}

CostEstimate cost_from(const json& j, const std::string& p) {
  only_keys(j, {"io", "cpu", "total"}, p);
  return {number(need(j, "io", p), p + "/io"), number(need(j, "cpu", p), p + "/cpu")};
}

PlanPtr plan_from(const json& j, const std::string& p) {
  only_keys(j, {"kind", "expr", "relation", "access", "blocks_read", "from", "to", "partial", "segments", "order",
                "output_order", "stats", "local", "cost", "children"},
            p);
  auto n = std::make_shared<PlanNode>();
  n->kind = plan_kind_from_string(text(need(j, "kind", p), p + "/kind"));
  n->expr = count(need(j, "expr", p), p + "/expr");
  if (j.contains("relation")) n->relation = text(j["relation"], p + "/relation");
  if (j.contains("access")) n->access = text(j["access"], p + "/access");
  if (j.contains("blocks_read")) n->blocks_read = number(j["blocks_read"], p + "/blocks_read");
  if (j.contains("from")) n->from = order(j["from"], p + "/from");
  if (j.contains("to")) n->to = order(j["to"], p + "/to");
  if (j.contains("partial")) {
    if (!j["partial"].is_boolean()) invalid("expected a boolean", p + "/partial");
    n->partial = j["partial"].get<bool>();
  }
  if (j.contains("segments")) n->segments = number(j["segments"], p + "/segments");
  if (j.contains("order")) n->order = order(j["order"], p + "/order");
  n->output_order = order(need(j, "output_order", p), p + "/output_order");
  const auto& st = need(j, "stats", p);
  only_keys(st, {"tuples", "blocks"}, p + "/stats");
  n->stats = {number(need(st, "tuples", p + "/stats"), p + "/stats/tuples"),
              number(need(st, "blocks", p + "/stats"), p + "/stats/blocks")};
  if (j.contains("local")) n->local = cost_from(j["local"], p + "/local");
  if (j.contains("cost")) n->total = cost_from(j["cost"], p + "/cost");
  if (j.contains("children")) {
    const auto& cs = array(j["children"], p + "/children");
    for (std::size_t i = 0; i < cs.size(); ++i) n->children.push_back(plan_from(cs[i], p + "/children/" + std::to_string(i)));
  }
  return n;
}

std::string fmt(double x) {
  std::ostringstream ss;
  ss << std::setprecision(6) << x;
  return ss.str();
}

std::string describe(const PlanNode& n) {
  std::string s(to_string(n.kind));
  switch (n.kind) {
    case PlanKind::TableAccess:
      s += " " + n.relation + " via " + n.access;
      break;
    case PlanKind::SortEnforcer:
      s += std::string(n.partial ? " partial " : " full ") + n.from.str() + " -> " + n.to.str();
      if (n.partial) s += " segments=" + fmt(n.segments);
      break;
    case PlanKind::MergeJoin:
    case PlanKind::GroupBy:
      s += " " + n.order.str();
      break;
    case PlanKind::Filter:
    case PlanKind::Project:
      break;
  }
  return s;
}

}  // namespace

std::string plan_to_json(const PlanNode& plan, int indent) { return plan_json(plan).dump(indent) + "\n"; }

PlanPtr plan_from_json(const std::string& s) { return plan_from(parse_json(s), ""); }

std::string plan_to_text(const PlanNode& plan) {
  std::string out;
  std::function<void(const PlanNode&, int)> walk = [&](const PlanNode& n, int depth) {
    out += std::string(2 * depth, ' ') + describe(n) + "  out=" + n.output_order.str() + " rows=" +
           fmt(n.stats.tuples) + " cost=" + fmt(n.total.total()) + " (io=" + fmt(n.total.io_blocks) +
           " cpu=" + fmt(n.total.cpu_units) + ")\n";
    for (const auto& c : n.children) walk(*c, depth + 1);
  };
  walk(plan, 0);
  return out;
}

std::string plan_to_dot(const PlanNode& plan) {
  std::string out = "digraph plan {\n  node [shape=box];\n";
  int next = 0;
  std::function<int(const PlanNode&)> walk = [&](const PlanNode& n) {
    const int id = next++;
    out += "  n" + std::to_string(id) + " [label=\"" + describe(n) + "\\ncost=" + fmt(n.total.total()) + "\"];\n";
    for (const auto& c : n.children) {
      const int cid = walk(*c);
      out += "  n" + std::to_string(id) + " -> n" + std::to_string(cid) + ";\n";
    }
    return id;
  };
  walk(plan);
  return out + "}\n";
}

std::string explain_to_json(const Query& query, const Optimizer& optimizer, int indent) {
  ordered_json j;
  j["afm"] = ordered_json::array();
  for (NodeId id = 0; id < query.nodes().size(); ++id) {
    ordered_json e;
    e["node"] = id;
    e["kind"] = std::string(to_string(query.node(id).kind));
    if (query.node(id).kind == NodeKind::Relation) e["relation"] = query.node(id).relation;
    e["orders"] = ordered_json::array();
    for (const auto& o : optimizer.afm().at(id)) e["orders"].push_back(order_json(o));
    j["afm"].push_back(std::move(e));
  }
  j["interesting"] = ordered_json::array();
  for (const auto& [id, by_req] : optimizer.explored()) {
    for (const auto& [req, orders] : by_req) {
      ordered_json e;
      e["node"] = id;
      e["required"] = order_json(req);
      e["orders"] = ordered_json::array();
      for (const auto& o : orders) e["orders"].push_back(order_json(o));
      j["interesting"].push_back(std::move(e));
    }
  }
  return j.dump(indent) + "\n";
}

// ---------------------------------------------------------------------------
// Prefix instances

PrefixInstance parse_prefix_instance(const std::string& s) {
  const json j = parse_json(s);
  only_keys(j, {"vertices", "edges", "f"}, "");
  PrefixInstance inst;
  const auto& vs = array(need(j, "vertices", ""), "/vertices");
  for (std::size_t i = 0; i < vs.size(); ++i) {
    const auto p = "/vertices/" + std::to_string(i);
    AttributeSet set;
    for (auto& a : attributes(vs[i], p)) {
      if (!set.insert(a).second) invalid("attribute " + a.str() + " listed twice", p);
    }
    inst.sets.push_back(std::move(set));
  }
  if (j.contains("edges")) {
    const auto& es = array(j["edges"], "/edges");
    for (std::size_t i = 0; i < es.size(); ++i) {
      const auto p = "/edges/" + std::to_string(i);
      if (!es[i].is_array() || es[i].size() != 2) invalid("expected a vertex pair", p);
      const auto a = count(es[i][0], p + "/0");
      const auto b = count(es[i][1], p + "/1");
      if (a >= inst.sets.size() || b >= inst.sets.size()) invalid("edge endpoint out of range", p);
      inst.edges.emplace_back(a, b);
    }
  }
  if (j.contains("f")) {
    const auto& f = j["f"];
    if (f.is_string()) {
      if (f.get<std::string>() != "identity") invalid("unknown benefit function", "/f");
    } else {
      std::vector<double> table;
      for (std::size_t i = 0; i < array(f, "/f").size(); ++i) table.push_back(number(f[i], "/f/" + std::to_string(i)));
      if (table.empty()) invalid("benefit table must not be empty", "/f");
      inst.f = [table](std::size_t l) { return table[std::min(l, table.size() - 1)]; };
    }
  }
  inst.validate();
  return inst;
}

PrefixInstance load_prefix_instance(const std::filesystem::path& path) { return parse_prefix_instance(read_file(path)); }

}  // namespace ordsel
