// ordsel: sort-order selection and partial-sort tooling.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ordsel/error.hpp"
#include "ordsel/extsort.hpp"
#include "ordsel/json_io.hpp"
#include "ordsel/optimizer.hpp"
#include "ordsel/prefix_solver.hpp"

using namespace ordsel;
using nlohmann::ordered_json;

namespace {

enum class Level { Quiet, Info, Debug };

Level log_level() {
  const char* env = std::getenv("ORDSEL_LOG");
  if (!env) return Level::Quiet;
  const std::string v = env;
  if (v == "debug") return Level::Debug;
  if (v == "info") return Level::Info;
  return Level::Quiet;
}

void log(Level level, const std::string& msg) {
  static const Level current = log_level();
  if (level <= current && current != Level::Quiet) std::cerr << (level == Level::Debug ? "[debug] " : "[info] ") << msg << "\n";
}

void write_text(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + path + " for writing", path);
  out << content;
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path, path);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep)) out.push_back(part);
  return out;
}

// ---------------------------------------------------------------------------

struct CostOverrides {
  std::uint64_t memory_blocks = 0;
  std::uint64_t block_size = 0;
  double cpu_unit = -1.0;

  void add(CLI::App* app) {
    app->add_option("--memory-blocks", memory_blocks, "Sort memory in blocks (M)");
    app->add_option("--block-size", block_size, "Block size in bytes");
    app->add_option("--cpu-unit", cpu_unit, "Cost of one tuple comparison in block-I/O units");
  }

  CostParams apply(CostParams p) const {
    if (memory_blocks) p.memory_blocks = memory_blocks;
    if (block_size) p.block_size = block_size;
    if (cpu_unit >= 0.0) p.cpu_comparison_cost = cpu_unit;
    p.validate();
    return p;
  }
};

struct OptimizeArgs {
  std::string catalog, query, explain_file, dot, format = "json", strategy = "favorable", benefit = "cost";
  bool refine = true, explain = false, refine_groupby = false;
  CostOverrides costs;
};

int run_optimize(const OptimizeArgs& a) {
  Catalog catalog = load_catalog(a.catalog);
  catalog.params = a.costs.apply(catalog.params);
  const Query query = load_query(a.query, catalog);

  OptimizerOptions options;
  if (a.strategy == "exhaustive") options.strategy = OrderStrategy::Exhaustive;
  else if (a.strategy == "ford-min") options.strategy = OrderStrategy::FordMinExact;

  Optimizer optimizer(query, catalog.params, options);
  PlanPtr plan = optimizer.optimize();
  log(Level::Info, "phase 1 cost " + std::to_string(plan->total.total()) + ", " +
                       std::to_string(optimizer.memo_size()) + " goals");
  if (a.refine) {
    RefineOptions ro;
    ro.refine_groupby = a.refine_groupby;
    ro.identity_benefit = a.benefit == "identity";
    plan = refine(query, catalog.params, plan, ro, options);
    log(Level::Info, "refined cost " + std::to_string(plan->total.total()));
  }

  if (a.format == "json" || a.format == "both") std::cout << plan_to_json(*plan);
  if (a.format == "text" || a.format == "both") std::cout << plan_to_text(*plan);
  if (a.explain) std::cerr << explain_to_json(query, optimizer);
  if (!a.explain_file.empty()) write_text(a.explain_file, explain_to_json(query, optimizer));
  if (!a.dot.empty()) write_text(a.dot, plan_to_dot(*plan));
  return 0;
}

int run_cost(const std::string& plan_path, const std::string& catalog_path, const CostOverrides& costs) {
  CostParams params;
  if (!catalog_path.empty()) params = load_catalog(catalog_path).params;
  params = costs.apply(params);
  const auto plan = plan_from_json(read_file(plan_path));
  const auto recomputed = cost_plan(*plan, params);
  ordered_json j;
  j["stored"] = plan->total.total();
  j["recomputed"] = recomputed.total();
  j["io"] = recomputed.io_blocks;
  j["cpu"] = recomputed.cpu_units;
  j["match"] = std::abs(recomputed.total() - plan->total.total()) <=
               1e-9 * std::max(1.0, std::abs(plan->total.total()));
  std::cout << j.dump() << "\n";
  return j["match"].get<bool>() ? 0 : 1;
}

int run_solve_prefix(const std::string& path, const std::string& method, bool oracle) {
  const auto inst = load_prefix_instance(path);
  bool is_path = true;
  for (std::size_t i = 0; i < inst.edges.size(); ++i) {
    const auto [a, b] = inst.edges[i];
    if (!((a == i && b == i + 1) || (a == i + 1 && b == i))) is_path = false;
  }
  if (inst.edges.size() + 1 != inst.sets.size()) is_path = false;

  Assignment result;
  if (method == "path" || (method == "auto" && is_path)) result = solve_path(inst);
  else if (method == "brute") result = brute_force(inst);
  else result = solve_tree_half_approx(inst);

  ordered_json j;
  j["benefit"] = result.benefit;
  j["permutations"] = ordered_json::array();
  for (const auto& p : result.perms) j["permutations"].push_back(p.names());
  if (oracle) j["oracle_benefit"] = brute_force(inst).benefit;
  std::cout << j.dump() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// CSV record data

struct Table {
  std::vector<std::string> header;
  std::vector<std::string> lines;
};

Table read_csv(const std::string& path) {
  std::istringstream in(read_file(path));
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::Validation, "empty CSV input", path);
  t.header = split(line, ',');
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) t.lines.push_back(line);
  }
  return t;
}

struct KeyColumn {
  std::size_t index;
  bool integer;
};

struct SortArgs {
  std::string input, output, key, target, known, metrics_out, algorithm = "mrs";
  std::size_t memory_records = 4096, memory_blocks = 64, block_bytes = 4096;
};

int run_sort(const SortArgs& a) {
  const Table table = read_csv(a.input);
  std::map<std::string, bool> types;  // column -> integer
  std::vector<std::string> key_names;
  for (const auto& part : split(a.key, ',')) {
    const auto bits = split(part, ':');
    if (bits.size() != 2 || (bits[1] != "int" && bits[1] != "str")) {
      throw Error(ErrorCode::Validation, "key entries look like name:int or name:str", "--key");
    }
    types[bits[0]] = bits[1] == "int";
    key_names.push_back(bits[0]);
  }
  const auto target = a.target.empty() ? key_names : split(a.target, ',');
  const auto known = a.known.empty() ? std::vector<std::string>{} : split(a.known, ',');
  if (known.size() > target.size() || !std::equal(known.begin(), known.end(), target.begin())) {
    throw Error(ErrorCode::Validation, "known prefix must be a prefix of the target order", "--known-prefix");
  }
  std::vector<KeyColumn> cols;
  for (const auto& name : target) {
    auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) throw Error(ErrorCode::Validation, "no column " + name + " in the input", "--target-order");
    if (!types.contains(name)) throw Error(ErrorCode::Validation, "no type given for " + name, "--key");
    cols.push_back({static_cast<std::size_t>(it - table.header.begin()), types[name]});
  }

  SortSpec spec;
  spec.key_arity = cols.size();
  spec.prefix_len = known.size();
  spec.memory_records = a.memory_records;
  spec.memory_blocks = a.memory_blocks;
  spec.block_bytes = a.block_bytes;

  std::size_t row = 0;
  RecordSource src = [&]() -> std::optional<Record> {
    if (row == table.lines.size()) return std::nullopt;
    const auto& line = table.lines[row];
    const auto fields = split(line, ',');
    Record r;
    for (const auto& c : cols) {
      if (c.index >= fields.size()) {
        throw Error(ErrorCode::Validation, "row has too few fields", "row " + std::to_string(row + 1));
      }
      if (c.integer) {
        try {
          std::size_t used = 0;
          r.key.emplace_back(static_cast<std::int64_t>(std::stoll(fields[c.index], &used)));
          if (used != fields[c.index].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
          throw Error(ErrorCode::Validation, "not an integer: " + fields[c.index], "row " + std::to_string(row + 1));
        }
      } else {
        r.key.emplace_back(fields[c.index]);
      }
    }
    r.payload = line;
    ++row;
    return r;
  };

  std::string out;
  for (std::size_t i = 0; i < table.header.size(); ++i) out += (i ? "," : "") + table.header[i];
  out += "\n";
  RecordSink sink = [&](Record&& r) { out += r.payload + "\n"; };
  const auto m = a.algorithm == "srs" ? sort_srs(src, sink, spec) : sort_mrs(src, sink, spec);
  write_text(a.output, out);

  if (!a.metrics_out.empty()) {
    ordered_json j{{"algorithm", a.algorithm},           {"records", m.records},
                   {"comparisons", m.comparisons},       {"blocks_written", m.blocks_written},
                   {"blocks_read", m.blocks_read},       {"runs", m.runs},
                   {"first_output_index", m.first_output_index}, {"segments_seen", m.segments_seen}};
    write_text(a.metrics_out, j.dump(2) + "\n");
  }
  return 0;
}

std::string dataset_csv(const std::vector<Record>& rows) {
  std::string out = "seg,val,payload\n";
  for (const auto& r : rows) {
    out += std::to_string(std::get<std::int64_t>(r.key[0])) + "," + std::to_string(std::get<std::int64_t>(r.key[1])) +
           "," + r.payload + "\n";
  }
  return out;
}

struct BenchArgs {
  std::string segments = "1,16,256,4096";
  std::size_t rows = 1 << 16, memory_records = 1 << 12, memory_blocks = 64, block_bytes = 4096;
  std::uint64_t seed = 1;
  std::string output;
};

int run_bench(const BenchArgs& a) {
  std::string out = "segments,segment_size,alg,comparisons,blocks_written,blocks_read,runs,first_output_index,same_output\n";
  for (const auto& s : split(a.segments, ',')) {
    std::size_t segments = 0;
    try {
      segments = std::stoull(s);
    } catch (const std::exception&) {
      throw Error(ErrorCode::Validation, "not a segment count: " + s, "--segments");
    }
    DatasetSpec ds;
    ds.rows = a.rows;
    ds.segments = segments;
    ds.seed = a.seed;
    const auto data = generate_dataset(ds);
    SortSpec spec;
    spec.key_arity = 2;
    spec.prefix_len = 1;
    spec.memory_records = a.memory_records;
    spec.memory_blocks = a.memory_blocks;
    spec.block_bytes = a.block_bytes;
    const auto c = compare_sorts(data, spec);
    const auto seg_size = segments ? (a.rows + segments - 1) / segments : 0;
    for (const auto& [name, m] : {std::pair{"srs", c.srs}, std::pair{"mrs", c.mrs}}) {
      out += std::to_string(segments) + "," + std::to_string(seg_size) + "," + name + "," +
             std::to_string(m.comparisons) + "," + std::to_string(m.blocks_written) + "," +
             std::to_string(m.blocks_read) + "," + std::to_string(m.runs) + "," +
             std::to_string(m.first_output_index) + "," + (c.same_output ? "true" : "false") + "\n";
    }
    log(Level::Info, "segments=" + s + " done");
  }
  write_text(a.output, out);
  return 0;
}

int report(const Error& e) {
  ordered_json j{{"code", std::string(to_string(e.code()))}, {"message", e.what()}, {"path", e.path()}};
  std::cerr << j.dump() << "\n";
  return e.code() == ErrorCode::Io ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sort-order selection for merge-join plans and partial-sort-aware external sorting"};
  app.require_subcommand(1);

  OptimizeArgs opt;
  auto* optimize_cmd = app.add_subcommand("optimize", "Choose sort orders and print the cheapest plan");
  optimize_cmd->add_option("--catalog", opt.catalog, "Catalog JSON")->required();
  optimize_cmd->add_option("--query", opt.query, "Query JSON")->required();
  optimize_cmd->add_flag("--refine,!--no-refine", opt.refine, "Run free-attribute refinement (default on)");
  optimize_cmd->add_flag("--refine-groupby", opt.refine_groupby, "Include group-by nodes in refinement");
  optimize_cmd->add_option("--benefit", opt.benefit, "Refinement benefit function")
      ->check(CLI::IsMember({"cost", "identity"}));
  optimize_cmd->add_flag("--explain", opt.explain, "Dump favorable and interesting orders to stderr");
  optimize_cmd->add_option("--explain-file", opt.explain_file, "Write the explain dump to a file");
  optimize_cmd->add_option("--dot", opt.dot, "Write the plan as Graphviz DOT");
  optimize_cmd->add_option("--format", opt.format, "Plan output format")->check(CLI::IsMember({"json", "text", "both"}));
  optimize_cmd->add_option("--strategy", opt.strategy, "Candidate sort orders per join")
      ->check(CLI::IsMember({"favorable", "exhaustive", "ford-min"}));
  opt.costs.add(optimize_cmd);

  std::string plan_path, cost_catalog;
  CostOverrides cost_overrides;
  auto* cost_cmd = app.add_subcommand("cost", "Recompute a plan's cost bottom-up and compare with its stored total");
  cost_cmd->add_option("--plan", plan_path, "Plan JSON from optimize")->required();
  cost_cmd->add_option("--catalog", cost_catalog, "Catalog JSON supplying cost parameters");
  cost_overrides.add(cost_cmd);

  std::string instance, method = "auto";
  bool oracle = false;
  auto* prefix_cmd = app.add_subcommand("solve-prefix", "Solve a common prefix instance");
  prefix_cmd->add_option("--instance", instance, "Instance JSON")->required();
  prefix_cmd->add_option("--method", method, "Solver")->check(CLI::IsMember({"auto", "path", "tree", "brute"}));
  prefix_cmd->add_flag("--oracle", oracle, "Also report the exhaustive optimum");

  SortArgs sort_args;
  auto* sort_cmd = app.add_subcommand("sort", "Sort a CSV file");
  sort_cmd->add_option("--input", sort_args.input, "Input CSV with a header row")->required();
  sort_cmd->add_option("--output", sort_args.output, "Output CSV (default stdout)");
  sort_cmd->add_option("--key", sort_args.key, "Key columns and types, e.g. seg:int,name:str")->required();
  sort_cmd->add_option("--target-order", sort_args.target, "Columns to sort on (default: --key order)");
  sort_cmd->add_option("--known-prefix", sort_args.known, "Leading target columns the input is already sorted on");
  sort_cmd->add_option("--algorithm", sort_args.algorithm, "mrs or srs")->check(CLI::IsMember({"mrs", "srs"}));
  sort_cmd->add_option("--memory-records", sort_args.memory_records, "Records held in memory");
  sort_cmd->add_option("--memory-blocks", sort_args.memory_blocks, "Merge memory in blocks (fan-in + 1)");
  sort_cmd->add_option("--block-bytes", sort_args.block_bytes, "Spill block size");
  sort_cmd->add_option("--metrics-out", sort_args.metrics_out, "Write sort metrics JSON");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Compare SRS and MRS on generated data");
  bench_cmd->add_option("--segments", bench.segments, "Comma-separated segment counts");
  bench_cmd->add_option("--rows", bench.rows, "Rows per dataset");
  bench_cmd->add_option("--seed", bench.seed, "Dataset seed");
  bench_cmd->add_option("--memory-records", bench.memory_records, "Records held in memory");
  bench_cmd->add_option("--memory-blocks", bench.memory_blocks, "Merge memory in blocks");
  bench_cmd->add_option("--block-bytes", bench.block_bytes, "Spill block size");
  bench_cmd->add_option("--output", bench.output, "Output CSV (default stdout)");

  DatasetSpec gen;
  std::string gen_out;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a CSV dataset sorted on seg with random val");
  gen_cmd->add_option("--rows", gen.rows, "Rows");
  gen_cmd->add_option("--segments", gen.segments, "Distinct seg values");
  gen_cmd->add_option("--seed", gen.seed, "Seed");
  gen_cmd->add_option("--value-range", gen.value_range, "val is drawn from [0, range)");
  gen_cmd->add_option("--output", gen_out, "Output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    ordered_json j{{"code", "Usage"}, {"message", e.what()}, {"path", ""}};
    std::cerr << j.dump() << "\n";
    return 1;
  }

  try {
    if (*optimize_cmd) return run_optimize(opt);
    if (*cost_cmd) return run_cost(plan_path, cost_catalog, cost_overrides);
    if (*prefix_cmd) return run_solve_prefix(instance, method, oracle);
    if (*sort_cmd) return run_sort(sort_args);
    if (*bench_cmd) return run_bench(bench);
    if (*gen_cmd) {
      write_text(gen_out, dataset_csv(generate_dataset(gen)));
      return 0;
    }
  } catch (const Error& e) {
    return report(e);
  } catch (const std::exception& e) {
    return report(Error(ErrorCode::Io, e.what()));
  }
  return 0;
}
