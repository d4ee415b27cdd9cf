#pragma once

// External sorting of record streams. sort_srs is classic replacement
// selection; sort_mrs exploits a known sorted prefix of the target order,
// sorting each group of equal prefix values (a segment) on its own and
// emitting it as soon as the next segment starts.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace ordsel {

using KeyValue = std::variant<std::int64_t, std::string>;

struct Record {
  std::vector<KeyValue> key;
  std::string payload;

  friend bool operator==(const Record&, const Record&) = default;
};

struct SortSpec {
  std::size_t key_arity = 1;       // n: attributes of the target order
  std::size_t prefix_len = 0;      // k: leading attributes already sorted
  std::size_t memory_records = 4096;
  std::size_t block_bytes = 4096;  // spill block size
  std::size_t memory_blocks = 64;  // merge fan-in is memory_blocks - 1
  bool tie_break_payload = false;  // order equal keys by payload bytes

  /// Throws Error{Validation} on an inconsistent spec.
  void validate() const;
};

struct SortMetrics {
  std::uint64_t comparisons = 0;     // key comparisons made while sorting
  std::uint64_t blocks_written = 0;
  std::uint64_t blocks_read = 0;
  std::uint64_t runs = 0;            // initial runs spilled
  std::uint64_t first_output_index = 0;  // records consumed when the first record was emitted
  std::uint64_t segments_seen = 0;
  std::uint64_t records = 0;
};

/// Pull-based input. Returns std::nullopt at end of stream.
using RecordSource = std::function<std::optional<Record>()>;
using RecordSink = std::function<void(Record&&)>;

/// Lexicographic key order; ints numerically, strings bytewise.
int compare_keys(const Record& a, const Record& b, std::size_t arity);

SortMetrics sort_srs(const RecordSource& in, const RecordSink& out, const SortSpec& spec);

/// Throws Error{InputNotSorted} (path = 0-based record position) when the
/// input regresses on the first prefix_len key attributes.
SortMetrics sort_mrs(const RecordSource& in, const RecordSink& out, const SortSpec& spec);

struct SortResult {
  std::vector<Record> output;
  SortMetrics metrics;
};

SortResult sort_srs(const std::vector<Record>& input, const SortSpec& spec);
SortResult sort_mrs(const std::vector<Record>& input, const SortSpec& spec);

/// Synthetic data: `segments` groups of near-equal size on key 0 (ascending),
/// key 1 uniform in [0, value_range). Determined by `seed` alone.
struct DatasetSpec {
  std::size_t rows = 1000;
  std::size_t segments = 10;
  std::uint64_t seed = 1;
  std::int64_t value_range = 1'000'000;
  std::size_t payload_bytes = 16;
};

std::vector<Record> generate_dataset(const DatasetSpec& spec);

struct Comparison {
  SortMetrics srs;
  SortMetrics mrs;
  bool same_output = false;  // identical key sequences
};

Comparison compare_sorts(const std::vector<Record>& input, const SortSpec& spec);

}  // namespace ordsel
