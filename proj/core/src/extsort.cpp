#include "ordsel/extsort.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <memory>
#include <random>

#include "ordsel/error.hpp"

namespace ordsel {

void SortSpec::validate() const {
  if (key_arity == 0) throw Error(ErrorCode::Validation, "sort key must have at least one attribute", "key");
  if (prefix_len > key_arity) {
    throw Error(ErrorCode::Validation, "known prefix is longer than the target order", "known_prefix");
  }
  if (memory_records == 0) throw Error(ErrorCode::Validation, "memory must hold at least one record", "memory_records");
  if (block_bytes == 0) throw Error(ErrorCode::Validation, "block size must be positive", "block_bytes");
  if (memory_blocks < 3) throw Error(ErrorCode::Validation, "memory_blocks must be at least 3", "memory_blocks");
}

int compare_keys(const Record& a, const Record& b, std::size_t arity) {
  for (std::size_t i = 0; i < arity; ++i) {
    const auto& x = a.key.at(i);
    const auto& y = b.key.at(i);
    if (x.index() != y.index()) return x.index() < y.index() ? -1 : 1;
    if (x < y) return -1;
    if (y < x) return 1;
  }
  return 0;
}

namespace {

struct Context {
  const SortSpec& spec;
  SortMetrics& m;
  const RecordSink& sink;
  bool emitted = false;

  int compare(const Record& a, const Record& b) {
    ++m.comparisons;
    const int c = compare_keys(a, b, spec.key_arity);
    if (c != 0 || !spec.tie_break_payload) return c;
    return a.payload.compare(b.payload) < 0 ? -1 : a.payload == b.payload ? 0 : 1;
  }

  bool less(const Record& a, const Record& b) { return compare(a, b) < 0; }

  void emit(Record&& r) {
    if (!emitted) {
      emitted = true;
      m.first_output_index = m.records;
    }
    sink(std::move(r));
  }
};

// Spill file: length-prefixed records streamed through fixed-size blocks.
class RunFile {
 public:
  RunFile(std::size_t block_bytes, SortMetrics& m) : block_bytes_(block_bytes), m_(&m), file_(std::tmpfile(), &std::fclose) {
    if (!file_) throw Error(ErrorCode::Io, "cannot create a spill file");
  }

  void write(const Record& r) {
    std::string body;
    put_u32(body, static_cast<std::uint32_t>(r.key.size()));
    for (const auto& v : r.key) {
      if (const auto* i = std::get_if<std::int64_t>(&v)) {
        body.push_back('i');
        put_u64(body, static_cast<std::uint64_t>(*i));
      } else {
        const auto& s = std::get<std::string>(v);
        body.push_back('s');
        put_u32(body, static_cast<std::uint32_t>(s.size()));
        body += s;
      }
    }
    put_u32(body, static_cast<std::uint32_t>(r.payload.size()));
    body += r.payload;
    put_u32(buffer_, static_cast<std::uint32_t>(body.size()));
    buffer_ += body;
    while (buffer_.size() >= block_bytes_) {
      flush(block_bytes_);
    }
  }

  void finish() {
    if (!buffer_.empty()) flush(buffer_.size());
    if (std::fflush(file_.get()) != 0) throw Error(ErrorCode::Io, "spill write failed");
    std::rewind(file_.get());
    buffer_.clear();
    pos_ = 0;
  }

  std::optional<Record> read() {
    if (!fill(4)) return std::nullopt;
    const auto len = get_u32();
    if (!fill(len)) throw Error(ErrorCode::Io, "truncated spill file");
    Record r;
    const auto arity = get_u32();
    r.key.reserve(arity);
    for (std::uint32_t i = 0; i < arity; ++i) {
      const char tag = buffer_[pos_++];
      if (tag == 'i') {
        r.key.emplace_back(static_cast<std::int64_t>(get_u64()));
      } else {
        const auto n = get_u32();
        r.key.emplace_back(buffer_.substr(pos_, n));
        pos_ += n;
      }
    }
    const auto n = get_u32();
    r.payload = buffer_.substr(pos_, n);
    pos_ += n;
    return r;
  }

 private:
  static void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  static void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  std::uint32_t get_u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buffer_[pos_++])) << (8 * i);
    return v;
  }
  std::uint64_t get_u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buffer_[pos_++])) << (8 * i);
    return v;
  }

  void flush(std::size_t n) {
    if (std::fwrite(buffer_.data(), 1, n, file_.get()) != n) throw Error(ErrorCode::Io, "spill write failed");
    buffer_.erase(0, n);
    ++m_->blocks_written;
  }

  // Ensures n unread bytes are buffered, loading whole blocks.
  bool fill(std::size_t n) {
    if (pos_ > 0) {
      buffer_.erase(0, pos_);
      pos_ = 0;
    }
    while (buffer_.size() < n) {
      std::string block(block_bytes_, '\0');
      const auto got = std::fread(block.data(), 1, block_bytes_, file_.get());
      if (got == 0) return false;
      block.resize(got);
      buffer_ += block;
      ++m_->blocks_read;
    }
    return true;
  }

  std::size_t block_bytes_;
  SortMetrics* m_;
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> file_;
  std::string buffer_;
  std::size_t pos_ = 0;
};

using Runs = std::vector<std::unique_ptr<RunFile>>;

// Loser tree over k run readers.
void merge_into(Context& ctx, Runs& inputs, const std::function<void(Record&&)>& out) {
  const std::size_t k = inputs.size();
  std::vector<std::optional<Record>> head(k);
  for (std::size_t i = 0; i < k; ++i) head[i] = inputs[i]->read();

  const std::size_t sentinel = k;  // beats everyone, only during setup
  std::vector<std::size_t> tree(k, sentinel);
  auto beats = [&](std::size_t a, std::size_t b) {
    if (a == sentinel) return true;
    if (b == sentinel) return false;
    if (!head[a]) return false;
    if (!head[b]) return true;
    const int c = ctx.compare(*head[a], *head[b]);
    return c < 0 || (c == 0 && a < b);
  };
  auto adjust = [&](std::size_t s) {
    for (std::size_t t = (s + k) / 2; t > 0; t /= 2) {
      if (beats(tree[t], s)) std::swap(s, tree[t]);
    }
    tree[0] = s;
  };
  for (std::size_t i = k; i-- > 0;) adjust(i);

  while (k > 0 && head[tree[0]]) {
    const auto w = tree[0];
    Record r = std::move(*head[w]);
    head[w] = inputs[w]->read();
    out(std::move(r));
    adjust(w);
  }
}

void merge_runs(Context& ctx, Runs runs) {
  const std::size_t fan_in = std::max<std::size_t>(2, ctx.spec.memory_blocks - 1);
  while (runs.size() > fan_in) {
    Runs next;
    for (std::size_t i = 0; i < runs.size(); i += fan_in) {
      Runs group;
      for (std::size_t j = i; j < std::min(runs.size(), i + fan_in); ++j) group.push_back(std::move(runs[j]));
      auto merged = std::make_unique<RunFile>(ctx.spec.block_bytes, ctx.m);
      merge_into(ctx, group, [&](Record&& r) { merged->write(r); });
      merged->finish();
      next.push_back(std::move(merged));
    }
    runs = std::move(next);
  }
  merge_into(ctx, runs, [&](Record&& r) { ctx.emit(std::move(r)); });
}

// In-memory heap sort, emitting in ascending order.
void sort_in_memory(Context& ctx, std::vector<Record>& buf) {
  auto after = [&](const Record& a, const Record& b) { return ctx.less(b, a); };
  std::make_heap(buf.begin(), buf.end(), after);
  while (!buf.empty()) {
    std::pop_heap(buf.begin(), buf.end(), after);
    ctx.emit(std::move(buf.back()));
    buf.pop_back();
  }
}

// Run generation by replacement selection over a full memory load.
class ReplacementSelection {
  struct Tagged {
    std::uint64_t run;
    Record rec;
  };

  struct After {
    Context* ctx;
    bool operator()(const Tagged& a, const Tagged& b) const {
      if (a.run != b.run) return a.run > b.run;
      return ctx->less(b.rec, a.rec);
    }
  };

  After after() { return After{&ctx_}; }

 public:
  ReplacementSelection(Context& ctx, std::vector<Record> initial) : ctx_(ctx) {
    heap_.reserve(initial.size());
    for (auto& r : initial) heap_.push_back({0, std::move(r)});
    std::make_heap(heap_.begin(), heap_.end(), after());
  }

  void push(Record r) {
    std::pop_heap(heap_.begin(), heap_.end(), after());
    Tagged top = std::move(heap_.back());
    heap_.pop_back();
    const bool next_run = ctx_.less(r, top.rec);
    write(top);
    heap_.push_back({top.run + (next_run ? 1 : 0), std::move(r)});
    std::push_heap(heap_.begin(), heap_.end(), after());
  }

  Runs finish() {
    while (!heap_.empty()) {
      std::pop_heap(heap_.begin(), heap_.end(), after());
      write(heap_.back());
      heap_.pop_back();
    }
    for (auto& r : runs_) r->finish();
    ctx_.m.runs += runs_.size();
    return std::move(runs_);
  }

 private:
  void write(const Tagged& t) {
    while (runs_.size() <= t.run) runs_.push_back(std::make_unique<RunFile>(ctx_.spec.block_bytes, ctx_.m));
    runs_[t.run]->write(t.rec);
  }

  Context& ctx_;
  std::vector<Tagged> heap_;
  Runs runs_;
};

int compare_prefix(const Record& a, const Record& b, std::size_t k) { return compare_keys(a, b, k); }

void check_arity(const Record& r, const SortSpec& spec, std::uint64_t position) {
  if (r.key.size() < spec.key_arity) {
    throw Error(ErrorCode::Validation, "record has fewer key values than the sort order",
                std::to_string(position));
  }
}

}  // namespace

SortMetrics sort_srs(const RecordSource& in, const RecordSink& out, const SortSpec& spec) {
  spec.validate();
  SortMetrics m;
  Context ctx{spec, m, out};

  std::vector<Record> buf;
  std::optional<Record> next;
  while ((next = in())) {
    check_arity(*next, spec, m.records);
    if (buf.size() == spec.memory_records) break;
    ++m.records;
    buf.push_back(std::move(*next));
    next.reset();
  }
  if (!next) {
    sort_in_memory(ctx, buf);
    return m;
  }

  ReplacementSelection rs(ctx, std::move(buf));
  do {
    check_arity(*next, spec, m.records);
    ++m.records;
    rs.push(std::move(*next));
  } while ((next = in()));
  merge_runs(ctx, rs.finish());
  return m;
}

SortMetrics sort_mrs(const RecordSource& in, const RecordSink& out, const SortSpec& spec) {
  spec.validate();
  SortMetrics m;
  Context ctx{spec, m, out};
  const std::size_t k = spec.prefix_len;

  std::optional<Record> look = in();
  std::uint64_t position = 0;  // of `look`

  if (k == spec.key_arity) {
    std::optional<Record> prev;
    while (look) {
      check_arity(*look, spec, position);
      if (prev && compare_keys(*look, *prev, k) < 0) {
        throw Error(ErrorCode::InputNotSorted, "input is not sorted on the known prefix", std::to_string(position));
      }
      if (!prev || compare_keys(*look, *prev, k) != 0) ++m.segments_seen;
      ++m.records;
      prev = *look;
      ctx.emit(std::move(*look));
      look = in();
      ++position;
    }
    return m;
  }

  while (look) {
    ++m.segments_seen;
    std::vector<Record> buf;
    std::optional<ReplacementSelection> rs;
    bool same_segment = true;
    while (look && same_segment) {
      check_arity(*look, spec, position);
      ++m.records;
      Record rec = std::move(*look);
      look = in();
      ++position;
      if (look) {
        check_arity(*look, spec, position);
        const int c = compare_prefix(*look, rec, k);
        if (c < 0) {
          throw Error(ErrorCode::InputNotSorted, "input is not sorted on the known prefix", std::to_string(position));
        }
        same_segment = c == 0;
      }
      if (rs) {
        rs->push(std::move(rec));
      } else if (buf.size() < spec.memory_records) {
        buf.push_back(std::move(rec));
      } else {
        rs.emplace(ctx, std::move(buf));
        buf.clear();
        rs->push(std::move(rec));
      }
    }
    if (rs) {
      merge_runs(ctx, rs->finish());
    } else {
      sort_in_memory(ctx, buf);
    }
  }
  return m;
}

namespace {

SortResult run_on(const std::vector<Record>& input, const SortSpec& spec,
                  SortMetrics (*algo)(const RecordSource&, const RecordSink&, const SortSpec&)) {
  SortResult result;
  result.output.reserve(input.size());
  std::size_t i = 0;
  RecordSource src = [&]() -> std::optional<Record> {
    if (i == input.size()) return std::nullopt;
    return input[i++];
  };
  result.metrics = algo(src, [&](Record&& r) { result.output.push_back(std::move(r)); }, spec);
  return result;
}

}  // namespace

SortResult sort_srs(const std::vector<Record>& input, const SortSpec& spec) {
  return run_on(input, spec, static_cast<SortMetrics (*)(const RecordSource&, const RecordSink&, const SortSpec&)>(
                                 &sort_srs));
}

SortResult sort_mrs(const std::vector<Record>& input, const SortSpec& spec) {
  return run_on(input, spec, static_cast<SortMetrics (*)(const RecordSource&, const RecordSink&, const SortSpec&)>(
                                 &sort_mrs));
}

std::vector<Record> generate_dataset(const DatasetSpec& spec) {
  if (spec.segments == 0) throw Error(ErrorCode::Validation, "segments must be positive", "segments");
  if (spec.value_range <= 0) throw Error(ErrorCode::Validation, "value range must be positive", "value_range");
  std::mt19937_64 rng(spec.seed);
  std::vector<Record> out;
  out.reserve(spec.rows);
  const std::size_t base = spec.rows / spec.segments;
  const std::size_t extra = spec.rows % spec.segments;
  for (std::size_t s = 0; s < spec.segments; ++s) {
    const std::size_t size = base + (s < extra ? 1 : 0);
    for (std::size_t j = 0; j < size; ++j) {
      Record r;
      r.key.emplace_back(static_cast<std::int64_t>(s));
      r.key.emplace_back(static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(spec.value_range)));
      r.payload = std::to_string(out.size());
      if (r.payload.size() < spec.payload_bytes) r.payload.append(spec.payload_bytes - r.payload.size(), '.');
      out.push_back(std::move(r));
    }
  }
  return out;
}

Comparison compare_sorts(const std::vector<Record>& input, const SortSpec& spec) {
  auto srs = sort_srs(input, spec);
  auto mrs = sort_mrs(input, spec);
  Comparison c{srs.metrics, mrs.metrics, srs.output.size() == mrs.output.size()};
  for (std::size_t i = 0; c.same_output && i < srs.output.size(); ++i) {
    c.same_output = compare_keys(srs.output[i], mrs.output[i], spec.key_arity) == 0 &&
                    (!spec.tie_break_payload || srs.output[i].payload == mrs.output[i].payload);
  }
  return c;
}

}  // namespace ordsel
