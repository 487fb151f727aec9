#include "fasim/fuzz.h"

#include <algorithm>

#include "fasim/rng.h"

namespace fasim {
namespace {

struct Object {
  std::vector<Chunk> chunks;
  std::size_t chunk = 0;     // chunk being filled
  std::uint64_t offset = 0;  // pages written into that chunk

  bool filled() const { return chunk == chunks.size(); }
};

class Generator {
 public:
  Generator(const Geometry& g, std::uint64_t seed)
      : rng_(seed),
        ppb_(g.pages_per_block),
        capacity_(g.logical_capacity_pages()),
        span_(std::max<std::uint64_t>(g.pages_per_block, capacity_ * 6 / 10)) {}

  std::vector<Command> run(std::size_t count) {
    while (out_.size() < count) step();
    out_.resize(count);
    return std::move(out_);
  }

 private:
  void step() {
    const double roll = rng_.unit();
    if (roll < 0.35 && fill_some()) return;
    if (roll < 0.60) return stray_write();
    if (roll < 0.68) return stray_trim();
    if (roll < 0.76) return create_object();
    if (roll < 0.84) {
      if (!delete_object()) stray_write();
      return;
    }
    if (roll < 0.87) return malformed_alloc();
    if (roll < 0.88) return emit_write(capacity_ - rng_.below(4), rng_.between(5, 12));
    stray_write();
  }

  void emit_write(Lba lba, std::uint64_t len) {
    Command c;
    c.op = OpKind::kWrite;
    c.lba = lba;
    c.length = len;
    c.content_base = next_token_;
    next_token_ += len;
    push(std::move(c));
  }

  void emit_trim(Lba lba, std::uint64_t len) {
    Command c;
    c.op = OpKind::kTrim;
    c.lba = lba;
    c.length = len;
    push(std::move(c));
  }

  void emit_alloc(std::vector<Chunk> chunks) {
    Command c;
    c.op = OpKind::kFlashAlloc;
    c.chunks = std::move(chunks);
    push(std::move(c));
  }

  void push(Command c) {
    c.seq = out_.size() + 1;
    c.stream_id = static_cast<std::uint32_t>(rng_.below(4));
    out_.push_back(std::move(c));
  }

  void stray_write() {
    const Lba lba = rng_.below(span_);
    emit_write(lba, std::min<std::uint64_t>(rng_.between(1, 8), span_ - lba));
  }

  void stray_trim() {
    const Lba lba = rng_.below(span_);
    emit_trim(lba, std::min<std::uint64_t>(rng_.between(1, 32), span_ - lba));
  }

  bool fill_some() {
    std::vector<std::size_t> open;
    for (std::size_t i = 0; i < objects_.size(); ++i) {
      if (!objects_[i].filled()) open.push_back(i);
    }
    if (open.empty()) return false;
    Object& o = objects_[open[rng_.below(open.size())]];
    const Chunk& c = o.chunks[o.chunk];
    const std::uint64_t len = std::min<std::uint64_t>(rng_.between(1, 8), c.length - o.offset);
    emit_write(c.start + o.offset, len);
    o.offset += len;
    if (o.offset == c.length) {
      ++o.chunk;
      o.offset = 0;
    }
    return true;
  }

  void create_object() {
    if (objects_.size() >= 6) return stray_write();
    const std::uint64_t pages =
        rng_.chance(0.7) ? ppb_ * rng_.between(1, 2) : rng_.between(4, 2 * ppb_);
    if (pages + 2 > span_) return stray_write();
    const Lba start = rng_.below(span_ - pages - 1);
    std::vector<Chunk> chunks;
    if (pages >= 2 && rng_.chance(0.3)) {
      const std::uint64_t first = rng_.between(1, pages - 1);
      chunks = {{start, first}, {start + first + 1, pages - first}};
    } else {
      chunks = {{start, pages}};
    }
    // Emitted in reverse sometimes to exercise normalization.
    std::vector<Chunk> issued = chunks;
    if (rng_.chance(0.2)) std::reverse(issued.begin(), issued.end());
    emit_alloc(issued);
    objects_.push_back(Object{chunks});
  }

  bool delete_object() {
    for (std::size_t i = 0; i < objects_.size(); ++i) {
      if (!objects_[i].filled()) continue;
      for (const Chunk& c : objects_[i].chunks) emit_trim(c.start, c.length);
      objects_.erase(objects_.begin() + static_cast<std::ptrdiff_t>(i));
      return true;
    }
    return false;
  }

  void malformed_alloc() {
    const Lba start = rng_.below(span_ - 4);
    switch (rng_.below(4)) {
      case 0: return emit_alloc({{start, 0}});
      case 1: return emit_alloc({{start, 2}, {start + 2, 2}});
      case 2: return emit_alloc({});
      default: return emit_alloc({{capacity_ - 2, 8}});
    }
  }

  Rng rng_;
  std::uint64_t ppb_;
  std::uint64_t capacity_;
  std::uint64_t span_;
  Token next_token_ = 1;
  std::vector<Object> objects_;
  std::vector<Command> out_;
};

}  // namespace

std::vector<Command> fuzz_commands(const Geometry& geometry, std::uint64_t seed, std::size_t count) {
  return Generator(geometry, seed).run(count);
}

ReplayOutcome replay_engine(const Geometry& geometry, std::span<const Command> commands,
                            FtlOptions options) {
  Ftl ftl(geometry, options);
  ReplayOutcome out;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    try {
      ftl.apply(commands[i]);
    } catch (const SimError& e) {
      out.errors.push_back({i, e.code()});
    }
  }
  out.digest = digest(ftl.snapshot());
  return out;
}

}  // namespace fasim
