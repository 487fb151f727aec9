#include <algorithm>
#include <optional>
#include <string>

#include "fasim/rng.h"
#include "program_builder.h"

namespace fasim {
namespace {

using detail::require;

constexpr std::uint64_t kNoKey = UINT64_MAX;

struct Segment {
  enum class State { kFree, kActive, kFull } state = State::kFree;
  std::vector<std::uint64_t> keys;  // key stored at each written offset, or kNoKey once dead
  std::uint64_t live = 0;
};

struct Location {
  std::uint64_t segment = 0;
  std::uint64_t offset = 0;
};

// Multi-head log-structured file system: every key update is appended to
// the active segment of the head its hotness maps to; full segments are
// cleaned greedily by re-appending their live keys and trimming them.
class LogFs {
 public:
  LogFs(const LogFsConfig& cfg, std::uint64_t segment_pages, std::uint64_t segments, Lba base,
        detail::ProgramBuilder& b)
      : cfg_(cfg),
        seg_pages_(segment_pages),
        base_(base),
        b_(b),
        segments_(segments),
        heads_(cfg.active_heads),
        runs_(cfg.active_heads) {
    for (std::uint32_t h = 0; h < cfg.active_heads; ++h) streams_.push_back(b.add_stream());
    cleaner_ = b.add_stream();
    streams_.push_back(cleaner_);
    hot_heads_ = std::max<std::uint32_t>(1, cfg.active_heads / 2);
    if (hot_heads_ == cfg.active_heads && cfg.active_heads > 1) --hot_heads_;
  }

  std::vector<std::size_t> all_streams() const { return streams_; }

  void attach_metadata(std::size_t stream) { streams_.push_back(stream); }

  void place(std::uint64_t key, std::uint64_t hot_keys, bool relocation) {
    std::uint32_t head;
    const std::uint32_t cold_heads = cfg_.active_heads - hot_heads_;
    if (cold_heads == 0) {
      head = static_cast<std::uint32_t>(key % cfg_.active_heads);
    } else if (key < hot_keys && !relocation) {
      head = static_cast<std::uint32_t>(key % hot_heads_);
    } else {
      head = hot_heads_ + static_cast<std::uint32_t>(key % cold_heads);
    }
    append(head, key);
  }

  void kill(std::uint64_t key) {
    if (key >= where_.size() || !where_[key]) return;
    const Location loc = *where_[key];
    Segment& s = segments_[loc.segment];
    s.keys[loc.offset] = kNoKey;
    --s.live;
    where_[key].reset();
  }

  void ensure_keys(std::uint64_t n) { where_.resize(n); }

  std::uint64_t free_segments() const {
    return static_cast<std::uint64_t>(std::count_if(segments_.begin(), segments_.end(), [](const Segment& s) {
      return s.state == Segment::State::kFree;
    }));
  }

  // Greedy cleaning, one victim at a time: fewest live pages first, lowest
  // segment on ties. A victim is trimmed once its live keys are re-appended.
  void clean(std::uint64_t want_free, std::uint64_t hot_keys) {
    if (free_segments() >= want_free) return;
    flush_runs();
    b_.barrier(streams_);
    while (free_segments() < want_free) {
      std::optional<std::uint64_t> best;
      for (std::uint64_t i = 0; i < segments_.size(); ++i) {
        const Segment& s = segments_[i];
        if (s.state != Segment::State::kFull) continue;
        if (!best || s.live < segments_[*best].live) best = i;
      }
      // Stop once a victim would cost a whole segment to clean.
      if (!best || segments_[*best].live >= seg_pages_) break;
      const std::vector<std::uint64_t> keys = segments_[*best].keys;
      for (const std::uint64_t key : keys) {
        if (key == kNoKey) continue;
        kill(key);
        place(key, hot_keys, /*relocation=*/true);
      }
      flush_runs();
      b_.barrier(streams_);
      b_.trim(cleaner_, lba_of(*best, 0), seg_pages_);
      segments_[*best] = Segment{};
      b_.barrier(streams_);
    }
  }

  void flush_runs() {
    for (std::uint32_t h = 0; h < runs_.size(); ++h) {
      if (runs_[h].second) b_.write(streams_[h], runs_[h].first, runs_[h].second);
      runs_[h] = {0, 0};
    }
  }

  void sync() {
    flush_runs();
    b_.barrier(streams_);
  }

 private:
  Lba lba_of(std::uint64_t seg, std::uint64_t off) const { return base_ + seg * seg_pages_ + off; }

  void append(std::uint32_t head, std::uint64_t key) {
    if (!heads_[head] || segments_[*heads_[head]].keys.size() == seg_pages_) open(head);
    const std::uint64_t seg = *heads_[head];
    Segment& s = segments_[seg];
    const std::uint64_t off = s.keys.size();
    s.keys.push_back(key);
    ++s.live;
    where_[key] = Location{seg, off};
    const Lba lba = lba_of(seg, off);
    auto& run = runs_[head];
    if (run.second && run.first + run.second == lba) {
      ++run.second;
    } else {
      if (run.second) b_.write(streams_[head], run.first, run.second);
      run = {lba, 1};
    }
    if (s.keys.size() == seg_pages_) {
      s.state = Segment::State::kFull;
      heads_[head].reset();
    }
  }

  void open(std::uint32_t head) {
    auto it = std::find_if(segments_.begin(), segments_.end(),
                           [](const Segment& s) { return s.state == Segment::State::kFree; });
    require(it != segments_.end(), "logfs: ran out of free segments; lower live_fraction");
    const auto seg = static_cast<std::uint64_t>(it - segments_.begin());
    it->state = Segment::State::kActive;
    heads_[head] = seg;
    auto& run = runs_[head];
    if (run.second) b_.write(streams_[head], run.first, run.second);
    run = {0, 0};
    if (cfg_.mode == Mode::kFlashAlloc) b_.alloc(streams_[head], {{lba_of(seg, 0), seg_pages_}});
  }

  const LogFsConfig& cfg_;
  std::uint64_t seg_pages_;
  Lba base_;
  detail::ProgramBuilder& b_;
  std::vector<Segment> segments_;
  std::vector<std::optional<std::uint64_t>> heads_;
  std::vector<std::pair<Lba, std::uint64_t>> runs_;  // pending append run per head
  std::vector<std::optional<Location>> where_;
  std::vector<std::size_t> streams_;
  std::size_t cleaner_ = 0;
  std::uint32_t hot_heads_ = 1;
};

}  // namespace

Program gen_logfs(const LogFsConfig& cfg, const Geometry& geometry, std::uint64_t seed) {
  const Region region = detail::resolve_region(cfg.region, geometry);
  const std::uint64_t seg_pages = cfg.segment_pages ? cfg.segment_pages : geometry.pages_per_block;
  require(cfg.active_heads >= 1, "logfs: active_heads must be >= 1");
  require(seg_pages % geometry.pages_per_block == 0, "logfs: segment_pages must be a block multiple");
  require(cfg.hot_fraction >= 0 && cfg.hot_fraction <= 1, "logfs: hot_fraction must be in [0, 1]");
  require(cfg.hot_traffic >= 0 && cfg.hot_traffic <= 1, "logfs: hot_traffic must be in [0, 1]");
  require(cfg.live_fraction > 0 && cfg.live_fraction < 1, "logfs: live_fraction must be in (0, 1)");
  require(cfg.metadata_write_fraction >= 0 && cfg.metadata_write_fraction < 1,
          "logfs: metadata_write_fraction must be in [0, 1)");
  const std::uint64_t metadata = cfg.metadata_write_fraction > 0 ? cfg.metadata_pages : 0;
  require(region.pages > metadata, "logfs: region too small");
  const std::uint64_t segments = (region.pages - metadata) / seg_pages;
  const std::uint64_t reserve = cfg.active_heads + 2;
  require(segments > 2 * reserve, "logfs: region holds too few segments");
  const auto keys = static_cast<std::uint64_t>(cfg.live_fraction * static_cast<double>(segments * seg_pages));
  require(keys >= 1 && keys + (reserve + cfg.active_heads) * seg_pages <= segments * seg_pages,
          "logfs: live_fraction leaves no room for cleaning");
  const auto hot_keys = static_cast<std::uint64_t>(cfg.hot_fraction * static_cast<double>(keys));
  const std::uint64_t updates = cfg.update_count ? cfg.update_count : 3 * keys;

  Rng rng(seed);
  detail::ProgramBuilder b(region);
  LogFs fs(cfg, seg_pages, segments, region.start, b);
  std::optional<std::size_t> meta_stream;
  const Lba meta_base = region.start + segments * seg_pages;
  if (metadata) {
    meta_stream = b.add_stream();
    fs.attach_metadata(*meta_stream);
  }
  fs.ensure_keys(keys);
  double carry = 0;
  std::uint64_t since_sync = 0;
  auto step = [&](std::uint64_t key) {
    fs.kill(key);
    fs.place(key, hot_keys, false);
    if (meta_stream) {
      const double f = cfg.metadata_write_fraction;
      carry += f / (1.0 - f);
      while (carry >= 1.0) {
        b.write(*meta_stream, meta_base + rng.below(metadata), 1);
        carry -= 1.0;
      }
    }
    fs.clean(reserve, hot_keys);
    if (++since_sync == cfg.sync_pages) {
      fs.sync();
      since_sync = 0;
    }
  };
  for (std::uint64_t k = 0; k < keys; ++k) step(k);
  const std::uint64_t cold_keys = keys - hot_keys;
  for (std::uint64_t u = 0; u < updates; ++u) {
    const bool hot = hot_keys > 0 && (cold_keys == 0 || rng.chance(cfg.hot_traffic));
    step(hot ? rng.below(hot_keys) : hot_keys + rng.below(cold_keys));
  }
  fs.flush_runs();
  return b.take();
}

}  // namespace fasim
