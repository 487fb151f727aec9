#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <string>

#include "fasim/rng.h"
#include "program_builder.h"

namespace fasim {
namespace {

using detail::require;

struct Table {
  std::uint64_t slot = 0;
};

// One leveled LSM instance. Tables are block-multiple objects occupying a
// fixed logical slot; they are written whole and trimmed whole.
class LsmModel {
 public:
  LsmModel(const LsmConfig& cfg, Region region, std::uint32_t tenant,
           detail::ProgramBuilder& b, Rng& rng)
      : cfg_(cfg), region_(region), b_(b), rng_(rng), levels_(cfg.levels) {
    slots_ = (region.pages - cfg.metadata_pages) / cfg.sstable_pages;
    require(slots_ >= 4, "lsm: region holds fewer than 4 sstables");
    target_ = std::max<std::uint64_t>(2, static_cast<std::uint64_t>(cfg.fill_target * slots_));
    for (std::uint64_t s = 0; s < slots_; ++s) free_slots_.insert(s);
    metadata_start_ = region.start + slots_ * cfg.sstable_pages;
    for (std::uint32_t i = 0; i < cfg.compaction_streams; ++i) job_streams_.push_back(b.add_stream(tenant));
    if (cfg.metadata_write_fraction > 0) metadata_stream_ = b.add_stream(tenant);
  }

  // Plays one round: a flush plus the compactions it makes necessary, all
  // running concurrently, followed by a sync point. Returns pages written.
  std::uint64_t round() {
    std::uint64_t pages = 0;
    std::vector<std::vector<Table>> produced(levels_.size());
    std::vector<std::uint64_t> released;
    std::set<std::uint64_t> busy;  // slots consumed as inputs this round

    if (!free_slots_.empty()) {
      produced[0].push_back(write_table(job_streams_[0]));
      pages += cfg_.sstable_pages;
    }

    std::size_t job = 1;
    for (std::size_t level = 0; level + 1 < levels_.size(); ++level) {
      while (job < job_streams_.size()) {
        std::vector<std::size_t> candidates = unused(level, busy);
        if (candidates.size() <= capacity(level)) break;
        // L0 drains oldest first; deeper levels pick round-robin by key,
        // which a random pick stands in for.
        const std::size_t victim = level == 0 ? candidates.front() : candidates[rng_.below(candidates.size())];
        std::vector<std::uint64_t> inputs{levels_[level][victim].slot};
        std::vector<std::size_t> next = unused(level + 1, busy);
        for (std::uint32_t k = 0; k < cfg_.overlap_tables && !next.empty(); ++k) {
          const std::size_t pick = rng_.below(next.size());
          inputs.push_back(levels_[level + 1][next[pick]].slot);
          next.erase(next.begin() + static_cast<std::ptrdiff_t>(pick));
        }
        std::size_t outputs = inputs.size();
        if (live() > target_ && outputs > 1) --outputs;
        if (free_slots_.size() < outputs) break;

        const std::size_t stream = job_streams_[job++];
        for (std::size_t k = 0; k < outputs; ++k) {
          produced[level + 1].push_back(write_table(stream));
          pages += cfg_.sstable_pages;
        }
        for (std::uint64_t slot : inputs) {
          b_.trim(stream, slot_lba(slot), cfg_.sstable_pages);
          busy.insert(slot);
          released.push_back(slot);
          --live_;
        }
      }
    }

    for (std::size_t level = 0; level < levels_.size(); ++level) {
      auto& tables = levels_[level];
      tables.erase(std::remove_if(tables.begin(), tables.end(),
                                  [&](const Table& t) { return busy.count(t.slot) > 0; }),
                   tables.end());
      tables.insert(tables.end(), produced[level].begin(), produced[level].end());
    }

    if (metadata_stream_) pages += write_metadata(pages);
    b_.barrier(job_streams_);
    if (metadata_stream_) b_.barrier({*metadata_stream_});
    // Trimmed slots become reusable only after the sync point.
    for (std::uint64_t slot : released) free_slots_.insert(slot);
    return pages;
  }

 private:
  std::uint64_t live() const { return live_; }
  std::uint64_t capacity(std::size_t level) const {
    std::uint64_t cap = 1;
    for (std::size_t i = 0; i < level; ++i) cap *= cfg_.level_fanout;
    return cap;
  }
  Lba slot_lba(std::uint64_t slot) const { return region_.start + slot * cfg_.sstable_pages; }

  std::vector<std::size_t> unused(std::size_t level, const std::set<std::uint64_t>& busy) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < levels_[level].size(); ++i) {
      if (!busy.count(levels_[level][i].slot)) out.push_back(i);
    }
    return out;
  }

  Table write_table(std::size_t stream) {
    // Random free slot: file systems rarely hand out extents in order.
    auto it = free_slots_.begin();
    std::advance(it, static_cast<std::ptrdiff_t>(rng_.below(free_slots_.size())));
    const Table t{*it};
    free_slots_.erase(it);
    const Lba lba = slot_lba(t.slot);
    if (cfg_.mode == Mode::kFlashAlloc) b_.alloc(stream, {{lba, cfg_.sstable_pages}});
    b_.write(stream, lba, cfg_.sstable_pages);
    ++live_;
    return t;
  }

  std::uint64_t write_metadata(std::uint64_t table_pages) {
    const double f = cfg_.metadata_write_fraction;
    carry_ += static_cast<double>(table_pages) * f / (1.0 - f);
    const auto n = static_cast<std::uint64_t>(carry_);
    carry_ -= static_cast<double>(n);
    for (std::uint64_t i = 0; i < n; ++i) {
      b_.write(*metadata_stream_, metadata_start_ + rng_.below(cfg_.metadata_pages), 1);
    }
    return n;
  }

  const LsmConfig& cfg_;
  Region region_;
  detail::ProgramBuilder& b_;
  Rng& rng_;
  std::vector<std::vector<Table>> levels_;
  std::uint64_t slots_ = 0;
  std::uint64_t target_ = 0;
  std::uint64_t live_ = 0;
  std::set<std::uint64_t> free_slots_;
  Lba metadata_start_ = 0;
  std::vector<std::size_t> job_streams_;
  std::optional<std::size_t> metadata_stream_;
  double carry_ = 0;
};

}  // namespace

Program gen_lsm(const LsmConfig& cfg, const Geometry& geometry, std::uint64_t seed) {
  const Region region = detail::resolve_region(cfg.region, geometry);
  require(cfg.tenants >= 1, "lsm: tenants must be >= 1");
  require(cfg.compaction_streams >= 2, "lsm: need a flush stream and a compaction stream");
  require(cfg.sstable_pages >= geometry.pages_per_block &&
              cfg.sstable_pages % geometry.pages_per_block == 0,
          "lsm: sstable_pages must be a positive block multiple");
  require(cfg.levels >= 2, "lsm: levels must be >= 2");
  require(cfg.level_fanout >= 1, "lsm: level_fanout must be >= 1");
  require(cfg.metadata_write_fraction >= 0 && cfg.metadata_write_fraction < 1,
          "lsm: metadata_write_fraction must be in [0, 1)");
  require(cfg.metadata_write_fraction == 0 || cfg.metadata_pages >= 1,
          "lsm: metadata traffic needs metadata_pages");
  require(cfg.fill_target > 0 && cfg.fill_target <= 1, "lsm: fill_target must be in (0, 1]");

  // Tenants get equal table-aligned shares of the region.
  const std::uint64_t share = region.pages / cfg.tenants;
  require(share > cfg.metadata_pages, "lsm: region too small for its tenants");
  const std::uint64_t total = cfg.total_logical_writes ? cfg.total_logical_writes : 4 * region.pages;

  Rng rng(seed);
  detail::ProgramBuilder b(region);
  std::vector<LsmModel> models;
  models.reserve(cfg.tenants);
  for (std::uint32_t t = 0; t < cfg.tenants; ++t) {
    models.emplace_back(cfg, Region{region.start + t * share, share}, t, b, rng);
  }
  std::uint64_t written = 0;
  while (written < total) {
    std::uint64_t round_pages = 0;
    for (auto& m : models) round_pages += m.round();
    if (round_pages == 0) break;
    written += round_pages;
  }
  return b.take();
}

}  // namespace fasim
