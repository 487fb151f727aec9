#include <string>

#include "fasim/rng.h"
#include "program_builder.h"

namespace fasim {

using detail::require;

// Double-write journal: every batch of dirty pages is appended to a small
// cyclic journal and also written in place at random tablespace pages.
Program gen_journal(const JournalConfig& cfg, const Geometry& geometry, std::uint64_t seed) {
  const Region region = detail::resolve_region(cfg.region, geometry);
  require(cfg.journal_pages >= 1, "journal: journal_pages must be >= 1");
  require(cfg.batch_pages >= 1 && cfg.journal_pages % cfg.batch_pages == 0,
          "journal: batch_pages must divide journal_pages");
  require(cfg.journal_pages < region.pages, "journal: journal does not fit the region");
  require(cfg.mode == Mode::kVanilla || cfg.journal_pages % geometry.pages_per_block == 0,
          "journal: flashalloc mode needs a block-multiple journal");
  const std::uint64_t tablespace =
      cfg.tablespace_pages ? cfg.tablespace_pages : region.pages - cfg.journal_pages;
  require(tablespace >= 1 && tablespace <= region.pages - cfg.journal_pages,
          "journal: tablespace does not fit the region");

  Rng rng(seed);
  detail::ProgramBuilder b(region);
  if (cfg.batches == 0) return b.take();
  const std::size_t journal = b.add_stream();
  const std::size_t table = b.add_stream();
  const Lba ring = region.start;
  const Lba table_base = region.start + cfg.journal_pages;
  const bool fa = cfg.mode == Mode::kFlashAlloc;

  std::uint64_t cursor = 0;
  if (fa) b.alloc(journal, {{ring, cfg.journal_pages}});
  for (std::uint64_t batch = 0; batch < cfg.batches; ++batch) {
    if (cursor == cfg.journal_pages) {
      cursor = 0;
      // Reusing the ring: discard the previous cycle, then dedicate fresh blocks.
      if (fa) {
        b.trim(journal, ring, cfg.journal_pages);
        b.alloc(journal, {{ring, cfg.journal_pages}});
      }
    }
    b.write(journal, ring + cursor, cfg.batch_pages);
    cursor += cfg.batch_pages;
    for (std::uint64_t i = 0; i < cfg.batch_pages; ++i) b.write(table, table_base + rng.below(tablespace), 1);
    b.barrier_all();
  }
  return b.take();
}

}  // namespace fasim
