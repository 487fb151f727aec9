#include <string>

#include "fasim/rng.h"
#include "program_builder.h"

namespace fasim {

using detail::require;

Program gen_fio(const FioConfig& cfg, const Geometry& geometry, std::uint64_t seed) {
  const Region region = detail::resolve_region(cfg.region, geometry);
  const std::uint64_t unit = cfg.overwrite_unit ? cfg.overwrite_unit : geometry.pages_per_block;
  require(cfg.writers >= 1, "fio: writers must be >= 1");
  require(unit % geometry.pages_per_block == 0, "fio: overwrite_unit must be block aligned");
  require(cfg.region_pages >= unit && cfg.region_pages % unit == 0,
          "fio: overwrite_unit must divide region_pages");
  require(cfg.writers * cfg.region_pages <= region.pages, "fio: writer regions exceed the region");

  const std::uint64_t units = cfg.region_pages / unit;
  const std::uint64_t layout = cfg.writers * cfg.region_pages;
  const std::uint64_t total = cfg.total_logical_writes ? cfg.total_logical_writes : 3 * layout;
  const std::uint64_t overwrite_units = total > layout ? (total - layout) / unit : 0;

  Rng rng(seed);
  detail::ProgramBuilder b(region);
  for (std::uint32_t w = 0; w < cfg.writers; ++w) b.add_stream();

  auto write_unit = [&](std::uint32_t w, std::uint64_t u) {
    const Lba lba = region.start + w * cfg.region_pages + u * unit;
    if (cfg.mode == Mode::kFlashAlloc) b.alloc(w, {{lba, unit}});
    b.write(w, lba, unit);
  };
  // Layout: each writer fills its file once, then overwrites random units.
  for (std::uint32_t w = 0; w < cfg.writers; ++w) {
    for (std::uint64_t u = 0; u < units; ++u) write_unit(w, u);
  }
  for (std::uint32_t w = 0; w < cfg.writers; ++w) {
    const std::uint64_t share = overwrite_units / cfg.writers + (w < overwrite_units % cfg.writers);
    for (std::uint64_t k = 0; k < share; ++k) write_unit(w, rng.below(units));
  }
  return b.take();
}

}  // namespace fasim
