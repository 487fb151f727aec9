#pragma once

#include <cstdint>

namespace fasim {

// Cumulative device counters. physical_programs always equals
// logical_pages_written + copyback_programs.
struct Counters {
  std::uint64_t logical_pages_written = 0;
  std::uint64_t physical_programs = 0;
  std::uint64_t copyback_programs = 0;
  std::uint64_t erases = 0;
  std::uint64_t trim_page_invalidations = 0;
  std::uint64_t trim_block_erases = 0;
  // Host reads plus the read half of every copyback.
  std::uint64_t page_reads = 0;

  bool operator==(const Counters&) const = default;
};

inline Counters operator-(const Counters& a, const Counters& b) {
  return Counters{a.logical_pages_written - b.logical_pages_written,
                  a.physical_programs - b.physical_programs,
                  a.copyback_programs - b.copyback_programs,
                  a.erases - b.erases,
                  a.trim_page_invalidations - b.trim_page_invalidations,
                  a.trim_block_erases - b.trim_block_erases,
                  a.page_reads - b.page_reads};
}

}  // namespace fasim
