#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fasim/geometry.h"
#include "fasim/hostmodel.h"

namespace fasim {

enum class Mode { kVanilla, kFlashAlloc };

const char* to_string(Mode mode);
Mode parse_mode(const std::string& text);  // throws SimError(kConfigInvalid)

// Logical window a generator may touch. pages == 0 means "from start to the
// end of logical capacity".
struct Region {
  Lba start = 0;
  std::uint64_t pages = 0;
};

struct StreamProgram {
  std::uint32_t stream_id = 0;
  std::uint32_t tenant_id = 0;
  std::vector<HostOp> ops;
};

// Host-level event program: per-stream op lists to be fed to a HostModel.
struct Program {
  Region region;
  std::vector<StreamProgram> streams;

  std::uint64_t write_pages() const;
  std::uint64_t trim_pages() const;
};

std::uint64_t program_digest(const Program& program);

// Queues every stream of the program on a host model.
void submit_program(const Program& program, HostModel& host);

struct FioConfig {
  std::uint32_t writers = 8;
  std::uint64_t region_pages = 4096;  // per writer
  std::uint64_t overwrite_unit = 0;   // 0 selects one block
  std::uint64_t total_logical_writes = 0;  // 0 selects 3x the written regions
  Mode mode = Mode::kVanilla;
  Region region;
};

struct LsmConfig {
  std::uint32_t tenants = 1;
  std::uint32_t compaction_streams = 4;  // including the flush stream
  std::uint64_t sstable_pages = 2048;
  std::uint32_t levels = 3;
  std::uint32_t level_fanout = 10;
  std::uint32_t overlap_tables = 1;  // next-level tables merged per compaction
  double metadata_write_fraction = 0.05;
  std::uint64_t metadata_pages = 512;
  double fill_target = 0.9;  // steady-state live tables / table slots
  std::uint64_t total_logical_writes = 0;  // 0 selects 4x the region
  Mode mode = Mode::kVanilla;
  Region region;
};

struct LogFsConfig {
  std::uint32_t active_heads = 6;
  std::uint64_t segment_pages = 0;  // 0 selects one block
  double hot_fraction = 0.2;        // share of keys that are hot
  double hot_traffic = 0.8;         // share of updates going to hot keys
  double live_fraction = 0.8;       // keys / region pages
  std::uint64_t update_count = 0;   // 0 selects 3x the key count
  std::uint64_t sync_pages = 256;   // updates between host sync points
  double metadata_write_fraction = 0.0;
  std::uint64_t metadata_pages = 512;
  Mode mode = Mode::kVanilla;
  Region region;
};

struct JournalConfig {
  std::uint64_t journal_pages = 512;
  std::uint64_t batch_pages = 64;
  std::uint64_t tablespace_pages = 0;  // 0 selects the rest of the region
  std::uint64_t batches = 1500;
  Mode mode = Mode::kVanilla;
  Region region;
};

// All generators are pure functions of (config, geometry, seed) and throw
// SimError(kConfigInvalid) on bad input.
Program gen_fio(const FioConfig& cfg, const Geometry& geometry, std::uint64_t seed);
Program gen_lsm(const LsmConfig& cfg, const Geometry& geometry, std::uint64_t seed);
Program gen_logfs(const LogFsConfig& cfg, const Geometry& geometry, std::uint64_t seed);
Program gen_journal(const JournalConfig& cfg, const Geometry& geometry, std::uint64_t seed);

// Merges per-tenant programs: streams are renumbered in input order and
// stamped with the tenant id. Throws SimError(kRegionOverlap).
Program compose_tenants(const std::vector<std::pair<std::uint32_t, Program>>& tenants);

}  // namespace fasim
