#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fasim/counters.h"
#include "fasim/flash_media.h"
#include "fasim/flashalloc.h"
#include "fasim/geometry.h"

namespace fasim {

// Engine-neutral copy of every observable piece of device state. Both the
// main FTL and the reference oracle export one; digests are compared.
struct DeviceSnapshot {
  struct MapEntry {
    bool mapped = false;
    PhysPageAddr ppa;
    bool fa_flag = false;
  };
  struct Block {
    BlockKind kind = BlockKind::kFree;
    std::optional<InstanceId> owner;
    std::uint32_t write_ptr = 0;
    std::uint64_t erase_count = 0;
    std::vector<PageState> pages;
    // Stored lba/token of every programmed page; zero for Clean pages.
    std::vector<Lba> lbas;
    std::vector<Token> tokens;
  };
  struct Instance {
    InstanceId id = 0;
    std::vector<Chunk> chunks;
    std::vector<BlockId> blocks;
    std::uint64_t next_block = 0;
    std::uint32_t next_offset = 0;
    std::uint64_t pages_written = 0;
    std::uint64_t total_pages = 0;
  };

  Geometry geometry;
  std::vector<MapEntry> mapping;
  std::vector<Block> blocks;
  std::vector<Instance> instances;  // ascending id
  std::vector<std::optional<BlockId>> frontier;
  std::uint32_t next_slot = 0;
  std::uint32_t fa_channel_cursor = 0;
  InstanceId next_instance_id = 0;
  Counters counters;
};

// FNV-1a over a canonical little-endian serialization.
std::uint64_t digest(const DeviceSnapshot& snapshot);

}  // namespace fasim
