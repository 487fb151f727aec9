#pragma once

#include <compare>
#include <cstdint>

namespace fasim {

using BlockId = std::uint32_t;
using Lba = std::uint64_t;
using Token = std::uint64_t;
using InstanceId = std::uint64_t;

// Physical flash layout. Blocks are assigned to channels round-robin by id.
struct Geometry {
  std::uint32_t total_blocks = 128;
  std::uint32_t pages_per_block = 512;
  std::uint32_t page_size = 4096;
  std::uint32_t channels = 8;
  // Share of total_blocks hidden from the logical address space.
  double op_fraction = 0.10;

  std::uint32_t logical_blocks() const;
  std::uint64_t logical_capacity_pages() const {
    return static_cast<std::uint64_t>(logical_blocks()) * pages_per_block;
  }
  std::uint64_t physical_pages() const {
    return static_cast<std::uint64_t>(total_blocks) * pages_per_block;
  }
  std::uint32_t channel_of(BlockId block) const { return block % channels; }

  // Throws std::invalid_argument on a nonsensical layout.
  void validate() const;

  bool operator==(const Geometry&) const = default;
};

struct PhysPageAddr {
  BlockId block = 0;
  std::uint32_t offset = 0;

  auto operator<=>(const PhysPageAddr&) const = default;
};

}  // namespace fasim
