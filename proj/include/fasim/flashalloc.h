#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "fasim/geometry.h"

namespace fasim {

// A contiguous logical range [start, start + length).
struct Chunk {
  Lba start = 0;
  std::uint64_t length = 0;

  Lba end() const { return start + length; }
  bool contains(Lba lba) const { return lba >= start && lba < end(); }
  bool operator==(const Chunk&) const = default;
};

// Sorts chunks by start and checks they are non-empty, inside
// [0, capacity_pages), and pairwise neither overlapping nor adjacent.
// Throws SimError(kMalformedChunks).
std::vector<Chunk> normalize_chunks(std::span<const Chunk> chunks, std::uint64_t capacity_pages);

// Device-side record binding a logical range to dedicated flash blocks.
struct FaInstance {
  InstanceId id = 0;
  std::vector<Chunk> chunks;  // sorted, normalized
  std::vector<BlockId> dedicated_blocks;
  // next_write_ptr: index into dedicated_blocks plus page offset.
  std::size_t next_block = 0;
  std::uint32_t next_offset = 0;
  std::uint64_t pages_written = 0;
  // Allocated capacity; the chunk total rounded up to whole blocks.
  std::uint64_t total_pages = 0;

  std::uint64_t range_pages() const;
  bool contains(Lba lba) const;
};

// Active instances plus an ordered interval index over their chunks.
// Probing is O(log #chunks); probe_linear is the plain scan it must agree with.
class FaRegistry {
 public:
  void add(FaInstance instance);
  FaInstance remove(InstanceId id);

  FaInstance* find(InstanceId id);
  const FaInstance* find(InstanceId id) const;

  std::optional<InstanceId> probe(Lba lba) const;
  std::optional<InstanceId> probe_linear(Lba lba) const;
  // True if any chunk intersects an active instance's range.
  bool overlaps(std::span<const Chunk> chunks) const;

  const std::map<InstanceId, FaInstance>& instances() const { return active_; }
  std::size_t size() const { return active_.size(); }

 private:
  struct IndexEntry {
    Lba end;
    InstanceId id;
  };
  std::map<InstanceId, FaInstance> active_;
  std::map<Lba, IndexEntry> index_;  // chunk start -> (end, owner)
};

}  // namespace fasim
