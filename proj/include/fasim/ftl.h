#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "fasim/command.h"
#include "fasim/counters.h"
#include "fasim/flash_media.h"
#include "fasim/flashalloc.h"
#include "fasim/geometry.h"
#include "fasim/snapshot.h"

namespace fasim {

struct FtlOptions {
  // GC runs while the free pool is below this. 0 selects 2 + channels.
  std::uint32_t reserve_blocks = 0;
  // One frontier instead of one per channel (striping ablation).
  bool single_frontier = false;
};

struct MappingEntry {
  std::optional<PhysPageAddr> ppa;
  // Set exactly while the lba is covered by an active FA instance.
  bool fa_flag = false;
};

enum class VictimClass {
  kNormal,      // closed Normal blocks
  kFaEligible,  // orphan FA blocks, i.e. FA blocks of destructed instances
};

struct WriteReceipt {
  std::uint64_t programs = 0;  // physical programs caused, copybacks included
  std::uint64_t copybacks_triggered = 0;
};

struct TrimReceipt {
  std::uint64_t pages_invalidated = 0;
  std::uint64_t blocks_erased = 0;
};

struct RegionReport {
  std::uint32_t fa_blocks = 0;
  std::uint32_t normal_blocks = 0;
  std::uint32_t free_blocks = 0;
};

// Page-mapping FTL with the FlashAlloc extension.
//
// Normal writes are striped page by page over per-channel frontier blocks in
// arrival order. Writes whose lba falls inside an active FA instance are
// appended to that instance's dedicated blocks instead. GC is greedy (fewest
// valid pages, lowest id on ties) and never relocates into FA blocks.
//
// All state is plain values; an Ftl can be copied to fork a simulation.
class Ftl {
 public:
  explicit Ftl(const Geometry& geometry, FtlOptions options = {});

  WriteReceipt host_write(Lba lba_start, std::uint64_t length, Token content_base);
  Token host_read(Lba lba);
  TrimReceipt host_trim(Lba lba_start, std::uint64_t length);

  InstanceId flash_alloc(std::span<const Chunk> chunks);
  std::optional<InstanceId> probe(Lba lba) const { return registry_.probe(lba); }
  void destruct_instance(InstanceId id);
  RegionReport gc_region_report() const;

  BlockId select_victim(VictimClass kind) const;
  // Returns a Normal frontier block with room, collecting garbage first when
  // the pool is below the reserve.
  BlockId gc_for_normal_write();
  // Makes at least n clean blocks available and returns the ones FlashAlloc
  // would dedicate, in channel-striped order. The blocks stay in the pool.
  std::vector<BlockId> secure_clean_blocks(std::uint32_t n);

  // Dispatches one device command.
  void apply(const Command& command);

  const Geometry& geometry() const { return media_.geometry(); }
  const FlashMedia& media() const { return media_; }
  const MappingEntry& entry(Lba lba) const;
  const Counters& counters() const { return counters_; }
  const FaRegistry& registry() const { return registry_; }
  const std::set<BlockId>& free_pool() const { return free_pool_; }
  std::span<const std::optional<BlockId>> frontier() const { return frontier_; }
  std::uint32_t reserve_threshold() const { return reserve_; }

  DeviceSnapshot snapshot() const;
  // Throws std::logic_error naming the first broken invariant.
  void check_invariants() const;

 private:
  std::uint32_t frontier_slots() const { return static_cast<std::uint32_t>(frontier_.size()); }
  void check_range(Lba lba_start, std::uint64_t length) const;

  PhysPageAddr program(BlockId block, Lba lba, Token token);
  void drop_mapping(Lba lba);
  void normal_host_write(Lba lba, Token token);
  void fa_append(InstanceId id, Lba lba, Token token);
  PhysPageAddr append_normal(Lba lba, Token token, bool in_gc);
  std::uint32_t open_frontier(std::uint32_t slot, bool in_gc);
  BlockId take_free(std::optional<std::uint32_t> channel);

  std::optional<BlockId> best_victim(bool normal, bool orphan_fa) const;
  bool is_frontier(BlockId block) const;
  void run_normal_gc();
  void collect(BlockId victim);
  void erase_to_pool(BlockId block);

  FlashMedia media_;
  std::uint32_t reserve_;
  std::vector<MappingEntry> mapping_;
  std::set<BlockId> free_pool_;
  std::vector<std::optional<BlockId>> frontier_;
  std::uint32_t next_slot_ = 0;
  std::uint32_t fa_channel_cursor_ = 0;
  FaRegistry registry_;
  InstanceId next_instance_id_ = 1;
  Counters counters_;
};

}  // namespace fasim
