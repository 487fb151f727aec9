#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fasim/command.h"
#include "fasim/errors.h"
#include "fasim/geometry.h"
#include "fasim/snapshot.h"

namespace fasim {

struct CommandError {
  std::size_t index = 0;  // position in the replayed stream
  ErrorCode code = ErrorCode::kConfigInvalid;
  bool operator==(const CommandError&) const = default;
};

struct ReplayOutcome {
  std::uint64_t digest = 0;
  std::vector<CommandError> errors;
};

struct RefOptions {
  std::uint32_t reserve_blocks = 0;  // 0 selects 2 + channels
  bool single_frontier = false;
  // Breaks greedy ties toward the highest block id. Only for proving that
  // digest comparison can tell engines apart.
  bool perturb_tie_break = false;
};

// Brute-force FTL used as an oracle. Flat page arrays, recount-on-demand,
// linear instance search; written separately from Ftl on purpose.
class RefFtl {
 public:
  explicit RefFtl(const Geometry& geometry, RefOptions options = {});

  void apply(const Command& command);
  DeviceSnapshot snapshot() const;

 private:
  struct Instance {
    InstanceId id = 0;
    std::vector<Chunk> chunks;
    std::vector<BlockId> blocks;
    std::uint64_t next_block = 0;
    std::uint32_t next_offset = 0;
    std::uint64_t written = 0;
    std::uint64_t total = 0;
  };
  static constexpr std::int64_t kNone = -1;

  std::size_t page_index(BlockId b, std::uint32_t off) const {
    return static_cast<std::size_t>(b) * ppb_ + off;
  }
  std::uint32_t valid_in(BlockId b) const;
  std::uint32_t free_blocks() const;
  bool in_frontier(BlockId b) const;
  Instance* owner_of(Lba lba);

  void write(Lba lba, std::uint64_t len, Token base);
  void trim(Lba lba, std::uint64_t len);
  void alloc(std::span<const Chunk> chunks);

  void unmap(Lba lba);
  std::int64_t place_normal(Lba lba, Token token, bool relocating);
  std::int64_t put(BlockId b, Lba lba, Token token);
  void erase(BlockId b);
  std::int64_t pick_victim(bool normal, bool orphan) const;
  void relocate_all(BlockId victim);
  std::vector<BlockId> reserve_clean(std::uint32_t n);
  void finish(std::size_t instance_pos);

  Geometry geometry_;
  RefOptions options_;
  std::uint32_t ppb_;
  std::uint32_t nblocks_;
  std::uint32_t reserve_;
  std::uint32_t slots_;

  std::vector<PageState> state_;
  std::vector<Lba> lba_;
  std::vector<Token> token_;
  std::vector<BlockKind> kind_;
  std::vector<std::optional<InstanceId>> owner_;
  std::vector<std::uint32_t> wp_;
  std::vector<std::uint64_t> erase_count_;

  std::vector<std::int64_t> map_;  // flat page index or kNone
  std::vector<bool> flag_;
  std::vector<std::int64_t> frontier_;
  std::uint32_t next_slot_ = 0;
  std::uint32_t fa_cursor_ = 0;
  InstanceId next_id_ = 1;
  std::vector<Instance> instances_;  // ascending id
  Counters counters_;
};

// Applies commands in order, recording failures by position and continuing.
ReplayOutcome replay_reference(const Geometry& geometry, std::span<const Command> commands,
                               RefOptions options = {});

}  // namespace fasim
