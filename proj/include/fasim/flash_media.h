#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fasim/geometry.h"

namespace fasim {

enum class BlockKind : std::uint8_t { kFree, kNormal, kFa };
enum class PageState : std::uint8_t { kClean, kValid, kInvalid };

const char* to_string(BlockKind kind);

// Physical state of one erase block. Pages are programmed strictly in order:
// everything below write_ptr is Valid or Invalid, everything above is Clean.
struct BlockState {
  BlockId id = 0;
  BlockKind kind = BlockKind::kFree;
  std::optional<InstanceId> fa_owner;
  std::uint32_t write_ptr = 0;
  std::vector<PageState> page_states;
  std::uint32_t valid_count = 0;
  std::uint64_t erase_count = 0;
  // Programs since boot; summed over blocks it equals the media counter.
  std::uint64_t programs = 0;
  // Reverse map page offset -> logical page, kept for relocation.
  std::vector<Lba> resident_lbas;
  std::vector<Token> contents;

  std::uint32_t invalid_count() const { return write_ptr - valid_count; }
  bool full() const { return write_ptr == page_states.size(); }
};

// Raw flash: program/erase/invalidate on append-only blocks. Knows nothing
// about logical mapping or garbage collection.
class FlashMedia {
 public:
  explicit FlashMedia(const Geometry& geometry);

  // Moves a Free block into service. Programming requires a claimed block.
  void claim(BlockId block, BlockKind kind, std::optional<InstanceId> owner = std::nullopt);
  void set_owner(BlockId block, std::optional<InstanceId> owner);
  // Returns a claimed but never-programmed block to Free without an erase.
  void release_unwritten(BlockId block);

  PhysPageAddr program_page(BlockId block, Lba lba, Token content);
  void erase_block(BlockId block);
  void invalidate_page(PhysPageAddr ppa);
  double block_utilization(BlockId block) const;

  const BlockState& block(BlockId block) const;
  const std::vector<BlockState>& blocks() const { return blocks_; }
  const Geometry& geometry() const { return geometry_; }
  std::uint64_t physical_programs() const { return physical_programs_; }
  std::uint64_t erases() const { return erases_; }

 private:
  BlockState& mutable_block(BlockId block);

  Geometry geometry_;
  std::vector<BlockState> blocks_;
  std::uint64_t physical_programs_ = 0;
  std::uint64_t erases_ = 0;
};

}  // namespace fasim
