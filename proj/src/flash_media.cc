#include "fasim/flash_media.h"

#include <algorithm>
#include <string>

#include "fasim/errors.h"

namespace fasim {

const char* to_string(BlockKind kind) {
  switch (kind) {
    case BlockKind::kFree: return "free";
    case BlockKind::kNormal: return "normal";
    case BlockKind::kFa: return "fa";
  }
  return "?";
}

FlashMedia::FlashMedia(const Geometry& geometry) : geometry_(geometry) {
  geometry_.validate();
  blocks_.resize(geometry_.total_blocks);
  for (BlockId id = 0; id < geometry_.total_blocks; ++id) {
    BlockState& b = blocks_[id];
    b.id = id;
    b.page_states.assign(geometry_.pages_per_block, PageState::kClean);
    b.resident_lbas.assign(geometry_.pages_per_block, 0);
    b.contents.assign(geometry_.pages_per_block, 0);
  }
}

BlockState& FlashMedia::mutable_block(BlockId block) {
  if (block >= blocks_.size()) {
    throw SimError(ErrorCode::kOutOfRange, "block " + std::to_string(block));
  }
  return blocks_[block];
}

const BlockState& FlashMedia::block(BlockId block) const {
  if (block >= blocks_.size()) {
    throw SimError(ErrorCode::kOutOfRange, "block " + std::to_string(block));
  }
  return blocks_[block];
}

void FlashMedia::claim(BlockId block, BlockKind kind, std::optional<InstanceId> owner) {
  BlockState& b = mutable_block(block);
  if (b.kind != BlockKind::kFree) {
    throw SimError(ErrorCode::kFreeBlock, "claiming non-free block " + std::to_string(block));
  }
  if (kind == BlockKind::kFree) {
    throw SimError(ErrorCode::kFreeBlock, "claim must assign a kind");
  }
  b.kind = kind;
  b.fa_owner = kind == BlockKind::kFa ? owner : std::nullopt;
}

void FlashMedia::set_owner(BlockId block, std::optional<InstanceId> owner) {
  BlockState& b = mutable_block(block);
  if (owner && b.kind != BlockKind::kFa) {
    throw SimError(ErrorCode::kFreeBlock, "owner on non-FA block " + std::to_string(block));
  }
  b.fa_owner = owner;
}

void FlashMedia::release_unwritten(BlockId block) {
  BlockState& b = mutable_block(block);
  if (b.write_ptr != 0) {
    throw SimError(ErrorCode::kEraseWithValidPages,
                   "release of programmed block " + std::to_string(block));
  }
  b.kind = BlockKind::kFree;
  b.fa_owner.reset();
}

PhysPageAddr FlashMedia::program_page(BlockId block, Lba lba, Token content) {
  BlockState& b = mutable_block(block);
  if (b.kind == BlockKind::kFree) {
    throw SimError(ErrorCode::kFreeBlock, "program into unclaimed block " + std::to_string(block));
  }
  if (b.full()) {
    throw SimError(ErrorCode::kBlockFull, "block " + std::to_string(block));
  }
  const std::uint32_t offset = b.write_ptr++;
  b.page_states[offset] = PageState::kValid;
  b.resident_lbas[offset] = lba;
  b.contents[offset] = content;
  ++b.valid_count;
  ++b.programs;
  ++physical_programs_;
  return PhysPageAddr{block, offset};
}

void FlashMedia::erase_block(BlockId block) {
  BlockState& b = mutable_block(block);
  if (b.valid_count > 0) {
    throw SimError(ErrorCode::kEraseWithValidPages,
                   "block " + std::to_string(block) + " has " +
                       std::to_string(b.valid_count) + " valid pages");
  }
  std::fill(b.page_states.begin(), b.page_states.end(), PageState::kClean);
  std::fill(b.resident_lbas.begin(), b.resident_lbas.end(), 0);
  std::fill(b.contents.begin(), b.contents.end(), 0);
  b.write_ptr = 0;
  b.kind = BlockKind::kFree;
  b.fa_owner.reset();
  ++b.erase_count;
  ++erases_;
}

void FlashMedia::invalidate_page(PhysPageAddr ppa) {
  BlockState& b = mutable_block(ppa.block);
  if (ppa.offset >= b.page_states.size() || b.page_states[ppa.offset] != PageState::kValid) {
    throw SimError(ErrorCode::kNotValid, "page " + std::to_string(ppa.block) + ":" +
                                             std::to_string(ppa.offset));
  }
  b.page_states[ppa.offset] = PageState::kInvalid;
  --b.valid_count;
}

double FlashMedia::block_utilization(BlockId block) const {
  const BlockState& b = this->block(block);
  if (b.kind == BlockKind::kFree) {
    throw SimError(ErrorCode::kFreeBlock, "utilization of free block " + std::to_string(block));
  }
  return static_cast<double>(b.valid_count) / geometry_.pages_per_block;
}

}  // namespace fasim
