#include <gtest/gtest.h>

#include "fasim/flash_media.h"
#include "fasim/rng.h"
#include "test_util.h"

namespace fasim {
namespace {

using testing::small_geometry;

TEST(Geometry, LogicalCapacityRoundsDownToBlocks) {
  Geometry g;  // 128 x 512, 10% OP
  EXPECT_EQ(g.logical_blocks(), 115u);
  EXPECT_EQ(g.logical_capacity_pages(), 115u * 512);
  EXPECT_EQ(g.channel_of(9), 1u);
}

TEST(Geometry, RejectsNonsense) {
  Geometry g;
  g.channels = 3;  // 128 blocks do not split into 3 equal groups
  EXPECT_THROW(g.validate(), std::invalid_argument);
  g = Geometry{};
  g.op_fraction = 1.0;
  EXPECT_THROW(g.validate(), std::invalid_argument);
}

TEST(FlashMedia, FirstProgramLandsAtOffsetZero) {
  FlashMedia m(Geometry{});
  m.claim(3, BlockKind::kNormal);
  const PhysPageAddr p = m.program_page(3, 42, 7);
  EXPECT_EQ(p, (PhysPageAddr{3, 0}));
  EXPECT_EQ(m.block(3).write_ptr, 1u);
  EXPECT_EQ(m.block(3).valid_count, 1u);
  EXPECT_EQ(m.block(3).resident_lbas[0], 42u);
}

TEST(FlashMedia, FullBlockRejectsProgram) {
  FlashMedia m(Geometry{});
  m.claim(0, BlockKind::kNormal);
  PhysPageAddr last;
  for (Lba i = 0; i < 512; ++i) last = m.program_page(0, i, i + 1);
  EXPECT_EQ(last.offset, 511u);
  EXPECT_TRUE(m.block(0).full());
  EXPECT_SIM_ERROR(m.program_page(0, 0, 1), ErrorCode::kBlockFull);
}

TEST(FlashMedia, ProgramRequiresClaim) {
  FlashMedia m(Geometry{});
  EXPECT_SIM_ERROR(m.program_page(5, 0, 1), ErrorCode::kFreeBlock);
  m.claim(5, BlockKind::kNormal);
  EXPECT_SIM_ERROR(m.claim(5, BlockKind::kNormal), ErrorCode::kFreeBlock);
}

TEST(FlashMedia, OffsetsStayMonotoneUnderAnyInterleaving) {
  const Geometry g = small_geometry(8, 16, 2);
  FlashMedia m(g);
  for (BlockId b = 0; b < g.total_blocks; ++b) m.claim(b, BlockKind::kNormal);
  std::vector<std::uint32_t> expect(g.total_blocks, 0);
  Rng rng(99);
  for (int i = 0; i < 8 * 16; ++i) {
    BlockId b;
    do b = static_cast<BlockId>(rng.below(g.total_blocks));
    while (expect[b] == g.pages_per_block);
    EXPECT_EQ(m.program_page(b, 0, 1).offset, expect[b]++);
  }
}

TEST(FlashMedia, EraseFullyInvalidBlock) {
  const Geometry g = small_geometry(4, 4, 1);
  FlashMedia m(g);
  m.claim(1, BlockKind::kNormal);
  for (int i = 0; i < 4; ++i) m.program_page(1, i, 1);
  for (std::uint32_t i = 0; i < 4; ++i) m.invalidate_page({1, i});
  EXPECT_EQ(m.block(1).valid_count, 0u);
  m.erase_block(1);
  EXPECT_EQ(m.block(1).kind, BlockKind::kFree);
  EXPECT_EQ(m.block(1).erase_count, 1u);
  EXPECT_EQ(m.erases(), 1u);
}

TEST(FlashMedia, EraseRefusesValidPages) {
  const Geometry g = small_geometry(4, 4, 1);
  FlashMedia m(g);
  m.claim(0, BlockKind::kNormal);
  m.program_page(0, 0, 1);
  m.program_page(0, 1, 1);
  m.invalidate_page({0, 0});
  EXPECT_SIM_ERROR(m.erase_block(0), ErrorCode::kEraseWithValidPages);
}

TEST(FlashMedia, EraseThenProgramRestartsAtZero) {
  const Geometry g = small_geometry(4, 4, 1);
  FlashMedia m(g);
  m.claim(2, BlockKind::kNormal);
  m.program_page(2, 0, 1);
  m.program_page(2, 1, 2);
  m.invalidate_page({2, 0});
  m.invalidate_page({2, 1});
  m.erase_block(2);
  m.claim(2, BlockKind::kFa, InstanceId{4});
  EXPECT_EQ(m.program_page(2, 9, 3).offset, 0u);
  EXPECT_EQ(m.block(2).fa_owner, InstanceId{4});
}

TEST(FlashMedia, InvalidateCountsDown) {
  const Geometry g = small_geometry(4, 16, 1);
  FlashMedia m(g);
  m.claim(0, BlockKind::kNormal);
  for (int i = 0; i < 10; ++i) m.program_page(0, i, 1);
  EXPECT_EQ(m.block(0).valid_count, 10u);
  m.invalidate_page({0, 3});
  EXPECT_EQ(m.block(0).valid_count, 9u);
  EXPECT_EQ(m.block(0).page_states[3], PageState::kInvalid);
  EXPECT_SIM_ERROR(m.invalidate_page({0, 3}), ErrorCode::kNotValid);
  EXPECT_SIM_ERROR(m.invalidate_page({0, 12}), ErrorCode::kNotValid);  // clean page
}

TEST(FlashMedia, InvalidatingEveryPageMakesBlockErasable) {
  const Geometry g = small_geometry(4, 8, 1);
  FlashMedia m(g);
  m.claim(3, BlockKind::kNormal);
  for (int i = 0; i < 8; ++i) m.program_page(3, i, 1);
  for (std::uint32_t i = 0; i < 8; ++i) m.invalidate_page({3, i});
  EXPECT_EQ(m.block(3).valid_count, 0u);
  EXPECT_NO_THROW(m.erase_block(3));
}

TEST(FlashMedia, Utilization) {
  FlashMedia m(Geometry{});
  m.claim(0, BlockKind::kNormal);
  m.claim(1, BlockKind::kNormal);
  m.claim(2, BlockKind::kNormal);
  for (int i = 0; i < 512; ++i) {
    m.program_page(0, i, 1);
    m.program_page(1, i, 1);
    m.program_page(2, i, 1);
  }
  for (std::uint32_t i = 0; i < 512; ++i) m.invalidate_page({1, i});
  for (std::uint32_t i = 128; i < 512; ++i) m.invalidate_page({2, i});
  EXPECT_DOUBLE_EQ(m.block_utilization(0), 1.0);
  EXPECT_DOUBLE_EQ(m.block_utilization(1), 0.0);
  EXPECT_DOUBLE_EQ(m.block_utilization(2), 0.25);
}

TEST(FlashMedia, ReleaseUnwrittenReturnsToFree) {
  FlashMedia m(Geometry{});
  m.claim(7, BlockKind::kFa, InstanceId{1});
  m.release_unwritten(7);
  EXPECT_EQ(m.block(7).kind, BlockKind::kFree);
  EXPECT_EQ(m.block(7).erase_count, 0u);
}

}  // namespace
}  // namespace fasim
