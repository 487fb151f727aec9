#include <gtest/gtest.h>

#include <set>

#include "fasim/ftl.h"
#include "fasim/fuzz.h"
#include "fasim/hostmodel.h"
#include "test_util.h"

namespace fasim {
namespace {

using testing::small_geometry;

std::uint32_t total_valid(const Ftl& ftl) {
  std::uint32_t n = 0;
  for (const auto& b : ftl.media().blocks()) n += b.valid_count;
  return n;
}

// 8 blocks of 4 pages on one channel; 16 logical pages.
Ftl tiny(std::uint32_t reserve = 1) {
  FtlOptions o;
  o.reserve_blocks = reserve;
  return Ftl(small_geometry(8, 4, 1, 0.5), o);
}

TEST(FtlWrite, OnePageOnEmptyDevice) {
  Ftl ftl(Geometry{});
  const WriteReceipt r = ftl.host_write(10, 1, 1);
  EXPECT_EQ(r.programs, 1u);
  EXPECT_EQ(r.copybacks_triggered, 0u);
  EXPECT_EQ(ftl.counters().logical_pages_written, 1u);
  EXPECT_EQ(ftl.counters().physical_programs, 1u);
  EXPECT_EQ(ftl.counters().copyback_programs, 0u);
}

TEST(FtlWrite, OverwriteInvalidatesPriorCopy) {
  Ftl ftl(Geometry{});
  ftl.host_write(5, 1, 1);
  const PhysPageAddr first = *ftl.entry(5).ppa;
  ftl.host_write(5, 1, 2);
  EXPECT_EQ(ftl.counters().physical_programs, 2u);
  EXPECT_EQ(total_valid(ftl), 1u);
  EXPECT_EQ(ftl.media().block(first.block).page_states[first.offset], PageState::kInvalid);
}

TEST(FtlWrite, OutOfRangeIsRejectedWhole) {
  Ftl ftl(small_geometry(8, 4, 1, 0.5));
  EXPECT_SIM_ERROR(ftl.host_write(14, 4, 1), ErrorCode::kOutOfRange);
  EXPECT_EQ(ftl.counters().physical_programs, 0u);
}

TEST(FtlWrite, ConsecutivePagesStripeOverChannels) {
  Ftl ftl(Geometry{});
  ftl.host_write(0, 16, 1);
  for (Lba lba = 0; lba < 16; ++lba) {
    EXPECT_EQ(ftl.geometry().channel_of(ftl.entry(lba).ppa->block), lba % 8) << lba;
  }
}

TEST(FtlWrite, SingleFrontierKeepsPagesTogether) {
  FtlOptions o;
  o.single_frontier = true;
  Ftl ftl(Geometry{}, o);
  ftl.host_write(0, 16, 1);
  EXPECT_EQ(ftl.frontier().size(), 1u);
  for (Lba lba = 0; lba < 16; ++lba) EXPECT_EQ(ftl.entry(lba).ppa->block, ftl.entry(0).ppa->block);
}

// Two 8-page writers issued back to back on 8 channels: page i of either
// writer goes to frontier slot i, so every frontier block holds one page of
// each writer.
TEST(FtlWrite, InterleavedWritersShareBlocks) {
  Ftl ftl(Geometry{});
  HostModel host(InterleaveConfig{});
  host.add_stream(0, 0);
  host.add_stream(1, 0);
  host.submit(0, HostWrite{0, 8});
  host.submit(1, HostWrite{1000, 8});
  host.drain([&](const Command& c) { ftl.apply(c); });

  std::set<BlockId> used;
  for (Lba i = 0; i < 8; ++i) {
    const PhysPageAddr a = *ftl.entry(i).ppa;
    const PhysPageAddr b = *ftl.entry(1000 + i).ppa;
    EXPECT_EQ(a.block, b.block) << "page " << i;
    used.insert(a.block);
  }
  EXPECT_EQ(used.size(), 8u);
  for (BlockId blk : used) {
    const auto& s = ftl.media().block(blk);
    ASSERT_EQ(s.write_ptr, 2u);
    EXPECT_LT(s.resident_lbas[0], 8u);
    EXPECT_GE(s.resident_lbas[1], 1000u);
  }
}

TEST(FtlRead, ReturnsLatestToken) {
  Ftl ftl(Geometry{});
  ftl.host_write(3, 2, 100);
  EXPECT_EQ(ftl.host_read(3), 100u);
  EXPECT_EQ(ftl.host_read(4), 101u);
  ftl.host_write(3, 1, 500);
  EXPECT_EQ(ftl.host_read(3), 500u);
  ftl.host_trim(3, 1);
  EXPECT_SIM_ERROR(ftl.host_read(3), ErrorCode::kUnmapped);
  EXPECT_SIM_ERROR(ftl.host_read(9), ErrorCode::kUnmapped);
}

TEST(FtlTrim, WholeFaObjectErasesItsBlock) {
  Ftl ftl(Geometry{});
  const Chunk c{1024, 512};
  ftl.flash_alloc(std::span<const Chunk>(&c, 1));
  ftl.host_write(1024, 512, 1);
  const TrimReceipt r = ftl.host_trim(1024, 512);
  EXPECT_EQ(r.pages_invalidated, 512u);
  EXPECT_EQ(r.blocks_erased, 1u);
  EXPECT_EQ(ftl.counters().copyback_programs, 0u);
  EXPECT_EQ(ftl.counters().trim_block_erases, 1u);
}

TEST(FtlTrim, OnePageInNormalBlock) {
  Ftl ftl(Geometry{});
  ftl.host_write(0, 4, 1);
  const TrimReceipt r = ftl.host_trim(2, 1);
  EXPECT_EQ(r.pages_invalidated, 1u);
  EXPECT_EQ(r.blocks_erased, 0u);
  EXPECT_FALSE(ftl.entry(2).ppa.has_value());
}

TEST(FtlTrim, UnmappedRangeIsNoop) {
  Ftl ftl(Geometry{});
  const Counters before = ftl.counters();
  const TrimReceipt r = ftl.host_trim(100, 50);
  EXPECT_EQ(r.pages_invalidated, 0u);
  EXPECT_EQ(r.blocks_erased, 0u);
  EXPECT_EQ(ftl.counters(), before);
}

TEST(FtlTrim, RepeatingATrimChangesNothing) {
  Ftl ftl(Geometry{});
  ftl.host_write(0, 2000, 1);
  ftl.host_trim(300, 700);
  const std::uint64_t once = digest(ftl.snapshot());
  ftl.host_trim(300, 700);
  EXPECT_EQ(digest(ftl.snapshot()), once);
}

// Three closed Normal blocks on one channel: block k holds lbas 8k..8k+7.
Ftl three_closed_blocks() {
  Ftl ftl(small_geometry(8, 8, 1, 0.5));
  ftl.host_write(0, 24, 1);
  return ftl;
}

TEST(FtlGc, GreedyPicksFewestValid) {
  Ftl ftl = three_closed_blocks();
  ftl.host_trim(0, 3);   // block 0: 5 valid
  ftl.host_trim(8, 8);   // block 1: 0 valid
  ftl.host_trim(16, 5);  // block 2: 3 valid
  EXPECT_EQ(ftl.entry(8 + 0).ppa, std::nullopt);
  EXPECT_EQ(ftl.select_victim(VictimClass::kNormal), 1u);
}

TEST(FtlGc, TieGoesToLowerId) {
  Ftl ftl = three_closed_blocks();
  ftl.host_trim(10, 6);  // block 1: 2 valid
  ftl.host_trim(16, 6);  // block 2: 2 valid
  EXPECT_EQ(ftl.select_victim(VictimClass::kNormal), 1u);
}

TEST(FtlGc, FaBlocksAreNeverNormalVictims) {
  Ftl ftl(Geometry{});
  const Chunk c{0, 1024};
  ftl.flash_alloc(std::span<const Chunk>(&c, 1));
  ftl.host_write(0, 100, 1);
  ftl.host_write(0, 50, 2);  // dirties the active FA block
  EXPECT_SIM_ERROR(ftl.select_victim(VictimClass::kNormal), ErrorCode::kNoVictim);
  EXPECT_SIM_ERROR(ftl.select_victim(VictimClass::kFaEligible), ErrorCode::kNoVictim);
}

TEST(FtlGc, FullyInvalidVictimCostsOneErase) {
  Ftl ftl = tiny();
  ftl.host_write(0, 16, 1);  // blocks 0..3 full
  ftl.host_trim(0, 4);       // block 0: 0 valid
  ftl.host_trim(4, 2);       // block 1: 2 valid
  ASSERT_EQ(ftl.free_pool().size(), 4u);
  const Counters before = ftl.counters();
  ftl.secure_clean_blocks(4);  // wants one block of headroom
  const Counters d = ftl.counters() - before;
  EXPECT_EQ(d.copyback_programs, 0u);
  EXPECT_EQ(d.erases, 1u);
}

TEST(FtlGc, VictimValidPagesAreCopiedOnce) {
  Ftl ftl = tiny();
  ftl.host_write(0, 16, 1);
  ftl.host_trim(4, 2);  // block 1: 2 valid, the only dirty block
  const Counters before = ftl.counters();
  ftl.secure_clean_blocks(4);
  const Counters d = ftl.counters() - before;
  EXPECT_EQ(d.copyback_programs, 2u);
  EXPECT_EQ(d.erases, 1u);
  EXPECT_EQ(ftl.host_read(6), 7u);
  EXPECT_EQ(ftl.host_read(7), 8u);
  ftl.check_invariants();
}

TEST(FtlGc, OverwritingOneBlockForeverNeverCopies) {
  Ftl ftl(Geometry{});
  const std::uint64_t passes = 10 * ftl.geometry().logical_capacity_pages() / 512;
  for (std::uint64_t p = 0; p < passes; ++p) ftl.host_write(0, 512, p * 512 + 1);
  EXPECT_GT(ftl.counters().erases, 100u);
  EXPECT_EQ(ftl.counters().copyback_programs, 0u);
  EXPECT_EQ(ftl.counters().physical_programs, ftl.counters().logical_pages_written);
}

TEST(FtlSecure, EnoughFreeBlocksMeansNoGc) {
  Ftl ftl = tiny();
  ftl.host_write(0, 16, 1);
  ftl.host_write(0, 1, 99);  // opens a frontier: pool 4 -> 3
  ASSERT_EQ(ftl.free_pool().size(), 3u);
  const Counters before = ftl.counters();
  const auto blocks = ftl.secure_clean_blocks(2);
  EXPECT_EQ(ftl.counters(), before);
  ASSERT_EQ(blocks.size(), 2u);
  for (BlockId b : blocks) EXPECT_TRUE(ftl.free_pool().count(b));
}

// Pool empty, an empty frontier open, two half-invalid Normal blocks. Moving
// the 2 + 2 survivors fills the frontier and frees both victims: one clean
// block gained net of the frontier it consumed.
TEST(FtlSecure, MergingTwoHalfBlocksYieldsOne) {
  FtlOptions o;
  o.reserve_blocks = 1;
  Ftl ftl(small_geometry(4, 4, 1, 0.5), o);
  ftl.host_write(0, 8, 1);   // blocks 0, 1
  ftl.host_write(0, 2, 11);  // block 2 ...
  ftl.host_write(4, 2, 21);  // ... full
  ftl.gc_for_normal_write();  // opens block 3 empty
  ASSERT_TRUE(ftl.free_pool().empty());
  ASSERT_EQ(ftl.media().block(0).valid_count, 2u);
  ASSERT_EQ(ftl.media().block(1).valid_count, 2u);

  const auto clean_or_empty = [&] {
    std::size_t n = ftl.free_pool().size();
    for (const auto& f : ftl.frontier()) n += f && ftl.media().block(*f).write_ptr == 0;
    return n;
  };
  const std::size_t before = clean_or_empty();
  const Counters c0 = ftl.counters();
  ftl.secure_clean_blocks(1);
  EXPECT_EQ(clean_or_empty(), before + 1);
  EXPECT_EQ((ftl.counters() - c0).copyback_programs, 4u);
  ftl.check_invariants();
}

TEST(FtlSecure, RequestBeyondSlackFails) {
  Ftl ftl = tiny();
  ftl.host_write(0, 16, 1);
  const Counters before = ftl.counters();
  EXPECT_SIM_ERROR(ftl.secure_clean_blocks(5), ErrorCode::kInsufficientSpace);
  EXPECT_EQ(ftl.counters(), before);
}

TEST(FtlRegions, FreshDevice) {
  Ftl ftl(Geometry{});
  const RegionReport r = ftl.gc_region_report();
  EXPECT_EQ(r.fa_blocks, 0u);
  EXPECT_EQ(r.normal_blocks, 0u);
  EXPECT_EQ(r.free_blocks, 128u);
}

TEST(FtlInvariants, HoldThroughFuzzing) {
  const Geometry g = small_geometry(64, 16, 4, 0.1);
  Ftl ftl(g);
  std::size_t failures = 0;
  for (const Command& c : fuzz_commands(g, 7, 3000)) {
    try {
      ftl.apply(c);
    } catch (const SimError&) {
      ++failures;
    }
    ASSERT_NO_THROW(ftl.check_invariants()) << "after seq " << c.seq;
  }
  EXPECT_GT(failures, 0u);  // the fuzzer includes malformed requests
  EXPECT_GT(ftl.counters().copyback_programs, 0u);
}

TEST(FtlInvariants, CopyForksIndependentState) {
  Ftl a(Geometry{});
  a.host_write(0, 100, 1);
  Ftl b = a;
  b.host_write(0, 10, 500);
  EXPECT_EQ(a.host_read(0), 1u);
  EXPECT_EQ(b.host_read(0), 500u);
}

}  // namespace
}  // namespace fasim
