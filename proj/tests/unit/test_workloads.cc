#include <gtest/gtest.h>

#include "fasim/ftl.h"
#include "fasim/hostmodel.h"
#include "fasim/workloads.h"
#include "test_util.h"

namespace fasim {
namespace {

using testing::small_geometry;

Ftl run(const Program& p, const Geometry& g) {
  HostModel host(InterleaveConfig{});
  submit_program(p, host);
  Ftl ftl(g);
  host.drain([&](const Command& c) { ftl.apply(c); });
  return ftl;
}

template <typename T>
std::vector<T> ops_of(const Program& p) {
  std::vector<T> out;
  for (const auto& s : p.streams) {
    for (const auto& op : s.ops) {
      if (const T* t = std::get_if<T>(&op)) out.push_back(*t);
    }
  }
  return out;
}

FioConfig small_fio(Mode mode) {
  FioConfig c;
  c.writers = 8;
  c.region_pages = 640;
  c.overwrite_unit = 128;
  c.total_logical_writes = 40960;
  c.mode = mode;
  return c;
}

TEST(Fio, VolumeAndDeterminism) {
  const Geometry g = small_geometry(64, 128, 4, 0.25);
  const Program p = gen_fio(small_fio(Mode::kVanilla), g, 3);
  EXPECT_EQ(p.streams.size(), 8u);
  EXPECT_EQ(p.write_pages(), 40960u);
  EXPECT_EQ(program_digest(p), program_digest(gen_fio(small_fio(Mode::kVanilla), g, 3)));
  EXPECT_NE(program_digest(p), program_digest(gen_fio(small_fio(Mode::kVanilla), g, 4)));
}

TEST(Fio, WritesStayInOwnFileAndAreUnitAligned) {
  const Geometry g = small_geometry(64, 128, 4, 0.25);
  const Program p = gen_fio(small_fio(Mode::kVanilla), g, 3);
  for (const auto& s : p.streams) {
    for (const auto& op : s.ops) {
      if (const auto* w = std::get_if<HostWrite>(&op)) {
        EXPECT_EQ(w->lba / 640, s.stream_id);
        EXPECT_EQ(w->lba % 128, 0u);
        EXPECT_EQ(w->length, 128u);
      }
    }
  }
}

TEST(Fio, FlashAllocKeepsEachUnitInOneBlock) {
  const Geometry g = small_geometry(64, 128, 4, 0.25);
  const Ftl ftl = run(gen_fio(small_fio(Mode::kFlashAlloc), g, 3), g);
  EXPECT_EQ(ftl.counters().copyback_programs, 0u);
  for (Lba unit = 0; unit < 8 * 640; unit += 128) {
    const BlockId b = ftl.entry(unit).ppa->block;
    for (Lba l = unit; l < unit + 128; ++l) ASSERT_EQ(ftl.entry(l).ppa->block, b) << l;
  }
}

TEST(Fio, VanillaMixesWritersAndCopies) {
  const Geometry g = small_geometry(64, 128, 4, 0.25);
  const Ftl ftl = run(gen_fio(small_fio(Mode::kVanilla), g, 3), g);
  EXPECT_GT(ftl.counters().copyback_programs, 0u);
}

TEST(Fio, RejectsOversizedLayout) {
  FioConfig c = small_fio(Mode::kVanilla);
  c.writers = 100;
  EXPECT_SIM_ERROR(gen_fio(c, small_geometry(64, 128, 4, 0.25), 1), ErrorCode::kConfigInvalid);
}

LsmConfig small_lsm(Mode mode) {
  LsmConfig c;
  c.sstable_pages = 128;
  c.metadata_pages = 128;
  c.total_logical_writes = 30000;
  c.mode = mode;
  return c;
}

TEST(Lsm, TrimsCoverWholeTables) {
  const Geometry g = small_geometry(64, 64, 4, 0.25);
  const LsmConfig c = small_lsm(Mode::kFlashAlloc);
  const Program p = gen_lsm(c, g, 2);
  const auto trims = ops_of<HostTrim>(p);
  ASSERT_FALSE(trims.empty());
  for (const HostTrim& t : trims) {
    EXPECT_EQ(t.length, c.sstable_pages);
    EXPECT_EQ((t.lba - p.region.start) % c.sstable_pages, 0u);
  }
  for (const HostFlashAlloc& a : ops_of<HostFlashAlloc>(p)) {
    ASSERT_EQ(a.chunks.size(), 1u);
    EXPECT_EQ(a.chunks[0].length, c.sstable_pages);
  }
}

TEST(Lsm, ModesWriteTheSameData) {
  const Geometry g = small_geometry(64, 64, 4, 0.25);
  const Program fa = gen_lsm(small_lsm(Mode::kFlashAlloc), g, 2);
  const Program va = gen_lsm(small_lsm(Mode::kVanilla), g, 2);
  EXPECT_EQ(fa.write_pages(), va.write_pages());
  EXPECT_EQ(fa.trim_pages(), va.trim_pages());
  EXPECT_TRUE(ops_of<HostFlashAlloc>(va).empty());
}

TEST(Lsm, FlashAllocWithoutMetadataNeverCopies) {
  const Geometry g = small_geometry(64, 64, 4, 0.25);
  LsmConfig c = small_lsm(Mode::kFlashAlloc);
  c.metadata_write_fraction = 0;
  const Ftl ftl = run(gen_lsm(c, g, 2), g);
  EXPECT_GT(ftl.counters().erases, 0u);
  EXPECT_EQ(ftl.counters().copyback_programs, 0u);
}

TEST(LogFs, HotColdUpdatesAndCleanerTrims) {
  const Geometry g = small_geometry(64, 64, 4, 0.25);
  LogFsConfig c;
  c.update_count = 20000;
  c.live_fraction = 0.5;
  c.mode = Mode::kFlashAlloc;
  const Program p = gen_logfs(c, g, 5);
  EXPECT_FALSE(ops_of<HostTrim>(p).empty());
  for (const HostTrim& t : ops_of<HostTrim>(p)) EXPECT_EQ(t.length, 64u);
  const Ftl ftl = run(p, g);
  ftl.check_invariants();
  EXPECT_EQ(program_digest(p), program_digest(gen_logfs(c, g, 5)));
}

TEST(Journal, EveryBatchIsWrittenTwice) {
  const Geometry g = small_geometry(64, 64, 4, 0.25);
  JournalConfig c;
  c.journal_pages = 128;
  c.batch_pages = 16;
  c.batches = 100;
  for (Mode m : {Mode::kVanilla, Mode::kFlashAlloc}) {
    c.mode = m;
    EXPECT_EQ(gen_journal(c, g, 1).write_pages(), 2u * 16 * 100);
  }
  c.batches = 0;
  const Program empty = gen_journal(c, g, 1);
  EXPECT_EQ(empty.write_pages(), 0u);
  EXPECT_TRUE(empty.streams.empty());
}

TEST(Journal, FlashAllocRingNeverCopies) {
  const Geometry g = small_geometry(64, 64, 4, 0.25);
  JournalConfig c;
  c.journal_pages = 128;
  c.batch_pages = 16;
  c.batches = 400;
  c.tablespace_pages = 256;
  c.mode = Mode::kFlashAlloc;
  const Ftl ftl = run(gen_journal(c, g, 1), g);
  EXPECT_EQ(ftl.counters().copyback_programs, 0u);
  c.journal_pages = 120;
  c.batch_pages = 12;
  EXPECT_SIM_ERROR(gen_journal(c, g, 1), ErrorCode::kConfigInvalid);
}

TEST(Compose, RenumbersStreamsInOrder) {
  const Geometry g = small_geometry(64, 64, 4, 0.25);
  JournalConfig j;
  j.journal_pages = 64;
  j.batch_pages = 16;
  j.batches = 10;
  j.region = {0, 1024};
  const Program a = gen_journal(j, g, 1);
  j.region = {1024, 1024};
  const Program b = gen_journal(j, g, 2);
  const Program merged = compose_tenants({{7, a}, {9, b}});
  ASSERT_EQ(merged.streams.size(), 4u);
  for (std::uint32_t i = 0; i < 4; ++i) EXPECT_EQ(merged.streams[i].stream_id, i);
  EXPECT_EQ(merged.streams[0].tenant_id, 7u);
  EXPECT_EQ(merged.streams[3].tenant_id, 9u);
  EXPECT_EQ(merged.streams[2].ops, b.streams[0].ops);
  EXPECT_EQ(merged.write_pages(), a.write_pages() + b.write_pages());
}

TEST(Compose, RejectsOverlappingRegions) {
  const Geometry g = small_geometry(64, 64, 4, 0.25);
  JournalConfig j;
  j.journal_pages = 64;
  j.batch_pages = 16;
  j.batches = 10;
  j.region = {0, 1024};
  const Program a = gen_journal(j, g, 1);
  j.region = {1000, 1024};
  const Program b = gen_journal(j, g, 1);
  EXPECT_SIM_ERROR(compose_tenants({{0, a}, {1, b}}), ErrorCode::kRegionOverlap);
}

}  // namespace
}  // namespace fasim
