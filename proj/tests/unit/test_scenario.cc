#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fasim/scenario.h"
#include "fasim/trace.h"
#include "test_util.h"

namespace fasim {
namespace {

namespace fs = std::filesystem;

const char* const kSmallLsm = R"({
  "schema_version": 1,
  "name": "small_lsm",
  "geometry": {"total_blocks": 64, "pages_per_block": 64, "page_size": 4096, "channels": 4, "op_fraction": 0.25},
  "mode": "flashalloc",
  "seed": 3,
  "window_pages": 500,
  "workload": {"kind": "lsm", "sstable_pages": 128, "metadata_pages": 128, "total_logical_writes": 20000}
})";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fasim_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(FASIM_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Config, ParsesAndFillsDefaults) {
  const ScenarioConfig c = parse_config(kSmallLsm);
  EXPECT_EQ(c.name, "small_lsm");
  EXPECT_EQ(c.mode, Mode::kFlashAlloc);
  EXPECT_EQ(c.geometry.total_blocks, 64u);
  EXPECT_EQ(c.workload.kind, "lsm");
  EXPECT_EQ(c.workload.lsm.sstable_pages, 128u);
  EXPECT_EQ(c.interleave.split_unit, 64u);
  EXPECT_EQ(c.effective_window_pages(), 500u);
  EXPECT_EQ(parse_config(R"({"schema_version": 1, "workload": {"kind": "journal"}})").effective_window_pages(),
            Geometry{}.logical_capacity_pages() / 64);
}

TEST(Config, RejectsBadInput) {
  EXPECT_SIM_ERROR(parse_config("{"), ErrorCode::kConfigInvalid);
  EXPECT_SIM_ERROR(parse_config(R"({"schema_version": 1, "workload": {"kind": "btree"}})"), ErrorCode::kConfigInvalid);
  EXPECT_SIM_ERROR(parse_config(R"({"schema_version": 1, "mode": "fast", "workload": {"kind": "journal"}})"),
                   ErrorCode::kConfigInvalid);
  EXPECT_SIM_ERROR(parse_config(R"({"schema_version": 2, "workload": {"kind": "journal"}})"),
                   ErrorCode::kConfigInvalid);
  EXPECT_SIM_ERROR(parse_config(R"({"schema_version": 1, "geometry": {"channels": 3}, "workload": {"kind": "journal"}})"),
                   ErrorCode::kConfigInvalid);
}

TEST(Config, ShippedConfigsLoad) {
  int n = 0;
  for (const auto& e : fs::directory_iterator(FASIM_CONFIG_DIR)) {
    if (e.path().extension() != ".json") continue;
    EXPECT_NO_THROW(build_program(load_config(e.path().string()))) << e.path();
    ++n;
  }
  EXPECT_GE(n, 9);
}

TEST(Scenario, RunIsDeterministic) {
  const ScenarioConfig c = parse_config(kSmallLsm);
  const Report a = run_scenario(c).report;
  const Report b = run_scenario(c).report;
  EXPECT_EQ(format_csv(a.samples), format_csv(b.samples));
  EXPECT_EQ(a.digest, b.digest);
  EXPECT_EQ(report_json(a), report_json(b));
  std::uint64_t pages = 0;
  for (const MetricSample& s : a.samples) {
    pages += s.logical_pages;
    if (&s != &a.samples.back()) EXPECT_GE(s.logical_pages, 500u);
  }
  EXPECT_EQ(pages, a.counters.logical_pages_written);
  EXPECT_GE(a.counters.logical_pages_written, 20000u);
}

TEST(Scenario, ReplayOfRecordedCommandsMatches) {
  const ScenarioConfig c = parse_config(kSmallLsm);
  RunOptions keep;
  keep.keep_commands = true;
  const RunResult rec = run_scenario(c, keep);
  const RunResult rep = replay_trace(Trace{trace_header(c), rec.commands});
  EXPECT_EQ(format_csv(rep.report.samples), format_csv(rec.report.samples));
  EXPECT_EQ(rep.report.digest, rec.report.digest);
}

TEST(Scenario, VanillaReplayDropsFlashAllocs) {
  const ScenarioConfig c = parse_config(kSmallLsm);
  RunOptions keep;
  keep.keep_commands = true;
  const RunResult rec = run_scenario(c, keep);
  std::uint64_t allocs = 0;
  for (const Command& cmd : rec.commands) allocs += cmd.op == OpKind::kFlashAlloc;
  const Report v = replay_trace(Trace{trace_header(c), rec.commands}, Mode::kVanilla).report;
  EXPECT_EQ(v.skipped_flashalloc, allocs);
  EXPECT_EQ(v.regions.fa_blocks, 0u);
  EXPECT_EQ(v.counters.logical_pages_written, rec.report.counters.logical_pages_written);
}

TEST(Scenario, TenantStatsCoverAllWrites) {
  const ScenarioConfig c = parse_config(kSmallLsm);
  const Report r = run_scenario(c).report;
  std::uint64_t pages = 0;
  for (const auto& [id, t] : r.tenants) pages += t.logical_pages;
  EXPECT_EQ(pages, r.counters.logical_pages_written);
  EXPECT_GT(r.mean_throughput_proxy, 0.0);
}

TEST(Cli, RunWritesIdenticalCsvTwice) {
  const fs::path dir = scratch("cli_run");
  const fs::path cfg = dir / "s.json";
  std::ofstream(cfg) << kSmallLsm;
  ASSERT_EQ(cli("run --config " + cfg.string() + " --out " + (dir / "a").string()), 0);
  ASSERT_EQ(cli("run --config " + cfg.string() + " --out " + (dir / "b").string()), 0);
  const std::string a = slurp(dir / "a" / "small_lsm-flashalloc.csv");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(dir / "b" / "small_lsm-flashalloc.csv"));
  EXPECT_TRUE(fs::exists(dir / "a" / "small_lsm-flashalloc.report.json"));
}

TEST(Cli, RecordThenReplayReproducesCsv) {
  const fs::path dir = scratch("cli_replay");
  const fs::path cfg = dir / "s.json";
  std::ofstream(cfg) << kSmallLsm;
  const fs::path trace = dir / "t.trace";
  ASSERT_EQ(cli("record --config " + cfg.string() + " --trace " + trace.string() + " --out " +
                (dir / "rec").string()),
            0);
  ASSERT_EQ(cli("replay --trace " + trace.string() + " --out " + (dir / "rep").string()), 0);
  EXPECT_EQ(slurp(dir / "rec" / "small_lsm-flashalloc.csv"), slurp(dir / "rep" / "small_lsm-flashalloc.csv"));
  EXPECT_EQ(cli("check --trace " + trace.string()), 0);
  EXPECT_EQ(cli("report --trace " + trace.string()), 0);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("cli_exit");
  EXPECT_EQ(cli("run"), 2);
  EXPECT_EQ(cli("run --config " + (dir / "missing.json").string()), 2);
  std::ofstream(dir / "bad.json") << R"({"schema_version": 1, "workload": {"kind": "btree"}})";
  EXPECT_EQ(cli("run --config " + (dir / "bad.json").string()), 2);
  std::ofstream(dir / "bad.trace") << "not a trace\n";
  EXPECT_EQ(cli("replay --trace " + (dir / "bad.trace").string()), 2);

  // Two flashallocs over the same range: the device rejects the second.
  Trace t;
  t.header.geometry = testing::small_geometry(64, 64, 4, 0.25);
  t.header.mode = Mode::kFlashAlloc;
  t.commands.push_back(Command{1, OpKind::kFlashAlloc, 0, 0, 0, 0, {{0, 64}}, 0});
  t.commands.push_back(Command{2, OpKind::kFlashAlloc, 0, 0, 0, 0, {{32, 64}}, 0});
  save_trace((dir / "overlap.trace").string(), t);
  EXPECT_EQ(cli("replay --trace " + (dir / "overlap.trace").string() + " --out " + dir.string()), 3);
  EXPECT_EQ(cli("replay --mode vanilla --trace " + (dir / "overlap.trace").string() + " --out " + dir.string()), 0);
}

}  // namespace
}  // namespace fasim
