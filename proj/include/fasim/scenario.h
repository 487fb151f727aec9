#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fasim/errors.h"
#include "fasim/ftl.h"
#include "fasim/hostmodel.h"
#include "fasim/metrics.h"
#include "fasim/trace.h"
#include "fasim/workloads.h"

namespace fasim {

struct TenantSpec;

struct WorkloadSpec {
  std::string kind;  // fio | lsm | logfs | journal | multi
  FioConfig fio;
  LsmConfig lsm;
  LogFsConfig logfs;
  JournalConfig journal;
  std::vector<TenantSpec> tenants;  // kind == multi
};

struct TenantSpec {
  std::uint32_t tenant_id = 0;
  double share = 0;  // fraction of logical capacity, rounded down to blocks
  WorkloadSpec workload;
};

struct ScenarioConfig {
  int schema_version = 1;
  std::string name = "scenario";
  Geometry geometry;
  FtlOptions ftl;
  Mode mode = Mode::kVanilla;
  std::uint64_t seed = 1;
  InterleaveConfig interleave;
  bool interleave_seed_given = false;  // otherwise the scenario seed is used
  std::uint64_t window_pages = 0;      // 0 selects capacity / 64
  CostModel cost;
  WorkloadSpec workload;
  std::string output_dir;  // empty when the config does not set one

  std::uint64_t effective_window_pages() const;
};

// Parses and validates a JSON scenario. Throws SimError(kConfigInvalid).
ScenarioConfig parse_config(const std::string& json_text);
ScenarioConfig load_config(const std::string& path);

// The host-level program the scenario describes, in its configured mode.
Program build_program(const ScenarioConfig& config);

struct TenantStats {
  std::uint64_t logical_pages = 0;
  double time_us = 0;
  double throughput_proxy() const;
};

struct Report {
  std::string name;
  Mode mode = Mode::kVanilla;
  std::uint64_t commands = 0;
  std::uint64_t skipped_flashalloc = 0;
  Counters counters;
  double end_waf = 0;
  double end_throughput_proxy = 0;  // last window
  double mean_throughput_proxy = 0;  // whole run
  RegionReport regions;
  double end_mid_mass = 0;
  std::uint64_t digest = 0;
  std::map<std::uint32_t, TenantStats> tenants;
  std::vector<MetricSample> samples;
};

// A simulation error tagged with the command that raised it.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::uint64_t seq, ErrorCode code, const std::string& what)
      : std::runtime_error("command seq " + std::to_string(seq) + ": " + what), seq_(seq), code_(code) {}
  std::uint64_t seq() const { return seq_; }
  ErrorCode code() const { return code_; }

 private:
  std::uint64_t seq_;
  ErrorCode code_;
};

// Device plus meters. Vanilla mode drops flashalloc commands, so a trace
// recorded in either mode can be replayed in either mode.
class Simulation {
 public:
  Simulation(const Geometry& geometry, const FtlOptions& ftl, Mode mode, std::uint64_t window_pages,
             const CostModel& cost);

  void apply(const Command& command);
  Report finish(const std::string& name);

  const Ftl& ftl() const { return ftl_; }

 private:
  Ftl ftl_;
  Mode mode_;
  CostModel cost_;
  MetricsRecorder metrics_;
  std::uint64_t commands_ = 0;
  std::uint64_t skipped_ = 0;
  std::map<std::uint32_t, TenantStats> tenants_;
};

using CommandHook = std::function<void(const Command&, const Ftl&)>;

struct RunOptions {
  bool keep_commands = false;  // fill RunResult::commands
  CommandHook after_command;
};

struct RunResult {
  Report report;
  std::vector<Command> commands;
};

RunResult run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

TraceHeader trace_header(const ScenarioConfig& config);
RunResult replay_trace(const Trace& trace, std::optional<Mode> mode_override = std::nullopt,
                       const RunOptions& options = {});

std::string report_json(const Report& report);

struct OutputPaths {
  std::string csv;
  std::string report;
};
OutputPaths write_outputs(const Report& report, const std::string& out_dir);

}  // namespace fasim
