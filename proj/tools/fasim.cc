// fasim: scenario runner, trace recorder/replayer and oracle checker.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fasim/fuzz.h"
#include "fasim/refcheck.h"
#include "fasim/scenario.h"
#include "fasim/trace.h"

namespace {

constexpr int kExitMismatch = 1;
constexpr int kExitConfig = 2;
constexpr int kExitSimulation = 3;

struct Args {
  std::string config;
  std::string mode;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string trace;
};

std::string output_dir(const Args& args, const std::string& from_config) {
  if (!args.out.empty()) return args.out;
  if (const char* env = std::getenv("FASIM_OUT_DIR"); env && *env) return env;
  if (!from_config.empty()) return from_config;
  return "out";
}

fasim::ScenarioConfig configured(const Args& args) {
  fasim::ScenarioConfig cfg = fasim::load_config(args.config);
  if (!args.mode.empty()) cfg.mode = fasim::parse_mode(args.mode);
  if (args.seed) cfg.seed = *args.seed;
  return cfg;
}

std::optional<fasim::Mode> mode_override(const Args& args) {
  if (args.mode.empty()) return std::nullopt;
  return fasim::parse_mode(args.mode);
}

void print_summary(const fasim::Report& r, const fasim::OutputPaths& paths) {
  std::printf("%s %s end_waf=%.4f copybacks=%llu erases=%llu windows=%zu\n", r.name.c_str(),
              fasim::to_string(r.mode), r.end_waf, static_cast<unsigned long long>(r.counters.copyback_programs),
              static_cast<unsigned long long>(r.counters.erases), r.samples.size());
  std::printf("csv: %s\nreport: %s\n", paths.csv.c_str(), paths.report.c_str());
}

int cmd_run(const Args& args) {
  const fasim::ScenarioConfig cfg = configured(args);
  const fasim::RunResult result = fasim::run_scenario(cfg);
  print_summary(result.report, fasim::write_outputs(result.report, output_dir(args, cfg.output_dir)));
  return 0;
}

int cmd_record(const Args& args) {
  const fasim::ScenarioConfig cfg = configured(args);
  fasim::RunOptions options;
  options.keep_commands = true;
  fasim::RunResult result = fasim::run_scenario(cfg, options);
  fasim::save_trace(args.trace, fasim::Trace{fasim::trace_header(cfg), std::move(result.commands)});
  print_summary(result.report, fasim::write_outputs(result.report, output_dir(args, cfg.output_dir)));
  std::printf("trace: %s\n", args.trace.c_str());
  return 0;
}

int cmd_replay(const Args& args) {
  const fasim::Trace trace = fasim::load_trace(args.trace);
  const fasim::RunResult result = fasim::replay_trace(trace, mode_override(args));
  print_summary(result.report, fasim::write_outputs(result.report, output_dir(args, "")));
  return 0;
}

int cmd_report(const Args& args) {
  const fasim::Trace trace = fasim::load_trace(args.trace);
  const fasim::RunResult result = fasim::replay_trace(trace, mode_override(args));
  std::cout << fasim::report_json(result.report);
  return 0;
}

int cmd_check(const Args& args) {
  fasim::Trace trace;
  if (!args.trace.empty()) {
    trace = fasim::load_trace(args.trace);
  } else {
    const fasim::ScenarioConfig cfg = configured(args);
    fasim::RunOptions options;
    options.keep_commands = true;
    trace = fasim::Trace{fasim::trace_header(cfg), fasim::run_scenario(cfg, options).commands};
  }
  const auto mode = mode_override(args).value_or(trace.header.mode.value_or(fasim::Mode::kFlashAlloc));
  std::vector<fasim::Command> commands;
  for (const auto& c : trace.commands) {
    if (mode == fasim::Mode::kFlashAlloc || c.op != fasim::OpKind::kFlashAlloc) commands.push_back(c);
  }
  fasim::RefOptions ref;
  ref.reserve_blocks = trace.header.ftl.reserve_blocks;
  ref.single_frontier = trace.header.ftl.single_frontier;
  const auto engine = fasim::replay_engine(trace.header.geometry, commands, trace.header.ftl);
  const auto oracle = fasim::replay_reference(trace.header.geometry, commands, ref);
  const bool same = engine.digest == oracle.digest && engine.errors == oracle.errors;
  std::printf("commands=%zu engine=%016llx oracle=%016llx errors=%zu/%zu %s\n", commands.size(),
              static_cast<unsigned long long>(engine.digest), static_cast<unsigned long long>(oracle.digest),
              engine.errors.size(), oracle.errors.size(), same ? "MATCH" : "MISMATCH");
  return same ? 0 : kExitMismatch;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flash FTL simulator with FlashAlloc"};
  app.require_subcommand(1);
  Args args;

  auto add_common = [&](CLI::App* sub, bool config, bool trace, bool out) {
    if (config) sub->add_option("--config", args.config, "scenario JSON");
    sub->add_option("--mode", args.mode, "vanilla or flashalloc");
    if (config) sub->add_option("--seed", args.seed, "override the scenario seed");
    if (out) sub->add_option("--out", args.out, "output directory (beats FASIM_OUT_DIR)");
    if (trace) sub->add_option("--trace", args.trace, "trace file");
  };
  CLI::App* run = app.add_subcommand("run", "run a scenario and write CSV + report");
  add_common(run, true, false, true);
  run->get_option("--config")->required();
  CLI::App* record = app.add_subcommand("record", "run a scenario and save its command trace");
  add_common(record, true, true, true);
  record->get_option("--config")->required();
  record->get_option("--trace")->required();
  CLI::App* replay = app.add_subcommand("replay", "re-run a saved trace");
  add_common(replay, false, true, true);
  replay->get_option("--trace")->required();
  CLI::App* check = app.add_subcommand("check", "compare the engine against the reference oracle");
  add_common(check, true, true, false);
  CLI::App* report = app.add_subcommand("report", "print statistics recomputed from a trace");
  add_common(report, false, true, false);
  report->get_option("--trace")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  if (check->parsed() && args.config.empty() == args.trace.empty()) {
    std::cerr << "check: give exactly one of --config or --trace\n";
    return kExitConfig;
  }

  try {
    if (run->parsed()) return cmd_run(args);
    if (record->parsed()) return cmd_record(args);
    if (replay->parsed()) return cmd_replay(args);
    if (check->parsed()) return cmd_check(args);
    return cmd_report(args);
  } catch (const fasim::ScenarioError& e) {
    std::cerr << "simulation error (" << fasim::to_string(e.code()) << "): " << e.what() << "\n";
    return kExitSimulation;
  } catch (const fasim::TraceParseError& e) {
    std::cerr << "trace error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const fasim::SimError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}
