#include "fasim/scenario.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <json.hpp>

namespace fasim {
namespace {

using json = nlohmann::json;

[[noreturn]] void invalid(const std::string& what) { throw SimError(ErrorCode::kConfigInvalid, what); }

// Typed access to one JSON object that rejects keys nobody asked for, so a
// typo in a config fails loudly instead of silently using a default.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) invalid(path_ + " must be an object");
  }

  void u64(const char* key, std::uint64_t& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_unsigned()) invalid(where(key) + " must be a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }
  void u32(const char* key, std::uint32_t& out) {
    std::uint64_t wide = out;
    u64(key, wide);
    if (wide > UINT32_MAX) invalid(where(key) + " is too large");
    out = static_cast<std::uint32_t>(wide);
  }
  void f64(const char* key, double& out) {
    if (const json* v = take(key)) {
      if (!v->is_number()) invalid(where(key) + " must be a number");
      out = v->get<double>();
    }
  }
  void flag(const char* key, bool& out) {
    if (const json* v = take(key)) {
      if (!v->is_boolean()) invalid(where(key) + " must be true or false");
      out = v->get<bool>();
    }
  }
  bool str(const char* key, std::string& out) {
    if (const json* v = take(key)) {
      if (!v->is_string()) invalid(where(key) + " must be a string");
      out = v->get<std::string>();
      return true;
    }
    return false;
  }
  const json* child(const char* key) { return take(key); }
  std::string where(const std::string& key) const { return path_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!used_.count(key)) invalid("unknown key " + where(key));
    }
  }

 private:
  const json* take(const char* key) {
    auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    used_.insert(key);
    return &*it;
  }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

void parse_region(Fields& f, Region& region) {
  if (const json* r = f.child("region")) {
    Fields rf(*r, f.where("region"));
    rf.u64("start", region.start);
    rf.u64("pages", region.pages);
    rf.finish();
  }
}

WorkloadSpec parse_workload(const json& j, const std::string& path, bool allow_multi) {
  Fields f(j, path);
  WorkloadSpec w;
  if (!f.str("kind", w.kind)) invalid(path + ".kind is required");
  if (w.kind == "fio") {
    FioConfig& c = w.fio;
    f.u32("writers", c.writers);
    f.u64("region_pages", c.region_pages);
    f.u64("overwrite_unit", c.overwrite_unit);
    f.u64("total_logical_writes", c.total_logical_writes);
    parse_region(f, c.region);
  } else if (w.kind == "lsm") {
    LsmConfig& c = w.lsm;
    f.u32("tenants", c.tenants);
    f.u32("compaction_streams", c.compaction_streams);
    f.u64("sstable_pages", c.sstable_pages);
    f.u32("levels", c.levels);
    f.u32("level_fanout", c.level_fanout);
    f.u32("overlap_tables", c.overlap_tables);
    f.f64("metadata_write_fraction", c.metadata_write_fraction);
    f.u64("metadata_pages", c.metadata_pages);
    f.f64("fill_target", c.fill_target);
    f.u64("total_logical_writes", c.total_logical_writes);
    parse_region(f, c.region);
  } else if (w.kind == "logfs") {
    LogFsConfig& c = w.logfs;
    f.u32("active_heads", c.active_heads);
    f.u64("segment_pages", c.segment_pages);
    f.f64("hot_fraction", c.hot_fraction);
    f.f64("hot_traffic", c.hot_traffic);
    f.f64("live_fraction", c.live_fraction);
    f.u64("update_count", c.update_count);
    f.u64("sync_pages", c.sync_pages);
    f.f64("metadata_write_fraction", c.metadata_write_fraction);
    f.u64("metadata_pages", c.metadata_pages);
    parse_region(f, c.region);
  } else if (w.kind == "journal") {
    JournalConfig& c = w.journal;
    f.u64("journal_pages", c.journal_pages);
    f.u64("batch_pages", c.batch_pages);
    f.u64("tablespace_pages", c.tablespace_pages);
    f.u64("batches", c.batches);
    parse_region(f, c.region);
  } else if (w.kind == "multi" && allow_multi) {
    const json* list = f.child("tenants");
    if (!list || !list->is_array() || list->empty()) invalid(path + ".tenants must be a non-empty array");
    std::set<std::uint32_t> ids;
    for (std::size_t i = 0; i < list->size(); ++i) {
      const std::string tpath = path + ".tenants[" + std::to_string(i) + "]";
      Fields tf((*list)[i], tpath);
      TenantSpec t;
      t.tenant_id = static_cast<std::uint32_t>(i);
      tf.u32("tenant_id", t.tenant_id);
      tf.f64("share", t.share);
      const json* inner = tf.child("workload");
      if (!inner) invalid(tpath + ".workload is required");
      t.workload = parse_workload(*inner, tpath + ".workload", false);
      tf.finish();
      if (!(t.share > 0 && t.share <= 1)) invalid(tpath + ".share must be in (0, 1]");
      if (!ids.insert(t.tenant_id).second) invalid(tpath + ".tenant_id repeats");
      w.tenants.push_back(std::move(t));
    }
    double total = 0;
    for (const auto& t : w.tenants) total += t.share;
    if (total > 1 + 1e-9) invalid(path + ".tenants shares add up to more than 1");
  } else {
    invalid(path + ".kind '" + w.kind + "' is not one of fio, lsm, logfs, journal" +
            (allow_multi ? ", multi" : ""));
  }
  f.finish();
  return w;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

Program build_leaf(WorkloadSpec spec, const Geometry& g, Mode mode, std::uint64_t seed,
                   const std::optional<Region>& region) {
  if (spec.kind == "fio") {
    spec.fio.mode = mode;
    if (region) spec.fio.region = *region;
    return gen_fio(spec.fio, g, seed);
  }
  if (spec.kind == "lsm") {
    spec.lsm.mode = mode;
    if (region) spec.lsm.region = *region;
    return gen_lsm(spec.lsm, g, seed);
  }
  if (spec.kind == "logfs") {
    spec.logfs.mode = mode;
    if (region) spec.logfs.region = *region;
    return gen_logfs(spec.logfs, g, seed);
  }
  if (spec.kind == "journal") {
    spec.journal.mode = mode;
    if (region) spec.journal.region = *region;
    return gen_journal(spec.journal, g, seed);
  }
  invalid("unknown workload kind " + spec.kind);
}

}  // namespace

std::uint64_t ScenarioConfig::effective_window_pages() const {
  if (window_pages) return window_pages;
  return std::max<std::uint64_t>(1, geometry.logical_capacity_pages() / 64);
}

ScenarioConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    invalid(std::string("config is not valid JSON: ") + e.what());
  }
  Fields f(j, "config");
  ScenarioConfig c;
  std::uint64_t version = 0;
  f.u64("schema_version", version);
  if (version != 1) invalid("config.schema_version must be 1");
  c.schema_version = 1;
  f.str("name", c.name);
  if (!std::regex_match(c.name, std::regex("[A-Za-z0-9_.-]+"))) {
    invalid("config.name may only contain letters, digits, '_', '.', '-'");
  }
  if (const json* g = f.child("geometry")) {
    Fields gf(*g, "config.geometry");
    gf.u32("total_blocks", c.geometry.total_blocks);
    gf.u32("pages_per_block", c.geometry.pages_per_block);
    gf.u32("page_size", c.geometry.page_size);
    gf.u32("channels", c.geometry.channels);
    gf.f64("op_fraction", c.geometry.op_fraction);
    gf.finish();
  }
  try {
    c.geometry.validate();
  } catch (const std::invalid_argument& e) {
    invalid(std::string("config.geometry: ") + e.what());
  }
  if (const json* t = f.child("ftl")) {
    Fields tf(*t, "config.ftl");
    tf.u32("reserve_blocks", c.ftl.reserve_blocks);
    tf.flag("single_frontier", c.ftl.single_frontier);
    tf.finish();
  }
  std::string mode;
  if (f.str("mode", mode)) c.mode = parse_mode(mode);
  f.u64("seed", c.seed);
  if (const json* i = f.child("interleave")) {
    Fields inf(*i, "config.interleave");
    inf.u64("split_unit", c.interleave.split_unit);
    std::string policy;
    if (inf.str("policy", policy)) {
      if (policy == "round_robin") {
        c.interleave.policy = InterleavePolicy::kRoundRobin;
      } else if (policy == "seeded_random") {
        c.interleave.policy = InterleavePolicy::kSeededRandom;
      } else {
        invalid("config.interleave.policy must be round_robin or seeded_random");
      }
    }
    if (const json* seed = inf.child("seed")) {
      if (!seed->is_number_unsigned()) invalid("config.interleave.seed must be a non-negative integer");
      c.interleave.seed = seed->get<std::uint64_t>();
      c.interleave_seed_given = true;
    }
    inf.finish();
  }
  c.interleave.validate();
  f.u64("window_pages", c.window_pages);
  if (const json* k = f.child("cost")) {
    Fields kf(*k, "config.cost");
    kf.f64("read_us", c.cost.read_us);
    kf.f64("program_us", c.cost.program_us);
    kf.f64("erase_us", c.cost.erase_us);
    kf.finish();
  }
  if (c.cost.read_us < 0 || c.cost.program_us < 0 || c.cost.erase_us < 0) {
    invalid("config.cost entries must be non-negative");
  }
  if (const json* o = f.child("output")) {
    Fields of(*o, "config.output");
    of.str("dir", c.output_dir);
    of.finish();
  }
  const json* w = f.child("workload");
  if (!w) invalid("config.workload is required");
  c.workload = parse_workload(*w, "config.workload", true);
  f.finish();
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) invalid("cannot read config " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

Program build_program(const ScenarioConfig& config) {
  const Geometry& g = config.geometry;
  if (config.workload.kind != "multi") {
    return build_leaf(config.workload, g, config.mode, config.seed, std::nullopt);
  }
  const std::uint64_t cap = g.logical_capacity_pages();
  std::vector<std::pair<std::uint32_t, Program>> parts;
  Lba cursor = 0;
  for (std::size_t i = 0; i < config.workload.tenants.size(); ++i) {
    const TenantSpec& t = config.workload.tenants[i];
    const auto blocks = static_cast<std::uint64_t>(
        std::floor(t.share * static_cast<double>(cap / g.pages_per_block) + 1e-9));
    const Region region{cursor, blocks * g.pages_per_block};
    if (region.pages == 0) invalid("tenant " + std::to_string(t.tenant_id) + " share is under one block");
    cursor += region.pages;
    parts.emplace_back(t.tenant_id, build_leaf(t.workload, g, config.mode, mix_seed(config.seed, i), region));
  }
  return compose_tenants(parts);
}

double TenantStats::throughput_proxy() const {
  return ::fasim::throughput_proxy(logical_pages, time_us);
}

Simulation::Simulation(const Geometry& geometry, const FtlOptions& ftl, Mode mode,
                       std::uint64_t window_pages, const CostModel& cost)
    : ftl_(geometry, ftl), mode_(mode), cost_(cost), metrics_(window_pages, cost) {}

void Simulation::apply(const Command& command) {
  ++commands_;
  if (command.op == OpKind::kFlashAlloc && mode_ == Mode::kVanilla) {
    ++skipped_;
    return;
  }
  const Counters before = ftl_.counters();
  try {
    ftl_.apply(command);
  } catch (const SimError& e) {
    throw ScenarioError(command.seq, e.code(), e.what());
  }
  const Counters delta = ftl_.counters() - before;
  TenantStats& t = tenants_[command.tenant_id];
  t.logical_pages += delta.logical_pages_written;
  t.time_us += cost_.time_us(delta);
  metrics_.observe(ftl_);
}

Report Simulation::finish(const std::string& name) {
  metrics_.finish(ftl_);
  Report r;
  r.name = name;
  r.mode = mode_;
  r.commands = commands_;
  r.skipped_flashalloc = skipped_;
  r.counters = ftl_.counters();
  if (r.counters.logical_pages_written) r.end_waf = running_waf(r.counters);
  r.samples = metrics_.samples();
  if (!r.samples.empty()) r.end_throughput_proxy = r.samples.back().throughput_proxy;
  const double total_time = cost_.time_us(r.counters);
  if (total_time > 0) r.mean_throughput_proxy = throughput_proxy(r.counters.logical_pages_written, total_time);
  r.regions = ftl_.gc_region_report();
  r.end_mid_mass = bimodality_mid_mass(ftl_.media());
  r.digest = digest(ftl_.snapshot());
  r.tenants = tenants_;
  return r;
}

RunResult run_scenario(const ScenarioConfig& config, const RunOptions& options) {
  const Program program = build_program(config);
  InterleaveConfig interleave = config.interleave;
  if (!config.interleave_seed_given) interleave.seed = config.seed;
  HostModel host(interleave);
  submit_program(program, host);
  Simulation sim(config.geometry, config.ftl, config.mode, config.effective_window_pages(), config.cost);
  RunResult result;
  host.drain([&](const Command& c) {
    if (options.keep_commands) result.commands.push_back(c);
    sim.apply(c);
    if (options.after_command) options.after_command(c, sim.ftl());
  });
  result.report = sim.finish(config.name);
  return result;
}

TraceHeader trace_header(const ScenarioConfig& config) {
  TraceHeader h;
  h.geometry = config.geometry;
  h.name = config.name;
  h.mode = config.mode;
  h.window_pages = config.effective_window_pages();
  h.ftl = config.ftl;
  h.cost = config.cost;
  return h;
}

RunResult replay_trace(const Trace& trace, std::optional<Mode> mode_override, const RunOptions& options) {
  const TraceHeader& h = trace.header;
  const Mode mode = mode_override ? *mode_override : h.mode.value_or(Mode::kFlashAlloc);
  const std::uint64_t window =
      h.window_pages ? h.window_pages : std::max<std::uint64_t>(1, h.geometry.logical_capacity_pages() / 64);
  Simulation sim(h.geometry, h.ftl, mode, window, h.cost);
  RunResult result;
  for (const Command& c : trace.commands) {
    if (options.keep_commands) result.commands.push_back(c);
    sim.apply(c);
    if (options.after_command) options.after_command(c, sim.ftl());
  }
  result.report = sim.finish(h.name);
  return result;
}

namespace {

nlohmann::ordered_json report_object(const Report& r) {
  nlohmann::ordered_json j;
  char digest_hex[17];
  std::snprintf(digest_hex, sizeof digest_hex, "%016llx", static_cast<unsigned long long>(r.digest));
  j["name"] = r.name;
  j["mode"] = to_string(r.mode);
  j["commands"] = r.commands;
  j["skipped_flashalloc"] = r.skipped_flashalloc;
  j["end_waf"] = r.end_waf;
  j["logical_pages"] = r.counters.logical_pages_written;
  j["physical_pages"] = r.counters.physical_programs;
  j["copybacks"] = r.counters.copyback_programs;
  j["erases"] = r.counters.erases;
  j["trim_page_invalidations"] = r.counters.trim_page_invalidations;
  j["trim_block_erases"] = r.counters.trim_block_erases;
  j["page_reads"] = r.counters.page_reads;
  j["end_throughput_proxy"] = r.end_throughput_proxy;
  j["mean_throughput_proxy"] = r.mean_throughput_proxy;
  j["fa_blocks"] = r.regions.fa_blocks;
  j["normal_blocks"] = r.regions.normal_blocks;
  j["free_blocks"] = r.regions.free_blocks;
  j["end_mid_mass"] = r.end_mid_mass;
  j["windows"] = r.samples.size();
  j["state_digest"] = digest_hex;
  nlohmann::ordered_json tenants = nlohmann::ordered_json::object();
  for (const auto& [id, t] : r.tenants) {
    nlohmann::ordered_json tj;
    tj["logical_pages"] = t.logical_pages;
    tj["time_us"] = t.time_us;
    tj["throughput_proxy"] = t.time_us > 0 ? t.throughput_proxy() : 0.0;
    tenants[std::to_string(id)] = tj;
  }
  j["tenants"] = tenants;
  return j;
}

}  // namespace

std::string report_json(const Report& report) {
  return report_object(report).dump(2) + "\n";
}

OutputPaths write_outputs(const Report& report, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::string stem = (std::filesystem::path(out_dir) / (report.name + "-" + to_string(report.mode))).string();
  OutputPaths paths{stem + ".csv", stem + ".report.json"};
  {
    std::ofstream csv(paths.csv, std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write " + paths.csv);
    csv << format_csv(report.samples);
  }
  nlohmann::ordered_json j = report_object(report);
  j["csv"] = paths.csv;
  std::ofstream out(paths.report, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + paths.report);
  out << j.dump(2) << "\n";
  return paths;
}

}  // namespace fasim
