#include "fasim/workloads.h"

#include <algorithm>
#include <string>

#include "program_builder.h"

namespace fasim {

const char* to_string(Mode mode) {
  return mode == Mode::kVanilla ? "vanilla" : "flashalloc";
}

Mode parse_mode(const std::string& text) {
  if (text == "vanilla") return Mode::kVanilla;
  if (text == "flashalloc" || text == "fa") return Mode::kFlashAlloc;
  throw SimError(ErrorCode::kConfigInvalid, "unknown mode '" + text + "'");
}

namespace detail {

Region resolve_region(const Region& requested, const Geometry& geometry) {
  const std::uint64_t cap = geometry.logical_capacity_pages();
  require(requested.start < cap, "region starts beyond logical capacity");
  Region r = requested;
  if (r.pages == 0) r.pages = cap - r.start;
  require(r.pages <= cap - r.start, "region exceeds logical capacity");
  return r;
}

}  // namespace detail

std::uint64_t Program::write_pages() const {
  std::uint64_t n = 0;
  for (const auto& s : streams) {
    for (const auto& op : s.ops) {
      if (const auto* w = std::get_if<HostWrite>(&op)) n += w->length;
    }
  }
  return n;
}

std::uint64_t Program::trim_pages() const {
  std::uint64_t n = 0;
  for (const auto& s : streams) {
    for (const auto& op : s.ops) {
      if (const auto* t = std::get_if<HostTrim>(&op)) n += t->length;
    }
  }
  return n;
}

std::uint64_t program_digest(const Program& program) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xffu;
      h *= 0x100000001b3ull;
    }
  };
  mix(program.region.start);
  mix(program.region.pages);
  mix(program.streams.size());
  for (const auto& s : program.streams) {
    mix(s.stream_id);
    mix(s.tenant_id);
    mix(s.ops.size());
    for (const auto& op : s.ops) {
      mix(op.index());
      if (const auto* w = std::get_if<HostWrite>(&op)) {
        mix(w->lba);
        mix(w->length);
      } else if (const auto* t = std::get_if<HostTrim>(&op)) {
        mix(t->lba);
        mix(t->length);
      } else if (const auto* a = std::get_if<HostFlashAlloc>(&op)) {
        mix(a->chunks.size());
        for (const auto& c : a->chunks) {
          mix(c.start);
          mix(c.length);
        }
      }
    }
  }
  return h;
}

void submit_program(const Program& program, HostModel& host) {
  for (const auto& s : program.streams) host.add_stream(s.stream_id, s.tenant_id);
  for (const auto& s : program.streams) {
    for (const auto& op : s.ops) host.submit(s.stream_id, op);
  }
}

Program compose_tenants(const std::vector<std::pair<std::uint32_t, Program>>& tenants) {
  for (std::size_t i = 0; i < tenants.size(); ++i) {
    for (std::size_t j = i + 1; j < tenants.size(); ++j) {
      const Region& a = tenants[i].second.region;
      const Region& b = tenants[j].second.region;
      if (a.start < b.start + b.pages && b.start < a.start + a.pages) {
        throw SimError(ErrorCode::kRegionOverlap,
                       "tenants " + std::to_string(tenants[i].first) + " and " +
                           std::to_string(tenants[j].first) + " share logical pages");
      }
    }
  }
  Program merged;
  Lba lo = UINT64_MAX;
  Lba hi = 0;
  std::uint32_t next_id = 0;
  for (const auto& [tenant, program] : tenants) {
    lo = std::min(lo, program.region.start);
    hi = std::max(hi, program.region.start + program.region.pages);
    for (const auto& s : program.streams) {
      merged.streams.push_back(StreamProgram{next_id++, tenant, s.ops});
    }
  }
  if (!tenants.empty()) merged.region = Region{lo, hi - lo};
  return merged;
}

}  // namespace fasim
