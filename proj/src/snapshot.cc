#include "fasim/snapshot.h"

#include <bit>
#include <cstring>

#include "fasim/command.h"

namespace fasim {
namespace {

class Fnv1a {
 public:
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      state_ ^= (v >> (8 * i)) & 0xffu;
      state_ *= 0x100000001b3ull;
    }
  }
  void u8(std::uint8_t v) {
    state_ ^= v;
    state_ *= 0x100000001b3ull;
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void opt(const std::optional<std::uint64_t>& v) {
    u8(v.has_value() ? 1 : 0);
    u64(v.value_or(0));
  }
  std::uint64_t value() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ull;
};

}  // namespace

const char* to_string(OpKind op) {
  switch (op) {
    case OpKind::kWrite: return "write";
    case OpKind::kTrim: return "trim";
    case OpKind::kFlashAlloc: return "flashalloc";
  }
  return "?";
}

std::uint64_t digest(const DeviceSnapshot& s) {
  Fnv1a h;
  h.u64(s.geometry.total_blocks);
  h.u64(s.geometry.pages_per_block);
  h.u64(s.geometry.page_size);
  h.u64(s.geometry.channels);
  h.f64(s.geometry.op_fraction);

  h.u64(s.mapping.size());
  for (const auto& e : s.mapping) {
    h.u8(e.mapped ? 1 : 0);
    h.u64(e.mapped ? e.ppa.block : 0);
    h.u64(e.mapped ? e.ppa.offset : 0);
    h.u8(e.fa_flag ? 1 : 0);
  }

  h.u64(s.blocks.size());
  for (const auto& b : s.blocks) {
    h.u8(static_cast<std::uint8_t>(b.kind));
    h.opt(b.owner);
    h.u64(b.write_ptr);
    h.u64(b.erase_count);
    for (std::size_t i = 0; i < b.pages.size(); ++i) {
      h.u8(static_cast<std::uint8_t>(b.pages[i]));
      h.u64(b.lbas[i]);
      h.u64(b.tokens[i]);
    }
  }

  h.u64(s.instances.size());
  for (const auto& inst : s.instances) {
    h.u64(inst.id);
    h.u64(inst.chunks.size());
    for (const auto& c : inst.chunks) {
      h.u64(c.start);
      h.u64(c.length);
    }
    h.u64(inst.blocks.size());
    for (BlockId b : inst.blocks) h.u64(b);
    h.u64(inst.next_block);
    h.u64(inst.next_offset);
    h.u64(inst.pages_written);
    h.u64(inst.total_pages);
  }

  h.u64(s.frontier.size());
  for (const auto& f : s.frontier) {
    h.opt(f ? std::optional<std::uint64_t>(*f) : std::nullopt);
  }
  h.u64(s.next_slot);
  h.u64(s.fa_channel_cursor);
  h.u64(s.next_instance_id);

  const Counters& c = s.counters;
  h.u64(c.logical_pages_written);
  h.u64(c.physical_programs);
  h.u64(c.copyback_programs);
  h.u64(c.erases);
  h.u64(c.trim_page_invalidations);
  h.u64(c.trim_block_erases);
  h.u64(c.page_reads);
  return h.value();
}

}  // namespace fasim
