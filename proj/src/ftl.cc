#include "fasim/ftl.h"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "fasim/errors.h"

namespace fasim {
namespace {

[[noreturn]] void broken(const std::string& what) {
  throw std::logic_error("invariant violated: " + what);
}

}  // namespace

Ftl::Ftl(const Geometry& geometry, FtlOptions options)
    : media_(geometry),
      reserve_(options.reserve_blocks != 0 ? options.reserve_blocks : 2 + geometry.channels),
      mapping_(geometry.logical_capacity_pages()),
      frontier_(options.single_frontier ? 1 : geometry.channels) {
  for (BlockId b = 0; b < geometry.total_blocks; ++b) free_pool_.insert(b);
}

const MappingEntry& Ftl::entry(Lba lba) const {
  if (lba >= mapping_.size()) throw SimError(ErrorCode::kOutOfRange, "lba " + std::to_string(lba));
  return mapping_[lba];
}

void Ftl::check_range(Lba lba_start, std::uint64_t length) const {
  const std::uint64_t cap = mapping_.size();
  if (lba_start > cap || length > cap - lba_start) {
    throw SimError(ErrorCode::kOutOfRange,
                   std::to_string(lba_start) + "+" + std::to_string(length) +
                       " beyond capacity " + std::to_string(cap));
  }
}

void Ftl::apply(const Command& command) {
  switch (command.op) {
    case OpKind::kWrite:
      host_write(command.lba, command.length, command.content_base);
      return;
    case OpKind::kTrim:
      host_trim(command.lba, command.length);
      return;
    case OpKind::kFlashAlloc:
      flash_alloc(command.chunks);
      return;
  }
}

// ---------------------------------------------------------------------------
// Host commands

WriteReceipt Ftl::host_write(Lba lba_start, std::uint64_t length, Token content_base) {
  check_range(lba_start, length);
  const Counters before = counters_;
  for (std::uint64_t i = 0; i < length; ++i) {
    const Lba lba = lba_start + i;
    const Token token = content_base + i;
    if (auto id = registry_.probe(lba)) {
      fa_append(*id, lba, token);
    } else {
      normal_host_write(lba, token);
    }
  }
  return WriteReceipt{counters_.physical_programs - before.physical_programs,
                      counters_.copyback_programs - before.copyback_programs};
}

Token Ftl::host_read(Lba lba) {
  const MappingEntry& e = entry(lba);
  if (!e.ppa) throw SimError(ErrorCode::kUnmapped, "lba " + std::to_string(lba));
  ++counters_.page_reads;
  return media_.block(e.ppa->block).contents[e.ppa->offset];
}

TrimReceipt Ftl::host_trim(Lba lba_start, std::uint64_t length) {
  check_range(lba_start, length);
  TrimReceipt receipt;
  for (std::uint64_t i = 0; i < length; ++i) {
    MappingEntry& e = mapping_[lba_start + i];
    if (!e.ppa) continue;
    const BlockId block = e.ppa->block;
    media_.invalidate_page(*e.ppa);
    e.ppa.reset();
    ++receipt.pages_invalidated;
    ++counters_.trim_page_invalidations;
    const BlockState& b = media_.block(block);
    // Orphan FA blocks hold one object's pages; once that object is gone the
    // block is erased on the spot rather than left for GC.
    if (b.kind == BlockKind::kFa && !b.fa_owner && b.valid_count == 0) {
      erase_to_pool(block);
      ++receipt.blocks_erased;
      ++counters_.trim_block_erases;
    }
  }
  return receipt;
}

// ---------------------------------------------------------------------------
// Write paths

PhysPageAddr Ftl::program(BlockId block, Lba lba, Token token) {
  const PhysPageAddr ppa = media_.program_page(block, lba, token);
  ++counters_.physical_programs;
  return ppa;
}

void Ftl::drop_mapping(Lba lba) {
  MappingEntry& e = mapping_[lba];
  if (e.ppa) {
    media_.invalidate_page(*e.ppa);
    e.ppa.reset();
  }
}

void Ftl::normal_host_write(Lba lba, Token token) {
  drop_mapping(lba);
  const PhysPageAddr ppa = append_normal(lba, token, /*in_gc=*/false);
  mapping_[lba].ppa = ppa;
  ++counters_.logical_pages_written;
}

void Ftl::fa_append(InstanceId id, Lba lba, Token token) {
  FaInstance* inst = registry_.find(id);
  drop_mapping(lba);
  const BlockId block = inst->dedicated_blocks[inst->next_block];
  const PhysPageAddr ppa = program(block, lba, token);
  if (ppa.offset != inst->next_offset) broken("FA append landed off next_write_ptr");
  if (++inst->next_offset == geometry().pages_per_block) {
    ++inst->next_block;
    inst->next_offset = 0;
  }
  ++inst->pages_written;
  mapping_[lba].ppa = ppa;
  ++counters_.logical_pages_written;
  if (inst->pages_written == inst->total_pages) destruct_instance(id);
}

PhysPageAddr Ftl::append_normal(Lba lba, Token token, bool in_gc) {
  const std::uint32_t slot = next_slot_;
  next_slot_ = (next_slot_ + 1) % frontier_slots();
  const std::uint32_t used = open_frontier(slot, in_gc);
  const BlockId block = *frontier_[used];
  const PhysPageAddr ppa = program(block, lba, token);
  if (media_.block(block).full()) frontier_[used].reset();
  return ppa;
}

// Returns the frontier slot whose block takes the next page. Normally that
// is `slot`; when the pool is exhausted any other open frontier is used.
std::uint32_t Ftl::open_frontier(std::uint32_t slot, bool in_gc) {
  if (frontier_[slot]) return slot;
  if (!in_gc) run_normal_gc();
  // Relocation may have opened this slot already.
  if (frontier_[slot]) return slot;
  if (!free_pool_.empty()) {
    const bool per_channel = frontier_slots() == geometry().channels;
    const BlockId block = take_free(per_channel ? std::optional<std::uint32_t>(slot) : std::nullopt);
    media_.claim(block, BlockKind::kNormal);
    frontier_[slot] = block;
    return slot;
  }
  for (std::uint32_t k = 1; k < frontier_slots(); ++k) {
    const std::uint32_t other = (slot + k) % frontier_slots();
    if (frontier_[other]) return other;
  }
  throw SimError(ErrorCode::kDeviceWedged, "no free block and no open frontier");
}

BlockId Ftl::take_free(std::optional<std::uint32_t> channel) {
  auto it = free_pool_.begin();
  if (channel) {
    auto match = std::find_if(free_pool_.begin(), free_pool_.end(), [&](BlockId b) {
      return geometry().channel_of(b) == *channel;
    });
    if (match != free_pool_.end()) it = match;
  }
  const BlockId block = *it;
  free_pool_.erase(it);
  return block;
}

// ---------------------------------------------------------------------------
// Garbage collection

bool Ftl::is_frontier(BlockId block) const {
  return std::any_of(frontier_.begin(), frontier_.end(),
                     [block](const std::optional<BlockId>& f) { return f && *f == block; });
}

std::optional<BlockId> Ftl::best_victim(bool normal, bool orphan_fa) const {
  std::optional<BlockId> best;
  std::uint32_t best_valid = 0;
  for (const BlockState& b : media_.blocks()) {
    const bool eligible =
        (normal && b.kind == BlockKind::kNormal && !is_frontier(b.id)) ||
        (orphan_fa && b.kind == BlockKind::kFa && !b.fa_owner);
    if (!eligible || b.invalid_count() == 0) continue;
    // Strict comparison keeps the lowest id on ties.
    if (!best || b.valid_count < best_valid) {
      best = b.id;
      best_valid = b.valid_count;
    }
  }
  return best;
}

BlockId Ftl::select_victim(VictimClass kind) const {
  const auto victim = kind == VictimClass::kNormal ? best_victim(true, false)
                                                   : best_victim(false, true);
  if (!victim) throw SimError(ErrorCode::kNoVictim, "no eligible block with invalid pages");
  return *victim;
}

void Ftl::run_normal_gc() {
  while (free_pool_.size() < reserve_) {
    auto victim = best_victim(true, false);
    if (!victim) victim = best_victim(false, true);
    if (!victim) return;
    collect(*victim);
  }
}

void Ftl::collect(BlockId victim) {
  const std::uint32_t written = media_.block(victim).write_ptr;
  for (std::uint32_t off = 0; off < written; ++off) {
    const BlockState& v = media_.block(victim);
    if (v.page_states[off] != PageState::kValid) continue;
    const Lba lba = v.resident_lbas[off];
    const Token token = v.contents[off];
    const PhysPageAddr moved = append_normal(lba, token, /*in_gc=*/true);
    if (media_.block(moved.block).kind != BlockKind::kNormal) {
      broken("copyback landed outside a Normal block");
    }
    media_.invalidate_page(PhysPageAddr{victim, off});
    mapping_[lba].ppa = moved;
    ++counters_.copyback_programs;
    ++counters_.page_reads;
  }
  erase_to_pool(victim);
}

void Ftl::erase_to_pool(BlockId block) {
  media_.erase_block(block);
  free_pool_.insert(block);
  ++counters_.erases;
}

BlockId Ftl::gc_for_normal_write() {
  const std::uint32_t used = open_frontier(next_slot_, /*in_gc=*/false);
  return *frontier_[used];
}

std::vector<BlockId> Ftl::secure_clean_blocks(std::uint32_t n) {
  if (n == 0) return {};
  const std::uint32_t ppb = geometry().pages_per_block;
  std::uint64_t reclaimable = 0;
  for (const BlockState& b : media_.blocks()) {
    const bool eligible = (b.kind == BlockKind::kNormal && !is_frontier(b.id)) ||
                          (b.kind == BlockKind::kFa && !b.fa_owner);
    if (eligible && b.invalid_count() > 0) reclaimable += ppb - b.valid_count;
  }
  if (free_pool_.size() + reclaimable / ppb < n) {
    throw SimError(ErrorCode::kInsufficientSpace,
                   "need " + std::to_string(n) + " clean blocks, pool has " +
                       std::to_string(free_pool_.size()));
  }
  // Merge victims of either class until the request fits with one block to
  // spare. Relocations always go to the Normal frontier.
  while (free_pool_.size() < static_cast<std::size_t>(n) + 1) {
    const auto victim = best_victim(true, true);
    if (!victim) break;
    collect(*victim);
  }
  if (free_pool_.size() < n) {
    throw SimError(ErrorCode::kInsufficientSpace,
                   "merging left " + std::to_string(free_pool_.size()) + " of " +
                       std::to_string(n) + " blocks");
  }

  const std::uint32_t channels = geometry().channels;
  std::vector<BlockId> chosen;
  std::set<BlockId> remaining = free_pool_;
  for (std::uint32_t k = 0; k < n; ++k) {
    const std::uint32_t channel = (fa_channel_cursor_ + k) % channels;
    auto it = std::find_if(remaining.begin(), remaining.end(),
                           [&](BlockId b) { return geometry().channel_of(b) == channel; });
    if (it == remaining.end()) it = remaining.begin();
    chosen.push_back(*it);
    remaining.erase(it);
  }
  fa_channel_cursor_ = (fa_channel_cursor_ + n) % channels;
  return chosen;
}

// ---------------------------------------------------------------------------
// FlashAlloc

InstanceId Ftl::flash_alloc(std::span<const Chunk> chunks) {
  std::vector<Chunk> normalized = normalize_chunks(chunks, mapping_.size());
  if (registry_.overlaps(normalized)) {
    throw SimError(ErrorCode::kOverlapWithActiveInstance,
                   "range starting at " + std::to_string(normalized.front().start));
  }
  std::uint64_t range = 0;
  for (const Chunk& c : normalized) range += c.length;
  const std::uint32_t ppb = geometry().pages_per_block;
  const auto blocks_needed = static_cast<std::uint32_t>((range + ppb - 1) / ppb);

  std::vector<BlockId> blocks = secure_clean_blocks(blocks_needed);
  const InstanceId id = next_instance_id_++;
  for (BlockId b : blocks) {
    free_pool_.erase(b);
    media_.claim(b, BlockKind::kFa, id);
  }
  for (const Chunk& c : normalized) {
    for (Lba lba = c.start; lba < c.end(); ++lba) mapping_[lba].fa_flag = true;
  }
  FaInstance instance;
  instance.id = id;
  instance.chunks = std::move(normalized);
  instance.dedicated_blocks = std::move(blocks);
  instance.total_pages = static_cast<std::uint64_t>(blocks_needed) * ppb;
  registry_.add(std::move(instance));
  return id;
}

void Ftl::destruct_instance(InstanceId id) {
  const FaInstance inst = registry_.remove(id);
  for (const Chunk& c : inst.chunks) {
    for (Lba lba = c.start; lba < c.end(); ++lba) mapping_[lba].fa_flag = false;
  }
  for (BlockId b : inst.dedicated_blocks) {
    if (media_.block(b).write_ptr == 0) {
      media_.release_unwritten(b);
      free_pool_.insert(b);
    } else {
      media_.set_owner(b, std::nullopt);
    }
  }
}

RegionReport Ftl::gc_region_report() const {
  RegionReport r;
  for (const BlockState& b : media_.blocks()) {
    switch (b.kind) {
      case BlockKind::kFree: ++r.free_blocks; break;
      case BlockKind::kNormal: ++r.normal_blocks; break;
      case BlockKind::kFa: ++r.fa_blocks; break;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Introspection

DeviceSnapshot Ftl::snapshot() const {
  DeviceSnapshot s;
  s.geometry = geometry();
  s.mapping.reserve(mapping_.size());
  for (const MappingEntry& e : mapping_) {
    s.mapping.push_back({e.ppa.has_value(), e.ppa.value_or(PhysPageAddr{}), e.fa_flag});
  }
  for (const BlockState& b : media_.blocks()) {
    DeviceSnapshot::Block sb;
    sb.kind = b.kind;
    sb.owner = b.fa_owner;
    sb.write_ptr = b.write_ptr;
    sb.erase_count = b.erase_count;
    sb.pages = b.page_states;
    sb.lbas = b.resident_lbas;
    sb.tokens = b.contents;
    s.blocks.push_back(std::move(sb));
  }
  for (const auto& [id, inst] : registry_.instances()) {
    s.instances.push_back({id, inst.chunks, inst.dedicated_blocks, inst.next_block,
                           inst.next_offset, inst.pages_written, inst.total_pages});
  }
  s.frontier = frontier_;
  s.next_slot = next_slot_;
  s.fa_channel_cursor = fa_channel_cursor_;
  s.next_instance_id = next_instance_id_;
  s.counters = counters_;
  return s;
}

void Ftl::check_invariants() const {
  const Geometry& g = geometry();
  std::uint64_t programs = 0;
  std::uint64_t erases = 0;
  std::uint64_t valid_pages = 0;
  for (const BlockState& b : media_.blocks()) {
    std::uint32_t valid = 0;
    std::uint32_t invalid = 0;
    for (std::uint32_t off = 0; off < g.pages_per_block; ++off) {
      const PageState st = b.page_states[off];
      if ((off < b.write_ptr) == (st == PageState::kClean)) {
        broken("block " + std::to_string(b.id) + " has a hole at offset " + std::to_string(off));
      }
      valid += st == PageState::kValid;
      invalid += st == PageState::kInvalid;
    }
    if (valid != b.valid_count) broken("valid_count mismatch in block " + std::to_string(b.id));
    if (valid + invalid != b.write_ptr) broken("write_ptr != valid + invalid");
    if (b.kind == BlockKind::kFree && b.write_ptr != 0) broken("programmed Free block");
    if (b.fa_owner && b.kind != BlockKind::kFa) broken("owner on non-FA block");
    if ((b.kind == BlockKind::kFree) != (free_pool_.count(b.id) == 1)) {
      broken("free pool out of sync at block " + std::to_string(b.id));
    }
    if (b.fa_owner) {
      const FaInstance* inst = registry_.find(*b.fa_owner);
      if (!inst) broken("block owned by inactive instance");
      if (std::find(inst->dedicated_blocks.begin(), inst->dedicated_blocks.end(), b.id) ==
          inst->dedicated_blocks.end()) {
        broken("owned block missing from instance");
      }
      // FA purity: everything valid here belongs to the owner's range.
      for (std::uint32_t off = 0; off < b.write_ptr; ++off) {
        if (b.page_states[off] == PageState::kValid && !inst->contains(b.resident_lbas[off])) {
          broken("foreign page in FA block " + std::to_string(b.id));
        }
      }
    } else if (b.kind == BlockKind::kFa && b.write_ptr == 0) {
      broken("unowned FA block " + std::to_string(b.id) + " was never programmed");
    }
    programs += b.programs;
    erases += b.erase_count;
    valid_pages += valid;
  }
  for (const auto& f : frontier_) {
    if (!f) continue;
    const BlockState& b = media_.block(*f);
    if (b.kind != BlockKind::kNormal || b.full()) broken("bad frontier block");
  }

  std::uint64_t mapped = 0;
  for (Lba lba = 0; lba < mapping_.size(); ++lba) {
    const MappingEntry& e = mapping_[lba];
    if (e.ppa) {
      const BlockState& b = media_.block(e.ppa->block);
      if (b.page_states[e.ppa->offset] != PageState::kValid ||
          b.resident_lbas[e.ppa->offset] != lba) {
        broken("mapping of lba " + std::to_string(lba) + " is not bijective");
      }
      ++mapped;
    }
    const auto probed = registry_.probe(lba);
    if (probed != registry_.probe_linear(lba)) broken("probe/scan disagree at " + std::to_string(lba));
    if (e.fa_flag != probed.has_value()) broken("fa_flag unsound at " + std::to_string(lba));
  }
  if (mapped != valid_pages) broken("valid pages without mapping entries");

  for (const auto& [id, inst] : registry_.instances()) {
    if (inst.pages_written >= inst.total_pages) broken("full instance still active");
    const BlockState& cur = media_.block(inst.dedicated_blocks[inst.next_block]);
    if (cur.write_ptr != inst.next_offset) broken("next_write_ptr out of sync");
  }

  const Counters& c = counters_;
  if (c.physical_programs != c.logical_pages_written + c.copyback_programs) {
    broken("physical != logical + copyback");
  }
  if (c.physical_programs != media_.physical_programs() || programs != media_.physical_programs()) {
    broken("program counters disagree");
  }
  if (c.erases != media_.erases() || erases != media_.erases()) broken("erase counters disagree");
}

}  // namespace fasim
