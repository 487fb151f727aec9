#include "fasim/refcheck.h"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace fasim {

RefFtl::RefFtl(const Geometry& geometry, RefOptions options)
    : geometry_(geometry),
      options_(options),
      ppb_(geometry.pages_per_block),
      nblocks_(geometry.total_blocks),
      reserve_(options.reserve_blocks ? options.reserve_blocks : 2 + geometry.channels),
      slots_(options.single_frontier ? 1 : geometry.channels) {
  const std::size_t pages = static_cast<std::size_t>(nblocks_) * ppb_;
  state_.assign(pages, PageState::kClean);
  lba_.assign(pages, 0);
  token_.assign(pages, 0);
  kind_.assign(nblocks_, BlockKind::kFree);
  owner_.assign(nblocks_, std::nullopt);
  wp_.assign(nblocks_, 0);
  erase_count_.assign(nblocks_, 0);
  const std::uint64_t cap = geometry.logical_capacity_pages();
  map_.assign(cap, kNone);
  flag_.assign(cap, false);
  frontier_.assign(slots_, kNone);
}

std::uint32_t RefFtl::valid_in(BlockId b) const {
  std::uint32_t n = 0;
  for (std::uint32_t off = 0; off < ppb_; ++off) n += state_[page_index(b, off)] == PageState::kValid;
  return n;
}

std::uint32_t RefFtl::free_blocks() const {
  return static_cast<std::uint32_t>(std::count(kind_.begin(), kind_.end(), BlockKind::kFree));
}

bool RefFtl::in_frontier(BlockId b) const {
  return std::find(frontier_.begin(), frontier_.end(), static_cast<std::int64_t>(b)) !=
         frontier_.end();
}

RefFtl::Instance* RefFtl::owner_of(Lba lba) {
  for (Instance& inst : instances_) {
    for (const Chunk& c : inst.chunks) {
      if (lba >= c.start && lba < c.start + c.length) return &inst;
    }
  }
  return nullptr;
}

void RefFtl::apply(const Command& command) {
  if (command.op == OpKind::kWrite) {
    write(command.lba, command.length, command.content_base);
  } else if (command.op == OpKind::kTrim) {
    trim(command.lba, command.length);
  } else {
    alloc(command.chunks);
  }
}

void RefFtl::write(Lba lba, std::uint64_t len, Token base) {
  const std::uint64_t cap = map_.size();
  if (lba > cap || len > cap - lba) throw SimError(ErrorCode::kOutOfRange, "write range");
  for (std::uint64_t i = 0; i < len; ++i) {
    const Lba l = lba + i;
    Instance* inst = owner_of(l);
    unmap(l);
    std::int64_t idx;
    if (inst) {
      idx = put(inst->blocks[inst->next_block], l, base + i);
      inst->next_offset++;
      if (inst->next_offset == ppb_) {
        inst->next_offset = 0;
        inst->next_block++;
      }
      inst->written++;
    } else {
      idx = place_normal(l, base + i, false);
    }
    map_[l] = idx;
    counters_.logical_pages_written++;
    if (inst && inst->written == inst->total) finish(static_cast<std::size_t>(inst - instances_.data()));
  }
}

void RefFtl::trim(Lba lba, std::uint64_t len) {
  const std::uint64_t cap = map_.size();
  if (lba > cap || len > cap - lba) throw SimError(ErrorCode::kOutOfRange, "trim range");
  for (Lba l = lba; l < lba + len; ++l) {
    if (map_[l] == kNone) continue;
    const auto b = static_cast<BlockId>(map_[l] / ppb_);
    state_[map_[l]] = PageState::kInvalid;
    map_[l] = kNone;
    counters_.trim_page_invalidations++;
    if (kind_[b] == BlockKind::kFa && !owner_[b] && valid_in(b) == 0) {
      erase(b);
      counters_.trim_block_erases++;
    }
  }
}

void RefFtl::alloc(std::span<const Chunk> chunks) {
  if (chunks.empty()) throw SimError(ErrorCode::kMalformedChunks, "no chunks");
  std::vector<Chunk> sorted(chunks.begin(), chunks.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const Chunk& a, const Chunk& b) { return a.start < b.start; });
  const std::uint64_t cap = map_.size();
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const Chunk& c = sorted[i];
    if (c.length == 0 || c.start >= cap || c.length > cap - c.start) {
      throw SimError(ErrorCode::kMalformedChunks, "bad chunk");
    }
    if (i > 0 && sorted[i - 1].start + sorted[i - 1].length >= c.start) {
      throw SimError(ErrorCode::kMalformedChunks, "touching chunks");
    }
  }
  for (const Chunk& c : sorted) {
    for (const Instance& inst : instances_) {
      for (const Chunk& d : inst.chunks) {
        if (c.start < d.start + d.length && d.start < c.start + c.length) {
          throw SimError(ErrorCode::kOverlapWithActiveInstance, "overlap");
        }
      }
    }
  }
  std::uint64_t total = 0;
  for (const Chunk& c : sorted) total += c.length;
  const auto n = static_cast<std::uint32_t>((total + ppb_ - 1) / ppb_);
  std::vector<BlockId> blocks = reserve_clean(n);

  Instance inst;
  inst.id = next_id_++;
  for (BlockId b : blocks) {
    kind_[b] = BlockKind::kFa;
    owner_[b] = inst.id;
  }
  for (const Chunk& c : sorted) {
    for (Lba l = c.start; l < c.start + c.length; ++l) flag_[l] = true;
  }
  inst.chunks = sorted;
  inst.blocks = blocks;
  inst.total = static_cast<std::uint64_t>(n) * ppb_;
  instances_.push_back(inst);
}

void RefFtl::unmap(Lba lba) {
  if (map_[lba] == kNone) return;
  state_[map_[lba]] = PageState::kInvalid;
  map_[lba] = kNone;
}

std::int64_t RefFtl::put(BlockId b, Lba lba, Token token) {
  if (kind_[b] == BlockKind::kFree) throw SimError(ErrorCode::kFreeBlock, "program free block");
  if (wp_[b] == ppb_) throw SimError(ErrorCode::kBlockFull, "program full block");
  const std::size_t idx = page_index(b, wp_[b]);
  state_[idx] = PageState::kValid;
  lba_[idx] = lba;
  token_[idx] = token;
  wp_[b]++;
  counters_.physical_programs++;
  return static_cast<std::int64_t>(idx);
}

std::int64_t RefFtl::place_normal(Lba lba, Token token, bool relocating) {
  const std::uint32_t slot = next_slot_;
  next_slot_ = (next_slot_ + 1) % slots_;
  std::uint32_t use = slot;
  if (frontier_[slot] == kNone) {
    if (!relocating) {
      while (free_blocks() < reserve_) {
        std::int64_t v = pick_victim(true, false);
        if (v == kNone) v = pick_victim(false, true);
        if (v == kNone) break;
        relocate_all(static_cast<BlockId>(v));
      }
    }
    if (frontier_[slot] == kNone) {
      if (free_blocks() > 0) {
        std::int64_t pick = kNone;
        if (slots_ == geometry_.channels) {
          for (BlockId b = 0; b < nblocks_ && pick == kNone; ++b) {
            if (kind_[b] == BlockKind::kFree && b % geometry_.channels == slot) pick = b;
          }
        }
        for (BlockId b = 0; b < nblocks_ && pick == kNone; ++b) {
          if (kind_[b] == BlockKind::kFree) pick = b;
        }
        kind_[pick] = BlockKind::kNormal;
        frontier_[slot] = pick;
      } else {
        bool found = false;
        for (std::uint32_t k = 1; k < slots_ && !found; ++k) {
          const std::uint32_t other = (slot + k) % slots_;
          if (frontier_[other] != kNone) {
            use = other;
            found = true;
          }
        }
        if (!found) throw SimError(ErrorCode::kDeviceWedged, "wedged");
      }
    }
  }
  const auto b = static_cast<BlockId>(frontier_[use]);
  const std::int64_t idx = put(b, lba, token);
  if (wp_[b] == ppb_) frontier_[use] = kNone;
  return idx;
}

void RefFtl::erase(BlockId b) {
  if (valid_in(b) != 0) throw SimError(ErrorCode::kEraseWithValidPages, "erase");
  for (std::uint32_t off = 0; off < ppb_; ++off) {
    const std::size_t idx = page_index(b, off);
    state_[idx] = PageState::kClean;
    lba_[idx] = 0;
    token_[idx] = 0;
  }
  wp_[b] = 0;
  kind_[b] = BlockKind::kFree;
  owner_[b].reset();
  erase_count_[b]++;
  counters_.erases++;
}

std::int64_t RefFtl::pick_victim(bool normal, bool orphan) const {
  std::int64_t best = kNone;
  std::uint32_t best_valid = 0;
  for (BlockId b = 0; b < nblocks_; ++b) {
    const bool ok = (normal && kind_[b] == BlockKind::kNormal && !in_frontier(b)) ||
                    (orphan && kind_[b] == BlockKind::kFa && !owner_[b]);
    if (!ok) continue;
    const std::uint32_t v = valid_in(b);
    if (wp_[b] == v) continue;  // nothing to reclaim
    if (best == kNone || v < best_valid || (options_.perturb_tie_break && v == best_valid)) {
      best = b;
      best_valid = v;
    }
  }
  return best;
}

void RefFtl::relocate_all(BlockId victim) {
  for (std::uint32_t off = 0; off < wp_[victim]; ++off) {
    const std::size_t src = page_index(victim, off);
    if (state_[src] != PageState::kValid) continue;
    const Lba l = lba_[src];
    const std::int64_t dst = place_normal(l, token_[src], true);
    if (kind_[dst / ppb_] != BlockKind::kNormal) throw std::logic_error("reference copyback into non-Normal block");
    state_[src] = PageState::kInvalid;
    map_[l] = dst;
    counters_.copyback_programs++;
    counters_.page_reads++;
  }
  erase(victim);
}

std::vector<BlockId> RefFtl::reserve_clean(std::uint32_t n) {
  std::uint64_t reclaim = 0;
  for (BlockId b = 0; b < nblocks_; ++b) {
    const bool ok = (kind_[b] == BlockKind::kNormal && !in_frontier(b)) ||
                    (kind_[b] == BlockKind::kFa && !owner_[b]);
    const std::uint32_t v = valid_in(b);
    if (ok && wp_[b] > v) reclaim += ppb_ - v;
  }
  if (free_blocks() + reclaim / ppb_ < n) {
    throw SimError(ErrorCode::kInsufficientSpace, "guard");
  }
  while (free_blocks() < n + 1) {
    const std::int64_t v = pick_victim(true, true);
    if (v == kNone) break;
    relocate_all(static_cast<BlockId>(v));
  }
  if (free_blocks() < n) throw SimError(ErrorCode::kInsufficientSpace, "after merge");

  std::vector<bool> taken(nblocks_, false);
  std::vector<BlockId> out;
  for (std::uint32_t k = 0; k < n; ++k) {
    const std::uint32_t ch = (fa_cursor_ + k) % geometry_.channels;
    std::int64_t pick = kNone;
    for (BlockId b = 0; b < nblocks_ && pick == kNone; ++b) {
      if (kind_[b] == BlockKind::kFree && !taken[b] && b % geometry_.channels == ch) pick = b;
    }
    for (BlockId b = 0; b < nblocks_ && pick == kNone; ++b) {
      if (kind_[b] == BlockKind::kFree && !taken[b]) pick = b;
    }
    taken[pick] = true;
    out.push_back(static_cast<BlockId>(pick));
  }
  fa_cursor_ = (fa_cursor_ + n) % geometry_.channels;
  return out;
}

void RefFtl::finish(std::size_t pos) {
  const Instance inst = instances_[pos];
  instances_.erase(instances_.begin() + static_cast<std::ptrdiff_t>(pos));
  for (const Chunk& c : inst.chunks) {
    for (Lba l = c.start; l < c.start + c.length; ++l) flag_[l] = false;
  }
  for (BlockId b : inst.blocks) {
    owner_[b].reset();
    if (wp_[b] == 0) kind_[b] = BlockKind::kFree;
  }
}

DeviceSnapshot RefFtl::snapshot() const {
  DeviceSnapshot s;
  s.geometry = geometry_;
  for (std::size_t l = 0; l < map_.size(); ++l) {
    DeviceSnapshot::MapEntry e;
    e.mapped = map_[l] != kNone;
    if (e.mapped) {
      e.ppa = PhysPageAddr{static_cast<BlockId>(map_[l] / ppb_),
                           static_cast<std::uint32_t>(map_[l] % ppb_)};
    }
    e.fa_flag = flag_[l];
    s.mapping.push_back(e);
  }
  for (BlockId b = 0; b < nblocks_; ++b) {
    DeviceSnapshot::Block sb;
    sb.kind = kind_[b];
    sb.owner = owner_[b];
    sb.write_ptr = wp_[b];
    sb.erase_count = erase_count_[b];
    const auto first = static_cast<std::ptrdiff_t>(page_index(b, 0));
    const auto last = first + ppb_;
    sb.pages.assign(state_.begin() + first, state_.begin() + last);
    sb.lbas.assign(lba_.begin() + first, lba_.begin() + last);
    sb.tokens.assign(token_.begin() + first, token_.begin() + last);
    s.blocks.push_back(std::move(sb));
  }
  for (const Instance& inst : instances_) {
    s.instances.push_back({inst.id, inst.chunks, inst.blocks, inst.next_block, inst.next_offset,
                           inst.written, inst.total});
  }
  for (std::int64_t f : frontier_) {
    s.frontier.push_back(f == kNone ? std::nullopt : std::optional<BlockId>(static_cast<BlockId>(f)));
  }
  s.next_slot = next_slot_;
  s.fa_channel_cursor = fa_cursor_;
  s.next_instance_id = next_id_;
  s.counters = counters_;
  return s;
}

ReplayOutcome replay_reference(const Geometry& geometry, std::span<const Command> commands,
                               RefOptions options) {
  RefFtl ref(geometry, options);
  ReplayOutcome out;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    try {
      ref.apply(commands[i]);
    } catch (const SimError& e) {
      out.errors.push_back({i, e.code()});
    }
  }
  out.digest = digest(ref.snapshot());
  return out;
}

}  // namespace fasim
