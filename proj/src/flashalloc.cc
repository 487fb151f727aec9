#include "fasim/flashalloc.h"

#include <algorithm>
#include <string>

#include "fasim/errors.h"

namespace fasim {

std::vector<Chunk> normalize_chunks(std::span<const Chunk> chunks, std::uint64_t capacity_pages) {
  if (chunks.empty()) throw SimError(ErrorCode::kMalformedChunks, "empty chunk list");
  std::vector<Chunk> sorted(chunks.begin(), chunks.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const Chunk& a, const Chunk& b) { return a.start < b.start; });
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const Chunk& c = sorted[i];
    if (c.length == 0) throw SimError(ErrorCode::kMalformedChunks, "zero-length chunk");
    if (c.start >= capacity_pages || c.length > capacity_pages - c.start) {
      throw SimError(ErrorCode::kMalformedChunks,
                     "chunk " + std::to_string(c.start) + "+" + std::to_string(c.length) +
                         " outside logical capacity");
    }
    // Strict gap: touching chunks should have been one chunk.
    if (i > 0 && sorted[i - 1].end() >= c.start) {
      throw SimError(ErrorCode::kMalformedChunks,
                     "chunks overlap or are adjacent at lba " + std::to_string(c.start));
    }
  }
  return sorted;
}

std::uint64_t FaInstance::range_pages() const {
  std::uint64_t total = 0;
  for (const Chunk& c : chunks) total += c.length;
  return total;
}

bool FaInstance::contains(Lba lba) const {
  return std::any_of(chunks.begin(), chunks.end(),
                     [lba](const Chunk& c) { return c.contains(lba); });
}

void FaRegistry::add(FaInstance instance) {
  const InstanceId id = instance.id;
  for (const Chunk& c : instance.chunks) index_[c.start] = IndexEntry{c.end(), id};
  active_.emplace(id, std::move(instance));
}

FaInstance FaRegistry::remove(InstanceId id) {
  auto it = active_.find(id);
  if (it == active_.end()) {
    throw SimError(ErrorCode::kUnknownInstance, "instance " + std::to_string(id));
  }
  FaInstance instance = std::move(it->second);
  active_.erase(it);
  for (const Chunk& c : instance.chunks) index_.erase(c.start);
  return instance;
}

FaInstance* FaRegistry::find(InstanceId id) {
  auto it = active_.find(id);
  return it == active_.end() ? nullptr : &it->second;
}

const FaInstance* FaRegistry::find(InstanceId id) const {
  auto it = active_.find(id);
  return it == active_.end() ? nullptr : &it->second;
}

std::optional<InstanceId> FaRegistry::probe(Lba lba) const {
  auto it = index_.upper_bound(lba);
  if (it == index_.begin()) return std::nullopt;
  --it;
  if (lba < it->second.end) return it->second.id;
  return std::nullopt;
}

std::optional<InstanceId> FaRegistry::probe_linear(Lba lba) const {
  for (const auto& [id, instance] : active_) {
    if (instance.contains(lba)) return id;
  }
  return std::nullopt;
}

bool FaRegistry::overlaps(std::span<const Chunk> chunks) const {
  for (const Chunk& c : chunks) {
    // First indexed chunk ending after c.start, checked against c.end().
    auto it = index_.upper_bound(c.start);
    if (it != index_.begin()) {
      auto prev = std::prev(it);
      if (prev->second.end > c.start) return true;
    }
    if (it != index_.end() && it->first < c.end()) return true;
  }
  return false;
}

}  // namespace fasim
