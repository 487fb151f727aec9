#include "fasim/hostmodel.h"

#include <algorithm>
#include <set>
#include <string>

#include "fasim/errors.h"

namespace fasim {

void InterleaveConfig::validate() const {
  if (split_unit == 0) throw SimError(ErrorCode::kConfigInvalid, "split_unit must be >= 1");
}

HostModel::HostModel(InterleaveConfig config) : config_(config), rng_(config.seed) {
  config_.validate();
}

void HostModel::add_stream(std::uint32_t stream_id, std::uint32_t tenant_id) {
  if (index_.count(stream_id)) {
    throw SimError(ErrorCode::kConfigInvalid, "duplicate stream " + std::to_string(stream_id));
  }
  index_[stream_id] = streams_.size();
  streams_.push_back(WriterStream{stream_id, tenant_id, {}, 0});
}

void HostModel::submit(std::uint32_t stream_id, HostOp op) {
  auto it = index_.find(stream_id);
  if (it == index_.end()) {
    throw SimError(ErrorCode::kUnknownStream, "stream " + std::to_string(stream_id));
  }
  // A zero-length write issues nothing.
  if (auto* w = std::get_if<HostWrite>(&op); w && w->length == 0) return;
  streams_[it->second].queue.push_back(std::move(op));
}

std::size_t HostModel::pending_ops() const {
  std::size_t n = 0;
  for (const auto& s : streams_) n += s.queue.size();
  return n;
}

void HostModel::release_barriers() {
  std::set<std::uint32_t> tenants;
  for (const auto& s : streams_) tenants.insert(s.tenant_id);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::uint32_t t : tenants) {
      bool waiting = false;
      bool blocked_by_work = false;
      for (const auto& s : streams_) {
        if (s.tenant_id != t || s.queue.empty()) continue;
        if (std::holds_alternative<Barrier>(s.queue.front())) {
          waiting = true;
        } else {
          blocked_by_work = true;
        }
      }
      if (!waiting || blocked_by_work) continue;
      for (auto& s : streams_) {
        if (s.tenant_id == t && !s.queue.empty()) s.queue.pop_front();
      }
      changed = true;
    }
  }
}

std::optional<std::size_t> HostModel::pick(const std::vector<std::size_t>& eligible) {
  if (eligible.empty()) return std::nullopt;
  if (config_.policy == InterleavePolicy::kSeededRandom) {
    return eligible[rng_.below(eligible.size())];
  }
  // First eligible stream at or after the cursor, cyclically.
  std::size_t best = eligible.front();
  for (std::size_t i : eligible) {
    if (i >= cursor_) {
      best = i;
      break;
    }
  }
  cursor_ = best + 1;
  return best;
}

Command HostModel::issue(WriterStream& stream) {
  Command c;
  c.seq = next_seq_++;
  c.stream_id = stream.stream_id;
  c.tenant_id = stream.tenant_id;
  HostOp& head = stream.queue.front();
  if (auto* w = std::get_if<HostWrite>(&head)) {
    const std::uint64_t len = std::min(config_.split_unit, w->length - stream.head_offset);
    c.op = OpKind::kWrite;
    c.lba = w->lba + stream.head_offset;
    c.length = len;
    c.content_base = next_token_;
    next_token_ += len;
    stream.head_offset += len;
    if (stream.head_offset == w->length) {
      stream.head_offset = 0;
      stream.queue.pop_front();
    }
  } else if (auto* t = std::get_if<HostTrim>(&head)) {
    c.op = OpKind::kTrim;
    c.lba = t->lba;
    c.length = t->length;
    stream.queue.pop_front();
  } else {
    c.op = OpKind::kFlashAlloc;
    c.chunks = std::get<HostFlashAlloc>(head).chunks;
    stream.queue.pop_front();
  }
  return c;
}

std::size_t HostModel::drain(const std::function<void(const Command&)>& sink) {
  std::size_t issued = 0;
  std::vector<std::size_t> eligible;
  for (;;) {
    release_barriers();
    eligible.clear();
    for (std::size_t i = 0; i < streams_.size(); ++i) {
      const auto& q = streams_[i].queue;
      if (!q.empty() && !std::holds_alternative<Barrier>(q.front())) eligible.push_back(i);
    }
    const auto chosen = pick(eligible);
    if (!chosen) break;
    const Command c = issue(streams_[*chosen]);
    ++issued;
    sink(c);
  }
  return issued;
}

}  // namespace fasim
