#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <variant>
#include <vector>

#include "fasim/command.h"
#include "fasim/flashalloc.h"
#include "fasim/rng.h"

namespace fasim {

struct HostWrite {
  Lba lba = 0;
  std::uint64_t length = 0;
  bool operator==(const HostWrite&) const = default;
};
struct HostTrim {
  Lba lba = 0;
  std::uint64_t length = 0;
  bool operator==(const HostTrim&) const = default;
};
struct HostFlashAlloc {
  std::vector<Chunk> chunks;
  bool operator==(const HostFlashAlloc&) const = default;
};
// Host-side ordering point: a stream stops here until every stream of the
// same tenant is drained or also waiting. Never reaches the device.
struct Barrier {
  bool operator==(const Barrier&) const = default;
};

using HostOp = std::variant<HostWrite, HostTrim, HostFlashAlloc, Barrier>;

enum class InterleavePolicy { kRoundRobin, kSeededRandom };

struct InterleaveConfig {
  std::uint64_t split_unit = 64;  // pages per device write command
  InterleavePolicy policy = InterleavePolicy::kRoundRobin;
  std::uint64_t seed = 0;

  void validate() const;  // throws SimError(kConfigInvalid)
};

struct WriterStream {
  std::uint32_t stream_id = 0;
  std::uint32_t tenant_id = 0;
  std::deque<HostOp> queue;
  std::uint64_t head_offset = 0;  // pages of the head write already issued
};

// Turns per-stream op queues into one serialized device command sequence.
// Each pick issues at most split_unit pages of the picked stream's head
// write, so concurrent writers interleave at the device.
class HostModel {
 public:
  explicit HostModel(InterleaveConfig config);

  void add_stream(std::uint32_t stream_id, std::uint32_t tenant_id);
  void submit(std::uint32_t stream_id, HostOp op);

  // Issues everything queued. Sequence numbers and content tokens continue
  // across calls. Returns the number of commands issued by this call.
  std::size_t drain(const std::function<void(const Command&)>& sink);

  std::size_t pending_ops() const;
  const std::vector<WriterStream>& streams() const { return streams_; }

 private:
  void release_barriers();
  std::optional<std::size_t> pick(const std::vector<std::size_t>& eligible);
  Command issue(WriterStream& stream);

  InterleaveConfig config_;
  Rng rng_;
  std::vector<WriterStream> streams_;
  std::map<std::uint32_t, std::size_t> index_;
  std::size_t cursor_ = 0;
  std::uint64_t next_seq_ = 1;
  Token next_token_ = 1;
};

}  // namespace fasim
