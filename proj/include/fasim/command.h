#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fasim/flashalloc.h"
#include "fasim/geometry.h"

namespace fasim {

enum class OpKind : std::uint8_t { kWrite, kTrim, kFlashAlloc };

const char* to_string(OpKind op);

// One serialized device command, as issued by the host model and as stored
// in a trace. Writes and trims use lba/length; flashalloc uses chunks.
struct Command {
  std::uint64_t seq = 0;
  OpKind op = OpKind::kWrite;
  std::uint32_t stream_id = 0;
  std::uint32_t tenant_id = 0;
  Lba lba = 0;
  std::uint64_t length = 0;
  std::vector<Chunk> chunks;
  Token content_base = 0;

  bool operator==(const Command&) const = default;
};

}  // namespace fasim
