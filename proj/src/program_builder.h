#pragma once

#include <string>

#include "fasim/errors.h"
#include "fasim/workloads.h"

namespace fasim::detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw SimError(ErrorCode::kConfigInvalid, what);
}

// Clamps a requested region to logical capacity.
Region resolve_region(const Region& requested, const Geometry& geometry);

class ProgramBuilder {
 public:
  explicit ProgramBuilder(Region region) { program_.region = region; }

  std::size_t add_stream(std::uint32_t tenant_id = 0) {
    const auto id = static_cast<std::uint32_t>(program_.streams.size());
    program_.streams.push_back(StreamProgram{id, tenant_id, {}});
    return id;
  }

  void write(std::size_t stream, Lba lba, std::uint64_t length) {
    if (length) push(stream, HostWrite{lba, length});
  }
  void trim(std::size_t stream, Lba lba, std::uint64_t length) { push(stream, HostTrim{lba, length}); }
  void alloc(std::size_t stream, std::vector<Chunk> chunks) {
    push(stream, HostFlashAlloc{std::move(chunks)});
  }
  void barrier(const std::vector<std::size_t>& streams) {
    for (std::size_t s : streams) push(s, Barrier{});
  }
  void barrier_all() {
    for (auto& s : program_.streams) s.ops.push_back(Barrier{});
  }

  Program take() { return std::move(program_); }

 private:
  void push(std::size_t stream, HostOp op) { program_.streams[stream].ops.push_back(std::move(op)); }

  Program program_;
};

}  // namespace fasim::detail
