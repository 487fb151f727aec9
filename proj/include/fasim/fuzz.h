#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fasim/command.h"
#include "fasim/ftl.h"
#include "fasim/geometry.h"
#include "fasim/refcheck.h"

namespace fasim {

// Mixed random device commands: stray writes and trims, whole-object
// lifecycles (flashalloc, sequential fill, trim), plus a sprinkle of
// malformed, overlapping and out-of-range requests.
std::vector<Command> fuzz_commands(const Geometry& geometry, std::uint64_t seed, std::size_t count);

// Applies commands to a fresh Ftl, recording failures by position.
ReplayOutcome replay_engine(const Geometry& geometry, std::span<const Command> commands,
                            FtlOptions options = {});

}  // namespace fasim
