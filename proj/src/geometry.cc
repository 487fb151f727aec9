#include "fasim/geometry.h"

#include <cmath>
#include <stdexcept>

#include "fasim/errors.h"

namespace fasim {

std::uint32_t Geometry::logical_blocks() const {
  // The epsilon keeps e.g. 10 * (1 - 0.3) from flooring to 6.
  return static_cast<std::uint32_t>(
      std::floor(static_cast<double>(total_blocks) * (1.0 - op_fraction) + 1e-9));
}

void Geometry::validate() const {
  if (total_blocks == 0) throw std::invalid_argument("total_blocks must be > 0");
  if (pages_per_block == 0) throw std::invalid_argument("pages_per_block must be > 0");
  if (page_size == 0) throw std::invalid_argument("page_size must be > 0");
  if (channels == 0 || channels > total_blocks) {
    throw std::invalid_argument("channels must be in [1, total_blocks]");
  }
  if (total_blocks % channels != 0) throw std::invalid_argument("channels must divide total_blocks");
  if (!(op_fraction >= 0.0 && op_fraction < 1.0)) {
    throw std::invalid_argument("op_fraction must be in [0, 1)");
  }
  if (logical_blocks() == 0) throw std::invalid_argument("no logical capacity left");
}

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kBlockFull: return "BlockFull";
    case ErrorCode::kEraseWithValidPages: return "EraseWithValidPages";
    case ErrorCode::kNotValid: return "NotValid";
    case ErrorCode::kFreeBlock: return "FreeBlock";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kDeviceWedged: return "DeviceWedged";
    case ErrorCode::kUnmapped: return "Unmapped";
    case ErrorCode::kNoVictim: return "NoVictim";
    case ErrorCode::kInsufficientSpace: return "InsufficientSpace";
    case ErrorCode::kOverlapWithActiveInstance: return "OverlapWithActiveInstance";
    case ErrorCode::kMalformedChunks: return "MalformedChunks";
    case ErrorCode::kUnknownInstance: return "UnknownInstance";
    case ErrorCode::kUnknownStream: return "UnknownStream";
    case ErrorCode::kConfigInvalid: return "ConfigInvalid";
    case ErrorCode::kRegionOverlap: return "RegionOverlap";
    case ErrorCode::kEmptyWindow: return "EmptyWindow";
    case ErrorCode::kDivByZeroGuard: return "DivByZeroGuard";
  }
  return "Unknown";
}

}  // namespace fasim
