#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fasim/command.h"
#include "fasim/ftl.h"
#include "fasim/geometry.h"
#include "fasim/metrics.h"
#include "fasim/workloads.h"

namespace fasim {

// Everything besides the commands needed to reproduce a run's outputs.
struct TraceHeader {
  Geometry geometry;
  std::string name = "trace";
  std::optional<Mode> mode;
  std::uint64_t window_pages = 0;  // 0 selects the default
  FtlOptions ftl;
  CostModel cost;
};

struct Trace {
  TraceHeader header;
  std::vector<Command> commands;
};

class TraceParseError : public std::runtime_error {
 public:
  TraceParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Text format, one record per line:
//   fasim-trace 1 key=value ...
//   <seq> write <stream> <tenant> <lba> <len> <content_base>
//   <seq> trim <stream> <tenant> <lba> <len>
//   <seq> flashalloc <stream> <tenant> <lba>:<len>[,<lba>:<len>...]
//   end <record count>
// Lines starting with '#' are comments.
void write_trace(std::ostream& out, const Trace& trace);
Trace read_trace(std::istream& in);

void save_trace(const std::string& path, const Trace& trace);
Trace load_trace(const std::string& path);

}  // namespace fasim
