#include "fasim/trace.h"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "fasim/errors.h"

namespace fasim {
namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::uint64_t parse_u64(const std::string& s, std::size_t line, const char* what) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw TraceParseError(line, std::string("bad ") + what + " '" + s + "'");
  }
  return v;
}

double parse_double(const std::string& s, std::size_t line, const char* what) {
  std::istringstream in(s);
  in.imbue(std::locale::classic());
  double v = 0;
  in >> v;
  if (!in || in.peek() != std::char_traits<char>::eof()) {
    throw TraceParseError(line, std::string("bad ") + what + " '" + s + "'");
  }
  return v;
}

TraceHeader parse_header(const std::vector<std::string>& tok, std::size_t line) {
  if (tok.size() < 2 || tok[0] != "fasim-trace") throw TraceParseError(line, "missing fasim-trace header");
  if (tok[1] != "1") throw TraceParseError(line, "unsupported trace version " + tok[1]);
  std::map<std::string, std::string> kv;
  for (std::size_t i = 2; i < tok.size(); ++i) {
    const auto eq = tok[i].find('=');
    if (eq == std::string::npos) throw TraceParseError(line, "expected key=value, got '" + tok[i] + "'");
    kv[tok[i].substr(0, eq)] = tok[i].substr(eq + 1);
  }
  auto take = [&](const std::string& key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  auto need = [&](const std::string& key) {
    auto v = take(key);
    if (!v) throw TraceParseError(line, "header lacks " + key);
    return *v;
  };

  TraceHeader h;
  h.geometry.total_blocks = static_cast<std::uint32_t>(parse_u64(need("total_blocks"), line, "total_blocks"));
  h.geometry.pages_per_block =
      static_cast<std::uint32_t>(parse_u64(need("pages_per_block"), line, "pages_per_block"));
  h.geometry.page_size = static_cast<std::uint32_t>(parse_u64(need("page_size"), line, "page_size"));
  h.geometry.channels = static_cast<std::uint32_t>(parse_u64(need("channels"), line, "channels"));
  h.geometry.op_fraction = parse_double(need("op_fraction"), line, "op_fraction");
  try {
    h.geometry.validate();
  } catch (const std::exception& e) {
    throw TraceParseError(line, e.what());
  }
  if (auto v = take("name")) h.name = *v;
  if (auto v = take("mode")) {
    try {
      h.mode = parse_mode(*v);
    } catch (const SimError& e) {
      throw TraceParseError(line, e.what());
    }
  }
  if (auto v = take("window_pages")) h.window_pages = parse_u64(*v, line, "window_pages");
  if (auto v = take("reserve_blocks")) {
    h.ftl.reserve_blocks = static_cast<std::uint32_t>(parse_u64(*v, line, "reserve_blocks"));
  }
  if (auto v = take("single_frontier")) h.ftl.single_frontier = parse_u64(*v, line, "single_frontier") != 0;
  if (auto v = take("read_us")) h.cost.read_us = parse_double(*v, line, "read_us");
  if (auto v = take("program_us")) h.cost.program_us = parse_double(*v, line, "program_us");
  if (auto v = take("erase_us")) h.cost.erase_us = parse_double(*v, line, "erase_us");
  if (!kv.empty()) throw TraceParseError(line, "unknown header key " + kv.begin()->first);
  return h;
}

std::vector<Chunk> parse_chunks(const std::string& s, std::size_t line) {
  std::vector<Chunk> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t comma = s.find(',', pos);
    const std::string item = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw TraceParseError(line, "chunk '" + item + "' is not lba:len");
    out.push_back(Chunk{parse_u64(item.substr(0, colon), line, "chunk lba"),
                        parse_u64(item.substr(colon + 1), line, "chunk length")});
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

void write_trace(std::ostream& out, const Trace& trace) {
  const TraceHeader& h = trace.header;
  const Geometry& g = h.geometry;
  out << "fasim-trace 1 total_blocks=" << g.total_blocks << " pages_per_block=" << g.pages_per_block
      << " page_size=" << g.page_size << " channels=" << g.channels
      << " op_fraction=" << format_double(g.op_fraction) << " name=" << h.name;
  if (h.mode) out << " mode=" << to_string(*h.mode);
  out << " window_pages=" << h.window_pages << " reserve_blocks=" << h.ftl.reserve_blocks
      << " single_frontier=" << (h.ftl.single_frontier ? 1 : 0)
      << " read_us=" << format_double(h.cost.read_us)
      << " program_us=" << format_double(h.cost.program_us)
      << " erase_us=" << format_double(h.cost.erase_us) << '\n';
  for (const Command& c : trace.commands) {
    out << c.seq << ' ' << to_string(c.op) << ' ' << c.stream_id << ' ' << c.tenant_id << ' ';
    switch (c.op) {
      case OpKind::kWrite:
        out << c.lba << ' ' << c.length << ' ' << c.content_base;
        break;
      case OpKind::kTrim:
        out << c.lba << ' ' << c.length;
        break;
      case OpKind::kFlashAlloc:
        for (std::size_t i = 0; i < c.chunks.size(); ++i) {
          out << (i ? "," : "") << c.chunks[i].start << ':' << c.chunks[i].length;
        }
        break;
    }
    out << '\n';
  }
  out << "end " << trace.commands.size() << '\n';
}

Trace read_trace(std::istream& in) {
  Trace trace;
  std::string text;
  std::size_t line = 0;
  bool have_header = false;
  bool ended = false;
  std::uint64_t capacity = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    const auto tok = split_ws(text);
    if (tok.empty() || tok[0][0] == '#') continue;
    if (ended) throw TraceParseError(line, "record after end marker");
    if (!have_header) {
      trace.header = parse_header(tok, line);
      capacity = trace.header.geometry.logical_capacity_pages();
      have_header = true;
      continue;
    }
    if (tok[0] == "end") {
      if (tok.size() != 2) throw TraceParseError(line, "malformed end marker");
      if (parse_u64(tok[1], line, "record count") != trace.commands.size()) {
        throw TraceParseError(line, "end marker count does not match records");
      }
      ended = true;
      continue;
    }
    if (tok.size() < 5) throw TraceParseError(line, "too few fields");
    Command c;
    c.seq = parse_u64(tok[0], line, "seq");
    if (!trace.commands.empty() && c.seq <= trace.commands.back().seq) {
      throw TraceParseError(line, "seq not strictly increasing");
    }
    c.stream_id = static_cast<std::uint32_t>(parse_u64(tok[2], line, "stream"));
    c.tenant_id = static_cast<std::uint32_t>(parse_u64(tok[3], line, "tenant"));
    const std::string& op = tok[1];
    if (op == "write" || op == "trim") {
      const std::size_t want = op == "write" ? 7 : 6;
      if (tok.size() != want) throw TraceParseError(line, op + " expects " + std::to_string(want) + " fields");
      c.op = op == "write" ? OpKind::kWrite : OpKind::kTrim;
      c.lba = parse_u64(tok[4], line, "lba");
      c.length = parse_u64(tok[5], line, "length");
      if (c.lba > capacity || c.length > capacity - c.lba) {
        throw TraceParseError(line, "range beyond logical capacity");
      }
      if (c.op == OpKind::kWrite) c.content_base = parse_u64(tok[6], line, "content_base");
    } else if (op == "flashalloc") {
      if (tok.size() != 5) throw TraceParseError(line, "flashalloc expects 5 fields");
      c.op = OpKind::kFlashAlloc;
      c.chunks = parse_chunks(tok[4], line);
    } else {
      throw TraceParseError(line, "unknown op '" + op + "'");
    }
    trace.commands.push_back(std::move(c));
  }
  if (!have_header) throw TraceParseError(line + 1, "empty trace");
  if (!ended) throw TraceParseError(line + 1, "truncated trace: no end marker");
  return trace;
}

void save_trace(const std::string& path, const Trace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_trace(out, trace);
  if (!out) throw std::runtime_error("write failed for " + path);
}

Trace load_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  return read_trace(in);
}

}  // namespace fasim
