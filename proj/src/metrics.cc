#include "fasim/metrics.h"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>

#include "fasim/errors.h"

namespace fasim {

double CostModel::time_us(const Counters& c) const {
  return static_cast<double>(c.page_reads) * read_us +
         static_cast<double>(c.physical_programs) * program_us +
         static_cast<double>(c.erases) * erase_us;
}

double running_waf(const Counters& window) {
  if (window.logical_pages_written == 0) {
    throw SimError(ErrorCode::kEmptyWindow, "window has no logical writes");
  }
  return static_cast<double>(window.physical_programs) /
         static_cast<double>(window.logical_pages_written);
}

double throughput_proxy(std::uint64_t logical_pages, double time_us) {
  if (!(time_us > 0)) throw SimError(ErrorCode::kDivByZeroGuard, "window took no simulated time");
  return static_cast<double>(logical_pages) / (time_us * 1e-6);
}

std::vector<std::uint64_t> utilization_histogram(const FlashMedia& media, std::uint32_t bins) {
  if (bins < 2) throw SimError(ErrorCode::kConfigInvalid, "histogram needs at least 2 bins");
  std::vector<std::uint64_t> hist(bins, 0);
  const double ppb = media.geometry().pages_per_block;
  for (const BlockState& b : media.blocks()) {
    if (b.kind == BlockKind::kFree) continue;
    const double u = b.valid_count / ppb;
    const auto bin = std::min<std::uint64_t>(bins - 1, static_cast<std::uint64_t>(std::floor(u * bins)));
    ++hist[bin];
  }
  return hist;
}

double bimodality_mid_mass(const FlashMedia& media) {
  std::uint64_t used = 0;
  std::uint64_t mid = 0;
  const std::uint32_t ppb = media.geometry().pages_per_block;
  for (const BlockState& b : media.blocks()) {
    if (b.kind == BlockKind::kFree) continue;
    ++used;
    // 0.2 < v/ppb < 0.8, in integers to stay exact.
    if (5 * static_cast<std::uint64_t>(b.valid_count) > ppb &&
        5 * static_cast<std::uint64_t>(b.valid_count) < 4ull * ppb) {
      ++mid;
    }
  }
  return used ? static_cast<double>(mid) / static_cast<double>(used) : 0.0;
}

MetricsRecorder::MetricsRecorder(std::uint64_t window_pages, CostModel cost)
    : window_pages_(window_pages), cost_(cost) {
  if (window_pages_ == 0) throw SimError(ErrorCode::kConfigInvalid, "window_pages must be >= 1");
}

void MetricsRecorder::observe(const Ftl& ftl) {
  const Counters delta = ftl.counters() - window_start_;
  if (delta.logical_pages_written >= window_pages_) close(ftl);
}

void MetricsRecorder::finish(const Ftl& ftl) {
  const Counters delta = ftl.counters() - window_start_;
  if (delta.logical_pages_written > 0) close(ftl);
}

void MetricsRecorder::close(const Ftl& ftl) {
  const Counters& now = ftl.counters();
  const Counters delta = now - window_start_;
  MetricSample s;
  s.window = samples_.size();
  s.logical_pages = delta.logical_pages_written;
  s.physical_pages = delta.physical_programs;
  s.copybacks = delta.copyback_programs;
  s.running_waf = running_waf(delta);
  s.cumulative_waf = running_waf(now);
  s.time_us = cost_.time_us(delta);
  s.throughput_proxy = throughput_proxy(delta.logical_pages_written, s.time_us);
  const RegionReport r = ftl.gc_region_report();
  s.fa_blocks = r.fa_blocks;
  s.normal_blocks = r.normal_blocks;
  s.free_blocks = r.free_blocks;
  s.mid_mass = bimodality_mid_mass(ftl.media());
  samples_.push_back(s);
  window_start_ = now;
}

const char* const kCsvHeader =
    "window,logical_pages,physical_pages,copybacks,running_waf,cumulative_waf,"
    "throughput_proxy,fa_blocks,normal_blocks,free_blocks,mid_mass";

std::string format_csv(const std::vector<MetricSample>& samples) {
  std::string out = kCsvHeader;
  out += '\n';
  char line[320];
  for (const MetricSample& s : samples) {
    std::snprintf(line, sizeof line,
                  "%" PRIu64 ",%" PRIu64 ",%" PRIu64 ",%" PRIu64 ",%.6f,%.6f,%.3f,%u,%u,%u,%.6f\n",
                  s.window, s.logical_pages, s.physical_pages, s.copybacks, s.running_waf,
                  s.cumulative_waf, s.throughput_proxy, s.fa_blocks, s.normal_blocks,
                  s.free_blocks, s.mid_mass);
    out += line;
  }
  return out;
}

}  // namespace fasim
