#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fasim/counters.h"
#include "fasim/flash_media.h"
#include "fasim/ftl.h"

namespace fasim {

// Per-operation costs in microseconds. Plumbing defaults, used only for the
// throughput proxy.
struct CostModel {
  double read_us = 50;
  double program_us = 600;
  double erase_us = 3000;

  double time_us(const Counters& c) const;
};

// physical / logical for a window delta. Throws SimError(kEmptyWindow).
double running_waf(const Counters& window);
// Logical pages per simulated second. Throws SimError(kDivByZeroGuard)
// when the window took no simulated time.
double throughput_proxy(std::uint64_t logical_pages, double time_us);

// Block counts by valid ratio over non-free blocks; a block with ratio u
// lands in bin min(bins - 1, floor(u * bins)).
std::vector<std::uint64_t> utilization_histogram(const FlashMedia& media, std::uint32_t bins);
// Share of non-free blocks with 0.2 < valid ratio < 0.8; 0 when none.
double bimodality_mid_mass(const FlashMedia& media);

struct MetricSample {
  std::uint64_t window = 0;
  std::uint64_t logical_pages = 0;
  std::uint64_t physical_pages = 0;
  std::uint64_t copybacks = 0;
  double running_waf = 0;
  double cumulative_waf = 0;
  double throughput_proxy = 0;
  std::uint32_t fa_blocks = 0;
  std::uint32_t normal_blocks = 0;
  std::uint32_t free_blocks = 0;
  double mid_mass = 0;
  double time_us = 0;  // simulated time spent in the window; not in the CSV
};

// Cuts the run into windows of a fixed logical-write volume. A window closes
// after the command that brings it to window_pages or more.
class MetricsRecorder {
 public:
  MetricsRecorder(std::uint64_t window_pages, CostModel cost);

  void observe(const Ftl& ftl);
  // Closes the trailing partial window, if it saw any logical write.
  void finish(const Ftl& ftl);

  const std::vector<MetricSample>& samples() const { return samples_; }
  std::uint64_t window_pages() const { return window_pages_; }

 private:
  void close(const Ftl& ftl);

  std::uint64_t window_pages_;
  CostModel cost_;
  Counters window_start_;
  std::vector<MetricSample> samples_;
};

extern const char* const kCsvHeader;
std::string format_csv(const std::vector<MetricSample>& samples);

}  // namespace fasim
