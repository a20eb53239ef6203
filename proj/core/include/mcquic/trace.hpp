#pragma once

#include <string>
#include <vector>

#include "mcquic/bytes.hpp"

namespace mcquic {

struct TraceRecord {
  double send_time_ms = 0.0;
  uint32_t frame_size_bytes = 0;
  auto operator<=>(const TraceRecord&) const = default;
};

/// Deterministic synthetic video trace: frames at 1/fps spacing
/// starting at t = 0, sizes log-uniform in [size_min, size_max].
std::vector<TraceRecord> generate_trace(double duration_s, double fps,
                                        uint32_t size_min, uint32_t size_max,
                                        uint64_t seed);

/// CSV "send_time_ms,frame_size_bytes", no header.
std::string trace_to_csv(const std::vector<TraceRecord>& trace);
std::vector<TraceRecord> trace_from_csv(const std::string& text);

void write_trace_file(const std::vector<TraceRecord>& trace,
                      const std::string& path);
std::vector<TraceRecord> read_trace_file(const std::string& path);

}  // namespace mcquic
