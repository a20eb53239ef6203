#include "mcquic/trace.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace mcquic {

std::vector<TraceRecord> generate_trace(double duration_s, double fps,
                                        uint32_t size_min, uint32_t size_max,
                                        uint64_t seed) {
  if (size_min > size_max || size_min == 0) {
    throw std::invalid_argument("generate_trace: bad size bounds");
  }
  std::mt19937_64 rng(seed);
  std::vector<TraceRecord> out;
  size_t frames = size_t(duration_s * fps);
  double log_min = std::log(double(size_min));
  double log_max = std::log(double(size_max));
  for (size_t i = 0; i < frames; ++i) {
    TraceRecord r;
    r.send_time_ms = double(i) * 1000.0 / fps;
    double u = double(rng() >> 11) * 0x1.0p-53;
    double sz = std::exp(log_min + u * (log_max - log_min));
    r.frame_size_bytes = uint32_t(std::lround(sz));
    if (r.frame_size_bytes < size_min) r.frame_size_bytes = size_min;
    if (r.frame_size_bytes > size_max) r.frame_size_bytes = size_max;
    out.push_back(r);
  }
  return out;
}

std::string trace_to_csv(const std::vector<TraceRecord>& trace) {
  std::string out;
  char buf[64];
  for (const auto& r : trace) {
    std::snprintf(buf, sizeof(buf), "%.3f,%u\n", r.send_time_ms,
                  r.frame_size_bytes);
    out += buf;
  }
  return out;
}

std::vector<TraceRecord> trace_from_csv(const std::string& text) {
  std::vector<TraceRecord> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  double prev_t = 0.0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    TraceRecord r;
    char extra;
    if (std::sscanf(line.c_str(), "%lf,%u%c", &r.send_time_ms,
                    &r.frame_size_bytes, &extra) != 2) {
      throw std::runtime_error("trace: parse error at line " +
                               std::to_string(lineno));
    }
    if (r.send_time_ms < prev_t) {
      throw std::runtime_error("trace: times must be non-decreasing (line " +
                               std::to_string(lineno) + ")");
    }
    if (r.frame_size_bytes == 0 || r.frame_size_bytes > (1u << 20)) {
      throw std::runtime_error("trace: frame size out of range (line " +
                               std::to_string(lineno) + ")");
    }
    prev_t = r.send_time_ms;
    out.push_back(r);
  }
  return out;
}

void write_trace_file(const std::vector<TraceRecord>& trace,
                      const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("trace: cannot write " + path);
  f << trace_to_csv(trace);
}

std::vector<TraceRecord> read_trace_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("trace: cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return trace_from_csv(ss.str());
}

}  // namespace mcquic
