#pragma once

#include <map>

#include "mcquic/metrics.hpp"
#include "mcquic/scenario.hpp"
#include "mcquic/trace.hpp"

namespace mcquic {

struct LatenessResult {
  std::vector<double> per_frame_ms;  // delivered frames, trace order
  size_t losses = 0;                 // reset or never-delivered frames
};

/// lateness_f = recv_complete_f - scheduled_send_f - min_g(raw_g).
/// Stream id f carries trace frame f; frames without a delivery are
/// counted as losses and produce no sample.
LatenessResult compute_frame_lateness(
    const std::map<uint64_t, int64_t>& delivery_ns_by_stream,
    const std::vector<TraceRecord>& trace);

/// Runs one scenario (any kind) and returns its metric rows.
std::vector<MetricsRow> run_scenario(const Scenario& scenario);

struct BenchPoint {
  std::string label;
  size_t n_clients = 0;
  double source_ns_per_byte = 0.0;
  double client_ns_per_byte = 0.0;
};

/// In-memory loopback benchmark: wall-clock packet generation cost on
/// the source and consumption cost on one client, per application byte.
BenchPoint run_bench(size_t stream_bytes, size_t n_clients, ModeKind mode,
                     AuthType auth, bool fec_on, uint64_t seed, int reps = 3);

std::vector<MetricsRow> run_bench_scaling(const Scenario& s);
std::vector<MetricsRow> run_bench_fec_window(const Scenario& s);

}  // namespace mcquic
