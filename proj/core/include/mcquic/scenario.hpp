#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcquic/endpoint.hpp"
#include "mcquic/netsim.hpp"

namespace mcquic {

enum class ScenarioKind { Sim, BenchScaling, BenchFecWindow, EtSweep };
enum class WorkloadKind { Video, File, Streams };
enum class ModeKind { Multicast, Unicast };

struct Scenario {
  std::string name = "scenario";
  ScenarioKind kind = ScenarioKind::Sim;

  size_t n_clients = 50;
  double link_delay_ms = 3.0;
  uint64_t bandwidth_bps = 100'000'000;
  LossProfile loss;
  ModeKind mode = ModeKind::Multicast;
  EndpointConfig endpoint;

  WorkloadKind workload = WorkloadKind::File;
  // video
  std::string trace_file;  // empty: synthetic
  double trace_duration_s = 60.0;
  double trace_fps = 20.0;
  uint32_t trace_size_min = 1000;
  uint32_t trace_size_max = 12288;
  // file transfer
  uint64_t file_size_bytes = 5'000'000;
  uint32_t chunk_bytes = 1100;
  uint64_t bitrate_bps = 2'000'000;
  // fixed-interval streams (switch demo)
  uint32_t stream_count = 90;
  uint64_t stream_interval_ms = 100;
  uint32_t stream_bytes = 1100;

  // membership scripting
  int64_t join_at_ms = 0;
  int switch_client = -1;  // this client joins/leaves mid-run
  int64_t switch_join_ms = -1;
  int64_t switch_leave_ms = -1;

  uint64_t seed = 1;
  double duration_s = 0.0;  // 0: derived from the workload

  // EtSweep parameters
  std::vector<uint64_t> sweep_et_ms = {50, 200, 350, 500};
  std::vector<uint64_t> sweep_seeds = {1, 2, 3, 4, 5};
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat key = value format; '#' comments. Unknown keys are errors with
/// their line number.
Scenario parse_scenario_text(const std::string& text,
                             const std::string& origin = "<config>");
Scenario parse_scenario_file(const std::string& path);

/// Applies one "key=value" assignment (CLI --set overrides).
void apply_scenario_setting(Scenario& s, const std::string& key,
                            const std::string& value, int line = 0);

const std::vector<Scenario>& builtin_scenarios();
std::optional<Scenario> find_builtin(const std::string& name);

std::string scenario_to_text(const Scenario& s);

}  // namespace mcquic
