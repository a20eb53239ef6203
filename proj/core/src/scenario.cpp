#include "mcquic/scenario.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace mcquic {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(const std::string& msg, int line) {
  if (line > 0) {
    throw ConfigError(msg + " (line " + std::to_string(line) + ")");
  }
  throw ConfigError(msg);
}

uint64_t parse_u64(const std::string& v, const std::string& key, int line) {
  uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) {
    fail("invalid integer for '" + key + "': " + v, line);
  }
  return out;
}

double parse_f64(const std::string& v, const std::string& key, int line) {
  try {
    size_t pos = 0;
    double out = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    fail("invalid number for '" + key + "': " + v, line);
  }
}

bool parse_bool(const std::string& v, const std::string& key, int line) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  fail("invalid boolean for '" + key + "': " + v, line);
}

std::vector<uint64_t> parse_u64_list(const std::string& v,
                                     const std::string& key, int line) {
  std::vector<uint64_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_u64(item, key, line));
  }
  if (out.empty()) fail("empty list for '" + key + "'", line);
  return out;
}

}  // namespace

void apply_scenario_setting(Scenario& s, const std::string& key,
                            const std::string& value, int line) {
  if (key == "name") {
    s.name = value;
  } else if (key == "kind") {
    if (value == "sim") s.kind = ScenarioKind::Sim;
    else if (value == "bench_scaling") s.kind = ScenarioKind::BenchScaling;
    else if (value == "bench_fec_window") s.kind = ScenarioKind::BenchFecWindow;
    else if (value == "et_sweep") s.kind = ScenarioKind::EtSweep;
    else fail("unknown kind: " + value, line);
  } else if (key == "n_clients") {
    s.n_clients = parse_u64(value, key, line);
    if (s.n_clients < 1) fail("n_clients must be >= 1", line);
  } else if (key == "link_delay_ms") {
    s.link_delay_ms = parse_f64(value, key, line);
  } else if (key == "bandwidth_bps") {
    s.bandwidth_bps = parse_u64(value, key, line);
  } else if (key == "bandwidth_mbps") {
    s.bandwidth_bps = parse_u64(value, key, line) * 1'000'000;
  } else if (key == "loss_profile") {
    if (value == "none") s.loss.kind = LossProfile::Kind::None;
    else if (value == "leaf") s.loss.kind = LossProfile::Kind::LeafLinks;
    else if (value == "shared_top") s.loss.kind = LossProfile::Kind::SharedTopLink;
    else fail("unknown loss_profile: " + value, line);
  } else if (key == "loss_rate") {
    s.loss.p = parse_f64(value, key, line);
    if (s.loss.p < 0.0 || s.loss.p >= 1.0) fail("loss_rate must be in [0,1)", line);
  } else if (key == "mode") {
    if (value == "multicast") s.mode = ModeKind::Multicast;
    else if (value == "unicast") s.mode = ModeKind::Unicast;
    else fail("unknown mode: " + value, line);
  } else if (key == "auth_type") {
    auto at = auth_type_from_name(value);
    if (!at) fail("unknown auth_type: " + value, line);
    s.endpoint.auth_type = *at;
  } else if (key == "et_ms") {
    s.endpoint.et_ms = parse_u64(value, key, line);
  } else if (key == "max_packet_size") {
    s.endpoint.max_packet_size = parse_u64(value, key, line);
  } else if (key == "fec_max_window") {
    s.endpoint.fec_max_window = parse_u64(value, key, line);
  } else if (key == "max_nb_repair") {
    s.endpoint.max_nb_repair = parse_u64(value, key, line);
  } else if (key == "nack_delay_ms") {
    s.endpoint.nack_delay_ms = parse_u64(value, key, line);
  } else if (key == "ping_interval_ms") {
    s.endpoint.ping_interval_ms = parse_u64(value, key, line);
  } else if (key == "scheduler_literal") {
    s.endpoint.scheduler_literal = parse_bool(value, key, line);
  } else if (key == "fec_enabled") {
    s.endpoint.fec_enabled = parse_bool(value, key, line);
  } else if (key == "workload") {
    if (value == "video") s.workload = WorkloadKind::Video;
    else if (value == "file") s.workload = WorkloadKind::File;
    else if (value == "streams") s.workload = WorkloadKind::Streams;
    else fail("unknown workload: " + value, line);
  } else if (key == "trace_file") {
    s.trace_file = value;
  } else if (key == "trace_duration_s") {
    s.trace_duration_s = parse_f64(value, key, line);
  } else if (key == "trace_fps") {
    s.trace_fps = parse_f64(value, key, line);
  } else if (key == "trace_size_min") {
    s.trace_size_min = uint32_t(parse_u64(value, key, line));
  } else if (key == "trace_size_max") {
    s.trace_size_max = uint32_t(parse_u64(value, key, line));
  } else if (key == "file_size_bytes") {
    s.file_size_bytes = parse_u64(value, key, line);
  } else if (key == "chunk_bytes") {
    s.chunk_bytes = uint32_t(parse_u64(value, key, line));
  } else if (key == "bitrate_bps") {
    s.bitrate_bps = parse_u64(value, key, line);
  } else if (key == "stream_count") {
    s.stream_count = uint32_t(parse_u64(value, key, line));
  } else if (key == "stream_interval_ms") {
    s.stream_interval_ms = parse_u64(value, key, line);
  } else if (key == "stream_bytes") {
    s.stream_bytes = uint32_t(parse_u64(value, key, line));
  } else if (key == "join_at_ms") {
    s.join_at_ms = int64_t(parse_u64(value, key, line));
  } else if (key == "switch_client") {
    s.switch_client = int(parse_u64(value, key, line));
  } else if (key == "switch_join_ms") {
    s.switch_join_ms = int64_t(parse_u64(value, key, line));
  } else if (key == "switch_leave_ms") {
    s.switch_leave_ms = int64_t(parse_u64(value, key, line));
  } else if (key == "seed") {
    s.seed = parse_u64(value, key, line);
  } else if (key == "duration_s") {
    s.duration_s = parse_f64(value, key, line);
  } else if (key == "sweep_et_ms") {
    s.sweep_et_ms = parse_u64_list(value, key, line);
  } else if (key == "sweep_seeds") {
    s.sweep_seeds = parse_u64_list(value, key, line);
  } else {
    fail("unknown key: " + key, line);
  }
}

Scenario parse_scenario_text(const std::string& text,
                             const std::string& origin) {
  Scenario s;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ": expected key = value (line " +
                        std::to_string(lineno) + ")");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    try {
      apply_scenario_setting(s, key, value, lineno);
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ": " + e.what());
    }
  }
  return s;
}

Scenario parse_scenario_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_scenario_text(ss.str(), path);
}

const std::vector<Scenario>& builtin_scenarios() {
  static const std::vector<Scenario> list = [] {
    std::vector<Scenario> v;

    {
      Scenario s;
      s.name = "bench-scaling";
      s.kind = ScenarioKind::BenchScaling;
      v.push_back(s);
    }
    {
      Scenario s;
      s.name = "bench-fec-window";
      s.kind = ScenarioKind::BenchFecWindow;
      v.push_back(s);
    }
    {
      Scenario s;
      s.name = "video-leaf-loss";
      s.workload = WorkloadKind::Video;
      s.loss = {LossProfile::Kind::LeafLinks, 0.05};
      s.endpoint.et_ms = 350;
      v.push_back(s);
    }
    {
      Scenario s;
      s.name = "video-shared-loss";
      s.workload = WorkloadKind::Video;
      s.loss = {LossProfile::Kind::SharedTopLink, 0.05};
      s.endpoint.et_ms = 350;
      v.push_back(s);
    }
    {
      Scenario s;
      s.name = "filetransfer-et-sweep";
      s.kind = ScenarioKind::EtSweep;
      s.workload = WorkloadKind::File;
      s.loss = {LossProfile::Kind::LeafLinks, 0.05};
      s.endpoint.auth_type = AuthType::AsymStream;
      v.push_back(s);
    }
    {
      Scenario s;
      s.name = "switch-demo";
      s.workload = WorkloadKind::Streams;
      s.n_clients = 3;
      s.loss = {LossProfile::Kind::None, 0.0};
      s.endpoint.et_ms = 1000;
      s.stream_count = 90;
      s.stream_interval_ms = 100;
      s.switch_client = 3;
      s.switch_join_ms = 3000;
      s.switch_leave_ms = 6000;
      v.push_back(s);
    }
    return v;
  }();
  return list;
}

std::optional<Scenario> find_builtin(const std::string& name) {
  for (const auto& s : builtin_scenarios()) {
    if (s.name == name) return s;
  }
  return std::nullopt;
}

std::string scenario_to_text(const Scenario& s) {
  std::ostringstream o;
  o << "name = " << s.name << "\n";
  const char* kind = s.kind == ScenarioKind::Sim               ? "sim"
                     : s.kind == ScenarioKind::BenchScaling    ? "bench_scaling"
                     : s.kind == ScenarioKind::BenchFecWindow ? "bench_fec_window"
                                                              : "et_sweep";
  o << "kind = " << kind << "\n";
  o << "n_clients = " << s.n_clients << "\n";
  o << "link_delay_ms = " << s.link_delay_ms << "\n";
  o << "bandwidth_bps = " << s.bandwidth_bps << "\n";
  const char* loss = s.loss.kind == LossProfile::Kind::None ? "none"
                     : s.loss.kind == LossProfile::Kind::LeafLinks
                         ? "leaf"
                         : "shared_top";
  o << "loss_profile = " << loss << "\n";
  o << "loss_rate = " << s.loss.p << "\n";
  o << "mode = " << (s.mode == ModeKind::Multicast ? "multicast" : "unicast")
    << "\n";
  o << "auth_type = " << auth_type_name(s.endpoint.auth_type) << "\n";
  o << "et_ms = " << s.endpoint.et_ms << "\n";
  const char* wl = s.workload == WorkloadKind::Video  ? "video"
                   : s.workload == WorkloadKind::File ? "file"
                                                      : "streams";
  o << "workload = " << wl << "\n";
  o << "seed = " << s.seed << "\n";
  return o.str();
}

}  // namespace mcquic
