#include "mcquic/harness.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <deque>
#include <functional>

#include "mcquic/netsim.hpp"

namespace mcquic {

LatenessResult compute_frame_lateness(
    const std::map<uint64_t, int64_t>& delivery_ns_by_stream,
    const std::vector<TraceRecord>& trace) {
  LatenessResult out;
  std::vector<double> raw;
  raw.reserve(trace.size());
  for (size_t i = 0; i < trace.size(); ++i) {
    auto it = delivery_ns_by_stream.find(i);
    if (it == delivery_ns_by_stream.end()) {
      ++out.losses;
      continue;
    }
    raw.push_back(double(it->second) / 1e6 - trace[i].send_time_ms);
  }
  if (raw.empty()) return out;
  double min_raw = *std::min_element(raw.begin(), raw.end());
  out.per_frame_ms.reserve(raw.size());
  for (double r : raw) out.per_frame_ms.push_back(r - min_raw);
  return out;
}

namespace {

Bytes make_payload(size_t index, size_t size) {
  Bytes out(size);
  for (size_t i = 0; i < size; ++i) {
    out[i] = uint8_t((index * 131 + i * 7) & 0xff);
  }
  return out;
}

// The send schedule, whatever the workload: (time, bytes) pairs.
std::vector<TraceRecord> workload_schedule(const Scenario& s, uint64_t seed) {
  switch (s.workload) {
    case WorkloadKind::Video: {
      if (!s.trace_file.empty()) return read_trace_file(s.trace_file);
      return generate_trace(s.trace_duration_s, s.trace_fps, s.trace_size_min,
                            s.trace_size_max, seed ^ 0x7ace7ace);
    }
    case WorkloadKind::File: {
      std::vector<TraceRecord> out;
      uint64_t remaining = s.file_size_bytes;
      double interval_ms = double(s.chunk_bytes) * 8000.0 / double(s.bitrate_bps);
      size_t i = 0;
      while (remaining > 0) {
        uint32_t sz = uint32_t(std::min<uint64_t>(remaining, s.chunk_bytes));
        out.push_back({double(i) * interval_ms, sz});
        remaining -= sz;
        ++i;
      }
      return out;
    }
    case WorkloadKind::Streams: {
      std::vector<TraceRecord> out;
      for (size_t i = 0; i < s.stream_count; ++i) {
        out.push_back({double(i * s.stream_interval_ms), s.stream_bytes});
      }
      return out;
    }
  }
  return {};
}

std::vector<MetricsRow> run_sim(const Scenario& s, uint64_t seed,
                                const std::string& row_name) {
  Topology topo =
      Topology::binary_tree(s.n_clients, s.link_delay_ms, s.bandwidth_bps);
  topo.apply_loss_profile(s.loss);
  Simulator sim(std::move(topo), seed);

  bool mc_mode = s.mode == ModeKind::Multicast;
  const uint64_t seed_mix = seed * 0x9E3779B97F4A7C15ull;
  Server server(s.endpoint, seed_mix + 1);
  std::vector<std::unique_ptr<Client>> clients(s.n_clients + 1);
  for (size_t i = 1; i <= s.n_clients; ++i) {
    clients[i] = std::make_unique<Client>(s.endpoint, seed_mix + 1 + i, mc_mode);
    auto hs = server.connect_client(mc_mode, 0);
    assert(hs.client_id == i);
    clients[i]->install_session(hs);
  }

  std::vector<std::map<uint64_t, int64_t>> delivery(s.n_clients + 1);
  std::vector<uint64_t> dup_deliveries(s.n_clients + 1, 0);
  std::vector<uint64_t> order_violations(s.n_clients + 1, 0);
  std::vector<int64_t> last_delivered(s.n_clients + 1, -1);

  auto pump_server = [&]() {
    for (auto& od : server.take_outbox()) {
      if (od.path == PathKind::Unicast) {
        sim.send_unicast(0, int(od.to_client), od.path, std::move(od.bytes));
      } else {
        sim.send_group(od.path, std::move(od.bytes));
      }
    }
  };
  auto pump_client = [&](int i) {
    for (auto& od : clients[i]->take_outbox()) {
      sim.send_unicast(i, 0, PathKind::Unicast, std::move(od.bytes));
    }
    sim.topology().set_member(i, clients[i]->listening());
    for (auto& ev : clients[i]->take_events()) {
      if (ev.kind == DeliveryEvent::Kind::StreamData) {
        auto [it, inserted] = delivery[i].emplace(ev.stream_id, ev.time_ns);
        if (!inserted) ++dup_deliveries[i];
        if (int64_t(ev.stream_id) < last_delivered[i]) ++order_violations[i];
        last_delivered[i] =
            std::max(last_delivered[i], int64_t(ev.stream_id));
      }
    }
  };

  sim.set_deliver([&](int node, int from, PathKind path, ByteSpan bytes,
                      int64_t now) {
    if (node == 0) {
      server.on_datagram(uint64_t(from), bytes, now);
      pump_server();
    } else {
      clients[node]->on_datagram(path, bytes, now);
      pump_client(node);
    }
  });

  auto schedule = workload_schedule(s, seed);
  std::deque<size_t> pending;
  auto try_send = [&]() {
    while (!pending.empty()) {
      size_t idx = pending.front();
      Bytes data = make_payload(idx, schedule[idx].frame_size_bytes);
      if (server.send_stream(as_span(data), sim.now()) ==
          Server::SendResult::Stalled) {
        break;
      }
      pending.pop_front();
    }
    pump_server();
  };
  for (size_t i = 0; i < schedule.size(); ++i) {
    sim.schedule_at(int64_t(schedule[i].send_time_ms * 1e6), [&, i]() {
      pending.push_back(i);
      try_send();
    });
  }

  if (mc_mode) {
    for (size_t i = 1; i <= s.n_clients; ++i) {
      if (int(i) == s.switch_client) {
        if (s.switch_join_ms >= 0) {
          sim.schedule_at(ms_to_ns(uint64_t(s.switch_join_ms)), [&, i]() {
            clients[i]->join(sim.now());
            pump_client(int(i));
          });
        }
        if (s.switch_leave_ms >= 0) {
          sim.schedule_at(ms_to_ns(uint64_t(s.switch_leave_ms)), [&, i]() {
            clients[i]->leave(sim.now());
            pump_client(int(i));
          });
        }
      } else {
        sim.schedule_at(ms_to_ns(uint64_t(s.join_at_ms)), [&, i]() {
          clients[i]->join(sim.now());
          pump_client(int(i));
        });
      }
    }
  }

  double workload_end_ms =
      schedule.empty() ? 0.0 : schedule.back().send_time_ms;
  double tail_ms = std::max<double>(2000.0, 2.0 * double(s.endpoint.et_ms) + 500.0);
  int64_t t_end = s.duration_s > 0
                      ? int64_t(s.duration_s * 1e9)
                      : int64_t((workload_end_ms + tail_ms) * 1e6);

  std::function<void()> tick_all = [&]() {
    int64_t now = sim.now();
    server.tick(now);
    pump_server();
    for (size_t i = 1; i <= s.n_clients; ++i) {
      clients[i]->tick(now);
      pump_client(int(i));
    }
    try_send();
    if (now + 1'000'000 <= t_end) {
      sim.schedule_at(now + 1'000'000, tick_all);
    }
  };
  sim.schedule_at(0, tick_all);

  sim.run_until(t_end);
  pump_server();
  for (size_t i = 1; i <= s.n_clients; ++i) pump_client(int(i));

  // ---- metric rows
  std::vector<MetricsRow> rows;
  auto push = [&](int64_t client, const std::string& metric, double v,
                  bool integral) {
    rows.push_back({row_name, client, metric, v, integral});
  };
  const auto& sc = server.counters();
  push(0, "bytes_sent_unicast", double(sc.bytes_uc), true);
  push(0, "bytes_sent_mc_data", double(sc.bytes_mc_data), true);
  push(0, "bytes_sent_mc_auth", double(sc.bytes_mc_auth), true);
  push(0, "repairs_sent", double(sc.repairs_sent), true);
  push(0, "nacks_received", double(sc.nacks_received), true);
  push(0, "streams_opened", double(sc.streams_opened), true);
  push(0, "stalled_sends", double(sc.stalled_sends), true);
  push(0, "expire_frames_sent", double(sc.expire_frames_sent), true);
  push(0, "unknown_nack_pns", double(sc.unknown_nack_pns), true);

  for (size_t i = 1; i <= s.n_clients; ++i) {
    const auto& cc = clients[i]->counters();
    bool complete = delivery[i].size() == schedule.size();
    push(i, "completion", complete ? 1.0 : 0.0, true);
    push(i, "delivered_streams", double(cc.delivered_streams), true);
    push(i, "delivered_bytes", double(cc.delivered_bytes), true);
    push(i, "bytes_sent", double(cc.bytes_uc), true);
    push(i, "bytes_sent_beyond_membership",
         double(cc.bytes_uc - cc.bytes_membership), true);
    push(i, "auth_failures", double(cc.auth_failures), true);
    push(i, "nacks_sent", double(cc.nacks_sent), true);
    push(i, "reset_streams", double(cc.reset_streams), true);
    push(i, "recovered_symbols", double(cc.recovered_symbols), true);
    push(i, "duplicate_deliveries", double(dup_deliveries[i]), true);
    push(i, "delivery_order_violations", double(order_violations[i]), true);
    if (s.workload == WorkloadKind::Video) {
      auto lat = compute_frame_lateness(delivery[i], schedule);
      push(i, "frame_losses", double(lat.losses), true);
      for (double v : lat.per_frame_ms) {
        push(i, "frame_lateness_ms", v, false);
      }
    }
  }
  return rows;
}

int64_t median_ns(std::vector<int64_t> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

BenchPoint run_bench(size_t stream_bytes, size_t n_clients, ModeKind mode,
                     AuthType auth, bool fec_on, uint64_t seed, int reps) {
  using Clock = std::chrono::steady_clock;
  BenchPoint out;
  out.n_clients = n_clients;
  std::vector<int64_t> src_samples;
  std::vector<int64_t> cli_samples;

  constexpr size_t kBenchStream = 64 * 1024;
  constexpr int64_t kStepNs = ms_to_ns(5);

  for (int rep = 0; rep < reps; ++rep) {
    EndpointConfig cfg;
    cfg.auth_type = auth;
    cfg.fec_enabled = fec_on;
    cfg.et_ms = 5;
    cfg.ping_interval_ms = 0;  // no idle pings in the loopback bench
    Server server(cfg, seed + uint64_t(rep));
    std::vector<std::unique_ptr<Client>> clients(n_clients + 1);
    bool mc = mode == ModeKind::Multicast;
    for (size_t i = 1; i <= n_clients; ++i) {
      clients[i] = std::make_unique<Client>(cfg, seed + 100 + i, mc);
      auto hs = server.connect_client(mc, 0);
      clients[i]->install_session(hs);
    }
    // Loopback pump for the join handshake.
    auto pump = [&](int64_t now) {
      bool progress = true;
      while (progress) {
        progress = false;
        for (auto& od : server.take_outbox()) {
          progress = true;
          if (od.path == PathKind::Unicast) {
            clients[od.to_client]->on_datagram(PathKind::Unicast,
                                               as_span(od.bytes), now);
          } else {
            for (size_t i = 1; i <= n_clients; ++i) {
              if (clients[i]->listening()) {
                clients[i]->on_datagram(od.path, as_span(od.bytes), now);
              }
            }
          }
        }
        for (size_t i = 1; i <= n_clients; ++i) {
          for (auto& od : clients[i]->take_outbox()) {
            progress = true;
            server.on_datagram(i, as_span(od.bytes), now);
          }
          clients[i]->take_events();
        }
      }
    };
    if (mc) {
      for (size_t i = 1; i <= n_clients; ++i) clients[i]->join(0);
      pump(0);
    }

    // ---- source generation, timed around the library calls only
    std::vector<std::pair<PathKind, Bytes>> stored;
    int64_t vnow = kStepNs;
    int64_t src_ns = 0;
    size_t sent_bytes = 0;
    size_t frame_idx = 0;
    while (sent_bytes < stream_bytes) {
      size_t sz = std::min(kBenchStream, stream_bytes - sent_bytes);
      Bytes data = make_payload(frame_idx++, sz);
      auto t0 = Clock::now();
      auto res = server.send_stream(as_span(data), vnow);
      server.tick(vnow);
      auto t1 = Clock::now();
      src_ns +=
          std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count();
      while (res == Server::SendResult::Stalled) {
        vnow += kStepNs;
        t0 = Clock::now();
        server.tick(vnow);
        res = server.send_stream(as_span(data), vnow);
        t1 = Clock::now();
        src_ns += std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0)
                      .count();
      }
      sent_bytes += sz;
      vnow += kStepNs;
      for (auto& od : server.take_outbox()) {
        if (od.path != PathKind::Unicast) {
          stored.emplace_back(od.path, std::move(od.bytes));
        } else if (od.to_client == 1) {
          stored.emplace_back(PathKind::Unicast, std::move(od.bytes));
        }
      }
    }
    src_samples.push_back(src_ns / int64_t(stream_bytes));

    // ---- client consumption of the stored packets, in order
    Client& consumer = *clients[1];
    int64_t cnow = vnow;
    int64_t cli_ns = 0;
    size_t processed = 0;
    for (auto& [path, bytes] : stored) {
      auto t0 = Clock::now();
      consumer.on_datagram(path, as_span(bytes), cnow);
      auto t1 = Clock::now();
      cli_ns +=
          std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count();
      if (++processed % 256 == 0) {
        consumer.take_events();
        consumer.take_outbox();
      }
      cnow += 1000;
    }
    consumer.take_events();
    consumer.take_outbox();
    cli_samples.push_back(cli_ns / int64_t(stream_bytes));
  }

  out.source_ns_per_byte = double(median_ns(src_samples));
  out.client_ns_per_byte = double(median_ns(cli_samples));
  return out;
}

std::vector<MetricsRow> run_bench_scaling(const Scenario& s) {
  const size_t workload = 10 * 1000 * 1000;
  std::vector<MetricsRow> rows;
  auto add = [&](const std::string& variant, const BenchPoint& p) {
    std::string name = s.name + "/" + variant + "/n=" + std::to_string(p.n_clients);
    rows.push_back({name, 0, "source_ns_per_byte", p.source_ns_per_byte, false});
    rows.push_back({name, 1, "client_ns_per_byte", p.client_ns_per_byte, false});
  };
  const std::vector<size_t> sweep = {1, 2, 4, 8, 16, 24, 32, 40};
  for (size_t n : sweep) {
    add("mc-none", run_bench(workload, n, ModeKind::Multicast, AuthType::None,
                             false, s.seed, 5));
  }
  for (size_t n : sweep) {
    add("uc", run_bench(workload, n, ModeKind::Unicast, AuthType::None, false,
                        s.seed, 5));
  }
  for (size_t n : {size_t(1), size_t(8), size_t(16), size_t(24), size_t(32),
                   size_t(40)}) {
    add("mc-symtag", run_bench(workload, n, ModeKind::Multicast,
                               AuthType::SymTag, false, s.seed, 3));
  }
  for (size_t n : {size_t(1), size_t(40)}) {
    add("mc-asympacket", run_bench(workload, n, ModeKind::Multicast,
                                   AuthType::AsymPacket, false, s.seed, 3));
    add("mc-asymstream", run_bench(workload, n, ModeKind::Multicast,
                                   AuthType::AsymStream, false, s.seed, 3));
  }
  // FEC mapping overhead against the same loss-free baseline.
  add("mc-none-fec", run_bench(workload, 1, ModeKind::Multicast,
                               AuthType::None, true, s.seed, 5));
  return rows;
}

std::vector<MetricsRow> run_bench_fec_window(const Scenario& s) {
  // Repair generation cost grows with the window; NACKs are injected
  // every 100 data packets (1% loss equivalent). Window sizes stay
  // within the GF(256) Vandermonde capacity.
  using Clock = std::chrono::steady_clock;
  const size_t workload = 5 * 1000 * 1000;
  std::vector<MetricsRow> rows;
  for (size_t window : {size_t(25), size_t(100), size_t(240)}) {
    std::vector<int64_t> samples;
    for (int rep = 0; rep < 3; ++rep) {
      EndpointConfig cfg;
      cfg.fec_enabled = true;
      cfg.fec_max_window = window;
      cfg.et_ms = 5;
      cfg.ping_interval_ms = 0;
      Server server(cfg, s.seed + uint64_t(rep));
      Client client(cfg, s.seed + 7, true);
      auto hs = server.connect_client(true, 0);
      client.install_session(hs);
      for (auto& od : server.take_outbox()) {
        client.on_datagram(PathKind::Unicast, as_span(od.bytes), 0);
      }
      client.join(0);
      for (auto& od : client.take_outbox()) {
        server.on_datagram(1, as_span(od.bytes), 0);
      }
      for (auto& od : server.take_outbox()) {
        if (od.path == PathKind::Unicast) {
          client.on_datagram(PathKind::Unicast, as_span(od.bytes), 0);
        }
      }
      client.take_outbox();

      int64_t vnow = ms_to_ns(5);
      int64_t src_ns = 0;
      size_t sent = 0;
      size_t idx = 0;
      uint64_t data_packets = 0;
      uint64_t next_nack_at = 100;
      while (sent < workload) {
        size_t sz = std::min<size_t>(32 * 1024, workload - sent);
        Bytes data = make_payload(idx++, sz);
        auto t0 = Clock::now();
        auto res = server.send_stream(as_span(data), vnow);
        server.tick(vnow);
        auto t1 = Clock::now();
        src_ns += std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0)
                      .count();
        while (res == Server::SendResult::Stalled) {
          vnow += ms_to_ns(5);
          t0 = Clock::now();
          server.tick(vnow);
          res = server.send_stream(as_span(data), vnow);
          t1 = Clock::now();
          src_ns +=
              std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0)
                  .count();
        }
        sent += sz;
        vnow += ms_to_ns(5);
        uint64_t last_data_pn = 0;
        bool have_pn = false;
        for (auto& od : server.take_outbox()) {
          if (od.path != PathKind::McData) continue;
          ++data_packets;
          ByteReader r{as_span(od.bytes)};
          if (auto hdr = decode_header(r)) {
            last_data_pn = hdr->packet_number;
            have_pn = true;
          }
        }
        if (have_pn && data_packets >= next_nack_at) {
          next_nack_at += 100;
          PnRangeSet lost;
          lost.insert(last_data_pn);
          auto t2 = Clock::now();
          server.inject_nack(lost, last_data_pn);
          server.tick(vnow);
          auto t3 = Clock::now();
          src_ns +=
              std::chrono::duration_cast<std::chrono::nanoseconds>(t3 - t2)
                  .count();
          server.take_outbox();
        }
      }
      samples.push_back(src_ns / int64_t(workload));
    }
    std::string name = s.name + "/w=" + std::to_string(window);
    rows.push_back({name, 0, "source_ns_per_byte",
                    double(median_ns(samples)), false});
  }
  return rows;
}

std::vector<MetricsRow> run_scenario(const Scenario& scenario) {
  switch (scenario.kind) {
    case ScenarioKind::Sim:
      return run_sim(scenario, scenario.seed, scenario.name);
    case ScenarioKind::BenchScaling:
      return run_bench_scaling(scenario);
    case ScenarioKind::BenchFecWindow:
      return run_bench_fec_window(scenario);
    case ScenarioKind::EtSweep: {
      std::vector<MetricsRow> rows;
      for (uint64_t et : scenario.sweep_et_ms) {
        for (uint64_t sd : scenario.sweep_seeds) {
          Scenario v = scenario;
          v.kind = ScenarioKind::Sim;
          v.endpoint.et_ms = et;
          v.seed = sd;
          std::string name = scenario.name + "/et=" + std::to_string(et) +
                             "/seed=" + std::to_string(sd);
          auto sub = run_sim(v, sd, name);
          rows.insert(rows.end(), sub.begin(), sub.end());
        }
      }
      return rows;
    }
  }
  return {};
}

}  // namespace mcquic
