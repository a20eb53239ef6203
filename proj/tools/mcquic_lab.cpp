// mcquic-lab: scenario runner, benchmark driver and trace generator.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "mcquic/harness.hpp"

using namespace mcquic;

namespace {

int cmd_run(const std::string& target, uint64_t seed, bool seed_set,
            const std::string& out_path,
            const std::vector<std::string>& overrides) {
  Scenario scenario;
  if (std::filesystem::exists(target)) {
    scenario = parse_scenario_file(target);
  } else if (auto builtin = find_builtin(target)) {
    scenario = *builtin;
  } else {
    std::cerr << "error: no such config file or built-in scenario: " << target
              << "\n";
    return 2;
  }
  for (const auto& ov : overrides) {
    auto eq = ov.find('=');
    if (eq == std::string::npos) {
      std::cerr << "error: --set expects key=value, got: " << ov << "\n";
      return 2;
    }
    apply_scenario_setting(scenario, ov.substr(0, eq), ov.substr(eq + 1));
  }
  if (seed_set) scenario.seed = seed;

  auto rows = run_scenario(scenario);
  if (out_path.empty()) {
    std::fputs(metrics_to_csv(rows).c_str(), stdout);
  } else {
    write_metrics(std::move(rows), out_path);
    std::cout << "wrote " << out_path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mcquic-lab: multicast transport experiments at desk scale"};
  app.require_subcommand(1);

  // run
  std::string run_target;
  std::string run_out;
  uint64_t run_seed = 0;
  std::vector<std::string> run_sets;
  auto* run = app.add_subcommand("run", "Run a scenario (config file or built-in name)");
  run->add_option("scenario", run_target, "Config file path or built-in name")
      ->required();
  auto* seed_opt = run->add_option("--seed", run_seed, "Override the seed");
  run->add_option("--out", run_out, "Metrics CSV output path (default stdout)");
  run->add_option("--set", run_sets, "Override a config key (key=value)");

  // bench
  size_t bench_bytes = 10'000'000;
  size_t bench_clients = 1;
  std::string bench_mode = "multicast";
  std::string bench_auth = "none";
  bool bench_fec = false;
  uint64_t bench_seed = 1;
  int bench_reps = 3;
  auto* bench = app.add_subcommand("bench", "Loopback packet-generation benchmark");
  bench->add_option("--stream-bytes", bench_bytes, "Application bytes to send");
  bench->add_option("--clients", bench_clients, "Number of receivers");
  bench->add_option("--mode", bench_mode, "multicast | unicast");
  bench->add_option("--auth", bench_auth,
                    "none | asym_packet | asym_stream | sym_tag");
  bench->add_flag("--fec", bench_fec, "Map stream frames into FEC symbols");
  bench->add_option("--seed", bench_seed, "Seed");
  bench->add_option("--reps", bench_reps, "Repetitions (median reported)");

  // trace gen
  auto* trace = app.add_subcommand("trace", "Trace utilities");
  trace->require_subcommand(1);
  double tg_duration = 60.0;
  double tg_fps = 20.0;
  uint32_t tg_min = 1000;
  uint32_t tg_max = 12288;
  uint64_t tg_seed = 1;
  std::string tg_out;
  auto* tgen = trace->add_subcommand("gen", "Generate a synthetic video trace");
  tgen->add_option("--duration", tg_duration, "Seconds");
  tgen->add_option("--fps", tg_fps, "Frames per second");
  tgen->add_option("--size-min", tg_min, "Minimum frame size (bytes)");
  tgen->add_option("--size-max", tg_max, "Maximum frame size (bytes)");
  tgen->add_option("--seed", tg_seed, "Seed");
  tgen->add_option("--out", tg_out, "Output CSV path (default stdout)");

  // scenarios
  auto* scen = app.add_subcommand("scenarios", "Built-in scenario catalogue");
  scen->require_subcommand(1);
  auto* slist = scen->add_subcommand("list", "List built-in scenarios");
  std::string show_name;
  auto* sshow = scen->add_subcommand("show", "Print a built-in as config text");
  sshow->add_option("name", show_name, "Scenario name")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      return cmd_run(run_target, run_seed, seed_opt->count() > 0, run_out,
                     run_sets);
    }
    if (*bench) {
      ModeKind mode;
      if (bench_mode == "multicast" || bench_mode == "mc") {
        mode = ModeKind::Multicast;
      } else if (bench_mode == "unicast" || bench_mode == "uc") {
        mode = ModeKind::Unicast;
      } else {
        std::cerr << "error: unknown mode: " << bench_mode << "\n";
        return 2;
      }
      auto auth = auth_type_from_name(bench_auth);
      if (!auth) {
        std::cerr << "error: unknown auth type: " << bench_auth << "\n";
        return 2;
      }
      auto p = run_bench(bench_bytes, bench_clients, mode, *auth, bench_fec,
                         bench_seed, bench_reps);
      std::printf("clients=%zu source_ns_per_byte=%.3f client_ns_per_byte=%.3f\n",
                  p.n_clients, p.source_ns_per_byte, p.client_ns_per_byte);
      return 0;
    }
    if (*tgen) {
      auto records = generate_trace(tg_duration, tg_fps, tg_min, tg_max, tg_seed);
      if (tg_out.empty()) {
        std::fputs(trace_to_csv(records).c_str(), stdout);
      } else {
        write_trace_file(records, tg_out);
        std::cout << "wrote " << records.size() << " records to " << tg_out
                  << "\n";
      }
      return 0;
    }
    if (*slist) {
      for (const auto& s : builtin_scenarios()) std::cout << s.name << "\n";
      return 0;
    }
    if (*sshow) {
      auto b = find_builtin(show_name);
      if (!b) {
        std::cerr << "error: no such built-in: " << show_name << "\n";
        return 2;
      }
      std::cout << scenario_to_text(*b);
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
