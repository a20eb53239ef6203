#include "mcquic/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace mcquic {

std::string metrics_to_csv(std::vector<MetricsRow> rows) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const MetricsRow& a, const MetricsRow& b) {
                     if (a.scenario != b.scenario) return a.scenario < b.scenario;
                     if (a.client_id != b.client_id) return a.client_id < b.client_id;
                     return a.metric < b.metric;
                   });
  std::string out = "scenario,client_id,metric,value\n";
  char buf[128];
  for (const auto& r : rows) {
    if (r.integral) {
      std::snprintf(buf, sizeof(buf), ",%lld,%s,%lld\n",
                    (long long)r.client_id, r.metric.c_str(),
                    (long long)std::llround(r.value));
    } else {
      std::snprintf(buf, sizeof(buf), ",%lld,%s,%.6f\n",
                    (long long)r.client_id, r.metric.c_str(), r.value);
    }
    out += r.scenario;
    out += buf;
  }
  return out;
}

void write_metrics(std::vector<MetricsRow> rows, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("metrics: cannot write " + path);
  f << metrics_to_csv(std::move(rows));
}

double metric_value(const std::vector<MetricsRow>& rows,
                    const std::string& scenario, int64_t client_id,
                    const std::string& metric, double fallback) {
  for (const auto& r : rows) {
    if (r.scenario == scenario && r.client_id == client_id &&
        r.metric == metric) {
      return r.value;
    }
  }
  return fallback;
}

std::vector<double> metric_values(const std::vector<MetricsRow>& rows,
                                  const std::string& scenario,
                                  int64_t client_id,
                                  const std::string& metric) {
  std::vector<double> out;
  for (const auto& r : rows) {
    if (r.scenario == scenario && r.client_id == client_id &&
        r.metric == metric) {
      out.push_back(r.value);
    }
  }
  return out;
}

}  // namespace mcquic
