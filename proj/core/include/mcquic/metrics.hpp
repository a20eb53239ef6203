#pragma once

#include <string>
#include <vector>

namespace mcquic {

struct MetricsRow {
  std::string scenario;
  int64_t client_id = 0;  // 0 = source
  std::string metric;
  double value = 0.0;
  bool integral = false;
};

/// Header `scenario,client_id,metric,value`; rows stably sorted by
/// (scenario, client_id, metric) so equal keys keep insertion order.
std::string metrics_to_csv(std::vector<MetricsRow> rows);
void write_metrics(std::vector<MetricsRow> rows, const std::string& path);

/// First matching row's value, or nullopt.
double metric_value(const std::vector<MetricsRow>& rows,
                    const std::string& scenario, int64_t client_id,
                    const std::string& metric, double fallback = 0.0);
std::vector<double> metric_values(const std::vector<MetricsRow>& rows,
                                  const std::string& scenario,
                                  int64_t client_id,
                                  const std::string& metric);

}  // namespace mcquic
