#include "bscca/cli/aggregate.hpp"

#include <cmath>
#include <cstdio>

#include "bscca/error.hpp"

namespace bscca::cli {

Summary summarize(const std::vector<double>& values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) throw Error(ErrorKind::kEmptySample, "nothing to summarize");
  // deviations from the first value: identical inputs give sd exactly 0
  const double origin = values.front();
  double shift = 0.0;
  for (double v : values) shift += v - origin;
  shift /= static_cast<double>(values.size());
  s.mean = origin + shift;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - origin - shift) * (v - origin - shift);
    s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

std::string format_mean_sd(const Summary& s, int decimals) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.*f (%.*f)", decimals, s.mean, decimals, s.sd);
  return buf;
}

std::map<std::string, Summary> aggregate_replications(
    const std::vector<std::map<std::string, double>>& reports) {
  if (reports.empty()) throw Error(ErrorKind::kEmptySample, "no reports to aggregate");
  std::map<std::string, std::vector<double>> cols;
  for (const auto& r : reports) {
    if (r.size() != reports.front().size())
      throw Error(ErrorKind::kDimensionMismatch, "reports carry different metrics");
    for (const auto& [k, v] : r) {
      if (!reports.front().count(k))
        throw Error(ErrorKind::kDimensionMismatch, "reports carry different metrics");
      cols[k].push_back(v);
    }
  }
  std::map<std::string, Summary> out;
  for (const auto& [k, v] : cols) out[k] = summarize(v);
  return out;
}

}  // namespace bscca::cli
