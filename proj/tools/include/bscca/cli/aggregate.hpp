#pragma once

#include <map>
#include <string>
#include <vector>

namespace bscca::cli {

struct Summary {
  double mean = 0.0;
  double sd = 0.0;  ///< divisor n - 1; 0 for a single value
  std::size_t count = 0;
};

Summary summarize(const std::vector<double>& values);

/// "mean (sd)" with the given number of decimals.
std::string format_mean_sd(const Summary& s, int decimals = 2);

/// Per-metric summaries over replications. Every report must carry the
/// same metric names.
std::map<std::string, Summary> aggregate_replications(
    const std::vector<std::map<std::string, double>>& reports);

}  // namespace bscca::cli
