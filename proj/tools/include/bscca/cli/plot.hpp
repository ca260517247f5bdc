#pragma once

#include <string>
#include <vector>

namespace bscca::cli {

struct BoxGroup {
  std::string label;
  std::vector<double> values;
};

/// Box-and-whisker chart (quartiles, 1.5 IQR whiskers, outlier dots) plus an
/// optional dashed marker per group.
std::string svg_boxplot(const std::vector<BoxGroup>& groups, const std::string& title,
                        const std::string& y_label, const std::vector<double>& markers = {});

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

std::string svg_lines(const std::vector<Series>& series, const std::string& title,
                      const std::string& x_label, const std::string& y_label);

/// Sample autocorrelation at lags 0..max_lag (biased normalisation).
std::vector<double> autocorrelation(const std::vector<double>& x, int max_lag);

/// Linear-interpolated quantile of a sample (type 7).
double quantile(std::vector<double> values, double prob);

void write_text(const std::string& path, const std::string& text);

}  // namespace bscca::cli
