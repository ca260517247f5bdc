#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bscca/covariance.hpp"

namespace bscca::cli {

/// Flat experiment configuration. Every field is a JSON key of the same
/// name and a command-line flag --<name>.
struct Config {
  // data
  Index p = 100;                        ///< total dimension of simulated data (p_x = p_y = p/2)
  Index n = 100;
  std::optional<double> truncation_c;   ///< truncate view 2 at c when set
  std::string x;                        ///< input CSV for view 1 (estimate-cov, sample)
  std::string y;                        ///< input CSV for view 2
  std::string estimator = "sample";
  double psd_floor = kDefaultPsdFloor;
  // prior
  double rho0 = 10.0;
  double rho1 = 0.5;
  std::optional<double> q;              ///< defaults to p^-1.5
  double sigma = 1.0;
  // sampler
  std::vector<double> temperatures = {1.0, 1.0 / 0.9, 1.0 / 0.8, 1.0 / 0.7, 1.0 / 0.6};
  Index iterations = 10000;
  Index batch_size = 100;
  Index thin = 10;
  int mala_steps = 1;
  bool adapt = true;
  double tolerance = 0.2;
  double step_scale = 0.5;
  // replications
  std::uint64_t seed = 1;
  Index replications = 1;
  Index jobs = 1;
  // coupling
  std::vector<Index> p_list = {50, 100};
  double n_ratio = 0.5;                 ///< couple: n = n_ratio * p
  Index lag = 0;                        ///< 0: L = p
  Index max_iterations = 0;             ///< 0: 10 p + 1000
  double epsilon = 0.1;
  // report
  std::string input;                    ///< run directory read by `report` (default: out)
  std::string truth;                    ///< truth.json for metrics
  // output
  std::string out = "out";

  /// Throws Error(kInvalidConfig) naming the first offending key.
  void validate(const std::string& command) const;
  /// Ordered JSON echo of every key.
  nlohmann::ordered_json to_json() const;
};

/// Names of all keys, in echo order.
const std::vector<std::string>& config_keys();

/// Sets one key from a JSON value. Unknown keys and type errors throw.
void set_key(Config& config, const std::string& key, const nlohmann::json& value);

/// Sets one key from flag text. Lists are comma separated; "null" clears
/// optional keys.
void set_key_from_text(Config& config, const std::string& key, const std::string& text);

/// Reads a flat JSON object from path on top of the defaults.
Config load_config(const std::string& path);

}  // namespace bscca::cli
