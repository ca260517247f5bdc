#include "bscca/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "bscca/error.hpp"

namespace bscca::cli {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw Error(ErrorKind::kInvalidConfig, "config key '" + key + "': " + why);
}

template <typename T>
T get_as(const std::string& key, const json& v) {
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) bad(key, "expected a boolean");
      return v.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer() && !v.is_number_unsigned()) bad(key, "expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_integer() && v.get<std::int64_t>() < 0) bad(key, "must be nonnegative");
      }
      return v.get<T>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) bad(key, "expected a number");
      return v.get<T>();
    } else {
      if (!v.is_string()) bad(key, "expected a string");
      return v.get<std::string>();
    }
  } catch (const json::exception& e) {
    bad(key, e.what());
  }
}

template <typename T>
std::vector<T> get_list(const std::string& key, const json& v) {
  if (!v.is_array()) bad(key, "expected an array");
  std::vector<T> out;
  for (const auto& e : v) out.push_back(get_as<T>(key, e));
  return out;
}

bool is_list_key(const std::string& key) { return key == "temperatures" || key == "p_list"; }
bool is_string_key(const std::string& key) {
  return key == "x" || key == "y" || key == "estimator" || key == "input" || key == "truth" ||
         key == "out";
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "p",          "n",           "truncation_c", "x",          "y",        "estimator",
      "psd_floor",  "rho0",        "rho1",         "q",          "sigma",    "temperatures",
      "iterations", "batch_size",  "thin",         "mala_steps", "adapt",    "tolerance",
      "step_scale", "seed",        "replications", "jobs",       "p_list",   "n_ratio",
      "lag",        "max_iterations", "epsilon",   "input",      "truth",    "out"};
  return keys;
}

void set_key(Config& c, const std::string& key, const json& v) {
  if (key == "p") c.p = get_as<Index>(key, v);
  else if (key == "n") c.n = get_as<Index>(key, v);
  else if (key == "truncation_c") c.truncation_c = v.is_null() ? std::nullopt : std::optional(get_as<double>(key, v));
  else if (key == "x") c.x = get_as<std::string>(key, v);
  else if (key == "y") c.y = get_as<std::string>(key, v);
  else if (key == "estimator") c.estimator = get_as<std::string>(key, v);
  else if (key == "psd_floor") c.psd_floor = get_as<double>(key, v);
  else if (key == "rho0") c.rho0 = get_as<double>(key, v);
  else if (key == "rho1") c.rho1 = get_as<double>(key, v);
  else if (key == "q") c.q = v.is_null() ? std::nullopt : std::optional(get_as<double>(key, v));
  else if (key == "sigma") c.sigma = get_as<double>(key, v);
  else if (key == "temperatures") c.temperatures = get_list<double>(key, v);
  else if (key == "iterations") c.iterations = get_as<Index>(key, v);
  else if (key == "batch_size") c.batch_size = get_as<Index>(key, v);
  else if (key == "thin") c.thin = get_as<Index>(key, v);
  else if (key == "mala_steps") c.mala_steps = get_as<int>(key, v);
  else if (key == "adapt") c.adapt = get_as<bool>(key, v);
  else if (key == "tolerance") c.tolerance = get_as<double>(key, v);
  else if (key == "step_scale") c.step_scale = get_as<double>(key, v);
  else if (key == "seed") c.seed = get_as<std::uint64_t>(key, v);
  else if (key == "replications") c.replications = get_as<Index>(key, v);
  else if (key == "jobs") c.jobs = get_as<Index>(key, v);
  else if (key == "p_list") c.p_list = get_list<Index>(key, v);
  else if (key == "n_ratio") c.n_ratio = get_as<double>(key, v);
  else if (key == "lag") c.lag = get_as<Index>(key, v);
  else if (key == "max_iterations") c.max_iterations = get_as<Index>(key, v);
  else if (key == "epsilon") c.epsilon = get_as<double>(key, v);
  else if (key == "input") c.input = get_as<std::string>(key, v);
  else if (key == "truth") c.truth = get_as<std::string>(key, v);
  else if (key == "out") c.out = get_as<std::string>(key, v);
  else bad(key, "unknown key");
}

void set_key_from_text(Config& c, const std::string& key, const std::string& text) {
  if (is_string_key(key)) {
    set_key(c, key, json(text));
    return;
  }
  json value;
  if (is_list_key(key)) {
    value = json::array();
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      if (!json::accept(item)) bad(key, "cannot parse list element '" + item + "'");
      value.push_back(json::parse(item));
    }
  } else {
    if (!json::accept(text)) bad(key, "cannot parse value '" + text + "'");
    value = json::parse(text);
  }
  set_key(c, key, value);
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open config file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kInvalidConfig, "config " + path + " is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::kInvalidConfig, "config must be a JSON object");
  Config c;
  for (const auto& [k, v] : doc.items()) set_key(c, k, v);
  return c;
}

void Config::validate(const std::string& command) const {
  auto need = [](bool ok, const std::string& key, const std::string& why) {
    if (!ok) bad(key, why);
  };
  const bool simulated = x.empty() && y.empty();
  if (x.empty() != y.empty()) bad(x.empty() ? "x" : "y", "x and y must be given together");
  if (command == "simulate" || ((command == "sample" || command == "estimate-cov") && simulated) ||
      command == "benchmark") {
    need(p >= 10 && p % 10 == 0, "p", "simulated data need p to be a positive multiple of 10");
    need(n >= 2, "n", "need at least 2 samples");
  }
  if (command == "estimate-cov" || command == "sample" || command == "benchmark") {
    need(estimator == "sample" || estimator == "kendall-sine", "estimator",
         "expected 'sample' or 'kendall-sine'");
    need(psd_floor > 0.0, "psd_floor", "must be positive");
  }
  need(rho0 > rho1 && rho1 > 0.0, "rho0", "need rho0 > rho1 > 0");
  need(!q || (*q > 0.0 && *q < 1.0), "q", "must lie in (0, 1)");
  need(sigma > 0.0, "sigma", "must be positive");
  need(!temperatures.empty() && temperatures.front() == 1.0, "temperatures",
       "must start at exactly 1");
  for (std::size_t i = 1; i < temperatures.size(); ++i)
    need(temperatures[i] > temperatures[i - 1], "temperatures", "must be strictly increasing");
  need(iterations >= 1, "iterations", "must be positive");
  need(batch_size >= 1, "batch_size", "must be positive");
  need(thin >= 1, "thin", "must be positive");
  need(mala_steps >= 1, "mala_steps", "must be positive");
  need(tolerance > 0.0 && tolerance < 1.0, "tolerance", "must lie in (0, 1)");
  need(step_scale > 0.0, "step_scale", "must be positive");
  need(replications >= 1, "replications", "must be positive");
  need(jobs >= 1, "jobs", "must be positive");
  need(!out.empty(), "out", "must not be empty");
  if (command == "couple") {
    need(!p_list.empty(), "p_list", "must not be empty");
    for (Index pp : p_list)
      need(pp >= 10 && pp % 10 == 0, "p_list", "each p must be a positive multiple of 10");
    need(n_ratio > 0.0, "n_ratio", "must be positive");
    need(epsilon > 0.0 && epsilon < 1.0, "epsilon", "must lie in (0, 1)");
  }
  if (truncation_c) need(std::isfinite(*truncation_c), "truncation_c", "must be finite");
}

nlohmann::ordered_json Config::to_json() const {
  ordered_json j;
  j["p"] = p;
  j["n"] = n;
  j["truncation_c"] = truncation_c ? ordered_json(*truncation_c) : ordered_json(nullptr);
  j["x"] = x;
  j["y"] = y;
  j["estimator"] = estimator;
  j["psd_floor"] = psd_floor;
  j["rho0"] = rho0;
  j["rho1"] = rho1;
  j["q"] = q ? ordered_json(*q) : ordered_json(nullptr);
  j["sigma"] = sigma;
  j["temperatures"] = temperatures;
  j["iterations"] = iterations;
  j["batch_size"] = batch_size;
  j["thin"] = thin;
  j["mala_steps"] = mala_steps;
  j["adapt"] = adapt;
  j["tolerance"] = tolerance;
  j["step_scale"] = step_scale;
  j["seed"] = seed;
  j["replications"] = replications;
  j["jobs"] = jobs;
  j["p_list"] = p_list;
  j["n_ratio"] = n_ratio;
  j["lag"] = lag;
  j["max_iterations"] = max_iterations;
  j["epsilon"] = epsilon;
  j["input"] = input;
  j["truth"] = truth;
  j["out"] = out;
  return j;
}

}  // namespace bscca::cli
