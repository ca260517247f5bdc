#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "bscca/cli/config.hpp"
#include "bscca/cli/pipeline.hpp"
#include "bscca/error.hpp"

namespace {

int fail(std::string_view kind, const std::string& message) {
  nlohmann::ordered_json rec;
  rec["error"] = {{"kind", kind}, {"message", message}};
  std::cerr << rec.dump() << '\n';
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  using bscca::cli::Config;
  CLI::App app{"Sparse CCA by spike-and-slab quasi-posterior sampling with simulated tempering"};
  app.require_subcommand(1);

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"simulate", "Draw a synthetic dataset: X.csv, Y.csv, truth.json"},
      {"estimate-cov", "Estimate the (A, B) pair from data"},
      {"sample", "Run the adaptive tempered sampler and summarise the posterior"},
      {"couple", "Lagged coupled chains: meeting times and TV bounds"},
      {"report", "Recompute report.json and metrics.csv from a sample run"},
      {"benchmark", "Replicated comparison of tempering vs a single temperature"}};

  std::string config_path;
  std::map<std::string, std::string> flags;
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "Flat JSON config file");
    for (const auto& key : bscca::cli::config_keys())
      sub->add_option("--" + key, flags[key], "Override config key '" + key + "'");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("invalid_config", e.what());
  }

  const std::string command = app.get_subcommands().front()->get_name();
  const CLI::App* sub = app.get_subcommands().front();
  try {
    Config cfg = config_path.empty() ? Config{} : bscca::cli::load_config(config_path);
    for (const auto& key : bscca::cli::config_keys())
      if (sub->count("--" + key) > 0) bscca::cli::set_key_from_text(cfg, key, flags[key]);
    bscca::cli::run_command(command, cfg, std::cout);
  } catch (const bscca::Error& e) {
    return fail(bscca::to_string(e.kind()), e.what());
  } catch (const std::exception& e) {
    return fail("io", e.what());
  }
  return 0;
}
