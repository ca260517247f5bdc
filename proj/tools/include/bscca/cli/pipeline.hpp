#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>

#include "bscca/cli/config.hpp"
#include "bscca/postprocess.hpp"
#include "bscca/simdata.hpp"

namespace bscca::cli {

/// Seed for stream `tag`, replication `index` of a run seeded with base.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag, std::uint64_t index);

enum SeedTag : std::uint64_t { kDataSeed = 1, kChainSeed = 2, kCoupleSeed = 3 };

/// Runs fn(0..count-1) on up to jobs threads. Results must be written by
/// index so the outcome does not depend on scheduling. The first exception
/// by index is rethrown.
void parallel_for(Index count, Index jobs, const std::function<void(Index)>& fn);

struct SimulatedData {
  PopulationModel model;
  Dataset data;
};

/// Simulated data of the configured size and truncation for one seed.
SimulatedData simulate_data(const Config& config, Index p, Index n, std::uint64_t seed);

PriorConfig prior_for(const Config& config, Index p);

/// Validates the config for the command, runs it, and publishes its files
/// into config.out. Nothing is written to config.out on failure.
void run_command(const std::string& command, const Config& config, std::ostream& log);

/// report.json document for an estimate.
nlohmann::ordered_json report_json(const EstimateReport& report, Index px, Index py,
                                   Index iterations);

}  // namespace bscca::cli
