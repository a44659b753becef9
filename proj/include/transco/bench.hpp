#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "transco/dataio.hpp"
#include "transco/simgen.hpp"

namespace transco {

struct TrialResult {
    std::vector<ResultRecord> records;
    std::map<Method, std::vector<Eigen::Index>> detected;
    std::vector<Eigen::Index> truth;
};

/// Seed of trial `trial` derived from the root seed.
std::uint64_t trial_seed(std::uint64_t root_seed, int trial);

/// Generates one problem and fits each requested method. Runtimes are recorded only with `record_time`,
/// so that records are reproducible byte for byte by default.
TrialResult run_trial(const SimulationConfig& config, int trial, std::uint64_t root_seed,
                      const std::vector<Method>& methods, bool record_time = false);

/// Runs trials 0..trials-1 on up to `parallel` threads; results come back in trial order.
std::vector<TrialResult> run_trials(const SimulationConfig& config, int trials, std::uint64_t root_seed,
                                    const std::vector<Method>& methods, int parallel = 1, bool record_time = false);

std::vector<ResultRecord> flatten_records(const std::vector<TrialResult>& results);

}  // namespace transco
