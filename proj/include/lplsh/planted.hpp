#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lplsh/dataset.hpp"

namespace lplsh {

struct PlantedConfig {
    std::size_t n = 1000;
    std::size_t d = 16;
    double p = 1.5;
    double r = 1.0;
    double c = 2.0;
    std::size_t planted_count = 10;
    std::uint64_t seed = 0;
    /// Points are drawn uniformly from [-box, box]^d.
    double box = 1.0;
    std::size_t max_attempts = 1000;
};

struct PlantedTruth {
    std::uint64_t query_id = 0;
    std::uint64_t planted_id = 0;
    double distance = 0.0;
};

struct PlantedInstance {
    Dataset data;
    Dataset queries;
    std::vector<PlantedTruth> truth;
};

/**
 * Query j has point j at l_p distance exactly r and every other data point at
 * distance >= c r. Background points falling inside some query's c r ball are
 * redrawn; running out of attempts means the box is too small for c r and
 * raises ContractError.
 */
PlantedInstance generate_planted(const PlantedConfig& config);

/// "query_id,planted_id,distance" with a header row.
void write_truth(const std::vector<PlantedTruth>& truth, const std::string& path,
                 const std::vector<std::string>& comments = {});
std::vector<PlantedTruth> read_truth(const std::string& path);

}  // namespace lplsh
