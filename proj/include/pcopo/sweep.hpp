#pragma once
// Parameter-sweep executor binding the two engines to the declarative
// SweepSpec; every record is self-describing and re-runnable.

#include <cstdint>

#include "pcopo/config.hpp"
#include "pcopo/io.hpp"

namespace pcopo {

struct ResultRecord {
    ModelParams params;                // fully resolved (E absolute)
    std::optional<double> e_relative;  // the requested relative pump, if any
    std::string observable;
    std::string engine;
    // Named scalar results; map/spectrum observables emit one record per cell.
    std::vector<std::pair<std::string, double>> values;
    bool below_threshold = true;
    std::uint64_t seed = 0;
};

std::vector<ResultRecord> run_sweep(const Config& cfg);

// Tabular view of a homogeneous record set (shared value names).
void records_to_table(const std::vector<ResultRecord>& records, std::vector<std::string>& columns,
                      std::vector<std::vector<double>>& rows);

Metadata sweep_metadata(const Config& cfg, const std::string& command_line);

}  // namespace pcopo
