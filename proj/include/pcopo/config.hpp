#pragma once
// Flat key-value configuration files with [model] / [sim] / [sweep] sections.
// Unknown keys are hard errors; parse failures carry line numbers.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pcopo/params.hpp"

namespace pcopo {

struct SweepSpec {
    // (parameter name, values); empty -> single-point evaluation.
    std::vector<std::pair<std::string, std::vector<double>>> axes;
    std::string observable = "intensity";
    std::string engine = "analytic";
    std::string output_path;
    // Window for the spectrum observable.
    double omega_min = -4.0, omega_max = 4.0;
    int omega_points = 801;
    // Angle grids for map observables.
    int n_theta = 91, n_phi = 181;

    void validate() const;
};

struct Config {
    ModelParams params;
    std::optional<double> E_relative;  // E given as a fraction of the local threshold
    SimConfig sim;
    SweepSpec sweep;
};

Config config_load(const std::string& path);
Config config_parse(const std::string& text, const std::string& origin = "<string>");
std::string config_serialize(const Config& c);

// Resolve E from E_relative (if set) using the threshold of `p`.
double resolve_E(const ModelParams& p, const std::optional<double>& e_relative);

}  // namespace pcopo
