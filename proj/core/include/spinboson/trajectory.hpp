// trajectory.hpp — time grid + density matrices + provenance

#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace spinboson {

struct Trajectory {
    std::vector<double> times;
    std::vector<Eigen::Matrix2cd> states;  // Schrödinger picture unless noted in options
    std::string solver_id;
    std::string options_summary;
};

}  // namespace spinboson
