// metrics.hpp — fidelity, trace distance, trajectory comparison, and the
// trace-distance non-Markovianity witness.

#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "spinboson/trajectory.hpp"

namespace spinboson::metrics {

using Mat2 = Eigen::Matrix2cd;

// Uhlmann fidelity (Tr√(√ρ σ √ρ))²; qubits use Tr(ρσ) + 2√(det ρ det σ).
// Slightly negative eigenvalues within tolerance are clamped (logged).
double fidelity(const Mat2& rho, const Mat2& sigma);

// general-dimension eigenvalue route, used as the mutual oracle in tests
double fidelity_general(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& sigma);

// ½‖ρ−σ‖₁; for qubits equals half the Euclidean Bloch distance
double trace_distance(const Mat2& rho, const Mat2& sigma);

struct ComparisonResult {
    std::vector<double> times;
    std::vector<double> fidelity;
    std::vector<double> trace_distance;
    double min_fidelity{1.0};
    double argmin_time{0.0};
    bool clamped{false};  // any metric input needed eigenvalue clamping
};

ComparisonResult compare(const Trajectory& a, const Trajectory& b);

// pointwise minimum fidelity over the common grid, excluding t = 0
std::pair<double, double> min_fidelity(const Trajectory& a, const Trajectory& b);

struct NmWitness {
    std::vector<double> times;       // midpoints of the derivative stencil
    std::vector<double> derivative;  // dT/dt by central differences
    bool non_markovian{false};       // derivative exceeded +epsilon somewhere
    double integrated_positive{0.0};
    double max_derivative{0.0};
};

// runs the supplied solver from both initial states and differentiates the
// trace distance; epsilon is the positivity threshold
NmWitness nm_witness(const std::function<Trajectory(const Mat2&)>& solve, const Mat2& rho0_a,
                     const Mat2& rho0_b, const std::vector<double>& times, double epsilon = 1e-8);

}  // namespace spinboson::metrics
