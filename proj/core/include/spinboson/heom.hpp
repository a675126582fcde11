// heom.hpp — hierarchical equations of motion for one bosonic Drude-Lorentz
// bath (scaled ADOs, exponential time stepping, optional Markovian terminator).

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "spinboson/bath.hpp"
#include "spinboson/cumulant.hpp"
#include "spinboson/refsolvers.hpp"
#include "spinboson/trajectory.hpp"

namespace spinboson::refsolvers {

struct HeomConfig {
    int n_matsubara{8};  // expansion order (exponent count follows the decomposition)
    int depth{8};        // hierarchy truncation Σ n_k ≤ depth
    bath::Decomposition decomposition{bath::Decomposition::Matsubara};
    bool terminator{false};  // Ishizaki–Tanimura closure for the truncated remainder
    OdeConfig ode{};
    int workers{0};  // 0 = hardware concurrency (capped)
};

// hierarchy for H_S = ω₀σ_z/2, Q = f₁σ_x + f₂σ_y + f₃σ_z
Trajectory heom_solve(const cumulant::SystemParams& sys, const bath::BathParams& bath,
                      const HeomConfig& cfg, const Eigen::Matrix2cd& rho0,
                      const std::vector<double>& times);

// general system Hamiltonian and coupling operator
Trajectory heom_solve_op(const Eigen::Matrix2cd& H, const Eigen::Matrix2cd& Q,
                         const bath::BathParams& bath, const HeomConfig& cfg,
                         const Eigen::Matrix2cd& rho0, const std::vector<double>& times);

// max trace distance between cfg and a depth+extra rerun on the same grid
double heom_depth_refinement(const cumulant::SystemParams& sys, const bath::BathParams& bath,
                             const HeomConfig& cfg, const Eigen::Matrix2cd& rho0,
                             const std::vector<double>& times, int extra_depth = 2);

std::size_t heom_hierarchy_size(int n_exponents, int depth);

}  // namespace spinboson::refsolvers
