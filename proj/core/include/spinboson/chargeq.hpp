// chargeq.hpp — charge-qubit (Cooper-pair box) mapping: rotate the
// dephasing-coupled Hamiltonian into its eigenbasis and read off the
// composite coupling components.

#pragma once

#include <Eigen/Dense>

namespace spinboson::chargeq {

struct CpbParams {
    double omega0{1.0};   // σ_z coefficient
    double delta_x{0.0};  // Δ, σ_x coefficient
    double delta_y{0.0};  // δ, σ_y coefficient
    void validate() const;
};

struct RotatedCoupling {
    double Omega{0.0};  // level splitting √(ω₀² + Δ² + δ²)
    double c_z{0.0}, c_x{0.0}, c_y{0.0};  // σ_z in the eigenbasis; c_x²+c_y²+c_z² = 1
    Eigen::Matrix2cd basis;  // columns (|+⟩, |−⟩)
};

// eigen-decomposition of H_S = (ω₀σ_z + Δσ_x + δσ_y)/2 and expansion of σ_z
// in the rotated Pauli basis with coefficients c_i = ½Tr(σ_z^r σ̃_i)
RotatedCoupling rotate_to_eigenbasis(const CpbParams& p);

}  // namespace spinboson::chargeq
