// bloch.hpp — SU(N) operator basis, density-matrix ↔ coherence-vector
// conversion, and the φ₁-based affine-map exponential.

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace spinboson::bloch {

using Mat2 = Eigen::Matrix2cd;

// generalized Gell-Mann operators, ordered (u_{j,k} block, v_{j,k} block, w_j block)
struct SuNBasis {
    int dim{2};
    std::vector<Eigen::MatrixXcd> ops;  // N² − 1 traceless operators, Tr(λ_i λ_j) = 2δ_ij
};

SuNBasis sun_basis(int n);

// μ_j = Tr(λ_j ρ); validates hermiticity and unit trace (tolerance 1e-10)
Eigen::VectorXd to_bloch(const Eigen::MatrixXcd& rho, const SuNBasis& basis);
Eigen::MatrixXcd from_bloch(const Eigen::VectorXd& mu, const SuNBasis& basis);

// qubit boundary with the solver-facing (z, x, y) ordering; relative to
// sun_basis(2) = (σ_x, σ_y, −σ_z) this is the permutation (−μ₃, μ₁, μ₂)
Eigen::Vector3d to_bloch_zxy(const Mat2& rho);
Mat2 from_bloch_zxy(const Eigen::Vector3d& mu);

struct AffineGenerator {
    Eigen::Matrix3d M;
    Eigen::Vector3d r;
    double t{0.0};
};

// e^M and φ₁(M) = Σ_{n≥1} M^{n−1}/n! by joint scaling and squaring
void exp_and_phi1(const Eigen::Matrix3d& M, Eigen::Matrix3d& expM, Eigen::Matrix3d& phi1);

// μ(t) = e^M μ₀ + 2 φ₁(M) r, the Bloch-vector form of ρ(t)=e^K[ρ₀]
Eigen::Vector3d exp_affine(const Eigen::Matrix3d& M, const Eigen::Vector3d& r,
                           const Eigen::Vector3d& mu0);

}  // namespace spinboson::bloch
