#include "spinboson/bloch.hpp"

#include <cmath>
#include <stdexcept>

namespace spinboson::bloch {

using cplx = std::complex<double>;

SuNBasis sun_basis(int n) {
    if (n < 2) throw std::invalid_argument("sun_basis: dimension >= 2 required");
    SuNBasis b;
    b.dim = n;
    auto P = [&](int i, int k) {
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
        m(i, k) = 1.0;
        return m;
    };
    for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k) b.ops.push_back(P(j, k) + P(k, j));  // u_{j,k}
    for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k)
            b.ops.push_back(cplx{0.0, 1.0} * (P(j, k) - P(k, j)));  // v_{j,k}
    for (int j = 1; j < n; ++j) {  // w_j = −sqrt(2/(j(j+1))) (P_11+…+P_jj − j P_{j+1,j+1})
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
        for (int i = 0; i < j; ++i) m(i, i) = 1.0;
        m(j, j) = -static_cast<double>(j);
        b.ops.push_back(-std::sqrt(2.0 / (j * (j + 1.0))) * m);
    }
    return b;
}

Eigen::VectorXd to_bloch(const Eigen::MatrixXcd& rho, const SuNBasis& basis) {
    const int n = basis.dim;
    if (rho.rows() != n || rho.cols() != n) throw std::invalid_argument("to_bloch: shape mismatch");
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
        throw std::invalid_argument("to_bloch: state is not Hermitian");
    if (std::abs(rho.trace() - cplx{1.0, 0.0}) > 1e-10)
        throw std::invalid_argument("to_bloch: state trace differs from 1");
    Eigen::VectorXd mu(n * n - 1);
    for (std::size_t j = 0; j < basis.ops.size(); ++j)
        mu(static_cast<Eigen::Index>(j)) = (basis.ops[j] * rho).trace().real();
    return mu;
}

Eigen::MatrixXcd from_bloch(const Eigen::VectorXd& mu, const SuNBasis& basis) {
    const int n = basis.dim;
    if (mu.size() != n * n - 1) throw std::invalid_argument("from_bloch: length mismatch");
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Identity(n, n) / static_cast<double>(n);
    for (std::size_t j = 0; j < basis.ops.size(); ++j)
        rho += 0.5 * mu(static_cast<Eigen::Index>(j)) * basis.ops[j];
    return rho;
}

Eigen::Vector3d to_bloch_zxy(const Mat2& rho) {
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
        throw std::invalid_argument("to_bloch_zxy: state is not Hermitian");
    if (std::abs(rho.trace() - cplx{1.0, 0.0}) > 1e-10)
        throw std::invalid_argument("to_bloch_zxy: state trace differs from 1");
    Eigen::Vector3d mu;
    mu(0) = (rho(0, 0) - rho(1, 1)).real();                  // ⟨σ_z⟩
    mu(1) = 2.0 * rho(1, 0).real();                          // ⟨σ_x⟩
    mu(2) = 2.0 * rho(1, 0).imag();                          // ⟨σ_y⟩ = Tr(σ_y ρ)
    return mu;
}

Mat2 from_bloch_zxy(const Eigen::Vector3d& mu) {
    Mat2 rho;
    rho(0, 0) = 0.5 * (1.0 + mu(0));
    rho(1, 1) = 0.5 * (1.0 - mu(0));
    rho(0, 1) = 0.5 * cplx{mu(1), -mu(2)};
    rho(1, 0) = 0.5 * cplx{mu(1), mu(2)};
    return rho;
}

void exp_and_phi1(const Eigen::Matrix3d& M, Eigen::Matrix3d& expM, Eigen::Matrix3d& phi1) {
    const double norm = M.cwiseAbs().rowwise().sum().maxCoeff();
    int s = 0;
    if (norm > 0.25) s = static_cast<int>(std::ceil(std::log2(norm / 0.25)));
    const Eigen::Matrix3d A = M / std::pow(2.0, s);

    // Taylor to machine precision at ‖A‖ ≤ 1/4
    Eigen::Matrix3d phi = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d term = Eigen::Matrix3d::Identity();
    double fact = 1.0;
    for (int k = 1; k <= 20; ++k) {
        fact *= k;
        phi += term / fact;  // A^{k−1}/k!
        term = term * A;
    }
    Eigen::Matrix3d E = Eigen::Matrix3d::Identity() + A * phi;
    for (int i = 0; i < s; ++i) {
        phi = 0.5 * (E + Eigen::Matrix3d::Identity()) * phi;  // φ₁(2A) = ½(e^A + I) φ₁(A)
        E = E * E;
    }
    expM = E;
    phi1 = phi;
}

Eigen::Vector3d exp_affine(const Eigen::Matrix3d& M, const Eigen::Vector3d& r,
                           const Eigen::Vector3d& mu0) {
    Eigen::Matrix3d E, phi;
    exp_and_phi1(M, E, phi);
    return E * mu0 + 2.0 * (phi * r);
}

}  // namespace spinboson::bloch
