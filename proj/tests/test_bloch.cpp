#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <random>

#include "spinboson/bloch.hpp"

using namespace spinboson;
using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;

TEST_CASE("sun_basis counts, tracelessness, orthonormality") {
    for (int n : {2, 3, 4}) {
        const auto b = bloch::sun_basis(n);
        REQUIRE(static_cast<int>(b.ops.size()) == n * n - 1);
        for (std::size_t i = 0; i < b.ops.size(); ++i) {
            CHECK(std::abs(b.ops[i].trace()) < 1e-14);
            CHECK((b.ops[i] - b.ops[i].adjoint()).cwiseAbs().maxCoeff() < 1e-14);
            for (std::size_t j = 0; j < b.ops.size(); ++j)
                CHECK(std::abs((b.ops[i] * b.ops[j]).trace() - (i == j ? 2.0 : 0.0)) < 1e-13);
        }
    }
    CHECK_THROWS(bloch::sun_basis(1));
}

TEST_CASE("qubit basis elements: u=sigma_x, v=sigma_y, w1=-sigma_z") {
    const auto b = bloch::sun_basis(2);
    Mat2 sx, sy, sz;
    sx << 0, 1, 1, 0;
    sy << 0, cplx{0, -1}, cplx{0, 1}, 0;
    sz << 1, 0, 0, -1;
    CHECK((b.ops[0] - sx).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((b.ops[1] - sy).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((b.ops[2] + sz).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("to_bloch / from_bloch round trips and examples") {
    const auto b2 = bloch::sun_basis(2);
    // maximally mixed state
    CHECK(bloch::to_bloch(Eigen::MatrixXcd::Identity(2, 2) / 2.0, b2).cwiseAbs().maxCoeff() <
          1e-15);
    // the benchmark initial state: <sigma_x> = 1
    Mat2 plus_x;
    plus_x << 0.5, 0.5, 0.5, 0.5;
    const auto mu = bloch::to_bloch_zxy(plus_x);
    CHECK(mu(0) == doctest::Approx(0.0));
    CHECK(mu(1) == doctest::Approx(1.0));
    CHECK(mu(2) == doctest::Approx(0.0));
    // the orthogonal-pair state: <sigma_y> = -1 (sign fixed by the direct trace)
    Mat2 my;
    my << 0.5, cplx{0, 0.5}, cplx{0, -0.5}, 0.5;
    CHECK(bloch::to_bloch_zxy(my)(2) == doctest::Approx(-1.0));

    std::mt19937 rng(2);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int n : {2, 3, 4}) {
        const auto b = bloch::sun_basis(n);
        for (int rep = 0; rep < 10; ++rep) {
            Eigen::VectorXd v(n * n - 1);
            for (int i = 0; i < v.size(); ++i) v(i) = 0.3 * uni(rng);
            const auto rho = bloch::from_bloch(v, b);
            CHECK(std::abs(rho.trace() - cplx{1.0, 0.0}) < 1e-14);
            CHECK((bloch::to_bloch(rho, b) - v).cwiseAbs().maxCoeff() < 1e-14);
        }
    }
    // pure state on the Bloch sphere surface
    Eigen::Vector3d unit(0.3, -0.5, std::sqrt(1.0 - 0.09 - 0.25));
    const Mat2 pure = bloch::from_bloch_zxy(unit);
    CHECK(std::abs(pure.determinant()) < 1e-12);

    Mat2 bad;
    bad << 0.7, cplx{0.1, 0.2}, cplx{0.1, 0.1}, 0.3;  // not Hermitian
    CHECK_THROWS(bloch::to_bloch_zxy(bad));
}

namespace {

// independent Liouville-space oracle: build the 4x4 matrix of
// K[rho] = (M mu/2 + r).sigma and exponentiate by plain scaled Taylor series
Eigen::Matrix4cd liouville_exp(const Eigen::Matrix3d& M, const Eigen::Vector3d& r) {
    Mat2 sig[3];
    sig[0] << 1, 0, 0, -1;
    sig[1] << 0, 1, 1, 0;
    sig[2] << 0, cplx{0, -1}, cplx{0, 1}, 0;
    auto vec = [](const Mat2& m) {
        Eigen::Vector4cd v;
        v << m(0, 0), m(1, 0), m(0, 1), m(1, 1);
        return v;
    };
    auto apply_K = [&](const Mat2& rho) {
        // mu_i = Tr(sigma_i rho); K[rho] = (M mu/2 + r Tr(rho)).sigma
        Eigen::Vector3d mu;
        for (int i = 0; i < 3; ++i) mu(i) = (sig[i] * rho).trace().real();
        const Eigen::Vector3d out = M * (0.5 * mu) + r * rho.trace().real();
        Mat2 acc = Mat2::Zero();
        for (int i = 0; i < 3; ++i) acc += out(i) * sig[i];
        return acc;
    };
    Eigen::Matrix4cd K;
    for (int j = 0; j < 4; ++j) {
        Mat2 basis = Mat2::Zero();
        basis(j % 2, j / 2) = 1.0;
        K.col(j) = vec(apply_K(basis));
    }
    // scaled Taylor series for e^K
    int s = 0;
    double norm = K.cwiseAbs().rowwise().sum().maxCoeff();
    while (norm > 0.25) {
        norm /= 2.0;
        ++s;
    }
    Eigen::Matrix4cd A = K / std::pow(2.0, s);
    Eigen::Matrix4cd E = Eigen::Matrix4cd::Identity(), term = Eigen::Matrix4cd::Identity();
    for (int k = 1; k <= 22; ++k) {
        term = term * A / double(k);
        E += term;
    }
    for (int i = 0; i < s; ++i) E = E * E;
    return E;
}

}  // namespace

TEST_CASE("exp_affine trivials and Liouville-series oracle") {
    const Eigen::Vector3d mu0(0.2, -0.4, 0.7);
    CHECK((bloch::exp_affine(Eigen::Matrix3d::Zero(), Eigen::Vector3d::Zero(), mu0) - mu0)
              .cwiseAbs()
              .maxCoeff() < 1e-15);
    const Eigen::Vector3d r(0.1, 0.0, -0.3);
    CHECK((bloch::exp_affine(Eigen::Matrix3d::Zero(), r, mu0) - (mu0 + 2.0 * r))
              .cwiseAbs()
              .maxCoeff() < 1e-14);

    std::mt19937 rng(7);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        Eigen::Matrix3d M;
        Eigen::Vector3d r2, m0;
        for (int i = 0; i < 9; ++i) M(i / 3, i % 3) = 2.0 * uni(rng);
        for (int i = 0; i < 3; ++i) {
            r2(i) = uni(rng);
            m0(i) = 0.5 * uni(rng);
        }
        const auto E = liouville_exp(M, r2);
        Mat2 rho0;
        rho0 << 0.5 * (1.0 + m0(0)), 0.5 * cplx{m0(1), -m0(2)}, 0.5 * cplx{m0(1), m0(2)},
            0.5 * (1.0 - m0(0));
        Eigen::Vector4cd v;
        v << rho0(0, 0), rho0(1, 0), rho0(0, 1), rho0(1, 1);
        const Eigen::Vector4cd out = E * v;
        const Eigen::Vector3d mu = bloch::exp_affine(M, r2, m0);
        CHECK(std::abs(out(0) + out(3) - cplx{1.0, 0.0}) < 1e-12);  // trace preserved
        CHECK(std::abs((out(0) - out(3)).real() - mu(0)) < 1e-10);
        CHECK(std::abs(2.0 * out(1).real() - mu(1)) < 1e-10);
        CHECK(std::abs(2.0 * out(1).imag() - mu(2)) < 1e-10);
    }
}

TEST_CASE("phi1 consistency for stiff and singular generators") {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int rep = 0; rep < 30; ++rep) {
        Eigen::Matrix3d M;
        for (int i = 0; i < 9; ++i) M(i / 3, i % 3) = 20.0 * uni(rng);
        Eigen::Matrix3d E, P;
        bloch::exp_and_phi1(M, E, P);
        const double scale = std::max(1.0, E.cwiseAbs().maxCoeff());
        CHECK(((E - Eigen::Matrix3d::Identity()) - M * P).cwiseAbs().maxCoeff() < 1e-12 * scale);
        CHECK(((E - Eigen::Matrix3d::Identity()) - P * M).cwiseAbs().maxCoeff() < 1e-12 * scale);
    }
    // singular generator (pure dephasing shape): phi1 must stay finite
    Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
    M(1, 1) = M(2, 2) = -3.0;
    Eigen::Matrix3d E, P;
    bloch::exp_and_phi1(M, E, P);
    CHECK(P(0, 0) == doctest::Approx(1.0));  // phi1(0) block
    CHECK(E(1, 1) == doctest::Approx(std::exp(-3.0)));
}
