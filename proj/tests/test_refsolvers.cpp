#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <unsupported/Eigen/MatrixFunctions>

#include "spinboson/cumulant.hpp"
#include "spinboson/metrics.hpp"
#include "spinboson/refsolvers.hpp"

using namespace spinboson;
using std::numbers::pi;
using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;

namespace {
const bath::BathParams kFig3{0.05, 5.0, 2.0};
const bath::BathParams kFig2{1.25, 5.0, 4.0};
Mat2 plus_x() { return (Mat2() << 0.5, 0.5, 0.5, 0.5).finished(); }
Mat2 gibbs(double beta_omega) {
    Mat2 g = Mat2::Zero();
    g(0, 0) = std::exp(-0.5 * beta_omega);
    g(1, 1) = std::exp(0.5 * beta_omega);
    return g / g.trace().real();
}
}  // namespace

TEST_CASE("ode_integrate: constant generator equals the matrix exponential") {
    cumulant::SystemParams sys;
    sys.f1 = 1.0;
    const Mat4 L = refsolvers::davies_gkls(sys, kFig3);
    const std::vector<double> times{0.0, 0.5, 1.7, 4.0};
    const auto traj = refsolvers::ode_integrate([&](double) { return L; }, plus_x(), times, {});
    for (std::size_t i = 0; i < times.size(); ++i) {
        const Mat4 E = (L * times[i]).exp();
        Eigen::Vector4cd v;
        v << 0.5, 0.5, 0.5, 0.5;
        const Eigen::Vector4cd out = E * v;
        Mat2 expect;
        expect << out(0), out(2), out(1), out(3);
        CHECK((traj.states[i] - expect).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("ode_integrate: tolerance halving converges at the embedded order") {
    cumulant::SystemParams sys;
    sys.f1 = 1.0;
    const Mat4 L = refsolvers::bloch_redfield(sys, kFig3);
    const std::vector<double> times{3.0};
    auto run = [&](double rtol) {
        refsolvers::OdeConfig ode;
        ode.rel_tol = rtol;
        ode.abs_tol = rtol * 1e-3;
        return refsolvers::ode_integrate([&](double) { return L; }, plus_x(), times, ode)
            .states[0];
    };
    const Mat2 ref = run(1e-12);
    const double e6 = (run(1e-5) - ref).cwiseAbs().maxCoeff();
    const double e9 = (run(1e-8) - ref).cwiseAbs().maxCoeff();
    CHECK(e9 < e6);
    CHECK(e9 < 1e-7);

    // trace drift stays tiny over a long run
    const auto long_traj = refsolvers::ode_integrate(
        [&](double) { return L; }, plus_x(), {0.0, 10.0, 40.0}, {});
    for (const auto& st : long_traj.states)
        CHECK(std::abs(st.trace() - cplx{1.0, 0.0}) < 1e-10);
}

TEST_CASE("Davies generator: Gibbs steady state and textbook relaxation") {
    cumulant::SystemParams sys;
    sys.f1 = 1.0;
    const Mat4 L = refsolvers::davies_gkls(sys, kFig3);
    // steady state: L vec(gibbs) = 0
    const Mat2 g = gibbs(kFig3.beta * sys.omega0);
    Eigen::Vector4cd v;
    v << g(0, 0), g(1, 0), g(0, 1), g(1, 1);
    CHECK((L * v).cwiseAbs().maxCoeff() < 1e-12);

    // <sigma_z> relaxes exponentially at gamma(omega0) + gamma(-omega0)
    const double j0 = bath::spectral_density(1.0, kFig3);
    const double n0 = bath::bose_einstein(1.0, kFig3.beta);
    const double rate = 2.0 * pi * j0 * (2.0 * n0 + 1.0);
    const std::vector<double> times{0.0, 0.8, 1.6};
    Mat2 rho0 = Mat2::Zero();
    rho0(0, 0) = 1.0;
    const auto traj = refsolvers::ode_integrate([&](double) { return L; }, rho0, times, {});
    const double sz_inf = -std::tanh(0.5 * kFig3.beta);
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double sz = (traj.states[i](0, 0) - traj.states[i](1, 1)).real();
        const double expect = sz_inf + (1.0 - sz_inf) * std::exp(-rate * times[i]);
        CHECK(sz == doctest::Approx(expect).epsilon(1e-7));
    }
}

TEST_CASE("zero-frequency rate: analytic limit and asymptotic dephasing agreement") {
    CHECK(refsolvers::zero_frequency_rate(kFig3) ==
          doctest::Approx(8.0 * pi * kFig3.lambda / (kFig3.beta * kFig3.gamma)));
    const double w = 1e-6 * kFig3.gamma;
    const double via_limit =
        2.0 * pi * bath::spectral_density(w, kFig3) / std::tanh(0.5 * kFig3.beta * w);
    CHECK(refsolvers::zero_frequency_rate(kFig3) == doctest::Approx(via_limit).epsilon(1e-6));

    // the Davies sigma_z channel reproduces the exact asymptotic coherence rate
    const double slope = (refsolvers::exact_dephasing(kFig3, 120.0) -
                          refsolvers::exact_dephasing(kFig3, 100.0)) /
                         20.0;
    CHECK(slope == doctest::Approx(refsolvers::zero_frequency_rate(kFig3)).epsilon(1e-3));
}

TEST_CASE("half-Fourier kernels: closed form at t=infinity, detailed balance") {
    for (double w : {1.0, -1.0, 0.0}) {
        const cplx k = refsolvers::half_fourier_kernel(w, -1.0, kFig3, 8);
        double expect;
        if (w > 0)
            expect = pi * bath::spectral_density(w, kFig3) * (bath::bose_einstein(w, kFig3.beta) + 1.0);
        else if (w < 0)
            expect = pi * bath::spectral_density(-w, kFig3) * bath::bose_einstein(-w, kFig3.beta);
        else
            expect = 2.0 * pi * kFig3.lambda / (kFig3.beta * kFig3.gamma);
        CHECK(k.real() == doctest::Approx(expect).epsilon(1e-9));
    }
    // finite-t kernel converges to the asymptotic one
    const cplx kt = refsolvers::half_fourier_kernel(1.0, 20.0, kFig3, 8);
    const cplx ki = refsolvers::half_fourier_kernel(1.0, -1.0, kFig3, 8);
    CHECK(std::abs(kt - ki) < 1e-8);
    // and vanishes at t = 0
    CHECK(std::abs(refsolvers::half_fourier_kernel(1.0, 0.0, kFig3, 8)) < 1e-12);
}

TEST_CASE("Bloch-Redfield: trace preservation and TD-kernel convergence") {
    cumulant::SystemParams sys;
    sys.f1 = 1.0;
    sys.f3 = 0.7;
    const Mat4 L = refsolvers::bloch_redfield(sys, kFig3);
    const Eigen::RowVector4cd idr{1, 0, 0, 1};
    CHECK((idr * L).cwiseAbs().maxCoeff() < 1e-12);
    // generator reproduces the TD generator (Schrödinger frame) at large t entrywise
    const Mat4 Ltd = refsolvers::redfield_td_generator(sys, kFig3, 100.0 / kFig3.gamma, 8, true);
    CHECK((L - Ltd).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("Bloch-Redfield dephasing reaches the constant asymptotic rate") {
    cumulant::SystemParams dep;
    dep.f1 = 0.0;
    dep.f3 = 1.0;
    const Mat4 L = refsolvers::bloch_redfield(dep, kFig2);
    const std::vector<double> times{0.0, 6.0, 7.0};
    const auto traj = refsolvers::ode_integrate([&](double) { return L; }, plus_x(), times, {});
    const double rate =
        -std::log(std::abs(traj.states[2](0, 1)) / std::abs(traj.states[1](0, 1)));
    CHECK(rate == doctest::Approx(refsolvers::zero_frequency_rate(kFig2)).epsilon(1e-6));
    // visibly differing from the exact solution at short times
    const auto short_traj =
        refsolvers::ode_integrate([&](double) { return L; }, plus_x(), {0.3}, {});
    const double exact = 0.5 * std::exp(-refsolvers::exact_dephasing(kFig2, 0.3));
    CHECK(std::abs(std::abs(short_traj.states[0](0, 1)) - exact) > 1e-3);
}

TEST_CASE("redfield_td: TCL2 is exact for pure dephasing") {
    cumulant::SystemParams dep;
    dep.f1 = 0.0;
    dep.f3 = 1.0;
    const std::vector<double> times{0.0, 0.2, 0.9, 2.0};
    const auto traj = refsolvers::redfield_td(dep, kFig2, plus_x(), times, {});
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double g = refsolvers::exact_dephasing(kFig2, times[i]);
        const cplx expect = 0.5 * std::exp(-g) * std::polar(1.0, -times[i]);
        CHECK(std::abs(traj.states[i](0, 1) - expect) < 1e-6);
    }
    // the interaction-picture generator vanishes at t = 0
    CHECK(refsolvers::redfield_td_generator(dep, kFig2, 0.0, 8).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Bloch-Redfield Gibbs deviation scales quadratically in the coupling") {
    // lambda is the reorganization energy (square of the coupling amplitude):
    // deviation ∝ g² with g = sqrt(lambda), i.e. slope 2 on log-log vs g
    cumulant::SystemParams comp;
    comp.f1 = 1.0;
    comp.f3 = 1.0;
    std::vector<double> gs, devs;
    for (double lam : {0.2, 0.1, 0.05, 0.025, 0.0125, 0.00625}) {
        bath::BathParams p{lam, 5.0, 2.0};
        const Mat4 L = refsolvers::bloch_redfield(comp, p);
        // steady state from the null space of L
        Eigen::JacobiSVD<Mat4> svd(L, Eigen::ComputeFullV);
        Eigen::Vector4cd v = svd.matrixV().col(3);
        Mat2 ss;
        ss << v(0), v(2), v(1), v(3);
        ss = 0.5 * (ss + ss.adjoint());
        ss /= ss.trace().real();
        devs.push_back(metrics::trace_distance(ss, gibbs(2.0)));
        gs.push_back(std::sqrt(lam));
    }
    double sxx = 0, sxy = 0, sx = 0, sy = 0;
    const int n = static_cast<int>(gs.size());
    for (int i = 0; i < n; ++i) {
        const double x = std::log(gs[i]), y = std::log(devs[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("exact_dephasing basics") {
    CHECK(refsolvers::exact_dephasing(kFig3, 0.0) == 0.0);
    const double t = 1.0 / kFig3.gamma;
    CHECK(refsolvers::exact_dephasing(kFig3, t) ==
          doctest::Approx(bath::dephasing_exponent_sinc(t, kFig3)).epsilon(1e-9));
}
