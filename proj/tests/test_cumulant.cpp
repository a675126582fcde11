#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "spinboson/cumulant.hpp"
#include "spinboson/refsolvers.hpp"

using namespace spinboson;
using std::numbers::pi;
using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;
using rates::FreqLabel;

namespace {

const bath::BathParams kFig3{0.05, 5.0, 2.0};
const bath::BathParams kFig2{1.25, 5.0, 4.0};

Mat2 sigma_x() { return (Mat2() << 0, 1, 1, 0).finished(); }
Mat2 sigma_y() { return (Mat2() << 0, cplx{0, -1}, cplx{0, 1}, 0).finished(); }
Mat2 sigma_z() { return (Mat2() << 1, 0, 0, -1).finished(); }
Mat2 plus_x() { return (Mat2() << 0.5, 0.5, 0.5, 0.5).finished(); }

rates::RateTable random_table(unsigned seed, bool with_xi = true) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    rates::RateTable tab;
    tab.t = 1.0;
    tab.has_xi = with_xi;
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
            const cplx g{uni(rng), i == j ? 0.0 : uni(rng)};
            tab.gamma[i * 3 + j] = g;
            tab.gamma[j * 3 + i] = std::conj(g);
            const double x = uni(rng);
            tab.xi[i * 3 + j] = x;
            tab.xi[j * 3 + i] = x;
        }
    return tab;
}

Mat4 matrix_exp(const Mat4& K) {
    int s = 0;
    double norm = K.cwiseAbs().rowwise().sum().maxCoeff();
    while (norm > 0.25) {
        norm /= 2.0;
        ++s;
    }
    Mat4 A = K / std::pow(2.0, s);
    Mat4 E = Mat4::Identity(), term = Mat4::Identity();
    for (int k = 1; k <= 22; ++k) {
        term = term * A / double(k);
        E += term;
    }
    for (int i = 0; i < s; ++i) E = E * E;
    return E;
}

// Choi matrix of the map vec(rho) -> E vec(rho) (column-major vec)
Mat4 choi_of(const Mat4& E) {
    Mat4 C = Mat4::Zero();
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            Mat2 basis = Mat2::Zero();
            basis(i, j) = 1.0;
            Eigen::Vector4cd v;
            v << basis(0, 0), basis(1, 0), basis(0, 1), basis(1, 1);
            const Eigen::Vector4cd out = E * v;
            Mat2 mapped;
            mapped << out(0), out(2), out(1), out(3);
            C.block<2, 2>(2 * i, 2 * j) = mapped;
        }
    return C;
}

}  // namespace

TEST_CASE("jump operators") {
    cumulant::SystemParams sb;
    sb.f1 = 1.0;
    auto j = cumulant::jump_operators(sb);
    CHECK((j.a_minus - (Mat2() << 0, 0, 1, 0).finished()).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((j.a_plus - (Mat2() << 0, 1, 0, 0).finished()).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(j.a_zero.cwiseAbs().maxCoeff() == 0.0);

    cumulant::SystemParams dz;
    dz.f1 = 0.0;
    dz.f3 = 1.0;
    auto jz = cumulant::jump_operators(dz);
    CHECK(jz.a_minus.cwiseAbs().maxCoeff() == 0.0);
    CHECK((jz.a_zero - sigma_z()).cwiseAbs().maxCoeff() < 1e-15);

    // completeness: sum of jump operators recovers the coupling operator
    cumulant::SystemParams c;
    c.f1 = 0.3;
    c.f2 = -0.8;
    c.f3 = 0.5;
    auto jc = cumulant::jump_operators(c);
    const Mat2 total = jc.a_minus + jc.a_plus + jc.a_zero;
    const Mat2 expect = c.f1 * sigma_x() + c.f2 * sigma_y() + c.f3 * sigma_z();
    CHECK((total - expect).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("superoperator is trace preserving and hermiticity preserving") {
    std::mt19937 rng(21);
    for (unsigned seed : {1u, 2u, 3u}) {
        const auto tab = random_table(seed);
        cumulant::SystemParams sys;
        std::uniform_real_distribution<double> uni(-1.0, 1.0);
        sys.f1 = uni(rng);
        sys.f2 = uni(rng);
        sys.f3 = uni(rng) + 1.5;
        cumulant::CumulantOptions opts;
        opts.include_lamb_shift = true;
        const Mat4 K = cumulant::build_superoperator(sys, tab, opts);
        const Eigen::RowVector4cd idr{1, 0, 0, 1};
        CHECK((idr * K).cwiseAbs().maxCoeff() < 1e-12);
        // K maps Hermitian to Hermitian: K[rho]^dag = K[rho^dag]
        Mat2 rho;
        rho << 0.6, cplx{0.1, -0.3}, cplx{0.1, 0.3}, 0.4;
        Eigen::Vector4cd v;
        v << rho(0, 0), rho(1, 0), rho(0, 1), rho(1, 1);
        const Eigen::Vector4cd out = K * v;
        Mat2 m;
        m << out(0), out(2), out(1), out(3);
        CHECK((m - m.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("pure dephasing: K has two nonzero eigenvalues, both -2 f3^2 Gzz") {
    cumulant::SystemParams sys;
    sys.f1 = 0.0;
    sys.f3 = 1.0;
    const auto tab = rates::rate_table(0.8, 1.0, kFig2, {.with_xi = false});
    const double gzz = tab.g(FreqLabel::Zero, FreqLabel::Zero).real();
    const Mat4 K = cumulant::build_superoperator(sys, tab, {});
    Eigen::ComplexEigenSolver<Mat4> es(K);
    int nonzero = 0;
    for (int i = 0; i < 4; ++i) {
        const cplx ev = es.eigenvalues()(i);
        if (std::abs(ev) > 1e-12) {
            ++nonzero;
            CHECK(std::abs(ev - cplx{-2.0 * gzz, 0.0}) < 1e-10);
        }
    }
    CHECK(nonzero == 2);
}

TEST_CASE("projected generator equals the closed form; the main-text ordering does not") {
    // dedicated resolution of the documented sign/placement ambiguity: the
    // appendix-derived (M, r) matches the projection; the main-text display
    // with swapped x/y slots does not
    const auto tab = random_table(77);
    cumulant::SystemParams sys;
    sys.f1 = 0.7;
    sys.f2 = -0.4;
    sys.f3 = 1.3;
    cumulant::CumulantOptions opts;
    opts.include_lamb_shift = true;
    const auto proj = cumulant::project_generator(cumulant::build_superoperator(sys, tab, opts));
    const auto cf = cumulant::closed_form_generator(sys, tab, opts);
    CHECK((proj.M - cf.M).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((proj.r - cf.r).cwiseAbs().maxCoeff() < 1e-12);

    Eigen::Vector3d r_main(cf.r(0), cf.r(2), cf.r(1));  // main-text slots (−Im, Re) swapped
    CHECK((proj.r - r_main).cwiseAbs().maxCoeff() > 1e-3);
    Eigen::Matrix3d perm = Eigen::Matrix3d::Zero();
    perm(0, 0) = 1.0;
    perm(1, 2) = 1.0;
    perm(2, 1) = 1.0;
    const Eigen::Matrix3d m_main = perm * cf.M * perm;  // main-text x/y blocks swapped
    CHECK((proj.M - m_main).cwiseAbs().maxCoeff() > 1e-3);

    CHECK_THROWS(cumulant::project_generator(Mat4::Random()));
}

TEST_CASE("standard spin-boson block structure and r") {
    const auto tab = rates::rate_table(1.1, 1.0, kFig3, {.with_xi = false});
    cumulant::SystemParams sys;
    sys.f1 = 1.0;
    const auto g = cumulant::project_generator(cumulant::build_superoperator(sys, tab, {}));
    // z row/column decouple from (x, y)
    CHECK(std::abs(g.M(0, 1)) < 1e-13);
    CHECK(std::abs(g.M(0, 2)) < 1e-13);
    CHECK(std::abs(g.M(1, 0)) < 1e-13);
    CHECK(std::abs(g.M(2, 0)) < 1e-13);
    const double gdiff = (tab.g(FreqLabel::Plus, FreqLabel::Plus) -
                          tab.g(FreqLabel::Minus, FreqLabel::Minus))
                             .real();
    CHECK(g.r(0) == doctest::Approx(gdiff / 2.0).epsilon(1e-12));
    CHECK(std::abs(g.r(1)) < 1e-13);
    CHECK(std::abs(g.r(2)) < 1e-13);
}

TEST_CASE("evolve: t=0 exact, pure dephasing matches the exact solution") {
    cumulant::SystemParams sys;
    sys.f1 = 0.0;
    sys.f3 = 1.0;
    cumulant::CumulantOptions opts;
    const std::vector<double> times{0.0, 0.4, 1.1, 2.7};
    const auto traj = cumulant::evolve(sys, kFig2, opts, plus_x(), times);
    CHECK((traj.states[0] - plus_x()).cwiseAbs().maxCoeff() == 0.0);
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double g = refsolvers::exact_dephasing(kFig2, times[i]);
        const cplx expect = 0.5 * std::exp(-g) * std::polar(1.0, -times[i]);
        CHECK(std::abs(traj.states[i](0, 1) - expect) < 1e-8);
        CHECK(std::abs(traj.states[i](0, 0).real() - 0.5) < 1e-12);  // populations frozen
    }
}

TEST_CASE("evolve: lambda = 0 gives free evolution") {
    cumulant::SystemParams sys;
    sys.f1 = 1.0;
    bath::BathParams off{0.0, 5.0, 2.0};
    const std::vector<double> times{0.0, 0.9, 2.2};
    const auto traj = cumulant::evolve(sys, off, {}, plus_x(), times);
    for (std::size_t i = 0; i < times.size(); ++i) {
        const cplx expect = 0.5 * std::polar(1.0, -times[i]);
        CHECK(std::abs(traj.states[i](0, 1) - expect) < 1e-12);
        CHECK(traj.states[i](0, 0).real() == doctest::Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("picture consistency") {
    cumulant::SystemParams sys;
    sys.f1 = 1.0;
    sys.f3 = 1.0;
    cumulant::CumulantOptions sch, intp;
    intp.picture = cumulant::Picture::Interaction;
    const std::vector<double> times{0.7, 1.9};
    const auto a = cumulant::evolve(sys, kFig3, sch, plus_x(), times);
    const auto b = cumulant::evolve(sys, kFig3, intp, plus_x(), times);
    for (std::size_t i = 0; i < times.size(); ++i) {
        // populations identical; coherences related by the H_S rotation
        CHECK(a.states[i](0, 0).real() == doctest::Approx(b.states[i](0, 0).real()).epsilon(1e-12));
        const cplx rotated = b.states[i](0, 1) * std::polar(1.0, -times[i]);
        CHECK(std::abs(a.states[i](0, 1) - rotated) < 1e-12);
    }
}

TEST_CASE("steady state is the Gibbs state of the bare Hamiltonian") {
    cumulant::SystemParams sys;
    sys.f1 = 1.0;
    const Mat2 ss = cumulant::steady_state(sys, kFig3);
    const double tanh_half = std::tanh(0.5 * kFig3.beta * sys.omega0);
    CHECK(std::abs(ss(0, 0).real() - 0.5 * (1.0 - tanh_half)) < 1e-10);
    CHECK(std::abs(ss(1, 1).real() - 0.5 * (1.0 + tanh_half)) < 1e-10);
    CHECK(std::abs(ss(0, 1)) < 1e-14);

    // infinite temperature -> maximally mixed
    bath::BathParams hot{0.05, 5.0, 1e-6};
    const Mat2 hot_ss = cumulant::steady_state(sys, hot);
    CHECK(std::abs(hot_ss(0, 0).real() - 0.5) < 1e-6);

    // composite coupling has the same Gibbs fixed point
    cumulant::SystemParams comp;
    comp.f1 = 1.0;
    comp.f3 = 1.0;
    const Mat2 css = cumulant::steady_state(comp, kFig3);
    CHECK(std::abs(css(0, 0).real() - 0.5 * (1.0 - tanh_half)) < 1e-10);
    CHECK(std::abs(css(0, 1)) < 1e-12);

    cumulant::SystemParams dep;
    dep.f1 = 0.0;
    dep.f3 = 1.0;
    CHECK_THROWS(cumulant::steady_state(dep, kFig3));
}

TEST_CASE("dephasing coherence factor") {
    const auto tab = rates::rate_table(1.3, 1.0, kFig2, {.with_xi = false});
    CHECK(cumulant::dephasing_coherence(0.0, 1.0, rates::rate_table(0.0, 1.0, kFig2, {.with_xi = false})) ==
          cplx{1.0, 0.0});
    CHECK(cumulant::dephasing_coherence(1.3, 0.0, tab) == cplx{1.0, 0.0});
    const double g = refsolvers::exact_dephasing(kFig2, 1.3);
    CHECK(std::abs(cumulant::dephasing_coherence(1.3, 1.0, tab).real() - std::exp(-g)) <
          1e-8 * std::exp(-g));
}

TEST_CASE("standard SB closed forms match the generic path") {
    cumulant::SystemParams sys;
    sys.f1 = 1.0;
    cumulant::CumulantOptions opts;
    opts.picture = cumulant::Picture::Interaction;
    const std::vector<double> times{0.3, 0.9, 2.1, 5.5, 11.0};
    const Mat2 rho0 = plus_x();
    const auto traj = cumulant::evolve(sys, kFig3, opts, rho0, times);
    cumulant::SbObservables x0;
    x0.sz = 0.0;
    x0.sp = rho0(0, 1);
    x0.sm = rho0(1, 0);
    for (std::size_t i = 0; i < times.size(); ++i) {
        const auto tab = rates::rate_table(times[i], 1.0, kFig3, {.with_xi = false});
        const auto obs = cumulant::standard_sb_observables(times[i], tab, x0);
        const auto& st = traj.states[i];
        CHECK(std::abs((st(0, 0) - st(1, 1)).real() - obs.sz) < 1e-9);
        CHECK(std::abs(st(0, 1) - obs.sp) < 1e-9);
        CHECK(std::abs(st(1, 0) - obs.sm) < 1e-9);
    }
    // t = 0 returns the initial observables
    const auto at0 = cumulant::standard_sb_observables(0.0, rates::rate_table(0.0, 1.0, kFig3, {.with_xi=false}), x0);
    CHECK(at0.sz == doctest::Approx(x0.sz));
    CHECK(std::abs(at0.sp - x0.sp) < 1e-15);
    // sign convention: <sigma_z(infty)> -> -tanh(beta omega0/2), matching steady_state
    const auto late = cumulant::standard_sb_observables(
        400.0, rates::rate_table(400.0, 1.0, kFig3, {.with_xi = false}), x0);
    CHECK(std::abs(late.sz + std::tanh(1.0)) < 2e-3);
}

TEST_CASE("lamb shift hamiltonian properties") {
    const auto tab = rates::rate_table(0.9, 1.0, kFig3, {});
    cumulant::SystemParams sys;
    sys.f1 = 0.6;
    sys.f2 = 0.4;
    sys.f3 = 1.1;
    const Mat2 lam = cumulant::lamb_shift_hamiltonian(sys, tab);
    CHECK((lam - lam.adjoint()).cwiseAbs().maxCoeff() < 1e-14);

    cumulant::SystemParams orth;  // f3 = 0 -> proportional to sigma_z
    orth.f1 = 0.6;
    orth.f2 = 0.4;
    const Mat2 lz = cumulant::lamb_shift_hamiltonian(orth, tab);
    CHECK(std::abs(lz(0, 1)) < 1e-15);
    CHECK(lz(0, 0).real() == doctest::Approx(-lz(1, 1).real()));

    cumulant::SystemParams dep;  // f = 0 -> identity part only, dropped
    dep.f1 = 0.0;
    dep.f3 = 1.0;
    CHECK(cumulant::lamb_shift_hamiltonian(dep, tab).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("complete positivity: Choi matrix of e^{K_t} is PSD") {
    cumulant::SystemParams comp;
    comp.f1 = 1.0;
    comp.f3 = 1.0;
    for (bool ls : {false, true}) {
        cumulant::CumulantOptions opts;
        opts.include_lamb_shift = ls;
        for (double t : {0.25, 1.0, 4.0}) {
            const auto tab = rates::rate_table(t, 1.0, kFig3, {});
            const Mat4 E = matrix_exp(cumulant::build_superoperator(comp, tab, opts));
            const Mat4 C = choi_of(E);
            Eigen::SelfAdjointEigenSolver<Mat4> es(0.5 * (C + C.adjoint()));
            CHECK(es.eigenvalues().minCoeff() >= -1e-10);
        }
    }
}

TEST_CASE("output Bloch norm stays inside the ball at benchmark parameters") {
    cumulant::SystemParams comp;
    comp.f1 = 1.0;
    comp.f3 = 1.0;
    const std::vector<double> times{0.2, 0.9, 2.5, 7.0, 18.0};
    const auto traj = cumulant::evolve(comp, kFig3, {}, plus_x(), times);
    for (const auto& st : traj.states) {
        Eigen::Vector3d mu;
        mu << (st(0, 0) - st(1, 1)).real(), 2.0 * st(1, 0).real(), 2.0 * st(1, 0).imag();
        CHECK(mu.norm() <= 1.0 + 1e-10);
    }
}
