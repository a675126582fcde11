#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "spinboson/heom.hpp"
#include "spinboson/metrics.hpp"
#include "spinboson/refsolvers.hpp"

using namespace spinboson;
using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;

namespace {
const bath::BathParams kFig2{1.25, 5.0, 4.0};
Mat2 plus_x() { return (Mat2() << 0.5, 0.5, 0.5, 0.5).finished(); }
}  // namespace

TEST_CASE("hierarchy size") {
    CHECK(refsolvers::heom_hierarchy_size(9, 8) == 24310);
    CHECK(refsolvers::heom_hierarchy_size(8, 8) == 12870);
    CHECK(refsolvers::heom_hierarchy_size(1, 3) == 4);
}

TEST_CASE("vanishing coupling reproduces free evolution") {
    cumulant::SystemParams sys;
    sys.f1 = 1.0;
    bath::BathParams weak{1e-6 * 5.0 * 0.01, 5.0, 2.0};  // lambda -> 1e-6 gamma scale
    refsolvers::HeomConfig cfg;
    cfg.n_matsubara = 4;
    cfg.depth = 3;
    const std::vector<double> times{0.0, 0.7, 1.9};
    const auto traj = refsolvers::heom_solve(sys, weak, cfg, plus_x(), times);
    for (std::size_t i = 0; i < times.size(); ++i) {
        const cplx expect = 0.5 * std::polar(1.0, -times[i]);
        CHECK(std::abs(traj.states[i](0, 1) - expect) < 1e-4);
        CHECK(traj.states[i](0, 0).real() == doctest::Approx(0.5).epsilon(1e-4));
    }
}

TEST_CASE("fitted decomposition reproduces the analytic dephasing solution") {
    cumulant::SystemParams dep;
    dep.f1 = 0.0;
    dep.f3 = 1.0;
    refsolvers::HeomConfig cfg;
    cfg.decomposition = bath::Decomposition::Fitted;
    cfg.n_matsubara = 8;
    cfg.depth = 6;
    std::vector<double> times;
    for (int i = 0; i <= 40; ++i) times.push_back(6.0 * i / 40.0);
    const auto traj = refsolvers::heom_solve(dep, kFig2, cfg, plus_x(), times);
    double worst = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double g = refsolvers::exact_dephasing(kFig2, times[i]);
        worst = std::max(worst, std::abs(std::abs(traj.states[i](0, 1)) - 0.5 * std::exp(-g)));
    }
    CHECK(worst < 2e-4);
}

TEST_CASE("Matsubara terminator rescues the truncated low-temperature tail") {
    cumulant::SystemParams dep;
    dep.f1 = 0.0;
    dep.f3 = 1.0;
    refsolvers::HeomConfig raw;
    raw.n_matsubara = 8;
    raw.depth = 5;
    refsolvers::HeomConfig term = raw;
    term.terminator = true;
    std::vector<double> times{0.0, 1.0, 2.0};
    const auto a = refsolvers::heom_solve(dep, kFig2, raw, plus_x(), times);
    const auto b = refsolvers::heom_solve(dep, kFig2, term, plus_x(), times);
    const double exact = 0.5 * std::exp(-refsolvers::exact_dephasing(kFig2, 2.0));
    const double err_raw = std::abs(std::abs(a.states[2](0, 1)) - exact);
    const double err_term = std::abs(std::abs(b.states[2](0, 1)) - exact);
    CHECK(err_term < err_raw);  // the bare 8-term Matsubara tail is badly off here
    CHECK(err_term < 0.05);
}

TEST_CASE("depth refinement is small for weak coupling") {
    cumulant::SystemParams sys;
    sys.f1 = 1.0;
    bath::BathParams weak{0.05, 5.0, 2.0};
    refsolvers::HeomConfig cfg;
    cfg.decomposition = bath::Decomposition::Fitted;
    cfg.n_matsubara = 8;
    cfg.depth = 4;
    std::vector<double> times;
    for (int i = 0; i <= 20; ++i) times.push_back(10.0 * i / 20.0);
    const double dev = refsolvers::heom_depth_refinement(sys, weak, cfg, plus_x(), times, 2);
    CHECK(dev < 1e-6);
}

TEST_CASE("oversized hierarchy is rejected with advice") {
    cumulant::SystemParams sys;
    sys.f1 = 1.0;
    refsolvers::HeomConfig cfg;
    cfg.n_matsubara = 24;
    cfg.depth = 12;
    CHECK_THROWS_AS(refsolvers::heom_solve(sys, kFig2, cfg, plus_x(), {0.0, 1.0}),
                    std::invalid_argument);
}
