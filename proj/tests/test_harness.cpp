#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "spinboson/harness.hpp"

using namespace spinboson;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

harness::Scenario fast_scenario() {
    harness::Scenario s = harness::preset("fig3-sx");
    s.solvers = {"cumulant", "bloch-redfield", "davies"};
    s.n_times = 40;
    s.t_max = 8.0;
    return s;
}

}  // namespace

TEST_CASE("presets resolve to the parameter sets exactly") {
    const auto fig2 = harness::preset("fig2-dephasing");
    CHECK(fig2.f1 == 0.0);
    CHECK(fig2.f3 == 1.0);
    CHECK(fig2.omega0_over_T == 4.0);
    CHECK(fig2.lambda_over_gamma == 0.25);
    CHECK(fig2.gamma_over_omega0 == 5.0);
    const auto bp = harness::resolved_bath(fig2);
    CHECK(bp.gamma == 5.0);
    CHECK(bp.lambda == doctest::Approx(1.25));
    CHECK(bp.beta == doctest::Approx(4.0));

    const auto nm = harness::preset("appC-nm");
    CHECK(nm.f1 == 5.0);
    CHECK(nm.f3 == 1.0);
    CHECK(nm.omega0_over_T == 1.0);
    CHECK(nm.nm_pair);
    CHECK(nm.rho0(0, 1) == std::complex<double>{0.0, 0.5});

    CHECK_THROWS(harness::preset("no-such-preset"));
}

TEST_CASE("config parsing") {
    const fs::path dir = fs::temp_directory_path() / "sb_cfg_test";
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "scenario.cfg");
        out << "# comment\n"
            << "preset = fig3-sx\n"
            << "lamb_shift = on\n"
            << "n_times = 123\n"
            << "solvers = cumulant, davies\n"
            << "rho0 = minus-y\n";
    }
    const auto s = harness::scenario_from_config((dir / "scenario.cfg").string());
    CHECK(s.name == "fig3-sx");
    CHECK(s.lamb_shift);
    CHECK(s.n_times == 123);
    CHECK(s.solvers.size() == 2);
    CHECK(s.rho0(0, 1) == std::complex<double>{0.0, 0.5});
    {
        std::ofstream out(dir / "bad.cfg");
        out << "unknown_key = 3\n";
    }
    CHECK_THROWS(harness::scenario_from_config((dir / "bad.cfg").string()));

    {
        std::ofstream out(dir / "sweep.cfg");
        out << "preset = smoke\nlambda_over_gamma_min = 0.01\nlambda_over_gamma_max = 0.1\n"
            << "lambda_over_gamma_n = 2\nomega0_over_T_min = 1\nomega0_over_T_max = 2\n"
            << "omega0_over_T_n = 2\n";
    }
    const auto sw = harness::sweep_from_config((dir / "sweep.cfg").string());
    CHECK(sw.lambda_over_gamma.size() == 2);
    CHECK(sw.omega0_over_T.size() == 2);
}

TEST_CASE("run_scenario emits the contracted CSV files with exact headers") {
    const auto s = fast_scenario();
    const auto result = harness::run_scenario(s);
    CHECK(result.errors.empty());
    CHECK(result.trajectories.size() == 3);

    const fs::path dir = fs::temp_directory_path() / "sb_csv_test";
    fs::remove_all(dir);
    harness::write_scenario_csv(result, dir.string());
    for (const char* f : {"population.csv", "coherence.csv", "fidelity.csv",
                          "trajectory_cumulant.csv", "summary.txt"})
        CHECK(fs::exists(dir / f));
    const std::string traj = slurp(dir / "trajectory_cumulant.csv");
    CHECK(traj.rfind("t, re_rho00, re_rho01, im_rho01, re_rho11\n", 0) == 0);

    // determinism: a rerun produces byte-identical output
    const fs::path dir2 = fs::temp_directory_path() / "sb_csv_test2";
    fs::remove_all(dir2);
    harness::write_scenario_csv(harness::run_scenario(s), dir2.string());
    CHECK(slurp(dir / "trajectory_cumulant.csv") == slurp(dir2 / "trajectory_cumulant.csv"));
    CHECK(slurp(dir / "population.csv") == slurp(dir2 / "population.csv"));
}

TEST_CASE("solver failures are recorded and the run continues") {
    harness::Scenario s = fast_scenario();
    s.solvers = {"cumulant", "exact-dephasing"};  // exact-dephasing needs f1 = f2 = 0
    const auto result = harness::run_scenario(s);
    CHECK(result.trajectories.size() == 1);
    CHECK(result.errors.count("exact-dephasing") == 1);
}

TEST_CASE("smoke sweep completes with all points populated") {
    harness::SweepSpec spec = harness::sweep_preset("smoke");
    spec.heom.depth = 4;
    spec.heom.n_matsubara = 6;
    spec.n_times = 120;
    spec.t_max = 12.0;
    spec.workers = 2;
    const auto r = harness::run_sweep(spec);
    for (const auto& e : r.point_errors) CHECK(e.empty());
    for (const auto& [id, grid] : r.min_fid) {
        for (double v : grid) {
            CHECK(v > 0.0);
            CHECK(v <= 1.0 + 1e-9);
        }
    }
    // worker-count independence
    harness::SweepSpec spec1 = spec;
    spec1.workers = 1;
    const auto r1 = harness::run_sweep(spec1);
    for (const auto& [id, grid] : r.min_fid) {
        const auto& other = r1.min_fid.at(id);
        for (std::size_t i = 0; i < grid.size(); ++i) CHECK(grid[i] == other[i]);
    }
    const fs::path dir = fs::temp_directory_path() / "sb_sweep_test";
    fs::remove_all(dir);
    harness::write_sweep_csv(r, dir.string());
    CHECK(fs::exists(dir / "minfid.csv"));
    CHECK(fs::exists(dir / "contour.csv"));
    const std::string mf = slurp(dir / "minfid.csv");
    CHECK(mf.rfind("lambda_over_gamma, omega0_over_T, solver, min_fidelity\n", 0) == 0);
}
