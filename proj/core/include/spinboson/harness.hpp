// harness.hpp — scenario catalog, parameter sweeps, and CSV/SVG emission
// reproducing the benchmark figures at desk scale.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spinboson/bath.hpp"
#include "spinboson/cumulant.hpp"
#include "spinboson/heom.hpp"
#include "spinboson/metrics.hpp"
#include "spinboson/refsolvers.hpp"
#include "spinboson/trajectory.hpp"

namespace spinboson::harness {

using Mat2 = Eigen::Matrix2cd;

struct Scenario {
    std::string name{"custom"};
    double omega0{1.0};
    double f1{1.0}, f2{0.0}, f3{0.0};
    // bath as ratios; resolved via resolved_bath()
    double omega0_over_T{2.0};
    double lambda_over_gamma{0.01};
    double gamma_over_omega0{5.0};
    std::vector<std::string> solvers{"cumulant", "heom", "bloch-redfield", "davies"};
    bool lamb_shift{false};
    cumulant::Picture picture{cumulant::Picture::Schroedinger};
    Mat2 rho0 = (Mat2() << 0.5, 0.5, 0.5, 0.5).finished();
    bool nm_pair{false};  // run the non-Markovianity witness on (ρ₀, ρ₀*)
    double t_max{40.0};
    int n_times{800};
    refsolvers::HeomConfig heom{};
    bool heom_self_check{false};
    int workers{1};
    unsigned seed{12345};
};

bath::BathParams resolved_bath(const Scenario& s);
cumulant::SystemParams resolved_system(const Scenario& s);
std::vector<double> time_grid(const Scenario& s);

const std::vector<Scenario>& presets();
Scenario preset(const std::string& name);  // throws std::invalid_argument for unknown names

struct NmEntry {
    std::string solver;
    metrics::NmWitness witness;
    std::vector<double> trace_distance;
};

struct ScenarioResult {
    Scenario scenario;
    std::vector<std::pair<std::string, Trajectory>> trajectories;
    std::vector<std::pair<std::string, metrics::ComparisonResult>> versus_heom;
    std::vector<NmEntry> nm;
    std::map<std::string, std::string> errors;  // solver → message; run continues
    double heom_refinement{-1.0};               // depth+2 deviation when self-check ran
};

ScenarioResult run_scenario(const Scenario& s);

struct SweepSpec {
    std::string name{"fig4"};
    double f1{1.0}, f2{0.0}, f3{0.0};
    double gamma_over_omega0{1.0};
    std::vector<double> lambda_over_gamma;  // log grid
    std::vector<double> omega0_over_T;      // linear grid
    std::vector<std::string> solvers{"cumulant", "bloch-redfield", "davies"};
    refsolvers::HeomConfig heom{};
    Mat2 rho0 = (Mat2() << 0.5, 0.5, 0.5, 0.5).finished();
    double t_max{40.0};
    int n_times{400};
    int workers{1};
};

SweepSpec sweep_preset(const std::string& name);

struct SweepResult {
    SweepSpec spec;
    // min_fid[solver] has size nx*ny, index i*ny + j for (lambda[i], temp[j])
    std::map<std::string, std::vector<double>> min_fid;
    std::vector<std::string> point_errors;  // empty string when the point succeeded
    struct Segment {
        std::string map;  // "cum-br" or "cum-davies"
        double x1, y1, x2, y2;
    };
    std::vector<Segment> contour;
};

SweepResult run_sweep(const SweepSpec& spec);

// ---- emission ----------------------------------------------------------

void write_scenario_csv(const ScenarioResult& r, const std::string& out_dir);
void write_scenario_svg(const ScenarioResult& r, const std::string& out_dir);
void write_sweep_csv(const SweepResult& r, const std::string& out_dir);
void write_sweep_svg(const SweepResult& r, const std::string& out_dir);

// ---- config files ------------------------------------------------------

// flat "key = value" format, '#' comments; see docs/config.example
Scenario scenario_from_config(const std::string& path);
SweepSpec sweep_from_config(const std::string& path);

int default_workers();  // SPINBOSON_WORKERS fallback, else 1

}  // namespace spinboson::harness
