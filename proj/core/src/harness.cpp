#include "spinboson/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "spinboson/diag.hpp"

namespace spinboson::harness {

namespace fs = std::filesystem;
using cplx = std::complex<double>;

bath::BathParams resolved_bath(const Scenario& s) {
    bath::BathParams p;
    p.gamma = s.gamma_over_omega0 * s.omega0;
    p.lambda = s.lambda_over_gamma * p.gamma;
    p.beta = s.omega0_over_T / s.omega0;
    return p;
}

cumulant::SystemParams resolved_system(const Scenario& s) {
    cumulant::SystemParams sys;
    sys.omega0 = s.omega0;
    sys.f1 = s.f1;
    sys.f2 = s.f2;
    sys.f3 = s.f3;
    return sys;
}

std::vector<double> time_grid(const Scenario& s) {
    std::vector<double> t(s.n_times);
    for (int i = 0; i < s.n_times; ++i) t[i] = s.t_max * i / double(s.n_times - 1);
    return t;
}

namespace {

Mat2 state_plus_x() { return (Mat2() << 0.5, 0.5, 0.5, 0.5).finished(); }
Mat2 state_minus_y() { return (Mat2() << 0.5, cplx{0.0, 0.5}, cplx{0.0, -0.5}, 0.5).finished(); }

std::vector<Scenario> build_presets() {
    std::vector<Scenario> out;

    Scenario fig2;
    fig2.name = "fig2-dephasing";
    fig2.f1 = 0.0;
    fig2.f2 = 0.0;
    fig2.f3 = 1.0;
    fig2.omega0_over_T = 4.0;
    fig2.lambda_over_gamma = 0.25;
    fig2.gamma_over_omega0 = 5.0;
    fig2.solvers = {"cumulant", "exact-dephasing", "heom", "bloch-redfield", "davies",
                    "redfield-td"};
    fig2.heom.decomposition = bath::Decomposition::Fitted;
    fig2.heom.n_matsubara = 8;
    fig2.heom.depth = 8;
    out.push_back(fig2);

    Scenario fig3;
    fig3.name = "fig3-sx";
    fig3.f1 = 1.0;
    fig3.omega0_over_T = 2.0;
    fig3.lambda_over_gamma = 0.01;
    fig3.gamma_over_omega0 = 5.0;
    fig3.heom.decomposition = bath::Decomposition::Fitted;
    out.push_back(fig3);

    Scenario fig5;
    fig5.name = "fig5-composite";
    fig5.f1 = 1.0;
    fig5.f3 = 1.0;
    fig5.omega0_over_T = 2.0;
    fig5.lambda_over_gamma = 0.01;
    fig5.gamma_over_omega0 = 5.0;
    fig5.heom.decomposition = bath::Decomposition::Fitted;
    out.push_back(fig5);

    Scenario figd;
    figd.name = "figD-redfield";
    figd.f1 = 1.0;
    figd.omega0_over_T = 2.0;
    figd.lambda_over_gamma = 0.1;
    figd.gamma_over_omega0 = 5.0;
    figd.solvers = {"cumulant", "redfield-td", "bloch-redfield", "heom"};
    figd.heom.decomposition = bath::Decomposition::Fitted;
    out.push_back(figd);

    Scenario nm;
    nm.name = "appC-nm";
    nm.f1 = 5.0;
    nm.f3 = 1.0;
    nm.omega0_over_T = 1.0;
    nm.lambda_over_gamma = 0.01;
    nm.gamma_over_omega0 = 5.0;
    nm.rho0 = state_minus_y();
    nm.nm_pair = true;
    nm.n_times = 2000;
    nm.solvers = {"cumulant", "bloch-redfield", "davies", "heom"};
    nm.heom.decomposition = bath::Decomposition::Fitted;
    out.push_back(nm);

    return out;
}

Trajectory exact_dephasing_trajectory(const Scenario& s, const std::vector<double>& times) {
    if (s.f1 != 0.0 || s.f2 != 0.0)
        throw std::invalid_argument("exact-dephasing requires f1 = f2 = 0");
    const auto bp = resolved_bath(s);
    Trajectory traj;
    traj.times = times;
    traj.solver_id = "exact-dephasing";
    traj.states.reserve(times.size());
    const Mat2 rho0 = s.rho0;
    for (double t : times) {
        const double g = refsolvers::exact_dephasing(bp, t) * s.f3 * s.f3;
        cplx c01 = rho0(0, 1) * std::exp(-g);
        if (s.picture == cumulant::Picture::Schroedinger)
            c01 *= std::polar(1.0, -s.omega0 * t);
        Mat2 r = rho0;
        r(0, 1) = c01;
        r(1, 0) = std::conj(c01);
        traj.states.push_back(r);
    }
    traj.options_summary = "analytic dephasing solution";
    return traj;
}

Trajectory run_one_solver(const std::string& id, const Scenario& s,
                          const std::vector<double>& times, const Mat2& rho0) {
    const auto sys = resolved_system(s);
    const auto bp = resolved_bath(s);
    if (id == "cumulant") {
        cumulant::CumulantOptions opts;
        opts.include_lamb_shift = s.lamb_shift;
        opts.picture = s.picture;
        opts.workers = s.workers;
        return cumulant::evolve(sys, bp, opts, rho0, times);
    }
    if (id == "davies") {
        const auto L = refsolvers::davies_gkls(sys, bp);
        auto traj = refsolvers::ode_integrate([L](double) { return L; }, rho0, times, {}, "davies");
        traj.options_summary = "Davies-GKLS, no Lamb shift";
        return traj;
    }
    if (id == "bloch-redfield") {
        const auto L = refsolvers::bloch_redfield(sys, bp, s.heom.n_matsubara, s.lamb_shift);
        auto traj = refsolvers::ode_integrate([L](double) { return L; }, rho0, times, {},
                                              "bloch-redfield");
        traj.options_summary = std::string("asymptotic kernels, lamb_shift=") +
                               (s.lamb_shift ? "on" : "off");
        return traj;
    }
    if (id == "redfield-td") return refsolvers::redfield_td(sys, bp, rho0, times);
    if (id == "heom") {
        refsolvers::HeomConfig cfg = s.heom;
        if (cfg.workers == 0 && s.workers > 1) cfg.workers = s.workers;
        return refsolvers::heom_solve(sys, bp, cfg, rho0, times);
    }
    if (id == "exact-dephasing") {
        Scenario tmp = s;
        tmp.rho0 = rho0;
        return exact_dephasing_trajectory(tmp, times);
    }
    throw std::invalid_argument("unknown solver '" + id + "'");
}

}  // namespace

const std::vector<Scenario>& presets() {
    static const std::vector<Scenario> p = build_presets();
    return p;
}

Scenario preset(const std::string& name) {
    for (const auto& s : presets())
        if (s.name == name) return s;
    throw std::invalid_argument("unknown preset '" + name + "'");
}

ScenarioResult run_scenario(const Scenario& s) {
    ScenarioResult result;
    result.scenario = s;
    const auto times = time_grid(s);

    for (const auto& id : s.solvers) {
        try {
            result.trajectories.emplace_back(id, run_one_solver(id, s, times, s.rho0));
        } catch (const std::exception& e) {
            result.errors[id] = e.what();
            diag("run_scenario(" + s.name + "): solver " + id + " failed: " + e.what());
        }
    }

    const Trajectory* heom = nullptr;
    for (const auto& [id, traj] : result.trajectories)
        if (id == "heom") heom = &traj;
    if (heom) {
        for (const auto& [id, traj] : result.trajectories) {
            if (id == "heom") continue;
            result.versus_heom.emplace_back(id, metrics::compare(traj, *heom));
        }
        if (s.heom_self_check) {
            result.heom_refinement = refsolvers::heom_depth_refinement(
                resolved_system(s), resolved_bath(s), s.heom, s.rho0, times);
            if (result.heom_refinement > 1e-4)
                diag("run_scenario(" + s.name + "): HEOM depth refinement changed the trajectory "
                     "by " + std::to_string(result.heom_refinement) + "; increase depth");
        }
    }

    if (s.nm_pair) {
        const Mat2 rho_b = s.rho0.conjugate();
        for (const auto& id : s.solvers) {
            if (result.errors.count(id) || id == "exact-dephasing") continue;
            try {
                auto runner = [&](const Mat2& r0) { return run_one_solver(id, s, times, r0); };
                NmEntry entry;
                entry.solver = id;
                entry.witness = metrics::nm_witness(runner, s.rho0, rho_b, times);
                const Trajectory ta = runner(s.rho0);
                const Trajectory tb = runner(rho_b);
                entry.trace_distance.resize(times.size());
                for (std::size_t i = 0; i < times.size(); ++i)
                    entry.trace_distance[i] = metrics::trace_distance(ta.states[i], tb.states[i]);
                result.nm.push_back(std::move(entry));
            } catch (const std::exception& e) {
                result.errors[id + ":nm"] = e.what();
            }
        }
    }
    return result;
}

SweepSpec sweep_preset(const std::string& name) {
    SweepSpec spec;
    auto logspace = [](double lo, double hi, int n) {
        std::vector<double> v(n);
        for (int i = 0; i < n; ++i)
            v[i] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / double(n - 1));
        return v;
    };
    auto linspace = [](double lo, double hi, int n) {
        std::vector<double> v(n);
        for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / double(n - 1);
        return v;
    };
    spec.lambda_over_gamma = logspace(1e-3, 1.0, 12);
    spec.omega0_over_T = linspace(0.2, 6.0, 12);
    spec.heom.decomposition = bath::Decomposition::Fitted;
    spec.heom.n_matsubara = 8;
    spec.heom.depth = 6;
    if (name == "fig4") {
        spec.name = "fig4";
        spec.f1 = 1.0;
        return spec;
    }
    if (name == "fig7-composite") {
        spec.name = "fig7-composite";
        spec.f1 = 1.0;
        spec.f3 = 1.0;
        return spec;
    }
    if (name == "smoke") {
        spec.name = "smoke";
        spec.f1 = 1.0;
        spec.lambda_over_gamma = logspace(1e-2, 0.1, 3);
        spec.omega0_over_T = linspace(1.0, 3.0, 3);
        spec.heom.depth = 5;
        spec.n_times = 200;
        return spec;
    }
    throw std::invalid_argument("unknown sweep preset '" + name + "'");
}

SweepResult run_sweep(const SweepSpec& spec) {
    SweepResult result;
    result.spec = spec;
    const int nx = static_cast<int>(spec.lambda_over_gamma.size());
    const int ny = static_cast<int>(spec.omega0_over_T.size());
    if (nx < 2 || ny < 2) throw std::invalid_argument("run_sweep: grid resolution >= 2 per axis");
    for (const auto& id : spec.solvers) result.min_fid[id].assign(nx * ny, -1.0);
    result.point_errors.assign(nx * ny, "");

    std::atomic<int> next{0};
    auto work = [&]() {
        for (;;) {
            const int idx = next.fetch_add(1);
            if (idx >= nx * ny) return;
            const int i = idx / ny, j = idx % ny;
            Scenario s;
            s.name = spec.name;
            s.f1 = spec.f1;
            s.f2 = spec.f2;
            s.f3 = spec.f3;
            s.gamma_over_omega0 = spec.gamma_over_omega0;
            s.lambda_over_gamma = spec.lambda_over_gamma[i];
            s.omega0_over_T = spec.omega0_over_T[j];
            s.rho0 = spec.rho0;
            s.t_max = spec.t_max;
            s.n_times = spec.n_times;
            s.heom = spec.heom;
            s.solvers = spec.solvers;
            s.solvers.push_back("heom");
            try {
                const auto r = run_scenario(s);
                for (const auto& [id, cmp] : r.versus_heom)
                    if (result.min_fid.count(id)) result.min_fid[id][idx] = cmp.min_fidelity;
                for (const auto& [id, msg] : r.errors)
                    result.point_errors[idx] += id + ": " + msg + "; ";
            } catch (const std::exception& e) {
                result.point_errors[idx] = e.what();
            }
        }
    };
    const int workers = std::max(1, spec.workers);
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }

    // zero contours of the difference maps by marching squares on the index grid
    auto add_contour = [&](const std::string& tag, const std::vector<double>& diff) {
        auto xat = [&](double fi) {
            const int i0 = std::clamp(static_cast<int>(std::floor(fi)), 0, nx - 2);
            const double f = fi - i0;
            return spec.lambda_over_gamma[i0] *
                   std::pow(spec.lambda_over_gamma[i0 + 1] / spec.lambda_over_gamma[i0], f);
        };
        auto yat = [&](double fj) {
            const int j0 = std::clamp(static_cast<int>(std::floor(fj)), 0, ny - 2);
            const double f = fj - j0;
            return spec.omega0_over_T[j0] + f * (spec.omega0_over_T[j0 + 1] - spec.omega0_over_T[j0]);
        };
        auto v = [&](int i, int j) { return diff[i * ny + j]; };
        for (int i = 0; i + 1 < nx; ++i) {
            for (int j = 0; j + 1 < ny; ++j) {
                // collect sign-change points on the four cell edges
                std::vector<std::pair<double, double>> pts;
                auto edge = [&](int i1, int j1, int i2, int j2) {
                    const double a = v(i1, j1), b = v(i2, j2);
                    if (a == 0.0 && b == 0.0) return;
                    if ((a <= 0.0 && b > 0.0) || (a > 0.0 && b <= 0.0)) {
                        const double f = a / (a - b);
                        pts.emplace_back(i1 + f * (i2 - i1), j1 + f * (j2 - j1));
                    }
                };
                edge(i, j, i + 1, j);
                edge(i, j, i, j + 1);
                edge(i + 1, j, i + 1, j + 1);
                edge(i, j + 1, i + 1, j + 1);
                if (pts.size() == 2)
                    result.contour.push_back({tag, xat(pts[0].first), yat(pts[0].second),
                                              xat(pts[1].first), yat(pts[1].second)});
            }
        }
    };
    const bool have_cum = result.min_fid.count("cumulant") > 0;
    for (const auto& other : {std::string("bloch-redfield"), std::string("davies")}) {
        if (!have_cum || !result.min_fid.count(other)) continue;
        std::vector<double> diff(nx * ny, 0.0);
        for (int k = 0; k < nx * ny; ++k)
            diff[k] = result.min_fid.at("cumulant")[k] - result.min_fid.at(other)[k];
        add_contour(other == "bloch-redfield" ? "cum-br" : "cum-davies", diff);
    }
    return result;
}

// ---------------------------------------------------------------------------
// emission
// ---------------------------------------------------------------------------

namespace {

std::FILE* open_out(const std::string& dir, const std::string& name) {
    fs::create_directories(dir);
    const std::string path = dir + "/" + name;
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + path);
    return f;
}

std::string git_hash() {
    std::FILE* p = ::popen("git rev-parse --short HEAD 2>/dev/null", "r");
    if (!p) return "unknown";
    char buf[64] = {0};
    const bool ok = std::fgets(buf, sizeof buf, p) != nullptr;
    ::pclose(p);
    if (!ok) return "unknown";
    std::string s(buf);
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
    return s.empty() ? "unknown" : s;
}

}  // namespace

void write_scenario_csv(const ScenarioResult& r, const std::string& out_dir) {
    for (const auto& [id, traj] : r.trajectories) {
        std::FILE* f = open_out(out_dir, "trajectory_" + id + ".csv");
        std::fprintf(f, "t, re_rho00, re_rho01, im_rho01, re_rho11\n");
        for (std::size_t i = 0; i < traj.times.size(); ++i) {
            const auto& m = traj.states[i];
            std::fprintf(f, "%.12g,%.12g,%.12g,%.12g,%.12g\n", traj.times[i], m(0, 0).real(),
                         m(0, 1).real(), m(0, 1).imag(), m(1, 1).real());
        }
        std::fclose(f);
    }
    for (const auto& [id, cmp] : r.versus_heom) {
        std::FILE* f = open_out(out_dir, "metrics_" + id + ".csv");
        std::fprintf(f, "t, fidelity, trace_distance\n");
        for (std::size_t i = 0; i < cmp.times.size(); ++i)
            std::fprintf(f, "%.12g,%.12g,%.12g\n", cmp.times[i], cmp.fidelity[i],
                         cmp.trace_distance[i]);
        std::fclose(f);
    }
    {
        std::FILE* f = open_out(out_dir, "population.csv");
        std::fprintf(f, "t, solver, population\n");
        for (const auto& [id, traj] : r.trajectories)
            for (std::size_t i = 0; i < traj.times.size(); ++i)
                std::fprintf(f, "%.12g,%s,%.12g\n", traj.times[i], id.c_str(),
                             traj.states[i](0, 0).real());
        std::fclose(f);
    }
    {
        std::FILE* f = open_out(out_dir, "coherence.csv");
        std::fprintf(f, "t, solver, abs_coherence\n");
        for (const auto& [id, traj] : r.trajectories)
            for (std::size_t i = 0; i < traj.times.size(); ++i)
                std::fprintf(f, "%.12g,%s,%.12g\n", traj.times[i], id.c_str(),
                             std::abs(traj.states[i](0, 1)));
        std::fclose(f);
    }
    {
        std::FILE* f = open_out(out_dir, "fidelity.csv");
        std::fprintf(f, "t, solver, fidelity\n");
        for (const auto& [id, cmp] : r.versus_heom)
            for (std::size_t i = 0; i < cmp.times.size(); ++i)
                std::fprintf(f, "%.12g,%s,%.12g\n", cmp.times[i], id.c_str(), cmp.fidelity[i]);
        std::fclose(f);
    }
    for (const auto& nm : r.nm) {
        std::FILE* f = open_out(out_dir, "nm_" + nm.solver + ".csv");
        std::fprintf(f, "t, trace_distance, derivative\n");
        for (std::size_t i = 0; i < nm.witness.times.size(); ++i)
            std::fprintf(f, "%.12g,%.12g,%.12g\n", nm.witness.times[i], nm.trace_distance[i + 1],
                         nm.witness.derivative[i]);
        std::fclose(f);
    }
    if (!r.nm.empty()) {
        std::FILE* f = open_out(out_dir, "nm_summary.csv");
        std::fprintf(f, "solver, non_markovian, max_derivative, integrated_positive\n");
        for (const auto& nm : r.nm)
            std::fprintf(f, "%s,%d,%.12g,%.12g\n", nm.solver.c_str(),
                         nm.witness.non_markovian ? 1 : 0, nm.witness.max_derivative,
                         nm.witness.integrated_positive);
        std::fclose(f);
    }
    {
        std::FILE* f = open_out(out_dir, "summary.txt");
        std::fprintf(f, "preset: %s\n", r.scenario.name.c_str());
        for (const auto& [id, traj] : r.trajectories)
            std::fprintf(f, "%s: %s\n", id.c_str(), traj.options_summary.c_str());
        if (r.heom_refinement >= 0.0)
            std::fprintf(f, "heom depth+2 refinement: %.3e\n", r.heom_refinement);
        for (const auto& [id, msg] : r.errors)
            std::fprintf(f, "error %s: %s\n", id.c_str(), msg.c_str());
        std::fclose(f);
    }
}

namespace {

struct SvgCanvas {
    std::ostringstream body;
    double width{640}, height{420}, ml{70}, mr{20}, mt{20}, mb{50};
    double x0{0}, x1{1}, y0{0}, y1{1};
    bool logx{false};

    double tx(double x) const {
        const double u = logx ? (std::log(x) - std::log(x0)) / (std::log(x1) - std::log(x0))
                              : (x - x0) / (x1 - x0);
        return ml + u * (width - ml - mr);
    }
    double ty(double y) const {
        const double u = (y - y0) / (y1 - y0);
        return height - mb - u * (height - mt - mb);
    }
    void polyline(const std::vector<double>& xs, const std::vector<double>& ys,
                  const std::string& color) {
        body << "<polyline fill='none' stroke='" << color << "' stroke-width='1.2' points='";
        for (std::size_t i = 0; i < xs.size(); ++i) body << tx(xs[i]) << "," << ty(ys[i]) << " ";
        body << "'/>\n";
    }
    void text(double x, double y, const std::string& s, const std::string& extra = "") {
        body << "<text x='" << x << "' y='" << y << "' font-size='11' " << extra << ">" << s
             << "</text>\n";
    }
    std::string finish(const std::string& meta) const {
        std::ostringstream out;
        out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
            << "'>\n<!-- " << meta << " -->\n<rect width='100%' height='100%' fill='white'/>\n"
            << body.str() << "</svg>\n";
        return out.str();
    }
};

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

void write_scenario_svg(const ScenarioResult& r, const std::string& out_dir) {
    const std::string meta = "preset=" + r.scenario.name + " git=" + git_hash() +
                             " tolerances: rates 1e-9/1e-8";
    auto write_lines = [&](const std::string& fname, const std::string& ylabel, auto getter,
                           bool metric_files) {
        SvgCanvas c;
        c.x0 = 0.0;
        c.x1 = std::max(r.scenario.t_max, 1e-12);
        double lo = 1e300, hi = -1e300;
        std::vector<std::pair<std::string, std::vector<double>>> series;
        if (!metric_files) {
            for (const auto& [id, traj] : r.trajectories) {
                std::vector<double> ys(traj.times.size());
                for (std::size_t i = 0; i < ys.size(); ++i) ys[i] = getter(traj.states[i]);
                for (double y : ys) lo = std::min(lo, y), hi = std::max(hi, y);
                series.emplace_back(id, std::move(ys));
            }
        } else {
            for (const auto& [id, cmp] : r.versus_heom) {
                for (double y : cmp.fidelity) lo = std::min(lo, y), hi = std::max(hi, y);
                series.emplace_back(id, cmp.fidelity);
            }
        }
        if (series.empty()) return;
        if (!(hi > lo)) hi = lo + 1.0;
        c.y0 = lo - 0.05 * (hi - lo);
        c.y1 = hi + 0.05 * (hi - lo);
        const auto times = time_grid(r.scenario);
        int ci = 0;
        for (auto& [id, ys] : series) {
            c.polyline(times, ys, kColors[ci % 6]);
            c.text(c.width - c.mr - 140, c.mt + 14.0 * (ci + 1), id,
                   "fill='" + std::string(kColors[ci % 6]) + "'");
            ++ci;
        }
        c.text(c.width / 2, c.height - 12, "t");
        c.text(8, c.mt + 8, ylabel);
        std::FILE* f = open_out(out_dir, fname);
        std::fputs(c.finish(meta).c_str(), f);
        std::fclose(f);
    };
    write_lines("population.svg", "re rho00",
                [](const Mat2& m) { return m(0, 0).real(); }, false);
    write_lines("coherence.svg", "|rho01|",
                [](const Mat2& m) { return std::abs(m(0, 1)); }, false);
    if (!r.versus_heom.empty())
        write_lines("fidelity.svg", "fidelity vs HEOM", [](const Mat2&) { return 0.0; }, true);
}

void write_sweep_csv(const SweepResult& r, const std::string& out_dir) {
    const int nx = static_cast<int>(r.spec.lambda_over_gamma.size());
    const int ny = static_cast<int>(r.spec.omega0_over_T.size());
    {
        std::FILE* f = open_out(out_dir, "minfid.csv");
        std::fprintf(f, "lambda_over_gamma, omega0_over_T, solver, min_fidelity\n");
        for (const auto& [id, grid] : r.min_fid)
            for (int i = 0; i < nx; ++i)
                for (int j = 0; j < ny; ++j)
                    std::fprintf(f, "%.12g,%.12g,%s,%.12g\n", r.spec.lambda_over_gamma[i],
                                 r.spec.omega0_over_T[j], id.c_str(), grid[i * ny + j]);
        std::fclose(f);
    }
    {
        std::FILE* f = open_out(out_dir, "contour.csv");
        std::fprintf(f, "map, x1, y1, x2, y2\n");
        for (const auto& seg : r.contour)
            std::fprintf(f, "%s,%.12g,%.12g,%.12g,%.12g\n", seg.map.c_str(), seg.x1, seg.y1,
                         seg.x2, seg.y2);
        std::fclose(f);
    }
    auto write_diff = [&](const std::string& other, const std::string& fname) {
        if (!r.min_fid.count("cumulant") || !r.min_fid.count(other)) return;
        std::FILE* f = open_out(out_dir, fname);
        std::fprintf(f, "lambda_over_gamma, omega0_over_T, difference\n");
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < ny; ++j)
                std::fprintf(f, "%.12g,%.12g,%.12g\n", r.spec.lambda_over_gamma[i],
                             r.spec.omega0_over_T[j],
                             r.min_fid.at("cumulant")[i * ny + j] - r.min_fid.at(other)[i * ny + j]);
        std::fclose(f);
    };
    write_diff("bloch-redfield", "diff_cum_minus_br.csv");
    write_diff("davies", "diff_cum_minus_davies.csv");
    {
        std::FILE* f = open_out(out_dir, "sweep_errors.csv");
        std::fprintf(f, "lambda_over_gamma, omega0_over_T, error\n");
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < ny; ++j)
                if (!r.point_errors[i * ny + j].empty())
                    std::fprintf(f, "%.12g,%.12g,%s\n", r.spec.lambda_over_gamma[i],
                                 r.spec.omega0_over_T[j], r.point_errors[i * ny + j].c_str());
        std::fclose(f);
    }
}

void write_sweep_svg(const SweepResult& r, const std::string& out_dir) {
    const int nx = static_cast<int>(r.spec.lambda_over_gamma.size());
    const int ny = static_cast<int>(r.spec.omega0_over_T.size());
    const std::string meta = "sweep=" + r.spec.name + " git=" + git_hash();
    for (const auto& [id, grid] : r.min_fid) {
        SvgCanvas c;
        c.logx = true;
        c.x0 = r.spec.lambda_over_gamma.front();
        c.x1 = r.spec.lambda_over_gamma.back();
        c.y0 = r.spec.omega0_over_T.front();
        c.y1 = r.spec.omega0_over_T.back();
        double lo = 1.0, hi = 0.0;
        for (double v : grid)
            if (v >= 0.0) lo = std::min(lo, v), hi = std::max(hi, v);
        if (!(hi > lo)) hi = lo + 1e-9;
        for (int i = 0; i < nx; ++i) {
            for (int j = 0; j < ny; ++j) {
                const double v = grid[i * ny + j];
                if (v < 0.0) continue;
                const double u = (v - lo) / (hi - lo);
                const int red = static_cast<int>(255 * (1.0 - u));
                const int green = static_cast<int>(200 * u + 30);
                const double x = c.tx(r.spec.lambda_over_gamma[i]);
                const double y = c.ty(r.spec.omega0_over_T[j]);
                const double w = (c.width - c.ml - c.mr) / nx;
                const double h = (c.height - c.mt - c.mb) / ny;
                c.body << "<rect x='" << x - w / 2 << "' y='" << y - h / 2 << "' width='" << w
                       << "' height='" << h << "' fill='rgb(" << red << "," << green
                       << ",90)'/>\n";
            }
        }
        for (const auto& seg : r.contour)
            c.body << "<line x1='" << c.tx(seg.x1) << "' y1='" << c.ty(seg.y1) << "' x2='"
                   << c.tx(seg.x2) << "' y2='" << c.ty(seg.y2)
                   << "' stroke='black' stroke-width='1.5'/>\n";
        c.text(c.width / 2, c.height - 12, "lambda/gamma (log)");
        c.text(8, c.mt + 8, "omega0/T");
        c.text(c.width / 2, c.mt + 8, "min fidelity: " + id);
        std::FILE* f = open_out(out_dir, "minfid_" + id + ".svg");
        std::fputs(c.finish(meta).c_str(), f);
        std::fclose(f);
    }
}

// ---------------------------------------------------------------------------
// config files
// ---------------------------------------------------------------------------

namespace {

std::map<std::string, std::string> parse_kv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (!key.empty()) kv[key] = val;
    }
    return kv;
}

bool parse_flag(const std::string& v) {
    if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
    if (v == "off" || v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("expected on/off, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto a = item.find_first_not_of(" \t");
        const auto b = item.find_last_not_of(" \t");
        if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
    }
    return out;
}

Mat2 parse_rho0(const std::string& v) {
    if (v == "plus-x") return state_plus_x();
    if (v == "minus-y") return state_minus_y();
    if (v == "plus-y") return state_minus_y().conjugate();
    if (v == "mixed") return Mat2::Identity() * 0.5;
    const auto parts = split_list(v);
    if (parts.size() != 3)
        throw std::invalid_argument("rho0: expected plus-x|minus-y|plus-y|mixed or re00,re01,im01");
    const double re00 = std::stod(parts[0]);
    const cplx c01{std::stod(parts[1]), std::stod(parts[2])};
    Mat2 r;
    r << re00, c01, std::conj(c01), 1.0 - re00;
    return r;
}

bath::Decomposition parse_decomposition(const std::string& v) {
    if (v == "matsubara") return bath::Decomposition::Matsubara;
    if (v == "pade") return bath::Decomposition::Pade;
    if (v == "fitted") return bath::Decomposition::Fitted;
    throw std::invalid_argument("unknown decomposition '" + v + "'");
}

}  // namespace

Scenario scenario_from_config(const std::string& path) {
    const auto kv = parse_kv(path);
    Scenario s;
    if (kv.count("preset")) s = preset(kv.at("preset"));
    for (const auto& [k, v] : kv) {
        if (k == "preset") continue;
        else if (k == "name") s.name = v;
        else if (k == "omega0") s.omega0 = std::stod(v);
        else if (k == "f1") s.f1 = std::stod(v);
        else if (k == "f2") s.f2 = std::stod(v);
        else if (k == "f3") s.f3 = std::stod(v);
        else if (k == "omega0_over_T") s.omega0_over_T = std::stod(v);
        else if (k == "lambda_over_gamma") s.lambda_over_gamma = std::stod(v);
        else if (k == "gamma_over_omega0") s.gamma_over_omega0 = std::stod(v);
        else if (k == "solvers") s.solvers = split_list(v);
        else if (k == "lamb_shift") s.lamb_shift = parse_flag(v);
        else if (k == "picture")
            s.picture = v == "interaction" ? cumulant::Picture::Interaction
                                           : cumulant::Picture::Schroedinger;
        else if (k == "rho0") s.rho0 = parse_rho0(v);
        else if (k == "nm_pair") s.nm_pair = parse_flag(v);
        else if (k == "t_max") s.t_max = std::stod(v);
        else if (k == "n_times") s.n_times = std::stoi(v);
        else if (k == "heom_nk") s.heom.n_matsubara = std::stoi(v);
        else if (k == "heom_depth") s.heom.depth = std::stoi(v);
        else if (k == "heom_decomposition") s.heom.decomposition = parse_decomposition(v);
        else if (k == "heom_terminator") s.heom.terminator = parse_flag(v);
        else if (k == "heom_self_check") s.heom_self_check = parse_flag(v);
        else if (k == "workers") s.workers = std::stoi(v);
        else if (k == "seed") s.seed = static_cast<unsigned>(std::stoul(v));
        else throw std::invalid_argument("unknown scenario config key '" + k + "'");
    }
    return s;
}

SweepSpec sweep_from_config(const std::string& path) {
    const auto kv = parse_kv(path);
    SweepSpec s;
    if (kv.count("preset")) s = sweep_preset(kv.at("preset"));
    auto logspace = [](double lo, double hi, int n) {
        std::vector<double> v(n);
        for (int i = 0; i < n; ++i)
            v[i] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / double(n - 1));
        return v;
    };
    auto linspace = [](double lo, double hi, int n) {
        std::vector<double> v(n);
        for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / double(n - 1);
        return v;
    };
    double llo = 1e-3, lhi = 1.0;
    int ln = 12;
    double tlo = 0.2, thi = 6.0;
    int tn = 12;
    bool lambda_set = false, temp_set = false;
    for (const auto& [k, v] : kv) {
        if (k == "preset") continue;
        else if (k == "name") s.name = v;
        else if (k == "f1") s.f1 = std::stod(v);
        else if (k == "f2") s.f2 = std::stod(v);
        else if (k == "f3") s.f3 = std::stod(v);
        else if (k == "gamma_over_omega0") s.gamma_over_omega0 = std::stod(v);
        else if (k == "lambda_over_gamma_min") llo = std::stod(v), lambda_set = true;
        else if (k == "lambda_over_gamma_max") lhi = std::stod(v), lambda_set = true;
        else if (k == "lambda_over_gamma_n") ln = std::stoi(v), lambda_set = true;
        else if (k == "omega0_over_T_min") tlo = std::stod(v), temp_set = true;
        else if (k == "omega0_over_T_max") thi = std::stod(v), temp_set = true;
        else if (k == "omega0_over_T_n") tn = std::stoi(v), temp_set = true;
        else if (k == "solvers") s.solvers = split_list(v);
        else if (k == "rho0") s.rho0 = parse_rho0(v);
        else if (k == "t_max") s.t_max = std::stod(v);
        else if (k == "n_times") s.n_times = std::stoi(v);
        else if (k == "heom_nk") s.heom.n_matsubara = std::stoi(v);
        else if (k == "heom_depth") s.heom.depth = std::stoi(v);
        else if (k == "heom_decomposition") s.heom.decomposition = parse_decomposition(v);
        else if (k == "heom_terminator") s.heom.terminator = parse_flag(v);
        else if (k == "workers") s.workers = std::stoi(v);
        else throw std::invalid_argument("unknown sweep config key '" + k + "'");
    }
    if (lambda_set) s.lambda_over_gamma = logspace(llo, lhi, ln);
    if (temp_set) s.omega0_over_T = linspace(tlo, thi, tn);
    return s;
}

int default_workers() {
    if (const char* env = std::getenv("SPINBOSON_WORKERS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 1;
}

}  // namespace spinboson::harness
