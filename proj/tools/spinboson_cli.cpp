// spinboson — batch CLI for the non-equilibrium spin-boson benchmark suite.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>

#include "spinboson/bath.hpp"
#include "spinboson/bloch.hpp"
#include "spinboson/chargeq.hpp"
#include "spinboson/cumulant.hpp"
#include "spinboson/harness.hpp"
#include "spinboson/heom.hpp"
#include "spinboson/metrics.hpp"
#include "spinboson/refsolvers.hpp"

namespace {

using namespace spinboson;
using Mat2 = Eigen::Matrix2cd;

struct CommonFlags {
    std::string out{"./out"};
    std::string format{"csv"};
    int workers{0};
    std::string lamb_shift;
    std::string picture;
    int heom_depth{0};
    int heom_nk{0};
    unsigned seed{12345};
};

void apply_flags(harness::Scenario& s, const CommonFlags& f) {
    if (f.workers > 0) s.workers = f.workers;
    else s.workers = harness::default_workers();
    if (!f.lamb_shift.empty()) s.lamb_shift = f.lamb_shift == "on";
    if (!f.picture.empty())
        s.picture = f.picture == "interaction" ? cumulant::Picture::Interaction
                                               : cumulant::Picture::Schroedinger;
    if (f.heom_depth > 0) s.heom.depth = f.heom_depth;
    if (f.heom_nk > 0) s.heom.n_matsubara = f.heom_nk;
    s.seed = f.seed;
}

int cmd_run(const std::string& target, const CommonFlags& flags) {
    harness::Scenario s;
    if (std::filesystem::exists(target) && target.find('.') != std::string::npos)
        s = harness::scenario_from_config(target);
    else
        s = harness::preset(target);
    apply_flags(s, flags);
    std::printf("running scenario '%s' (workers=%d)\n", s.name.c_str(), s.workers);
    const auto result = harness::run_scenario(s);
    if (flags.format == "csv" || flags.format == "both")
        harness::write_scenario_csv(result, flags.out);
    if (flags.format == "svg" || flags.format == "both")
        harness::write_scenario_svg(result, flags.out);
    for (const auto& [id, msg] : result.errors)
        std::fprintf(stderr, "solver %s failed: %s\n", id.c_str(), msg.c_str());
    std::printf("wrote %s\n", flags.out.c_str());
    return result.errors.empty() ? 0 : 2;
}

int cmd_sweep(const std::string& target, const CommonFlags& flags) {
    harness::SweepSpec spec;
    if (std::filesystem::exists(target) && target.find('.') != std::string::npos)
        spec = harness::sweep_from_config(target);
    else
        spec = harness::sweep_preset(target);
    spec.workers = flags.workers > 0 ? flags.workers : harness::default_workers();
    if (flags.heom_depth > 0) spec.heom.depth = flags.heom_depth;
    if (flags.heom_nk > 0) spec.heom.n_matsubara = flags.heom_nk;
    std::printf("running sweep '%s' (%zux%zu grid, workers=%d)\n", spec.name.c_str(),
                spec.lambda_over_gamma.size(), spec.omega0_over_T.size(), spec.workers);
    const auto result = harness::run_sweep(spec);
    if (flags.format == "csv" || flags.format == "both")
        harness::write_sweep_csv(result, flags.out);
    if (flags.format == "svg" || flags.format == "both")
        harness::write_sweep_svg(result, flags.out);
    int failures = 0;
    for (const auto& e : result.point_errors)
        if (!e.empty()) ++failures;
    if (failures > 0) std::fprintf(stderr, "%d grid points recorded errors\n", failures);
    std::printf("wrote %s\n", flags.out.c_str());
    return 0;
}

int cmd_list_presets() {
    for (const auto& s : harness::presets()) {
        std::printf("%-16s f=(%g,%g,%g)  omega0/T=%g  lambda/gamma=%g  gamma/omega0=%g%s\n",
                    s.name.c_str(), s.f1, s.f2, s.f3, s.omega0_over_T, s.lambda_over_gamma,
                    s.gamma_over_omega0, s.nm_pair ? "  [nm pair]" : "");
    }
    std::printf("%-16s sweep: 12x12 (lambda/gamma, omega0/T), gamma=omega0, f=(1,0,0)\n", "fig4");
    std::printf("%-16s sweep: 12x12 composite f=(1,0,1)\n", "fig7-composite");
    std::printf("%-16s sweep: 3x3 smoke grid\n", "smoke");
    return 0;
}

bool check(bool ok, const char* what, int& failures) {
    std::printf("  [%s] %s\n", ok ? "ok" : "FAIL", what);
    if (!ok) ++failures;
    return ok;
}

int cmd_validate(unsigned seed) {
    int failures = 0;
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);

    {  // SU(N) orthonormality
        bool ok = true;
        for (int n = 2; n <= 4; ++n) {
            const auto b = bloch::sun_basis(n);
            ok = ok && static_cast<int>(b.ops.size()) == n * n - 1;
            for (std::size_t i = 0; i < b.ops.size(); ++i) {
                ok = ok && std::abs(b.ops[i].trace()) < 1e-14;
                for (std::size_t j = 0; j < b.ops.size(); ++j) {
                    const auto tr = (b.ops[i] * b.ops[j]).trace();
                    ok = ok && std::abs(tr - (i == j ? 2.0 : 0.0)) < 1e-13;
                }
            }
        }
        check(ok, "SU(N) basis orthonormality (N=2..4)", failures);
    }
    {  // phi1 identities
        bool ok = true;
        for (int rep = 0; rep < 50; ++rep) {
            Eigen::Matrix3d M;
            for (int i = 0; i < 9; ++i) M(i / 3, i % 3) = 3.0 * uni(rng);
            Eigen::Matrix3d E, P;
            bloch::exp_and_phi1(M, E, P);
            ok = ok && ((E - Eigen::Matrix3d::Identity()) - M * P).cwiseAbs().maxCoeff() < 1e-12;
            ok = ok && ((E - Eigen::Matrix3d::Identity()) - P * M).cwiseAbs().maxCoeff() < 1e-12;
        }
        check(ok, "phi1 identities (e^M - I = M phi1 = phi1 M)", failures);
    }
    {  // fidelity and trace-distance axioms
        bool ok = true;
        auto rand_state = [&] {
            Eigen::Vector3d mu(uni(rng), uni(rng), uni(rng));
            if (mu.norm() > 1.0) mu /= mu.norm() * 1.01;
            return bloch::from_bloch_zxy(mu);
        };
        for (int rep = 0; rep < 300; ++rep) {
            const Mat2 a = rand_state(), b = rand_state();
            const double f = metrics::fidelity(a, b);
            const double t = metrics::trace_distance(a, b);
            ok = ok && f >= 0.0 && f <= 1.0 + 1e-12 && t >= 0.0 && t <= 1.0 + 1e-12;
            ok = ok && std::abs(f - metrics::fidelity(b, a)) < 1e-12;
            ok = ok && (1.0 - std::sqrt(f) <= t + 1e-10) && (t <= std::sqrt(1.0 - f) + 1e-10);
        }
        check(ok, "fidelity/trace-distance axioms + Fuchs-van de Graaff", failures);
    }
    {  // generator algebra on a synthetic table
        rates::RateTable tab;
        tab.t = 1.0;
        tab.has_xi = true;
        for (int i = 0; i < 3; ++i)
            for (int j = i; j < 3; ++j) {
                const std::complex<double> g{uni(rng), i == j ? 0.0 : uni(rng)};
                tab.gamma[i * 3 + j] = g;
                tab.gamma[j * 3 + i] = std::conj(g);
                const double x = uni(rng);
                tab.xi[i * 3 + j] = x;
                tab.xi[j * 3 + i] = x;
            }
        cumulant::SystemParams sys;
        sys.f1 = 0.7;
        sys.f2 = -0.4;
        sys.f3 = 1.3;
        cumulant::CumulantOptions opts;
        opts.include_lamb_shift = true;
        const auto K = cumulant::build_superoperator(sys, tab, opts);
        const Eigen::RowVector4cd idr{1, 0, 0, 1};
        bool ok = (idr * K).cwiseAbs().maxCoeff() < 1e-12;
        const auto proj = cumulant::project_generator(K);
        const auto cf = cumulant::closed_form_generator(sys, tab, opts);
        ok = ok && (proj.M - cf.M).cwiseAbs().maxCoeff() < 1e-12;
        ok = ok && (proj.r - cf.r).cwiseAbs().maxCoeff() < 1e-12;
        check(ok, "trace preservation + closed-form/projected agreement", failures);
    }
    {  // rate table symmetry and PSD at one parameter point
        bath::BathParams bp{0.05, 5.0, 2.0};
        const auto tab = rates::rate_table(1.3, 1.0, bp, {});
        Eigen::Matrix3cd G;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) G(i, j) = tab.gamma[i * 3 + j];
        bool ok = (G - G.adjoint()).cwiseAbs().maxCoeff() < 1e-14;
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(G);
        ok = ok && es.eigenvalues().minCoeff() > -1e-10 * G.trace().real();
        ok = ok && std::abs(tab.x(rates::FreqLabel::Zero, rates::FreqLabel::Minus) -
                            tab.x(rates::FreqLabel::Minus, rates::FreqLabel::Zero)) < 1e-15;
        check(ok, "rate table hermiticity, PSD, xi symmetry", failures);
    }
    {  // detailed balance from the expansion kernels on a coarse grid
        bath::BathParams bp{0.05, 5.0, 2.0};
        bool ok = true;
        for (double w : {0.5, 1.0, 2.0}) {
            const double up = 2.0 * refsolvers::half_fourier_kernel(w, -1.0, bp, 8).real();
            const double dn = 2.0 * refsolvers::half_fourier_kernel(-w, -1.0, bp, 8).real();
            ok = ok && std::abs(up / dn - std::exp(bp.beta * w)) < 1e-6 * std::exp(bp.beta * w);
        }
        check(ok, "detailed balance e^{beta omega} from the expansion kernels", failures);
    }

    std::printf(failures == 0 ? "validate: all invariant suites passed\n"
                              : "validate: %d suite(s) FAILED\n",
                failures);
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"non-equilibrium spin-boson benchmark suite"};
    app.require_subcommand(1);
    CommonFlags flags;

    std::string run_target, sweep_target;
    auto* run = app.add_subcommand("run", "run a scenario preset or config file");
    run->add_option("scenario", run_target, "preset name or config path")->required();
    auto* sweep = app.add_subcommand("sweep", "run a (lambda/gamma, omega0/T) sweep");
    sweep->add_option("spec", sweep_target, "sweep preset name or config path")->required();
    auto* list = app.add_subcommand("list-presets", "list scenario and sweep presets");
    auto* validate = app.add_subcommand("validate", "run the fast invariant suites");

    for (auto* cmd : {run, sweep}) {
        cmd->add_option("--out", flags.out, "output directory");
        cmd->add_option("--format", flags.format, "csv|svg|both")
            ->check(CLI::IsMember({"csv", "svg", "both"}));
        cmd->add_option("--workers", flags.workers, "worker threads (default SPINBOSON_WORKERS)");
        cmd->add_option("--heom-depth", flags.heom_depth, "hierarchy depth override");
        cmd->add_option("--heom-nk", flags.heom_nk, "expansion order override");
        cmd->add_option("--seed", flags.seed, "seed for randomized checks");
    }
    run->add_option("--lamb-shift", flags.lamb_shift, "on|off")
        ->check(CLI::IsMember({"on", "off"}));
    run->add_option("--picture", flags.picture, "schrodinger|interaction")
        ->check(CLI::IsMember({"schrodinger", "interaction"}));
    validate->add_option("--seed", flags.seed, "seed for randomized checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_target, flags);
        if (sweep->parsed()) return cmd_sweep(sweep_target, flags);
        if (list->parsed()) return cmd_list_presets();
        if (validate->parsed()) return cmd_validate(flags.seed);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
