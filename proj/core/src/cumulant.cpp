#include "spinboson/cumulant.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "spinboson/diag.hpp"

namespace spinboson::cumulant {

using std::numbers::pi;
using cplx = std::complex<double>;
using rates::FreqLabel;

namespace {

const Mat2 kSigmaX = (Mat2() << 0, 1, 1, 0).finished();
const Mat2 kSigmaY = (Mat2() << 0, cplx{0, -1}, cplx{0, 1}, 0).finished();
const Mat2 kSigmaZ = (Mat2() << 1, 0, 0, -1).finished();
const Mat2 kSigmaP = (Mat2() << 0, 1, 0, 0).finished();
const Mat2 kSigmaM = (Mat2() << 0, 0, 1, 0).finished();
const Mat2 kId2 = Mat2::Identity();

Mat4 kron2(const Mat2& a, const Mat2& b) {
    Mat4 out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return out;
}

Eigen::Vector4cd vec(const Mat2& m) {
    Eigen::Vector4cd v;
    v << m(0, 0), m(1, 0), m(0, 1), m(1, 1);
    return v;
}

Mat2 unvec(const Eigen::Vector4cd& v) {
    Mat2 m;
    m << v(0), v(2), v(1), v(3);
    return m;
}

Mat2 apply_super(const Mat4& K, const Mat2& rho) { return unvec(K * vec(rho)); }

// closed-form (M, r) from raw Γ/ξ entries; shared by the table-driven path
// and the asymptotic steady-state path
struct TableView {
    cplx gmm, gpp, gzz, gmp, gmz, gzp;
    double xpp = 0, xmm = 0, xzm = 0, xzp = 0;
};

bloch::AffineGenerator closed_form_from(const SystemParams& sys, const TableView& v,
                                        bool lamb_shift) {
    const cplx f = sys.f();
    const double af2 = std::norm(f);
    const cplx gz_minus = sys.f3 * f * (v.gmz - v.gzp);
    const cplx gz_plus = sys.f3 * f * (v.gmz + v.gzp);
    const cplx w = f * f * v.gmp;
    const double gsum = (v.gmm + v.gpp).real();
    const double gzz = v.gzz.real();
    const double xi_d = lamb_shift ? (v.xpp - v.xmm) : 0.0;
    const double xi_z = lamb_shift ? sys.f3 * (v.xzp - v.xzm) : 0.0;

    bloch::AffineGenerator g;
    g.r << af2 * (v.gpp - v.gmm).real() / 2.0, gz_minus.real(), -gz_minus.imag();
    g.M << -af2 * gsum, gz_plus.real() + 2.0 * sys.f2 * xi_z, -gz_plus.imag() - 2.0 * sys.f1 * xi_z,
        gz_plus.real() - 2.0 * sys.f2 * xi_z,
        w.real() - 2.0 * sys.f3 * sys.f3 * gzz - af2 * gsum / 2.0, -af2 * xi_d - w.imag(),
        -gz_plus.imag() + 2.0 * sys.f1 * xi_z, af2 * xi_d - w.imag(),
        -w.real() - 2.0 * sys.f3 * sys.f3 * gzz - af2 * gsum / 2.0;
    return g;
}

}  // namespace

void SystemParams::validate() const {
    if (omega0 <= 0.0) throw std::invalid_argument("SystemParams: omega0 must be > 0");
    if (f1 == 0.0 && f2 == 0.0 && f3 == 0.0)
        throw std::invalid_argument("SystemParams: at least one coupling component must be nonzero");
}

const Mat2& JumpOperators::at(FreqLabel l) const {
    switch (l) {
        case FreqLabel::Minus: return a_minus;
        case FreqLabel::Plus: return a_plus;
        case FreqLabel::Zero: return a_zero;
    }
    return a_zero;
}

JumpOperators jump_operators(const SystemParams& sys) {
    JumpOperators j;
    j.a_minus = std::conj(sys.f()) * kSigmaM;
    j.a_plus = sys.f() * kSigmaP;
    j.a_zero = sys.f3 * kSigmaZ;
    return j;
}

Mat2 lamb_shift_hamiltonian(const SystemParams& sys, const rates::RateTable& table) {
    const double af2 = std::norm(sys.f());
    const double xi_d = table.x(FreqLabel::Plus, FreqLabel::Plus) -
                        table.x(FreqLabel::Minus, FreqLabel::Minus);
    const double xi_c = table.x(FreqLabel::Zero, FreqLabel::Minus) -
                        table.x(FreqLabel::Zero, FreqLabel::Plus);
    return 0.5 * af2 * xi_d * kSigmaZ + sys.f3 * xi_c * (sys.f1 * kSigmaX + sys.f2 * kSigmaY);
}

Mat4 build_superoperator(const SystemParams& sys, const rates::RateTable& table,
                         const CumulantOptions& opts) {
    const JumpOperators jop = jump_operators(sys);
    const FreqLabel L[3] = {FreqLabel::Minus, FreqLabel::Plus, FreqLabel::Zero};
    Mat4 K = Mat4::Zero();
    for (FreqLabel a : L) {
        const Mat2 Ad = jop.at(a).adjoint();
        for (FreqLabel b : L) {
            const cplx g = table.g(a, b);
            const Mat2 AdA = Ad * jop.at(b);
            K += g * (kron2(jop.at(a).conjugate(), jop.at(b)) -
                      0.5 * (kron2(kId2, AdA) + kron2(AdA.transpose(), kId2)));
        }
    }
    if (opts.include_lamb_shift) {
        if (!table.has_xi)
            throw std::invalid_argument("build_superoperator: Lamb shift requested but the rate "
                                        "table was built without xi entries");
        const Mat2 lam = lamb_shift_hamiltonian(sys, table);
        K += cplx{0.0, -1.0} * (kron2(kId2, lam) - kron2(lam.transpose(), kId2));
    }
    return K;
}

bloch::AffineGenerator project_generator(const Mat4& K) {
    const Eigen::RowVector4cd id_row{1.0, 0.0, 0.0, 1.0};
    const double tp = (id_row * K).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, K.cwiseAbs().maxCoeff());
    if (tp > 1e-9 * scale)
        throw std::invalid_argument("project_generator: superoperator is not trace-preserving");

    const Mat2 sig[3] = {kSigmaZ, kSigmaX, kSigmaY};
    bloch::AffineGenerator g;
    const Mat2 KI = apply_super(K, Mat2(kId2 / 2.0));
    for (int i = 0; i < 3; ++i) g.r(i) = 0.5 * (sig[i] * KI).trace().real();
    double imag_residue = 0.0;
    for (int j = 0; j < 3; ++j) {
        const Mat2 Ks = apply_super(K, sig[j]);
        for (int i = 0; i < 3; ++i) {
            const cplx e = 0.5 * (sig[i] * Ks).trace();
            g.M(i, j) = e.real();
            imag_residue = std::max(imag_residue, std::abs(e.imag()));
        }
    }
    if (imag_residue > 1e-9 * scale)
        diag("project_generator: generator does not preserve hermiticity (residue " +
             std::to_string(imag_residue) + ")");
    return g;
}

bloch::AffineGenerator closed_form_generator(const SystemParams& sys,
                                             const rates::RateTable& table,
                                             const CumulantOptions& opts) {
    TableView v;
    v.gmm = table.g(FreqLabel::Minus, FreqLabel::Minus);
    v.gpp = table.g(FreqLabel::Plus, FreqLabel::Plus);
    v.gzz = table.g(FreqLabel::Zero, FreqLabel::Zero);
    v.gmp = table.g(FreqLabel::Minus, FreqLabel::Plus);
    v.gmz = table.g(FreqLabel::Minus, FreqLabel::Zero);
    v.gzp = table.g(FreqLabel::Zero, FreqLabel::Plus);
    const bool ls = opts.include_lamb_shift && table.has_xi;
    if (ls) {
        v.xpp = table.x(FreqLabel::Plus, FreqLabel::Plus);
        v.xmm = table.x(FreqLabel::Minus, FreqLabel::Minus);
        v.xzm = table.x(FreqLabel::Zero, FreqLabel::Minus);
        v.xzp = table.x(FreqLabel::Zero, FreqLabel::Plus);
    }
    auto g = closed_form_from(sys, v, ls);
    g.t = table.t;
    return g;
}

namespace {

Mat2 schroedinger_frame(const Mat2& rho_int, double omega0, double t) {
    const cplx u = std::polar(1.0, -0.5 * omega0 * t);
    Mat2 U = Mat2::Zero();
    U(0, 0) = u;
    U(1, 1) = std::conj(u);
    return U * rho_int * U.adjoint();
}

Mat2 clamp_state(const Eigen::Vector3d& mu, double t) {
    const double n = mu.norm();
    Eigen::Vector3d m = mu;
    if (n > 1.0) {
        if (n > 1.0 + 1e-10)
            diag("evolve: Bloch norm " + std::to_string(n) + " exceeds 1 beyond tolerance at t=" +
                 std::to_string(t) + "; clamping");
        else
            diag("evolve: clamping marginal Bloch norm " + std::to_string(n) + " at t=" +
                 std::to_string(t));
        m /= n;
    }
    return bloch::from_bloch_zxy(m);
}

void compare_generators(const bloch::AffineGenerator& proj, const bloch::AffineGenerator& cf,
                        double t) {
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const double d = std::abs(proj.M(i, j) - cf.M(i, j));
            if (d > 1e-10 * std::max(1.0, std::abs(proj.M(i, j))))
                diag("closed-form generator disagrees at M(" + std::to_string(i) + "," +
                     std::to_string(j) + "), |delta|=" + std::to_string(d) + ", t=" +
                     std::to_string(t) + " (projected wins)");
        }
        const double d = std::abs(proj.r(i) - cf.r(i));
        if (d > 1e-10 * std::max(1.0, std::abs(proj.r(i))))
            diag("closed-form generator disagrees at r(" + std::to_string(i) + "), |delta|=" +
                 std::to_string(d) + ", t=" + std::to_string(t) + " (projected wins)");
    }
}

}  // namespace

Trajectory evolve(const SystemParams& sys, const bath::BathParams& bath,
                  const CumulantOptions& opts, const Mat2& rho0,
                  const std::vector<double>& times) {
    sys.validate();
    bath.validate();
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < 0.0) throw std::invalid_argument("evolve: times must be >= 0");
        if (i > 0 && times[i] < times[i - 1])
            throw std::invalid_argument("evolve: times must be sorted");
    }
    const Eigen::Vector3d mu0 = bloch::to_bloch_zxy(rho0);

    rates::RateOptions ropt = opts.rate_opts;
    ropt.with_xi = opts.include_lamb_shift;
    rates::RateTableCache cache(sys.omega0, bath, ropt);

    Trajectory traj;
    traj.times = times;
    traj.states.resize(times.size());
    traj.solver_id = "cumulant";
    std::ostringstream os;
    os << "lamb_shift=" << (opts.include_lamb_shift ? "on" : "off") << " picture="
       << (opts.picture == Picture::Schroedinger ? "schrodinger" : "interaction");
    traj.options_summary = os.str();

    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const double t = times[i];
            if (t == 0.0) {
                traj.states[i] = rho0;
                continue;
            }
            const rates::RateTable table = cache.at(t);
            const Mat4 K = build_superoperator(sys, table, opts);
            const bloch::AffineGenerator gen = project_generator(K);
            if (opts.cross_check_closed_form)
                compare_generators(gen, closed_form_generator(sys, table, opts), t);
            const Eigen::Vector3d mu = bloch::exp_affine(gen.M, gen.r, mu0);
            Mat2 rho = clamp_state(mu, t);
            if (opts.picture == Picture::Schroedinger)
                rho = schroedinger_frame(rho, sys.omega0, t);
            traj.states[i] = rho;
        }
    };
    const int workers = std::max(1, opts.workers);
    if (workers == 1 || times.size() < 2) {
        work(0, times.size());
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (times.size() + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const std::size_t b = w * chunk;
            const std::size_t e = std::min(times.size(), b + chunk);
            if (b < e) pool.emplace_back(work, b, e);
        }
        for (auto& th : pool) th.join();
    }
    return traj;
}

Mat2 steady_state(const SystemParams& sys, const bath::BathParams& bath) {
    sys.validate();
    bath.validate();
    if (sys.f1 == 0.0 && sys.f2 == 0.0)
        throw std::invalid_argument(
            "steady_state: pure dephasing has no unique steady state from the rate asymptotics; "
            "the dephasing solution keeps the initial populations");
    const double j0 = bath::spectral_density(sys.omega0, bath);
    const double n0 = bath::bose_einstein(sys.omega0, bath.beta);
    TableView v;
    v.gmm = 2.0 * pi * j0 * (n0 + 1.0);                       // emission weight
    v.gpp = 2.0 * pi * j0 * n0;                               // absorption weight
    v.gzz = 4.0 * pi * bath.lambda / (bath.beta * bath.gamma);  // ω → 0 limit of 2πJ(n+1)
    v.gmp = v.gmz = v.gzp = 0.0;
    const auto g = closed_form_from(sys, v, false);
    const Eigen::Vector3d mu = -2.0 * g.M.inverse() * g.r;
    return bloch::from_bloch_zxy(mu);
}

std::complex<double> dephasing_coherence(double t, double f3, const rates::RateTable& table) {
    (void)t;
    const double gzz = table.g(FreqLabel::Zero, FreqLabel::Zero).real();
    return std::exp(cplx{-2.0 * f3 * f3 * gzz, 0.0});
}

SbObservables standard_sb_observables(double t, const rates::RateTable& table,
                                      const SbObservables& x0) {
    (void)t;
    const double gsum = (table.g(FreqLabel::Minus, FreqLabel::Minus) +
                         table.g(FreqLabel::Plus, FreqLabel::Plus))
                            .real();
    const double gdiff = (table.g(FreqLabel::Plus, FreqLabel::Plus) -
                          table.g(FreqLabel::Minus, FreqLabel::Minus))
                             .real();
    const cplx w = table.g(FreqLabel::Minus, FreqLabel::Plus);

    SbObservables out;
    const double em = std::exp(-gsum);
    // (e^{−Γ} − 1)/Γ → −1 + Γ/2 for small Γ
    const double ratio = std::abs(gsum) < 1e-12 ? -1.0 + 0.5 * gsum : std::expm1(-gsum) / gsum;
    out.sz = em * x0.sz + ratio * gdiff;

    const double aw = std::abs(w);
    if (aw < 1e-300) {
        out.sp = std::exp(-0.5 * gsum) * x0.sp;
        out.sm = std::exp(-0.5 * gsum) * x0.sm;
        return out;
    }
    const double ch = std::cosh(aw), sh = std::sinh(aw);
    const double decay = std::exp(-0.5 * gsum);
    out.sp = decay * (ch * x0.sp + std::conj(w) / aw * sh * x0.sm);
    out.sm = decay * (ch * x0.sm + w / aw * sh * x0.sp);
    return out;
}

}  // namespace spinboson::cumulant
