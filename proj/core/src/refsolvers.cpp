#include "spinboson/refsolvers.hpp"

#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "spinboson/diag.hpp"
#include "spinboson/quad.hpp"

namespace spinboson::refsolvers {

using std::numbers::pi;
using cplx = std::complex<double>;
using rates::FreqLabel;

std::string to_string(GeneratorKind k) {
    switch (k) {
        case GeneratorKind::DaviesGKLS: return "davies";
        case GeneratorKind::BlochRedfield: return "bloch-redfield";
        case GeneratorKind::RedfieldTD: return "redfield-td";
        case GeneratorKind::HEOM: return "heom";
        case GeneratorKind::ExactDephasing: return "exact-dephasing";
    }
    return "?";
}

namespace {

const Eigen::Matrix2cd kSigmaZ = (Eigen::Matrix2cd() << 1, 0, 0, -1).finished();
const Eigen::Matrix2cd kId2 = Eigen::Matrix2cd::Identity();

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

Mat4 dissipator(const Mat2& a_op, const Mat2& b_op) {
    // A_b ρ A_a† − ½{A_a† A_b, ρ} on vec(ρ)
    const Mat2 ad = a_op.adjoint();
    const Mat2 ada = ad * b_op;
    return kron2(a_op.conjugate(), b_op) -
           0.5 * (kron2(kId2, ada) + kron2(ada.transpose(), kId2));
}

Mat4 hamiltonian_part(const Mat2& h) {
    return cplx{0.0, -1.0} * (kron2(kId2, h) - kron2(h.transpose(), kId2));
}

}  // namespace

Trajectory ode_integrate(const std::function<Mat4(double)>& generator, const Mat2& rho0,
                         const std::vector<double>& times, const OdeConfig& ode,
                         const std::string& solver_id) {
    if (times.empty()) throw std::invalid_argument("ode_integrate: empty time grid");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < 0.0) throw std::invalid_argument("ode_integrate: times must be >= 0");
        if (i > 0 && times[i] < times[i - 1])
            throw std::invalid_argument("ode_integrate: times must be sorted");
    }

    // Dormand–Prince 5(4)
    static const double c[7] = {0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
    static const double A[7][6] = {
        {},
        {1.0 / 5},
        {3.0 / 40, 9.0 / 40},
        {44.0 / 45, -56.0 / 15, 32.0 / 9},
        {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
        {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
        {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
    };
    static const double b5[7] = {35.0 / 384,     0.0,  500.0 / 1113, 125.0 / 192,
                                 -2187.0 / 6784, 11.0 / 84, 0.0};
    static const double b4[7] = {5179.0 / 57600,  0.0,           7571.0 / 16695, 393.0 / 640,
                                 -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

    Trajectory traj;
    traj.times = times;
    traj.states.resize(times.size());
    traj.solver_id = solver_id;

    Eigen::Vector4cd y = vec(rho0);
    double t = 0.0;
    double h = ode.max_step > 0.0 ? ode.max_step : 1e-3;
    double herm_drift = 0.0;
    bool drift_reported = false;

    auto rhs = [&](double tt, const Eigen::Vector4cd& yy) -> Eigen::Vector4cd {
        return generator(tt) * yy;
    };

    for (std::size_t idx = 0; idx < times.size(); ++idx) {
        const double target = times[idx];
        while (t < target) {
            double step = std::min(h, target - t);
            if (ode.max_step > 0.0) step = std::min(step, ode.max_step);
            Eigen::Vector4cd k[7];
            k[0] = rhs(t, y);
            for (int s = 1; s < 7; ++s) {
                Eigen::Vector4cd acc = y;
                for (int j = 0; j < s; ++j) acc += step * A[s][j] * k[j];
                k[s] = rhs(t + c[s] * step, acc);
            }
            Eigen::Vector4cd y5 = y, y4 = y;
            for (int s = 0; s < 7; ++s) {
                y5 += step * b5[s] * k[s];
                y4 += step * b4[s] * k[s];
            }
            const double sc = ode.abs_tol + ode.rel_tol * std::max(y.cwiseAbs().maxCoeff(),
                                                                   y5.cwiseAbs().maxCoeff());
            const double err = (y5 - y4).cwiseAbs().maxCoeff() / sc;
            if (err <= 1.0) {
                t += step;
                y = y5;
                Mat2 r = unvec(y);
                herm_drift = std::max(herm_drift, (r - r.adjoint()).cwiseAbs().maxCoeff());
                r = 0.5 * (r + r.adjoint());
                y = vec(r);
            }
            const double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-12), -0.2), 0.2, 5.0);
            h = std::max(step * fac, 1e-14 * std::max(1.0, target));
            if (step <= 1e-14 * std::max(1.0, target) && err > 1.0)
                throw std::runtime_error("ode_integrate: step-size underflow at t=" +
                                         std::to_string(t));
        }
        traj.states[idx] = unvec(y);
    }
    if (herm_drift > 1e-8 && !drift_reported) {
        diag("ode_integrate(" + solver_id + "): hermiticity drift " + std::to_string(herm_drift));
        drift_reported = true;
    }
    return traj;
}

double zero_frequency_rate(const bath::BathParams& bath) {
    return 8.0 * pi * bath.lambda / (bath.beta * bath.gamma);
}

Mat4 davies_gkls(const cumulant::SystemParams& sys, const bath::BathParams& bath) {
    sys.validate();
    bath.validate();
    const auto jop = cumulant::jump_operators(sys);
    const double j0 = bath::spectral_density(sys.omega0, bath);
    const double n0 = bath::bose_einstein(sys.omega0, bath.beta);
    const double g_minus = 2.0 * pi * j0 * (n0 + 1.0);
    const double g_plus = 2.0 * pi * j0 * n0;
    const double g_zero = 0.5 * zero_frequency_rate(bath);  // lim 2πJ(ω)(n+1)

    Mat2 hs = 0.5 * sys.omega0 * kSigmaZ;
    Mat4 L = hamiltonian_part(hs);
    L += g_minus * dissipator(jop.a_minus, jop.a_minus);
    L += g_plus * dissipator(jop.a_plus, jop.a_plus);
    L += g_zero * dissipator(jop.a_zero, jop.a_zero);
    return L;
}

std::complex<double> half_fourier_kernel(double omega, double t, const bath::BathParams& bath,
                                         int n_matsubara) {
    bath.validate();
    if (bath.lambda == 0.0) return {0.0, 0.0};
    // effective order must put the first neglected pole beyond γ and |ω|
    const int kmin = static_cast<int>(
        std::ceil(1.3 * bath.beta * std::max(bath.gamma, std::abs(omega)) / (2.0 * pi)));
    const int K = std::max(n_matsubara, kmin + 1);
    const auto exp_ = bath::correlation_expansion(bath, K).kernel();

    const cplx iw{0.0, omega};
    cplx val{0.0, 0.0};
    for (std::size_t k = 0; k < exp_.rates.size(); ++k) {
        const cplx den = exp_.rates[k] - iw;
        if (t < 0.0)
            val += exp_.amplitudes[k] / den;
        else
            val += exp_.amplitudes[k] * (1.0 - std::exp((iw - exp_.rates[k]) * t)) / den;
    }
    // analytic k > K remainder of the t = ∞ part (t-independent, cached)
    const double A = pi * 4.0 * bath.lambda * bath.gamma / bath.beta;
    {
        struct Key {
            double l, g, b, w;
            int k;
            bool operator<(const Key& o) const {
                return std::tie(l, g, b, w, k) < std::tie(o.l, o.g, o.b, o.w, o.k);
            }
        };
        static std::mutex mtx;
        static std::map<Key, cplx> memo;
        const Key key{bath.lambda, bath.gamma, bath.beta, omega, K};
        cplx tail_inf;
        {
            std::lock_guard<std::mutex> lock(mtx);
            auto it = memo.find(key);
            if (it != memo.end()) tail_inf = it->second;
            else {
                auto f_inf = [&](double kk) -> cplx {
                    const double nu = 2.0 * pi * kk / bath.beta;
                    const double ck = A * nu / (nu * nu - bath.gamma * bath.gamma);
                    return ck / (nu - iw);
                };
                tail_inf = quad::euler_maclaurin_tail(f_inf, K).value;
                memo.emplace(key, tail_inf);
            }
        }
        val += tail_inf;
    }
    if (t >= 0.0) {
        // − Σ_{k>K} c_k e^{(iω−ν_k)t}/(ν_k − iω) via partial polylogs, T_m deduplicated
        const double q = std::exp(-2.0 * pi * t / bath.beta);
        const double scale = bath.beta / (2.0 * pi);
        const double g2 = bath.gamma * bath.gamma;
        constexpr int kMaxM = 44;
        std::array<double, kMaxM + 1> tm;
        std::array<bool, kMaxM + 1> have{};
        auto T = [&](int m) {
            if (!have[m]) {
                tm[m] = std::pow(scale, m) * quad::partial_polylog(q, m, K);
                have[m] = true;
            }
            return tm[m];
        };
        cplx acc{0.0, 0.0};
        double gpow = 1.0;
        for (int jp = 0; 2 * jp + 2 <= kMaxM; ++jp) {
            cplx wpow{1.0, 0.0};
            cplx inner{0.0, 0.0};
            for (int j = 0; 2 * jp + j + 2 <= kMaxM; ++j) {
                const cplx term = wpow * T(2 * jp + j + 2);
                inner += term;
                if (std::abs(term) < 1e-17 * (std::abs(inner) + 1e-300)) break;
                wpow *= iw;
            }
            const cplx term = gpow * inner;
            acc += term;
            if (std::abs(term) < 1e-17 * (std::abs(acc) + 1e-300)) break;
            gpow *= g2;
        }
        val -= A * std::exp(iw * t) * acc;
    }
    return val;
}

namespace {

Mat4 redfield_dissipator(const cumulant::SystemParams& sys, const cplx kernels[3],
                         bool include_lamb_shift, const double freqs[3], double t_phase) {
    // kernels[i] = Γ_half(ω_i); label order (Minus, Plus, Zero)
    const auto jop = cumulant::jump_operators(sys);
    const FreqLabel L[3] = {FreqLabel::Minus, FreqLabel::Plus, FreqLabel::Zero};
    Mat4 out = Mat4::Zero();
    Mat2 h_ls = Mat2::Zero();
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            cplx g = kernels[b] + std::conj(kernels[a]);
            cplx s = (kernels[b] - std::conj(kernels[a])) / cplx{0.0, 2.0};
            if (t_phase >= 0.0) {
                const cplx ph = std::polar(1.0, (freqs[a] - freqs[b]) * t_phase);
                g *= ph;
                s *= ph;
            }
            out += g * dissipator(jop.at(L[a]), jop.at(L[b]));
            if (include_lamb_shift) h_ls += s * jop.at(L[a]).adjoint() * jop.at(L[b]);
        }
    }
    if (include_lamb_shift) out += hamiltonian_part(0.5 * (h_ls + h_ls.adjoint()));
    return out;
}

}  // namespace

Mat4 bloch_redfield(const cumulant::SystemParams& sys, const bath::BathParams& bath,
                    int n_matsubara, bool include_lamb_shift) {
    sys.validate();
    bath.validate();
    const double freqs[3] = {sys.omega0, -sys.omega0, 0.0};
    cplx kern[3];
    for (int i = 0; i < 3; ++i) kern[i] = half_fourier_kernel(freqs[i], -1.0, bath, n_matsubara);
    Mat4 L = hamiltonian_part(0.5 * sys.omega0 * kSigmaZ);
    L += redfield_dissipator(sys, kern, include_lamb_shift, freqs, -1.0);
    return L;
}

Mat4 redfield_td_generator(const cumulant::SystemParams& sys, const bath::BathParams& bath,
                           double t, int n_matsubara, bool schroedinger_frame) {
    sys.validate();
    bath.validate();
    const double freqs[3] = {sys.omega0, -sys.omega0, 0.0};
    cplx kern[3];
    for (int i = 0; i < 3; ++i) kern[i] = half_fourier_kernel(freqs[i], t, bath, n_matsubara);
    if (!schroedinger_frame) return redfield_dissipator(sys, kern, false, freqs, t);
    Mat4 L = hamiltonian_part(0.5 * sys.omega0 * kSigmaZ);
    L += redfield_dissipator(sys, kern, false, freqs, -1.0);
    return L;
}

Trajectory redfield_td(const cumulant::SystemParams& sys, const bath::BathParams& bath,
                       const Mat2& rho0, const std::vector<double>& times, const OdeConfig& ode,
                       int n_matsubara) {
    sys.validate();
    bath.validate();
    auto gen = [&](double t) { return redfield_td_generator(sys, bath, t, n_matsubara, false); };
    Trajectory traj = ode_integrate(gen, rho0, times, ode, "redfield-td");
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const double t = traj.times[i];
        const cplx u = std::polar(1.0, -0.5 * sys.omega0 * t);
        Mat2 U = Mat2::Zero();
        U(0, 0) = u;
        U(1, 1) = std::conj(u);
        traj.states[i] = U * traj.states[i] * U.adjoint();
    }
    traj.options_summary = "interaction-picture TCL2, n_matsubara=" + std::to_string(n_matsubara);
    return traj;
}

double exact_dephasing(const bath::BathParams& bath, double t) {
    const double a = bath::dephasing_exponent(t, bath);
    const double b = bath::dephasing_exponent_sinc(t, bath);
    if (std::abs(a - b) > 1e-7 * std::max(1.0, std::abs(a)))
        throw quad::ConvergenceError("exact_dephasing: the two integral forms disagree", std::abs(a - b));
    return a;
}

}  // namespace spinboson::refsolvers
