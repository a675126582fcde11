#include "spinboson/heom.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "spinboson/diag.hpp"

namespace spinboson::refsolvers {

using std::numbers::pi;
using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;

std::size_t heom_hierarchy_size(int n_exponents, int depth) {
    // C(n_exponents + depth, depth)
    long double v = 1.0L;
    for (int i = 1; i <= depth; ++i) v = v * (n_exponents + i) / i;
    return static_cast<std::size_t>(std::llround(v));
}

namespace {

struct Hierarchy {
    int n_exp{0};
    int depth{0};
    std::size_t nodes{0};
    std::vector<int> up, down;       // nodes × n_exp neighbor indices, −1 = none
    std::vector<double> decay;       // −Σ n_k ν_k
    std::vector<cplx> up_coef;       // −i √((n_k+1)|c_k|)
    std::vector<cplx> dn_left;       // −i √(n_k/|c_k|) c_k   (Q ρ side)
    std::vector<cplx> dn_right;      // −i √(n_k/|c_k|) c̄_k  (ρ Q side)
};

Hierarchy build_hierarchy(const std::vector<cplx>& c, const std::vector<double>& nu, int depth) {
    Hierarchy h;
    h.n_exp = static_cast<int>(c.size());
    h.depth = depth;
    std::vector<std::vector<int>> nodes;
    std::map<std::vector<int>, int> index;
    std::vector<int> cur(h.n_exp, 0);
    std::function<void(int, int)> gen = [&](int slot, int remaining) {
        if (slot == h.n_exp) {
            index[cur] = static_cast<int>(nodes.size());
            nodes.push_back(cur);
            return;
        }
        for (int v = 0; v <= remaining; ++v) {
            cur[slot] = v;
            gen(slot + 1, remaining - v);
        }
        cur[slot] = 0;
    };
    gen(0, depth);
    h.nodes = nodes.size();
    h.up.assign(h.nodes * h.n_exp, -1);
    h.down.assign(h.nodes * h.n_exp, -1);
    h.decay.assign(h.nodes, 0.0);
    h.up_coef.assign(h.nodes * h.n_exp, cplx{0.0, 0.0});
    h.dn_left.assign(h.nodes * h.n_exp, cplx{0.0, 0.0});
    h.dn_right.assign(h.nodes * h.n_exp, cplx{0.0, 0.0});

    for (std::size_t i = 0; i < h.nodes; ++i) {
        const auto& n = nodes[i];
        int total = 0;
        double dec = 0.0;
        for (int k = 0; k < h.n_exp; ++k) {
            total += n[k];
            dec -= n[k] * nu[k];
        }
        h.decay[i] = dec;
        for (int k = 0; k < h.n_exp; ++k) {
            const double ac = std::abs(c[k]);
            if (ac < 1e-300) continue;  // inert exponent
            if (total + 1 <= depth) {
                auto m = n;
                ++m[k];
                h.up[i * h.n_exp + k] = index.at(m);
                h.up_coef[i * h.n_exp + k] = cplx{0.0, -1.0} * std::sqrt((n[k] + 1.0) * ac);
            }
            if (n[k] > 0) {
                auto m = n;
                --m[k];
                h.down[i * h.n_exp + k] = index.at(m);
                const double s = std::sqrt(n[k] / ac);
                h.dn_left[i * h.n_exp + k] = cplx{0.0, -1.0} * s * c[k];
                h.dn_right[i * h.n_exp + k] = cplx{0.0, -1.0} * s * std::conj(c[k]);
            }
        }
    }
    return h;
}

struct EtdCoefs {
    double h{0.0};
    std::vector<double> E, E2, Q;          // e^{hd}, e^{hd/2}, (h/2)φ₁(hd/2)
    std::vector<double> A, B, C;           // h[φ₁−3φ₂+4φ₃], h[φ₂−2φ₃], h[−φ₂+4φ₃] at hd
};

void phis(double z, double& p1, double& p2, double& p3) {
    if (std::abs(z) < 0.35) {
        p1 = p2 = p3 = 0.0;
        double term = 1.0;
        for (int k = 0; k < 18; ++k) {
            // z^k/k!: φ_j += z^k/(k+j)!
            double f1 = 1.0, f2 = 1.0, f3 = 1.0;
            for (int j = 1; j <= k + 1; ++j) f1 *= j;
            for (int j = 1; j <= k + 2; ++j) f2 *= j;
            for (int j = 1; j <= k + 3; ++j) f3 *= j;
            p1 += term * (f1 > 0 ? 1.0 / f1 : 0.0) * 1.0;
            p2 += term / f2;
            p3 += term / f3;
            term *= z;
            if (std::abs(term) < 1e-20) break;
        }
        return;
    }
    const double ez = std::exp(z);
    p1 = (ez - 1.0) / z;
    p2 = (ez - 1.0 - z) / (z * z);
    p3 = (ez - 1.0 - z - 0.5 * z * z) / (z * z * z);
}

EtdCoefs build_coefs(const Hierarchy& hier, double h) {
    EtdCoefs c;
    c.h = h;
    c.E.resize(hier.nodes);
    c.E2.resize(hier.nodes);
    c.Q.resize(hier.nodes);
    c.A.resize(hier.nodes);
    c.B.resize(hier.nodes);
    c.C.resize(hier.nodes);
    for (std::size_t i = 0; i < hier.nodes; ++i) {
        const double d = hier.decay[i];
        c.E[i] = std::exp(h * d);
        c.E2[i] = std::exp(0.5 * h * d);
        double p1, p2, p3;
        phis(0.5 * h * d, p1, p2, p3);
        c.Q[i] = 0.5 * h * p1;
        phis(h * d, p1, p2, p3);
        c.A[i] = h * (p1 - 3.0 * p2 + 4.0 * p3);
        c.B[i] = h * (p2 - 2.0 * p3);
        c.C[i] = h * (-p2 + 4.0 * p3);
    }
    return c;
}

using State = std::vector<Mat2>;

class HeomEngine {
public:
    HeomEngine(const Mat2& H, const Mat2& Q, std::vector<cplx> c, std::vector<double> nu,
               int depth, bool terminator, const bath::BathParams& bp, int workers)
        : H_(H), Q_(Q), hier_(build_hierarchy(c, nu, depth)) {
        workers_ = workers > 0 ? workers
                               : std::min(8u, std::max(1u, std::thread::hardware_concurrency()));
        if (terminator) {
            // residual weight δ = ∫₀^∞ C_kernel − Σ_k c_k/ν_k
            cplx total{2.0 * pi * bp.lambda / (bp.beta * bp.gamma), -pi * bp.lambda};
            for (std::size_t k = 0; k < c.size(); ++k) total -= c[k] / nu[k];
            delta_ = total;
        }
        QQ_ = Q_ * Q_;
    }

    std::size_t nodes() const { return hier_.nodes; }

    // N(y): everything except the diagonal decay
    void rhs(const State& y, State& out) const {
        auto worker = [&](std::size_t b, std::size_t e) {
            const int K = hier_.n_exp;
            for (std::size_t i = b; i < e; ++i) {
                Mat2 acc = cplx{0.0, -1.0} * (H_ * y[i] - y[i] * H_);
                if (delta_ != cplx{0.0, 0.0}) {
                    acc += 2.0 * delta_.real() * (Q_ * y[i] * Q_);
                    acc -= delta_ * (QQ_ * y[i]);
                    acc -= std::conj(delta_) * (y[i] * QQ_);
                }
                for (int k = 0; k < K; ++k) {
                    const int u = hier_.up[i * K + k];
                    if (u >= 0) {
                        const Mat2& yu = y[u];
                        acc += hier_.up_coef[i * K + k] * (Q_ * yu - yu * Q_);
                    }
                    const int d = hier_.down[i * K + k];
                    if (d >= 0) {
                        const Mat2& yd = y[d];
                        acc += hier_.dn_left[i * K + k] * (Q_ * yd) -
                               hier_.dn_right[i * K + k] * (yd * Q_);
                    }
                }
                out[i] = acc;
            }
        };
        if (workers_ <= 1 || hier_.nodes < 512) {
            worker(0, hier_.nodes);
            return;
        }
        std::vector<std::thread> pool;
        const std::size_t chunk = (hier_.nodes + workers_ - 1) / workers_;
        for (int w = 0; w < workers_; ++w) {
            const std::size_t b = w * chunk, e = std::min(hier_.nodes, b + chunk);
            if (b < e) pool.emplace_back(worker, b, e);
        }
        for (auto& th : pool) th.join();
    }

    // one Cox–Matthews ETDRK4 step
    void step(State& y, const EtdCoefs& cf) const {
        const std::size_t n = hier_.nodes;
        ensure_buffers(n);
        State& Ny = buf_[0];
        State& a = buf_[1];
        State& Na = buf_[2];
        State& b = buf_[3];
        State& Nb = buf_[4];
        State& cst = buf_[5];
        State& Nc = buf_[6];
        rhs(y, Ny);
        for (std::size_t i = 0; i < n; ++i) a[i] = cf.E2[i] * y[i] + cf.Q[i] * Ny[i];
        rhs(a, Na);
        for (std::size_t i = 0; i < n; ++i) b[i] = cf.E2[i] * y[i] + cf.Q[i] * Na[i];
        rhs(b, Nb);
        for (std::size_t i = 0; i < n; ++i)
            cst[i] = cf.E2[i] * a[i] + cf.Q[i] * (2.0 * Nb[i] - Ny[i]);
        rhs(cst, Nc);
        for (std::size_t i = 0; i < n; ++i)
            y[i] = cf.E[i] * y[i] + cf.A[i] * Ny[i] + cf.B[i] * (Na[i] + Nb[i]) + cf.C[i] * Nc[i];
    }

    double coupling_scale() const {
        double s = H_.cwiseAbs().maxCoeff();
        const int K = hier_.n_exp;
        for (std::size_t i = 0; i < hier_.nodes * K; ++i)
            s = std::max({s, std::abs(hier_.up_coef[i]), std::abs(hier_.dn_left[i])});
        return std::max(s, 1e-6);
    }

    const Hierarchy& hier() const { return hier_; }

private:
    void ensure_buffers(std::size_t n) const {
        if (buf_[0].size() != n)
            for (auto& s : buf_) s.assign(n, Mat2::Zero());
    }

    Mat2 H_, Q_, QQ_;
    Hierarchy hier_;
    cplx delta_{0.0, 0.0};
    int workers_{1};
    mutable std::array<State, 7> buf_;
};

}  // namespace

Trajectory heom_solve_op(const Mat2& H, const Mat2& Q, const bath::BathParams& bp,
                         const HeomConfig& cfg, const Mat2& rho0,
                         const std::vector<double>& times) {
    bp.validate();
    if (cfg.depth < 1) throw std::invalid_argument("heom: depth >= 1");
    if (cfg.n_matsubara < 1) throw std::invalid_argument("heom: n_matsubara >= 1");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (times[i] < times[i - 1]) throw std::invalid_argument("heom: times must be sorted");

    const auto expansion = bath::correlation_expansion(bp, cfg.n_matsubara, cfg.decomposition);
    const auto kern = expansion.kernel();
    const std::size_t sz = heom_hierarchy_size(static_cast<int>(kern.rates.size()), cfg.depth);
    if (sz > 3'000'000)
        throw std::invalid_argument("heom: hierarchy size " + std::to_string(sz) +
                                    " exceeds the memory budget; reduce depth or exponent count");

    HeomEngine eng(H, Q, kern.amplitudes, kern.rates, cfg.depth, cfg.terminator, bp, cfg.workers);

    State y(eng.nodes(), Mat2::Zero());
    y[0] = rho0;

    Trajectory traj;
    traj.times = times;
    traj.states.resize(times.size());
    traj.solver_id = "heom";
    std::ostringstream os;
    os << "decomposition=" << bath::to_string(cfg.decomposition) << " n_k=" << cfg.n_matsubara
       << " depth=" << cfg.depth << " terminator=" << (cfg.terminator ? "on" : "off");
    if (expansion.kind == bath::Decomposition::Fitted)
        os << " fit_residual=" << expansion.fit_residual;
    traj.options_summary = os.str();

    const double rtol = cfg.ode.rel_tol > 0 ? std::max(cfg.ode.rel_tol, 1e-12) : 1e-8;
    const double atol = cfg.ode.abs_tol > 0 ? cfg.ode.abs_tol : 1e-12;
    double h = 0.35 / eng.coupling_scale();
    if (cfg.ode.max_step > 0.0) h = std::min(h, cfg.ode.max_step);
    EtdCoefs cf = build_coefs(eng.hier(), h);
    EtdCoefs cf_half = build_coefs(eng.hier(), 0.5 * h);

    double t = 0.0;
    int steps_since_check = 0;
    for (std::size_t idx = 0; idx < times.size(); ++idx) {
        const double target = times[idx];
        while (t < target - 1e-14 * std::max(1.0, target)) {
            double step = std::min(h, target - t);
            const bool clamped = step < h * 0.999;
            if (!clamped && ++steps_since_check >= 16) {
                // step-doubling recalibration
                steps_since_check = 0;
                State y_full = y;
                eng.step(y_full, cf);
                State y_half = y;
                eng.step(y_half, cf_half);
                eng.step(y_half, cf_half);
                double num = 0.0, den = 0.0;
                for (std::size_t i = 0; i < y.size(); ++i) {
                    num = std::max(num, (y_full[i] - y_half[i]).cwiseAbs().maxCoeff());
                    den = std::max(den, y_half[i].cwiseAbs().maxCoeff());
                }
                const double err = num / (atol + rtol * std::max(den, 1e-30)) / 15.0;
                y = y_half;
                t += h;
                double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-8), -0.2), 0.5, 1.6);
                if (cfg.ode.max_step > 0.0) fac = std::min(fac, cfg.ode.max_step / h);
                if (std::abs(fac - 1.0) > 0.1) {
                    h *= fac;
                    cf = build_coefs(eng.hier(), h);
                    cf_half = build_coefs(eng.hier(), 0.5 * h);
                }
                continue;
            }
            if (clamped) {
                EtdCoefs cfs = build_coefs(eng.hier(), step);
                eng.step(y, cfs);
            } else {
                eng.step(y, cf);
            }
            t += step;
        }
        traj.states[idx] = 0.5 * (y[0] + y[0].adjoint());
    }
    return traj;
}

Trajectory heom_solve(const cumulant::SystemParams& sys, const bath::BathParams& bp,
                      const HeomConfig& cfg, const Mat2& rho0, const std::vector<double>& times) {
    sys.validate();
    const Mat2 sx = (Mat2() << 0, 1, 1, 0).finished();
    const Mat2 sy = (Mat2() << 0, cplx{0, -1}, cplx{0, 1}, 0).finished();
    const Mat2 sz = (Mat2() << 1, 0, 0, -1).finished();
    const Mat2 H = 0.5 * sys.omega0 * sz;
    const Mat2 Q = sys.f1 * sx + sys.f2 * sy + sys.f3 * sz;
    return heom_solve_op(H, Q, bp, cfg, rho0, times);
}

double heom_depth_refinement(const cumulant::SystemParams& sys, const bath::BathParams& bp,
                             const HeomConfig& cfg, const Mat2& rho0,
                             const std::vector<double>& times, int extra_depth) {
    Trajectory a = heom_solve(sys, bp, cfg, rho0, times);
    HeomConfig deeper = cfg;
    deeper.depth += extra_depth;
    Trajectory b = heom_solve(sys, bp, deeper, rho0, times);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.states.size(); ++i) {
        const Mat2 d = a.states[i] - b.states[i];
        Eigen::SelfAdjointEigenSolver<Mat2> es(0.5 * (d + d.adjoint()));
        worst = std::max(worst, 0.5 * es.eigenvalues().cwiseAbs().sum());
    }
    return worst;
}

}  // namespace spinboson::refsolvers
