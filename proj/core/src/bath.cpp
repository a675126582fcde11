#include "spinboson/bath.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "spinboson/diag.hpp"

namespace spinboson::bath {

using std::numbers::pi;
using cplx = std::complex<double>;

void BathParams::validate() const {
    if (lambda < 0.0) throw std::invalid_argument("BathParams: lambda must be >= 0");
    if (gamma <= 0.0) throw std::invalid_argument("BathParams: gamma must be > 0");
    if (beta <= 0.0) throw std::invalid_argument("BathParams: beta must be > 0");
}

double spectral_density(double omega, const BathParams& p) {
    return 2.0 * p.lambda * omega * p.gamma / (p.gamma * p.gamma + omega * omega);
}

double bose_einstein(double nu, double beta) {
    if (nu <= 0.0) throw std::domain_error("bose_einstein: nu must be > 0");
    return 1.0 / std::expm1(beta * nu);
}

std::string to_string(Decomposition d) {
    switch (d) {
        case Decomposition::Matsubara: return "matsubara";
        case Decomposition::Pade: return "pade";
        case Decomposition::Fitted: return "fitted";
    }
    return "?";
}

namespace {

// J(ν) coth(βν/2), smooth through ν = 0
double j_coth(double nu, const BathParams& p) {
    const double x = 0.5 * p.beta * nu;
    double cth;
    if (std::abs(x) < 1e-4)
        cth = 1.0 / x + x / 3.0;
    else
        cth = 1.0 / std::tanh(x);
    return spectral_density(nu, p) * cth;
}

double matsubara_rate(int k, double beta) { return 2.0 * pi * k / beta; }

}  // namespace

CorrelationExpansion correlation_expansion(const BathParams& p, int n_matsubara,
                                           Decomposition kind) {
    p.validate();
    if (n_matsubara < 1) throw std::invalid_argument("correlation_expansion: n_matsubara >= 1");
    if (p.beta * p.gamma > 50.0)
        diag("correlation_expansion: beta*gamma > 50; the exponential expansion may need more "
             "terms at this temperature");

    CorrelationExpansion e;
    e.params = p;
    e.n_matsubara = n_matsubara;
    e.kind = kind;
    if (kind == Decomposition::Fitted) {
        FitOptions opt;
        opt.n_exponents = n_matsubara;
        return fitted_expansion(p, opt);
    }

    const double lg = p.lambda * p.gamma;
    if (kind == Decomposition::Matsubara) {
        e.amplitudes.push_back(lg * cplx{1.0 / std::tan(0.5 * p.beta * p.gamma), -1.0});
        e.rates.push_back(p.gamma);
        for (int k = 1; k <= n_matsubara; ++k) {
            const double nu = matsubara_rate(k, p.beta);
            e.amplitudes.push_back(cplx{4.0 * lg / p.beta * nu / (nu * nu - p.gamma * p.gamma), 0.0});
            e.rates.push_back(nu);
        }
    } else {  // Pade
        const PadePoles pp = pade_coth_poles(n_matsubara);
        const double y = 0.5 * p.beta * p.gamma;
        double cot_pade = 1.0 / y;
        for (int j = 0; j < n_matsubara; ++j)
            cot_pade += 2.0 * pp.eta[j] * y / (y * y - pp.xi[j] * pp.xi[j]);
        e.amplitudes.push_back(lg * cplx{cot_pade, -1.0});
        e.rates.push_back(p.gamma);
        for (int j = 0; j < n_matsubara; ++j) {
            const double nu = 2.0 * pp.xi[j] / p.beta;
            e.amplitudes.push_back(
                cplx{4.0 * lg / p.beta * pp.eta[j] * nu / (nu * nu - p.gamma * p.gamma), 0.0});
            e.rates.push_back(nu);
        }
    }
    return e;
}

std::complex<double> CorrelationExpansion::sum(double t) const {
    if (t < 0.0) return std::conj(sum(-t));
    cplx v{0.0, 0.0};
    for (std::size_t k = 0; k < rates.size(); ++k) v += amplitudes[k] * std::exp(-rates[k] * t);
    return v;
}

std::complex<double> CorrelationExpansion::refined(double t) const {
    if (t < 0.0) return std::conj(refined(-t));
    cplx v = sum(t);
    if (kind != Decomposition::Matsubara) return v;
    // analytic k > K remainder: A Σ_j γ^{2j} T_{2j+1}(t), T_m = (β/2π)^m Σ_{k>K} q^k/k^m
    const double A = 4.0 * params.lambda * params.gamma / params.beta;
    const double q = std::exp(-2.0 * pi * t / params.beta);
    const double scale = params.beta / (2.0 * pi);
    const double g2 = params.gamma * params.gamma;
    double tail = 0.0, gpow = 1.0, spow = scale;
    for (int j = 0; j <= 14; ++j) {
        const double term = gpow * spow * quad::partial_polylog(q, 2 * j + 1, n_matsubara);
        tail += term;
        if (std::abs(term) < 1e-17 * std::abs(tail)) break;
        gpow *= g2;
        spow *= scale * scale;
    }
    return v + A * tail;
}

double CorrelationExpansion::tail_estimate(double t) const {
    if (kind != Decomposition::Matsubara) return fit_residual;
    return std::abs(refined(std::abs(t)) - sum(std::abs(t)));
}

KernelExpansion CorrelationExpansion::kernel() const {
    KernelExpansion k;
    k.rates = rates;
    k.amplitudes.reserve(amplitudes.size());
    for (const auto& a : amplitudes) k.amplitudes.push_back(pi * a);
    return k;
}

std::complex<double> correlation_function(double t, const BathParams& p, int n_matsubara,
                                          double tail_tol) {
    if (t < 0.0) return std::conj(correlation_function(-t, p, n_matsubara, tail_tol));
    const auto e = correlation_expansion(p, n_matsubara);
    const double tail = e.tail_estimate(t);
    if (!(tail <= tail_tol))
        throw BathConvergenceError("correlation_function: Matsubara tail estimate " +
                                       std::to_string(tail) + " exceeds tolerance",
                                   tail);
    return e.sum(t);
}

// ---------------------------------------------------------------------------
// exact dephasing exponent
// ---------------------------------------------------------------------------

namespace {

double dephasing_tail(double t, double V, const BathParams& p) {
    // 4 ∫_V^∞ J(ν)(1 − cos νt)/ν² dν with coth → 1 beyond V (βV >> 1)
    const double lg = p.lambda * p.gamma;
    const double g2 = p.gamma * p.gamma;
    double tail = 4.0 * p.lambda / p.gamma * std::log1p(g2 / (V * V));
    // minus 8λγ ∫_V cos(νt)/(ν(ν²+γ²)) dν, expanded in γ²/ν²
    double osc = 0.0, gpow = 1.0, tpow = t * t;
    for (int j = 0; j <= 5; ++j) {
        osc += ((j % 2) ? -1.0 : 1.0) * gpow * tpow * quad::exp_integral_tail(V * t, 2 * j + 3).real();
        gpow *= g2;
        tpow *= t * t;
    }
    tail -= 8.0 * lg * osc;
    return tail;
}

}  // namespace

double dephasing_exponent(double t, const BathParams& p) {
    p.validate();
    if (t < 0.0) throw std::invalid_argument("dephasing_exponent: t >= 0");
    if (t == 0.0 || p.lambda == 0.0) return 0.0;
    const double V = std::max({50.0 * p.gamma, 40.0 * pi / t, 45.0 / p.beta});
    auto f = [&](double nu) {
        const double s = std::sin(0.5 * nu * t);
        return 4.0 * j_coth(nu, p) * 2.0 * s * s / (nu * nu);
    };
    quad::Options opt;
    opt.abs_tol = 1e-13;
    opt.rel_tol = 1e-11;
    opt.max_intervals = 20000;
    opt.max_panel_width = std::max(4.0 * pi / t, V / 512.0);
    auto main = quad::integrate(f, 0.0, V, opt, {p.gamma, 5.0 * p.gamma, 10.0 * p.gamma});
    return main.value + dephasing_tail(t, V, p);
}

double dephasing_exponent_sinc(double t, const BathParams& p) {
    p.validate();
    if (t < 0.0) throw std::invalid_argument("dephasing_exponent_sinc: t >= 0");
    if (t == 0.0 || p.lambda == 0.0) return 0.0;
    const double V = std::max({50.0 * p.gamma, 40.0 * pi / t, 45.0 / p.beta});
    auto sinc = [](double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; };
    auto f = [&](double nu) {
        const double s = sinc(0.5 * nu * t);
        return 2.0 * t * t * j_coth(nu, p) * s * s;
    };
    quad::Options opt;
    opt.abs_tol = 1e-13;
    opt.rel_tol = 1e-11;
    opt.max_intervals = 20000;
    opt.max_panel_width = std::max(4.0 * pi / t, V / 512.0);
    auto main = quad::integrate(f, 0.0, V, opt, {p.gamma, 5.0 * p.gamma, 10.0 * p.gamma});
    return main.value + dephasing_tail(t, V, p);
}

// ---------------------------------------------------------------------------
// Pade [N−1/N] poles of coth
// ---------------------------------------------------------------------------

PadePoles pade_coth_poles(int n) {
    if (n < 1) throw std::invalid_argument("pade_coth_poles: n >= 1");
    const int M = 2 * n;
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(M, M);
    for (int m = 1; m < M; ++m) {
        const double v = 1.0 / std::sqrt((2.0 * m + 1.0) * (2.0 * m + 3.0));
        L(m - 1, m) = v;
        L(m, m - 1) = v;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
    std::vector<double> xi;
    for (int i = 0; i < M; ++i)
        if (es.eigenvalues()(i) > 1e-12) xi.push_back(2.0 / es.eigenvalues()(i));
    std::sort(xi.begin(), xi.end());

    std::vector<double> zeta;
    if (n > 1) {
        const int Mp = 2 * n - 1;
        Eigen::MatrixXd Lp = Eigen::MatrixXd::Zero(Mp, Mp);
        for (int m = 1; m < Mp; ++m) {
            const double v = 1.0 / std::sqrt((2.0 * m + 3.0) * (2.0 * m + 5.0));
            Lp(m - 1, m) = v;
            Lp(m, m - 1) = v;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esp(Lp);
        for (int i = 0; i < Mp; ++i)
            if (esp.eigenvalues()(i) > 1e-10) zeta.push_back(2.0 / esp.eigenvalues()(i));
        std::sort(zeta.begin(), zeta.end());
    }
    if (static_cast<int>(xi.size()) != n || static_cast<int>(zeta.size()) != n - 1)
        throw std::runtime_error("pade_coth_poles: unexpected eigenvalue count");

    // h(u) = κ Π_k (u + ζ_k²) / Π_j (u + ξ_j²), h(0) = 1/3; η_j = ½ res h at −ξ_j²
    long double log_kappa = -std::log((long double)3.0);
    for (double x : xi) log_kappa += 2.0L * std::log((long double)x);
    for (double z : zeta) log_kappa -= 2.0L * std::log((long double)z);

    PadePoles out;
    out.xi = xi;
    out.eta.resize(n);
    for (int j = 0; j < n; ++j) {
        const long double xj2 = (long double)xi[j] * xi[j];
        long double val = 0.5L * std::exp(log_kappa);
        for (int k = 0; k < n - 1; ++k) val *= (long double)zeta[k] * zeta[k] - xj2;
        for (int l = 0; l < n; ++l)
            if (l != j) val /= (long double)xi[l] * xi[l] - xj2;
        out.eta[j] = static_cast<double>(val);
    }
    return out;
}

// ---------------------------------------------------------------------------
// fitted decomposition (variable projection in the twice-integrated norm)
// ---------------------------------------------------------------------------

namespace {

// γ_model basis entry: 4 (t/ν − (1 − e^{−νt})/ν²)
double phase_basis(double nu, double t) {
    return 4.0 * (t / nu - (-std::expm1(-nu * t)) / (nu * nu));
}

Eigen::VectorXd solve_amplitudes(const Eigen::MatrixXd& B, const Eigen::VectorXd& target) {
    return B.colPivHouseholderQr().solve(target);
}

}  // namespace

CorrelationExpansion fitted_expansion(const BathParams& p, const FitOptions& opt) {
    p.validate();
    CorrelationExpansion e;
    e.params = p;
    e.n_matsubara = opt.n_exponents;
    e.kind = Decomposition::Fitted;
    if (p.lambda == 0.0) {
        e.amplitudes.assign(1, cplx{0.0, 0.0});
        e.rates.assign(1, p.gamma);
        return e;
    }

    // time window: grow until the exact exponent reaches ~25 (coherence dead)
    const double smax = std::max(p.gamma, 2.0 * pi / p.beta);
    double t_max = 1.0 / smax;
    for (int i = 0; i < 48 && dephasing_exponent(t_max, p) < 25.0 && t_max < 2e4 / smax; ++i)
        t_max *= 1.5;

    std::vector<double> grid;
    const double t_min = 1e-3 / smax;
    const double ta = t_max / 60.0, tb = t_max / 6.0;
    for (int i = 0; i < 150; ++i) grid.push_back(t_min + (ta - t_min) * i / 149.0);
    for (int i = 1; i < 150; ++i) grid.push_back(ta + (tb - ta) * i / 149.0);
    for (int i = 1; i <= 120; ++i) grid.push_back(tb + (t_max - tb) * i / 120.0);
    const int G = static_cast<int>(grid.size());

    Eigen::VectorXd gref(G), w(G);
    for (int i = 0; i < G; ++i) {
        gref(i) = dephasing_exponent(grid[i], p);
        w(i) = std::exp(-gref(i));
    }

    // free log-rates (n−1 of them; the Drude rate γ is pinned with a free amplitude)
    const int nfree = std::max(1, opt.n_exponents - 1);
    const double cap = opt.rate_cap_factor * std::max({p.gamma, 2.0 * pi / p.beta, 1.0});
    const double lo = 0.8 * std::min(p.gamma, 2.0 * pi / p.beta);
    Eigen::VectorXd u(nfree);
    for (int j = 0; j < nfree; ++j)
        u(j) = std::log(lo) + (std::log(0.9 * cap) - std::log(lo)) * j / std::max(1, nfree - 1);

    auto build = [&](const Eigen::VectorXd& uu, Eigen::MatrixXd& B) {
        B.resize(G, nfree + 1);
        for (int i = 0; i < G; ++i) {
            B(i, 0) = w(i) * phase_basis(p.gamma, grid[i]);
            for (int j = 0; j < nfree; ++j) B(i, j + 1) = w(i) * phase_basis(std::exp(uu(j)), grid[i]);
        }
    };
    Eigen::VectorXd target = gref.cwiseProduct(w);
    auto residual = [&](const Eigen::VectorXd& uu, Eigen::VectorXd* amps_out) {
        Eigen::MatrixXd B;
        build(uu, B);
        Eigen::VectorXd a = solve_amplitudes(B, target);
        if (amps_out) *amps_out = a;
        return Eigen::VectorXd(B * a - target);
    };

    Eigen::VectorXd r = residual(u, nullptr);
    double best = r.squaredNorm();
    double mu = 1e-3;
    for (int it = 0; it < opt.max_iterations; ++it) {
        Eigen::MatrixXd Jm(G, nfree);
        const double h = 1e-6;
        for (int j = 0; j < nfree; ++j) {
            Eigen::VectorXd up = u;
            up(j) += h;
            Jm.col(j) = (residual(up, nullptr) - r) / h;
        }
        Eigen::MatrixXd JtJ = Jm.transpose() * Jm;
        Eigen::VectorXd g = Jm.transpose() * r;
        bool accepted = false;
        for (int tries = 0; tries < 12; ++tries) {
            Eigen::MatrixXd A = JtJ;
            A.diagonal() += mu * JtJ.diagonal().cwiseMax(1e-12);
            Eigen::VectorXd du = A.ldlt().solve(-g);
            Eigen::VectorXd un = u + du;
            for (int j = 0; j < nfree; ++j) un(j) = std::min(un(j), std::log(cap));
            Eigen::VectorXd rn = residual(un, nullptr);
            if (rn.squaredNorm() < best) {
                u = un;
                r = rn;
                best = rn.squaredNorm();
                mu = std::max(mu * 0.3, 1e-12);
                accepted = true;
                break;
            }
            mu *= 4.0;
        }
        if (!accepted || r.norm() < 1e-12) break;
    }

    Eigen::VectorXd amps;
    residual(u, &amps);

    // reduced-convention amplitudes: fitted (micro) ÷ π; Drude imaginary part exact
    e.amplitudes.push_back(cplx{amps(0) / pi, -p.lambda * p.gamma});
    e.rates.push_back(p.gamma);
    for (int j = 0; j < nfree; ++j) {
        e.amplitudes.push_back(cplx{amps(j + 1) / pi, 0.0});
        e.rates.push_back(std::exp(u(j)));
    }

    double worst = 0.0;
    for (int i = 0; i < G; ++i) {
        double gm = amps(0) * phase_basis(p.gamma, grid[i]);
        for (int j = 0; j < nfree; ++j) gm += amps(j + 1) * phase_basis(std::exp(u(j)), grid[i]);
        worst = std::max(worst, std::abs(0.5 * std::exp(-gm) - 0.5 * std::exp(-gref(i))));
    }
    e.fit_residual = worst;
    if (worst > 1e-4)
        diag("fitted_expansion: coherence-level fit residual " + std::to_string(worst) +
             " (consider more exponents)");
    return e;
}

}  // namespace spinboson::bath
