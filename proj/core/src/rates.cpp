#include "spinboson/rates.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <numbers>

#include "spinboson/diag.hpp"

namespace spinboson::rates {

using std::numbers::pi;
using cplx = std::complex<double>;

double label_frequency(FreqLabel l, double omega0) {
    switch (l) {
        case FreqLabel::Minus: return omega0;
        case FreqLabel::Plus: return -omega0;
        case FreqLabel::Zero: return 0.0;
    }
    return 0.0;
}

namespace {

double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

// J(ν)(n(ν)+1) = 2λγν/((γ²+ν²)(1−e^{−βν})), smooth on the whole line
double thermal_weight(double nu, const bath::BathParams& p) {
    const double x = p.beta * nu;
    double w;  // ν/(1−e^{−βν})
    if (std::abs(x) < 1e-4)
        w = (1.0 + x / 2.0 + x * x / 12.0) / p.beta;
    else
        w = nu / (-std::expm1(-x));
    return 2.0 * p.lambda * p.gamma * w / (p.gamma * p.gamma + nu * nu);
}

double drude_j(double w, const bath::BathParams& p) {
    return 2.0 * p.lambda * w * p.gamma / (p.gamma * p.gamma + w * w);
}

double drude_j_prime(double w, const bath::BathParams& p) {
    const double g2 = p.gamma * p.gamma;
    const double d = g2 + w * w;
    return 2.0 * p.lambda * p.gamma * (g2 - w * w) / (d * d);
}

double nu_max_cutoff(double w, double wp, double t, const bath::BathParams& p) {
    return std::max({50.0 * p.gamma, std::abs(w) + std::abs(wp) + 40.0 * pi / t, 45.0 / p.beta});
}

// t² ∫_V^∞ J(ν) sinc((ω−ν)t/2) sinc((ω′−ν)t/2) dν, exact up to the neglected
// thermal occupation beyond V (βV ≥ 45) and the γ²/ν² series truncation
double gamma_tail(double w, double wp, double t, double V, const bath::BathParams& p,
                  double* err_out) {
    const double cosD = std::cos(0.5 * (w - wp) * t);
    const double phi0 = 0.5 * (w + wp) * t;
    const double g2 = p.gamma * p.gamma;
    const double scale = std::abs(w) + std::abs(wp) + p.gamma;
    const bool degen = std::abs(w - wp) < 1e-8 * scale;

    double a = 0, b = 0, c = 0, d = 0, a1 = 0, a2 = 0;
    if (!degen) {
        a = drude_j(w, p) / (w - wp);
        b = drude_j(wp, p) / (wp - w);
        c = -(a + b);
        const double nt = 1.2345 * p.gamma + 0.789 * (1.0 + scale);
        const double rem = drude_j(nt, p) / ((nt - w) * (nt - wp)) - a / (nt - w) - b / (nt - wp);
        d = rem * (nt * nt + g2) - c * nt;
    } else {
        a2 = drude_j(w, p);
        a1 = drude_j_prime(w, p);
        c = -a1;
        const double nt = 1.2345 * p.gamma + 0.789 * (1.0 + scale);
        const double rem =
            drude_j(nt, p) / ((nt - w) * (nt - w)) - a2 / ((nt - w) * (nt - w)) - a1 / (nt - w);
        d = rem * (nt * nt + g2) - c * nt;
    }

    double cst;
    if (!degen)
        cst = -(a * std::log(V - w) + b * std::log(V - wp) + 0.5 * c * std::log(V * V + g2));
    else
        cst = -(a1 * std::log(V - w) + 0.5 * c * std::log(V * V + g2)) + a2 / (V - w);
    cst += d / p.gamma * (0.5 * pi - std::atan(V / p.gamma));

    double osc = 0.0;
    auto pole_term = [&](double coef, double pp_) {
        const auto I = quad::exp_integral_tail((V - pp_) * t, 1);
        const double ph = pp_ * t - phi0;
        osc += coef * (std::cos(ph) * I.real() - std::sin(ph) * I.imag());
    };
    if (!degen) {
        pole_term(a, w);
        pole_term(b, wp);
    } else {
        pole_term(a1, w);
        const auto I2 = quad::exp_integral_tail((V - w) * t, 2);
        const double ph = w * t - phi0;
        osc += a2 * t * (std::cos(ph) * I2.real() - std::sin(ph) * I2.imag());
    }
    const int jmax = 5;
    double gpow = 1.0;
    for (int j = 0; j <= jmax; ++j) {
        const double sgn = (j % 2) ? -1.0 : 1.0;
        const auto Ic = quad::exp_integral_tail(V * t, 2 * j + 1);
        const auto Id = quad::exp_integral_tail(V * t, 2 * j + 2);
        const double tc = std::pow(t, 2 * j);
        osc += sgn * gpow * c * tc * (std::cos(phi0) * Ic.real() + std::sin(phi0) * Ic.imag());
        osc += sgn * gpow * d * tc * t * (std::cos(phi0) * Id.real() + std::sin(phi0) * Id.imag());
        gpow *= g2;
    }
    if (err_out) {
        const double series_trunc = std::pow(g2 / (V * V), jmax + 1) * std::abs(cst);
        const double thermal = 64.0 * p.lambda * p.gamma * std::exp(-p.beta * V) / (V * V);
        *err_out = series_trunc + thermal;
    }
    return 2.0 * (cosD * cst - osc);
}

}  // namespace

RateResult gamma(double w, double wp, double t, const bath::BathParams& p, const RateOptions& opt) {
    p.validate();
    if (t < 0.0) throw std::invalid_argument("gamma: t >= 0 required");
    if (t == 0.0 || p.lambda == 0.0) return {cplx{0.0, 0.0}, 0.0};

    const double V = nu_max_cutoff(w, wp, t, p);
    auto f = [&](double nu) {
        double g = thermal_weight(nu, p) * sinc(0.5 * (w - nu) * t) * sinc(0.5 * (wp - nu) * t);
        const double bn = p.beta * nu;
        if (bn < 700.0)
            g += thermal_weight(nu, p) * std::exp(-bn) * sinc(0.5 * (w + nu) * t) *
                 sinc(0.5 * (wp + nu) * t);
        return g;
    };
    quad::Options qopt;
    qopt.abs_tol = std::max(1e-16, 0.2 * opt.abs_tol / (t * t));
    qopt.rel_tol = 0.3 * opt.rel_tol;
    qopt.max_intervals = 60000;
    qopt.max_panel_width = std::max(4.0 * pi / t, V / 4096.0);
    std::vector<double> brk{std::abs(w), std::abs(wp), p.gamma, 5.0 * p.gamma, 10.0 * p.gamma};
    auto main = quad::integrate(f, 0.0, V, qopt, brk);

    double tail_err = 0.0;
    const double tail = gamma_tail(w, wp, t, V, p, &tail_err);

    const double mag = t * t * std::abs(main.value) + std::abs(tail);
    const double err = t * t * main.error + tail_err;
    if (!main.converged && err > 100.0 * std::max(opt.abs_tol, opt.rel_tol * mag))
        throw RateConvergenceError("gamma: quadrature did not converge (estimate " +
                                       std::to_string(err) + ")",
                                   err);
    const cplx phase = std::polar(1.0, 0.5 * (w - wp) * t);
    return {phase * (t * t * main.value + tail), err};
}

RateResult gamma_oracle(double w, double wp, double t, const bath::BathParams& p,
                        const RateOptions& opt) {
    p.validate();
    if (t < 0.0) throw std::invalid_argument("gamma_oracle: t >= 0 required");
    if (t == 0.0 || p.lambda == 0.0) return {cplx{0.0, 0.0}, 0.0};

    // kernel-convention C(s) over the Matsubara expansion, raised internally to
    // K terms; the harmonic rates make the sum a single geometric recurrence,
    // with the k > K remainder ≈ A [T₁ (exact) + γ² T₃ (leading order)]
    const int K = std::max(opt.n_matsubara, 4096);
    const double A = pi * 4.0 * p.lambda * p.gamma / p.beta;
    const double g2 = p.gamma * p.gamma;
    std::vector<double> ck(static_cast<std::size_t>(K) + 1, 0.0);
    for (int k = 1; k <= K; ++k) {
        const double nu = 2.0 * pi * k / p.beta;
        ck[static_cast<std::size_t>(k)] = A * nu / (nu * nu - g2);
    }
    const cplx c_drude = pi * p.lambda * p.gamma *
                         cplx{1.0 / std::tan(0.5 * p.beta * p.gamma), -1.0};
    const double scale = p.beta / (2.0 * pi);
    auto Ck = [&](double s) -> cplx {
        const double as = std::abs(s);
        const double r = std::exp(-as / scale);
        double acc = 0.0, head = 0.0, rk = 1.0;
        int k = 1;
        for (; k <= K; ++k) {
            rk *= r;
            acc += ck[static_cast<std::size_t>(k)] * rk;
            head += rk / k;
            if (rk < 1e-18) break;
        }
        double tail = scale * (-std::log1p(-std::min(r, 1.0 - 1e-300)) - head);
        tail += g2 * scale * scale * scale * (k > K ? std::pow(r, K + 1) : 0.0) /
                (2.0 * double(K) * double(K));
        cplx v = c_drude * std::exp(-p.gamma * as) + A * tail + acc;
        return s >= 0.0 ? v : std::conj(v);
    };

    const double wmax = std::max({std::abs(w), std::abs(wp), 1.0 / t});
    quad::Options inner_opt;
    inner_opt.abs_tol = std::max(1e-12, 0.02 * opt.abs_tol / (1.0 + t));
    inner_opt.rel_tol = 0.02 * opt.rel_tol;
    inner_opt.max_intervals = 2000;
    quad::Options outer_opt;
    outer_opt.abs_tol = std::max(1e-13, 0.2 * opt.abs_tol);
    outer_opt.rel_tol = 0.3 * opt.rel_tol;
    outer_opt.max_intervals = 2000;
    outer_opt.max_panel_width = std::min(t, pi / wmax);

    double inner_err = 0.0;
    auto F = [&](double t1) {
        // ∫₀^t e^{−iω′t₂} C(t₁−t₂) dt₂ with u² = |t₁−t₂| to absorb the
        // logarithmic kink of C at coincidence
        cplx acc{0.0, 0.0};
        if (t1 > 0.0) {
            auto g = [&](double u) {
                return std::exp(cplx{0.0, -wp * (t1 - u * u)}) * Ck(u * u) * 2.0 * u;
            };
            auto r = quad::integrate_complex(g, 0.0, std::sqrt(t1), inner_opt, {});
            acc += r.value;
            inner_err = std::max(inner_err, r.error);
        }
        if (t1 < t) {
            auto g = [&](double u) {
                return std::exp(cplx{0.0, -wp * (t1 + u * u)}) * Ck(-u * u) * 2.0 * u;
            };
            auto r = quad::integrate_complex(g, 0.0, std::sqrt(t - t1), inner_opt, {});
            acc += r.value;
            inner_err = std::max(inner_err, r.error);
        }
        return std::exp(cplx{0.0, w * t1}) * acc;
    };
    auto outer = quad::integrate_complex(F, 0.0, t, outer_opt, {});
    return {outer.value, outer.error + inner_err * t};
}

// ---------------------------------------------------------------------------
// principal-value kernel P(φ)
// ---------------------------------------------------------------------------

PvKernel::PvKernel(const bath::BathParams& p) : p_(p) {
    p.validate();
    range_ = 60.0 * std::max(p.gamma, 1.0 / p.beta);
    // thermal moment 2 ∫ J n dν for the large-|φ| asymptotics
    const double hi = 45.0 / p.beta + 50.0 * p.gamma;
    quad::Options o;
    o.abs_tol = 1e-14;
    o.rel_tol = 1e-11;
    auto f = [&](double nu) {
        const double bn = p.beta * nu;
        return bn < 700.0 ? thermal_weight(nu, p_) * std::exp(-bn) : 0.0;
    };
    thermal_moment_ = 2.0 * quad::integrate(f, 0.0, hi, o, {p.gamma}).value;

    const double step = std::min({p.gamma, 1.0 / p.beta, 1.0}) / 8.0;
    std::vector<double> xs, ys;
    const int n = static_cast<int>(std::ceil(2.0 * range_ / step)) + 1;
    xs.reserve(n);
    ys.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double x = -range_ + 2.0 * range_ * i / (n - 1);
        xs.push_back(x);
        ys.push_back(direct(x));
    }
    spline_ = quad::CubicSpline(std::move(xs), std::move(ys));
}

double PvKernel::direct(double phi) const {
    const auto& p = p_;
    const double X = std::max({p.gamma, 1.0 / p.beta, 1.0});
    const double Lm = std::min(-45.0 / p.beta - 5.0 * p.gamma, phi - 3.0 * X);
    const double Lp = std::max({50.0 * p.gamma, 45.0 / p.beta, phi + 3.0 * X, 2.0 * std::abs(phi)});

    const double Wphi = thermal_weight(phi, p);
    const double h = 1e-6 * X;
    const double dW = (thermal_weight(phi + h, p) - thermal_weight(phi - h, p)) / (2.0 * h);

    quad::Options o;
    o.abs_tol = 1e-14;
    o.rel_tol = 1e-11;
    o.max_intervals = 8000;
    auto reg = [&](double nu) {
        const double dd = phi - nu;
        if (std::abs(dd) < 1e-9 * X) return -dW;
        return (thermal_weight(nu, p) - Wphi) / dd;
    };
    double val = quad::integrate(reg, phi - X, phi + X, o, {phi}).value;

    auto outer = [&](double nu) { return thermal_weight(nu, p) / (phi - nu); };
    val += quad::integrate(outer, Lm, phi - X, o, {0.0, -p.gamma, p.gamma}).value;
    val += quad::integrate(outer, phi + X, Lp, o, {p.gamma, 5.0 * p.gamma}).value;

    // closed-form J-only tail beyond Lp
    const double g2 = p.gamma * p.gamma;
    const double cc = phi / (phi * phi + g2);
    const double bb = -g2 / (phi * phi + g2);
    double tail = cc * std::log((Lp - phi) / std::sqrt(Lp * Lp + g2));
    tail += bb / p.gamma * (0.5 * pi - std::atan(Lp / p.gamma));
    val += 2.0 * p.lambda * p.gamma * tail;
    return val;
}

double PvKernel::asymptotic(double phi) const {
    const double g2 = p_.gamma * p_.gamma;
    const double pj = 2.0 * p_.lambda * p_.gamma *
                      (phi * std::log(std::abs(phi) / p_.gamma) - 0.5 * pi * p_.gamma) /
                      (phi * phi + g2);
    return pj + thermal_moment_ / phi;
}

double PvKernel::operator()(double phi) const {
    if (std::abs(phi) <= range_) return spline_(phi);
    return asymptotic(phi);
}

std::shared_ptr<const PvKernel> pv_kernel(const bath::BathParams& p) {
    struct Key {
        double l, g, b;
        bool operator<(const Key& o) const {
            return std::tie(l, g, b) < std::tie(o.l, o.g, o.b);
        }
    };
    static std::mutex m;
    static std::map<Key, std::shared_ptr<const PvKernel>> reg;
    const Key k{p.lambda, p.gamma, p.beta};
    std::lock_guard<std::mutex> lock(m);
    auto it = reg.find(k);
    if (it != reg.end()) return it->second;
    auto ptr = std::make_shared<const PvKernel>(p);
    reg.emplace(k, ptr);
    return ptr;
}

// ---------------------------------------------------------------------------
// ξ(ω,ω′,t)
// ---------------------------------------------------------------------------

XiResult xi(double w, double wp, double t, const bath::BathParams& p, const RateOptions& opt) {
    p.validate();
    if (t < 0.0) throw std::invalid_argument("xi: t >= 0 required");
    if (t == 0.0 || p.lambda == 0.0) return {0.0, 0.0};

    auto kern = pv_kernel(p);
    const double M = std::max({50.0 * p.gamma, 45.0 / p.beta, 40.0 * pi / t});
    const double lo = std::min({w, wp, 0.0}) - M;
    const double hi = std::max({w, wp, 0.0}) + M;

    auto f = [&](double phi) {
        return sinc(0.5 * (w - phi) * t) * sinc(0.5 * (wp - phi) * t) * (*kern)(phi);
    };
    quad::Options qopt;
    qopt.abs_tol = std::max(1e-16, 0.2 * opt.abs_tol / (t * t));
    qopt.rel_tol = 0.3 * opt.rel_tol;
    qopt.max_intervals = 60000;
    qopt.max_panel_width = std::max(2.0 * pi / t, (hi - lo) / 4096.0);
    auto main =
        quad::integrate(f, lo, hi, qopt, {w, wp, 0.0, p.gamma, -p.gamma, 5.0 * p.gamma, -5.0 * p.gamma});

    // smooth tails of the sinc product: t² sinc sinc = 2[cosΔ − cos((2φ−ω−ω′)t/2)]/((φ−ω)(φ−ω′))
    const double cosD = std::cos(0.5 * (w - wp) * t);
    const double s_sum = w + wp;
    auto u_of = [&](double phi) { return kern->asymptotic(phi) / ((phi - w) * (phi - wp)); };
    auto geometric_tail = [&](double start, int dir) {
        double acc = 0.0;
        double a = start;
        for (int k = 0; k < 40; ++k) {
            const double b = 2.0 * a;
            auto g = [&](double x) { return u_of(dir * x); };
            quad::Options go;
            go.abs_tol = 1e-18;
            go.rel_tol = 1e-10;
            go.max_intervals = 64;
            const double piece = quad::integrate(g, a, b, go).value;
            acc += piece;
            if (std::abs(piece) < 1e-16 * std::abs(acc) + 1e-300) break;
            a = b;
        }
        return acc;
    };
    const double A_R = geometric_tail(hi, +1);
    const double A_L = geometric_tail(-lo, -1);  // ∫_{-∞}^{lo} u dφ = ∫_{−lo}^{∞} u(−x) dx

    const double uR = u_of(hi), uL = u_of(lo);
    const double oscR = uR * std::sin(0.5 * (2.0 * hi - s_sum) * t) / t;
    const double oscL = -uL * std::sin(0.5 * (2.0 * lo - s_sum) * t) / t;
    double value = t * t / (2.0 * pi) * main.value + (cosD * (A_R + A_L) + oscR + oscL) / pi;
    double err = t * t / (2.0 * pi) * main.error + (std::abs(uR) + std::abs(uL)) / (pi * t) +
                 1e-4 * (std::abs(A_R) + std::abs(A_L));
    if (!main.converged && err > 100.0 * std::max(opt.abs_tol, opt.rel_tol * std::abs(value)))
        throw RateConvergenceError("xi: quadrature did not converge (estimate " +
                                       std::to_string(err) + ")",
                                   err);
    return {value, err};
}

// ---------------------------------------------------------------------------
// rate table
// ---------------------------------------------------------------------------

RateTable rate_table(double t, double omega0, const bath::BathParams& p, const RateOptions& opt) {
    RateTable tab;
    tab.t = t;
    tab.omega0 = omega0;
    tab.has_xi = opt.with_xi;
    const FreqLabel L[3] = {FreqLabel::Minus, FreqLabel::Plus, FreqLabel::Zero};
    for (int i = 0; i < 3; ++i) {
        for (int j = i; j < 3; ++j) {
            const double wi = label_frequency(L[i], omega0);
            const double wj = label_frequency(L[j], omega0);
            const cplx g = gamma(wi, wj, t, p, opt).value;
            tab.gamma[i * 3 + j] = g;
            tab.gamma[j * 3 + i] = std::conj(g);
            if (opt.with_xi) {
                const double x = xi(wi, wj, t, p, opt).value;
                tab.xi[i * 3 + j] = x;
                tab.xi[j * 3 + i] = x;
            }
        }
    }
    return tab;
}

RateTableCache::RateTableCache(double omega0, bath::BathParams p, RateOptions opt)
    : omega0_(omega0), params_(p), opt_(opt) {}

RateTable RateTableCache::at(double t) {
    long long key = 0;
    static_assert(sizeof(key) == sizeof(t));
    std::memcpy(&key, &t, sizeof(t));
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }
    RateTable tab = rate_table(t, omega0_, params_, opt_);
    std::lock_guard<std::mutex> lock(mutex_);
    cache_.emplace(key, tab);
    return tab;
}

std::size_t RateTableCache::size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return cache_.size();
}

}  // namespace spinboson::rates
