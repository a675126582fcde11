#include "spinboson/quad.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace spinboson::quad {

namespace {

// G7-K15 nodes/weights (abscissa, Gauss weight, Kronrod weight)
constexpr double kNodes[8][3] = {
    {0.000000000000000, 0.417959183673469, 0.209482141084728},
    {0.405845151377397, 0.381830050505119, 0.190350578064785},
    {0.741531185599394, 0.279705391489277, 0.140653259715525},
    {0.949107912342759, 0.129484966168870, 0.063092092629979},
    {0.207784955007898, 0.0, 0.204432940075298},
    {0.586087235467691, 0.0, 0.169004726639267},
    {0.864864423359769, 0.0, 0.104790010322250},
    {0.991455371120813, 0.0, 0.022935322010529},
};

template <class T>
struct Panel {
    double a, b;
    T value;
    double error;
};

template <class T, class F>
Panel<T> gk15(F& f, double a, double b, std::size_t& evals) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    T y0 = f(c);
    T g7 = kNodes[0][1] * y0;
    T k15 = kNodes[0][2] * y0;
    double resabs = kNodes[0][2] * std::abs(y0);
    for (int i = 1; i < 8; ++i) {
        const double dx = h * kNodes[i][0];
        T yl = f(c - dx);
        T yr = f(c + dx);
        k15 += kNodes[i][2] * (yl + yr);
        g7 += kNodes[i][1] * (yl + yr);
        resabs += kNodes[i][2] * (std::abs(yl) + std::abs(yr));
    }
    evals += 15;
    g7 *= h;
    k15 *= h;
    resabs *= std::abs(h);
    double raw = std::abs(k15 - g7);
    // QUADPACK-style error heuristic, inflation capped at 50x the raw estimate
    double err = raw;
    if (resabs > 0.0 && raw > 0.0) {
        const double scaled = std::pow(200.0 * raw / resabs, 1.5);
        err = std::min(resabs * std::min(1.0, scaled), 50.0 * raw);
    }
    return {a, b, k15, err};
}

template <class T, class F>
Result<T> adaptive(F f, double a, double b, const Options& opt,
                   const std::vector<double>& breakpoints) {
    Result<T> out;
    if (a == b) return out;

    std::vector<double> edges;
    edges.push_back(a);
    for (double p : breakpoints)
        if (p > a && p < b) edges.push_back(p);
    edges.push_back(b);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    auto cmp = [](const Panel<T>& x, const Panel<T>& y) { return x.error < y.error; };
    std::priority_queue<Panel<T>, std::vector<Panel<T>>, decltype(cmp)> heap(cmp);

    T total{};
    double total_err = 0.0;
    std::size_t count = 0;
    auto push_range = [&](double lo, double hi) {
        if (opt.max_panel_width > 0.0) {
            const int nsub = std::max(1, static_cast<int>(std::ceil((hi - lo) / opt.max_panel_width)));
            const double w = (hi - lo) / nsub;
            for (int i = 0; i < nsub; ++i) {
                auto p = gk15<T>(f, lo + i * w, lo + (i + 1) * w, out.evals);
                total += p.value;
                total_err += p.error;
                heap.push(p);
                ++count;
            }
        } else {
            auto p = gk15<T>(f, lo, hi, out.evals);
            total += p.value;
            total_err += p.error;
            heap.push(p);
            ++count;
        }
    };
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) push_range(edges[i], edges[i + 1]);

    auto target = [&] { return std::max(opt.abs_tol, opt.rel_tol * std::abs(total)); };
    while (total_err > target() && count < opt.max_intervals && !heap.empty()) {
        Panel<T> worst = heap.top();
        heap.pop();
        total -= worst.value;
        total_err -= worst.error;
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {  // cannot subdivide further
            total += worst.value;
            total_err += worst.error;
            break;
        }
        auto l = gk15<T>(f, worst.a, mid, out.evals);
        auto r = gk15<T>(f, mid, worst.b, out.evals);
        total += l.value + r.value;
        total_err += l.error + r.error;
        heap.push(l);
        heap.push(r);
        ++count;
    }

    // compensated re-accumulation of the final panel set for a stable total
    std::vector<Panel<T>> panels;
    panels.reserve(heap.size());
    while (!heap.empty()) {
        panels.push_back(heap.top());
        heap.pop();
    }
    std::sort(panels.begin(), panels.end(),
              [](const Panel<T>& x, const Panel<T>& y) { return std::abs(x.value) < std::abs(y.value); });
    T sum{};
    T comp{};
    double err = 0.0;
    for (const auto& p : panels) {
        T y = p.value - comp;
        T t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        err += p.error;
    }
    out.value = sum;
    out.error = err;
    out.converged = err <= std::max(opt.abs_tol, opt.rel_tol * std::abs(sum)) * 10.0;
    return out;
}

}  // namespace

Result<double> integrate(const std::function<double(double)>& f, double a, double b,
                         const Options& opt, const std::vector<double>& breakpoints) {
    return adaptive<double>(f, a, b, opt, breakpoints);
}

Result<std::complex<double>> integrate_complex(const std::function<std::complex<double>(double)>& f,
                                               double a, double b, const Options& opt,
                                               const std::vector<double>& breakpoints) {
    return adaptive<std::complex<double>>(f, a, b, opt, breakpoints);
}

std::complex<double> exp_integral_tail(double x, int m) {
    if (x < 35.0) throw std::invalid_argument("exp_integral_tail: asymptotic series needs x >= 35");
    std::complex<double> term{0.0, 1.0};
    std::complex<double> sum = term;
    for (int k = 0; k < 256; ++k) {
        term *= std::complex<double>(0.0, -1.0) * (static_cast<double>(m + k) / x);
        if (std::abs(term) > 1e3) break;  // series started diverging
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return std::polar(1.0, x) * std::pow(x, -m) * sum;
}

namespace {

double li2(double x) {
    // dilogarithm for x in [0,1]
    if (x > 0.5) {
        const double pi2_6 = 1.6449340668482264;
        if (x >= 1.0) return pi2_6;
        return pi2_6 - std::log(x) * std::log1p(-x) - li2(1.0 - x);
    }
    double term = x, sum = x;
    for (int k = 2; k < 2000; ++k) {
        term *= x;
        const double add = term / (static_cast<double>(k) * k);
        sum += add;
        if (add < 1e-18 * sum) break;
    }
    return sum;
}

}  // namespace

double partial_polylog(double q, int m, int k0) {
    if (q <= 0.0) return 0.0;
    if (q > 1.0) throw std::invalid_argument("partial_polylog: q must be <= 1");
    if (m == 1) {
        if (q >= 1.0) throw std::invalid_argument("partial_polylog: m=1 diverges at q=1");
        double head = 0.0, qk = 1.0;
        for (int k = 1; k <= k0; ++k) {
            qk *= q;
            head += qk / k;
        }
        return -std::log1p(-q) - head;
    }
    if (m == 2 && q > 1.0 - 1e-4) {
        double head = 0.0, qk = 1.0;
        for (int k = 1; k <= k0; ++k) {
            qk *= q;
            head += qk / (static_cast<double>(k) * k);
        }
        return li2(q) - head;
    }
    double sum = 0.0;
    double qk = std::pow(q, k0);
    const long kdirect = 2000;
    long k = k0;
    while (++k <= k0 + kdirect) {
        qk *= q;
        const double add = qk * std::pow(static_cast<double>(k), -m);
        sum += add;
        if (add < 1e-18 * (sum + 1e-300)) return sum;
    }
    // midpoint Euler–Maclaurin remainder for the slowly-converging case
    const double a = -std::log(q);
    const double kk = static_cast<double>(k) - 0.5;
    auto f = [&](double x) { return std::exp(-a * x) * std::pow(x, -m); };
    Options opt;
    opt.abs_tol = 1e-18;
    opt.rel_tol = 1e-13;
    opt.max_intervals = 256;
    auto tail = integrate([&](double u) { return f(kk / u) * (kk / (u * u)); }, 1e-12, 1.0, opt);
    const double h = 1e-3 * kk;
    const double fp = (f(kk + h) - f(kk - h)) / (2.0 * h);
    return sum + tail.value + fp / 24.0;
}

Result<std::complex<double>> euler_maclaurin_tail(const std::function<std::complex<double>(double)>& f,
                                                  double k0) {
    const double kk = k0 + 0.5;
    Options opt;
    opt.abs_tol = 1e-16;
    opt.rel_tol = 1e-12;
    auto g = [&](double u) { return f(kk / u) * (kk / (u * u)); };
    auto integral = integrate_complex(g, 1e-12, 1.0, opt);
    const double h = 1e-3 * std::max(1.0, kk * 1e-3);
    const std::complex<double> fp = (f(kk + h) - f(kk - h)) / (2.0 * h);
    const std::complex<double> f3 =
        (f(kk + 2 * h) - 2.0 * f(kk + h) + 2.0 * f(kk - h) - f(kk - 2 * h)) / (2.0 * h * h * h);
    Result<std::complex<double>> out;
    out.value = integral.value + fp / 24.0 - 7.0 / 5760.0 * f3;
    out.error = integral.error + std::abs(f3) * (7.0 / 5760.0);
    out.evals = integral.evals + 6;
    out.converged = integral.converged;
    return out;
}

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 3 || y_.size() != n) throw std::invalid_argument("CubicSpline: need >=3 points");
    m_.assign(n, 0.0);
    std::vector<double> diag(n, 0.0), rhs(n, 0.0), sub(n, 0.0), sup(n, 0.0);
    diag[0] = diag[n - 1] = 1.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double h0 = x_[i] - x_[i - 1];
        const double h1 = x_[i + 1] - x_[i];
        sub[i] = h0 / 6.0;
        diag[i] = (h0 + h1) / 3.0;
        sup[i] = h1 / 6.0;
        rhs[i] = (y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0;
    }
    for (std::size_t i = 1; i < n; ++i) {
        const double w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    m_[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) m_[i] = (rhs[i] - sup[i] * m_[i + 1]) / diag[i];
}

double CubicSpline::operator()(double x) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t i = (it == x_.begin()) ? 1 : static_cast<std::size_t>(it - x_.begin());
    i = std::min(std::max<std::size_t>(i, 1), x_.size() - 1);
    const double h = x_[i] - x_[i - 1];
    const double a = (x_[i] - x) / h;
    const double b = (x - x_[i - 1]) / h;
    return a * y_[i - 1] + b * y_[i] +
           ((a * a * a - a) * m_[i - 1] + (b * b * b - b) * m_[i]) * h * h / 6.0;
}

}  // namespace spinboson::quad
