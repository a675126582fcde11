// quad.hpp — adaptive Gauss-Kronrod quadrature, oscillatory tail integrals,
// and Matsubara-style tail sums shared by the rate and bath modules.

#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace spinboson::quad {

struct Options {
    double abs_tol{1e-12};
    double rel_tol{1e-10};
    std::size_t max_intervals{4000};
    // seed panels no wider than this (0 = no limit); used to resolve oscillations
    double max_panel_width{0.0};
};

template <class T>
struct Result {
    T value{};
    double error{0.0};
    std::size_t evals{0};
    bool converged{true};
};

struct ConvergenceError : std::runtime_error {
    double estimate;
    ConvergenceError(const std::string& what, double est)
        : std::runtime_error(what), estimate(est) {}
};

Result<double> integrate(const std::function<double(double)>& f, double a, double b,
                         const Options& opt = {},
                         const std::vector<double>& breakpoints = {});

Result<std::complex<double>> integrate_complex(const std::function<std::complex<double>(double)>& f,
                                               double a, double b, const Options& opt = {},
                                               const std::vector<double>& breakpoints = {});

// I_m(x) = ∫_x^∞ e^{iu} u^{-m} du via the asymptotic series; requires x ≳ 35.
// Re I_m = ∫ cos(u)/u^m, Im I_m = ∫ sin(u)/u^m.
std::complex<double> exp_integral_tail(double x, int m);

// Σ_{k>k0} q^k / k^m for q ∈ [0,1], m ≥ 1 (m=1 and m=2 use closed forms near q=1)
double partial_polylog(double q, int m, int k0);

// Σ_{k>k0} f(k) for smooth decaying f, by midpoint Euler–Maclaurin:
// ∫_{k0+1/2}^∞ f + f'(k0+1/2)/24 - 7 f'''(k0+1/2)/5760.
Result<std::complex<double>> euler_maclaurin_tail(const std::function<std::complex<double>(double)>& f,
                                                  double k0);

// natural cubic spline on a strictly increasing grid
class CubicSpline {
public:
    CubicSpline() = default;
    CubicSpline(std::vector<double> x, std::vector<double> y);
    double operator()(double x) const;
    bool covers(double x) const { return !x_.empty() && x >= x_.front() && x <= x_.back(); }

private:
    std::vector<double> x_, y_, m_;  // m_: second derivatives
};

}  // namespace spinboson::quad
