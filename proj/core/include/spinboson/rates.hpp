// rates.hpp — cumulant decay integrals Γ(ω,ω′,t) and Lamb-shift integrals
// ξ(ω,ω′,t) for the Drude-Lorentz bath, plus the memoized per-time table.
//
// Γ(ω,ω′,t) = t² e^{i(ω−ω′)t/2} ∫₀^∞ dν J(ν) [(n_ν+1) sinc((ω−ν)t/2) sinc((ω′−ν)t/2)
//                                            + n_ν sinc((ω+ν)t/2) sinc((ω′+ν)t/2)]
// ξ(ω,ω′,t) = (t²/2π) ∫_{−∞}^∞ dφ sinc((ω−φ)t/2) sinc((ω′−φ)t/2)
//                     · P.V.∫₀^∞ dν J(ν) [(n_ν+1)/(φ−ν) + n_ν/(φ+ν)]
// (real symmetric convention; the sgn-kernel definition carries an extra
// phase e^{i(ω−ω′)t/2} that the generator convention drops).

#pragma once

#include <array>
#include <complex>
#include <memory>
#include <mutex>
#include <unordered_map>

#include "spinboson/bath.hpp"
#include "spinboson/quad.hpp"

namespace spinboson::rates {

// label → frequency map fixed by the text: ω₀ → Minus, −ω₀ → Plus, 0 → Zero
enum class FreqLabel : int { Minus = 0, Plus = 1, Zero = 2 };

double label_frequency(FreqLabel l, double omega0);

struct RateOptions {
    double abs_tol{1e-9};
    double rel_tol{1e-8};
    int n_matsubara{8};  // expansion order for the time-domain oracle
    bool with_xi{true};
    bool operator==(const RateOptions&) const = default;
};

struct RateConvergenceError : quad::ConvergenceError {
    using quad::ConvergenceError::ConvergenceError;
};

struct RateResult {
    std::complex<double> value;
    double error{0.0};
};

struct XiResult {
    double value;
    double error{0.0};
};

// frequency-domain evaluation, adaptive quadrature on [0, ν_max] with
// ν_max = max(50γ, |ω|+|ω′|+40π/t, 45/β) plus closed-form oscillatory tail
RateResult gamma(double omega, double omega_p, double t, const bath::BathParams& p,
                 const RateOptions& opt = {});

// independent 2-D time-domain oracle over the (tail-refined) correlation expansion
RateResult gamma_oracle(double omega, double omega_p, double t, const bath::BathParams& p,
                        const RateOptions& opt = {});

XiResult xi(double omega, double omega_p, double t, const bath::BathParams& p,
            const RateOptions& opt = {});

struct RateTable {
    double t{0.0};
    double omega0{1.0};
    bool has_xi{false};
    std::array<std::complex<double>, 9> gamma{};  // [a*3+b], labels (Minus, Plus, Zero)
    std::array<double, 9> xi{};

    std::complex<double> g(FreqLabel a, FreqLabel b) const {
        return gamma[static_cast<int>(a) * 3 + static_cast<int>(b)];
    }
    double x(FreqLabel a, FreqLabel b) const {
        return xi[static_cast<int>(a) * 3 + static_cast<int>(b)];
    }
};

// fills the upper triangle by quadrature and closes the table with
// Γ_ab = conj(Γ_ba), ξ_ab = ξ_ba
RateTable rate_table(double t, double omega0, const bath::BathParams& p,
                     const RateOptions& opt = {});

// thread-safe memoization of rate_table over t for fixed (ω₀, bath, options)
class RateTableCache {
public:
    RateTableCache(double omega0, bath::BathParams p, RateOptions opt = {});
    RateTable at(double t);
    std::size_t size() const;

private:
    double omega0_;
    bath::BathParams params_;
    RateOptions opt_;
    mutable std::mutex mutex_;
    std::unordered_map<long long, RateTable> cache_;
};

// P(φ) = P.V.∫₀^∞ dν J(ν)[(n+1)/(φ−ν) + n/(φ+ν)], cached per bath
class PvKernel {
public:
    explicit PvKernel(const bath::BathParams& p);
    double operator()(double phi) const;  // spline inside, asymptotic outside
    double direct(double phi) const;      // subtract-and-add PV evaluation
    double asymptotic(double phi) const;

private:
    bath::BathParams p_;
    double range_;
    double thermal_moment_;  // 2 ∫ J n dν
    quad::CubicSpline spline_;
};

std::shared_ptr<const PvKernel> pv_kernel(const bath::BathParams& p);

}  // namespace spinboson::rates
