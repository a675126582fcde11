// bath.hpp — Drude-Lorentz spectral density, thermal occupation, and
// exponential decompositions of the bath correlation function.
//
// Conventions (ħ = k_B = 1): J(ω) = 2λωγ/(γ² + ω²). The correlation function
// handled by this module is the reduced one,
//   C(t) = (1/π) ∫₀^∞ dω J(ω) [coth(βω/2) cos ωt − i sin ωt],
// i.e. the convention whose Drude-Lorentz expansion reads
//   C(t) = λγ(cot(βγ/2) − i) e^{−γt} + Σ_k (4λγ/β) ν_k e^{−ν_k t}/(ν_k² − γ²).
// The decay/kernel normalization used by the rate integrals (Davies rate
// 2πJ(ω)(n+1)) corresponds to π·C(t); consumers obtain it via kernel().

#pragma once

#include <complex>
#include <string>
#include <vector>

#include "spinboson/quad.hpp"

namespace spinboson::bath {

struct BathParams {
    double lambda{0.05};  // reorganization energy λ ≥ 0
    double gamma{5.0};    // cutoff γ > 0
    double beta{2.0};     // inverse temperature β > 0
    void validate() const;
    bool operator==(const BathParams&) const = default;
};

double spectral_density(double omega, const BathParams& p);

// 1/(e^{βν} − 1); throws std::domain_error for ν ≤ 0
double bose_einstein(double nu, double beta);

enum class Decomposition { Matsubara, Pade, Fitted };

std::string to_string(Decomposition d);

// kernel-normalized expansion (π × reduced amplitudes); what the rate
// integrals, Redfield kernels and HEOM consume
struct KernelExpansion {
    std::vector<std::complex<double>> amplitudes;
    std::vector<double> rates;
};

struct CorrelationExpansion {
    std::vector<std::complex<double>> amplitudes;  // reduced convention
    std::vector<double> rates;                     // all > 0; rates[0] = γ
    int n_matsubara{8};
    BathParams params;
    Decomposition kind{Decomposition::Matsubara};
    double fit_residual{0.0};  // Fitted only: max coherence-level fit error

    // truncated sum Σ a_k e^{−ν_k|t|}, conjugated for t < 0
    std::complex<double> sum(double t) const;
    // sum plus the analytic k>K Matsubara remainder (identity for Pade/Fitted)
    std::complex<double> refined(double t) const;
    // estimate of the neglected remainder at time t
    double tail_estimate(double t) const;

    KernelExpansion kernel() const;
};

CorrelationExpansion correlation_expansion(const BathParams& p, int n_matsubara,
                                           Decomposition kind = Decomposition::Matsubara);

struct BathConvergenceError : quad::ConvergenceError {
    using quad::ConvergenceError::ConvergenceError;
};

// truncated Matsubara sum with convergence check; throws BathConvergenceError
// when the tail estimate at t exceeds tail_tol
std::complex<double> correlation_function(double t, const BathParams& p, int n_matsubara,
                                          double tail_tol = 1e-6);

// exact pure-dephasing exponent for unit coupling,
//   γ(t) = 4 ∫₀^∞ dω J(ω) coth(βω/2) (1 − cos ωt)/ω²,
// by tail-corrected adaptive quadrature; _sinc evaluates the equivalent
// 2t² ∫ J coth sinc²(ωt/2) form.
double dephasing_exponent(double t, const BathParams& p);
double dephasing_exponent_sinc(double t, const BathParams& p);

// [N−1/N] Pade approximant of coth: coth(x) ≈ 1/x + Σ_j 2η_j x/(x² + ξ_j²)
struct PadePoles {
    std::vector<double> xi;
    std::vector<double> eta;
};
PadePoles pade_coth_poles(int n);

struct FitOptions {
    int n_exponents{8};
    double rate_cap_factor{30.0};  // max fitted rate = factor · max(γ, 2π/β, 1)
    int max_iterations{200};
};
CorrelationExpansion fitted_expansion(const BathParams& p, const FitOptions& opt = {});

}  // namespace spinboson::bath
