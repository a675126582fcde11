// refsolvers.hpp — reference dynamics: Davies-GKLS, Bloch-Redfield, the
// time-dependent Redfield (TCL2) equation, and the exact dephasing exponent,
// sharing one adaptive embedded Runge–Kutta stepper.

#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "spinboson/bath.hpp"
#include "spinboson/cumulant.hpp"
#include "spinboson/trajectory.hpp"

namespace spinboson::refsolvers {

using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;

enum class GeneratorKind { DaviesGKLS, BlochRedfield, RedfieldTD, HEOM, ExactDephasing };
std::string to_string(GeneratorKind k);

struct OdeConfig {
    double rel_tol{1e-9};
    double abs_tol{1e-12};
    double max_step{0.0};  // 0 = unlimited
};

// Dormand–Prince 5(4) with step clamping to every requested output time;
// hermiticity enforced by symmetrization with a drift diagnostic
Trajectory ode_integrate(const std::function<Mat4(double)>& generator, const Mat2& rho0,
                         const std::vector<double>& times, const OdeConfig& ode,
                         const std::string& solver_id = "ode");

// time-independent Davies generator (Schrödinger picture, Lamb shift omitted);
// rates 2πJ(ω₀)(n+1), 2πJ(ω₀)n and the ω→0 limit of 2πJ(ω)(n+1)
Mat4 davies_gkls(const cumulant::SystemParams& sys, const bath::BathParams& bath);

// lim_{ω→0} 2πJ(ω) coth(βω/2) = 8πλ/(βγ): the asymptotic dephasing (coherence
// decay) rate; the GKSL σ_z channel carries half of it
double zero_frequency_rate(const bath::BathParams& bath);

// asymptotic-kernel Redfield without secular approximation; kernels
// Γ(ω,∞) = ∫₀^∞ e^{iωs} C(s) ds from the correlation expansion (analytic tail
// included); the Lamb-shift commutator is excluded unless requested
Mat4 bloch_redfield(const cumulant::SystemParams& sys, const bath::BathParams& bath,
                    int n_matsubara = 8, bool include_lamb_shift = false);

// half-Fourier kernel Γ(ω,t) = ∫₀^t e^{iωs} C(s) ds over the Matsubara
// expansion with the analytic k→∞ remainder (t = ∞ when t < 0)
std::complex<double> half_fourier_kernel(double omega, double t, const bath::BathParams& bath,
                                         int n_matsubara = 8);

// time-dependent Redfield generator at time t: interaction picture by default
// (vanishes at t = 0); the Schrödinger-frame variant drops the e^{i(ω−ω′)t}
// phases and includes −i[H_S,·], converging to bloch_redfield as t → ∞
Mat4 redfield_td_generator(const cumulant::SystemParams& sys, const bath::BathParams& bath,
                           double t, int n_matsubara = 8, bool schroedinger_frame = false);

// interaction-picture TCL2 integration with time-dependent kernels,
// converted to the Schrödinger picture at the outputs
Trajectory redfield_td(const cumulant::SystemParams& sys, const bath::BathParams& bath,
                       const Mat2& rho0, const std::vector<double>& times,
                       const OdeConfig& ode = {}, int n_matsubara = 8);

// exact pure-dephasing exponent γ(t); evaluates both integral forms and
// checks their agreement
double exact_dephasing(const bath::BathParams& bath, double t);

}  // namespace spinboson::refsolvers
