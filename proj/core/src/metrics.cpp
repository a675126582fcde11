#include "spinboson/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spinboson/diag.hpp"

namespace spinboson::metrics {

namespace {

// clamp tiny negative eigenvalues for metric evaluation only
double clamped_det(const Mat2& rho, bool* clamped) {
    Eigen::SelfAdjointEigenSolver<Mat2> es(0.5 * (rho + rho.adjoint()));
    double l0 = es.eigenvalues()(0), l1 = es.eigenvalues()(1);
    if (l0 < 0.0 || l1 < 0.0) {
        if (l0 < -1e-8 || l1 < -1e-8)
            diag("metrics: clamping eigenvalue " + std::to_string(std::min(l0, l1)) +
                 " well below zero; input is not a valid state");
        if (clamped) *clamped = true;
        l0 = std::max(l0, 0.0);
        l1 = std::max(l1, 0.0);
    }
    return l0 * l1;
}

}  // namespace

double fidelity(const Mat2& rho, const Mat2& sigma) {
    bool clamped = false;
    const double d1 = clamped_det(rho, &clamped);
    const double d2 = clamped_det(sigma, &clamped);
    const double f = (rho * sigma).trace().real() + 2.0 * std::sqrt(d1 * d2);
    return std::clamp(f, 0.0, 1.0 + 1e-12);
}

double fidelity_general(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& sigma) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (rho + rho.adjoint()));
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    Eigen::MatrixXcd sqrt_rho = es.eigenvectors() * ev.cwiseSqrt().asDiagonal() *
                                es.eigenvectors().adjoint();
    Eigen::MatrixXcd inner = sqrt_rho * sigma * sqrt_rho;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es2(0.5 * (inner + inner.adjoint()));
    const double tr = es2.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    return tr * tr;
}

double trace_distance(const Mat2& rho, const Mat2& sigma) {
    const Mat2 d = 0.5 * ((rho - sigma) + (rho - sigma).adjoint());
    Eigen::SelfAdjointEigenSolver<Mat2> es(d);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

ComparisonResult compare(const Trajectory& a, const Trajectory& b) {
    if (a.times.size() != b.times.size())
        throw std::invalid_argument("compare: trajectory grids differ in length");
    for (std::size_t i = 0; i < a.times.size(); ++i)
        if (std::abs(a.times[i] - b.times[i]) > 1e-12 * std::max(1.0, std::abs(a.times[i])))
            throw std::invalid_argument("compare: trajectory grids differ");
    ComparisonResult out;
    out.times = a.times;
    out.fidelity.resize(a.times.size());
    out.trace_distance.resize(a.times.size());
    for (std::size_t i = 0; i < a.times.size(); ++i) {
        out.fidelity[i] = fidelity(a.states[i], b.states[i]);
        out.trace_distance[i] = trace_distance(a.states[i], b.states[i]);
        if ((a.times[i] > 0.0 || a.times.size() == 1) && out.fidelity[i] < out.min_fidelity) {
            out.min_fidelity = out.fidelity[i];
            out.argmin_time = a.times[i];
        }
    }
    return out;
}

std::pair<double, double> min_fidelity(const Trajectory& a, const Trajectory& b) {
    const auto cmp = compare(a, b);
    return {cmp.min_fidelity, cmp.argmin_time};
}

NmWitness nm_witness(const std::function<Trajectory(const Mat2&)>& solve, const Mat2& rho0_a,
                     const Mat2& rho0_b, const std::vector<double>& times, double epsilon) {
    const Trajectory ta = solve(rho0_a);
    const Trajectory tb = solve(rho0_b);
    std::vector<double> td(times.size());
    for (std::size_t i = 0; i < times.size(); ++i)
        td[i] = trace_distance(ta.states[i], tb.states[i]);

    NmWitness w;
    for (std::size_t i = 1; i + 1 < times.size(); ++i) {
        const double dt = times[i + 1] - times[i - 1];
        if (dt <= 0.0) continue;
        const double d = (td[i + 1] - td[i - 1]) / dt;
        w.times.push_back(times[i]);
        w.derivative.push_back(d);
        w.max_derivative = std::max(w.max_derivative, d);
        if (d > epsilon) {
            w.non_markovian = true;
            w.integrated_positive += d * 0.5 * (times[i + 1] - times[i - 1]);
        }
    }
    return w;
}

}  // namespace spinboson::metrics
