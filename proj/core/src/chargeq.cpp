#include "spinboson/chargeq.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace spinboson::chargeq {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;

void CpbParams::validate() const {
    if (omega0 * omega0 + delta_x * delta_x + delta_y * delta_y <= 0.0)
        throw std::invalid_argument("CpbParams: Omega must be > 0");
}

RotatedCoupling rotate_to_eigenbasis(const CpbParams& p) {
    p.validate();
    const Mat2 sx = (Mat2() << 0, 1, 1, 0).finished();
    const Mat2 sy = (Mat2() << 0, cplx{0, -1}, cplx{0, 1}, 0).finished();
    const Mat2 sz = (Mat2() << 1, 0, 0, -1).finished();
    const Mat2 hs = 0.5 * (p.omega0 * sz + p.delta_x * sx + p.delta_y * sy);

    Eigen::SelfAdjointEigenSolver<Mat2> es(hs);
    // eigenvalues ascending: column 1 is |+⟩ (E = +Ω/2), column 0 is |−⟩
    Eigen::Vector2cd plus = es.eigenvectors().col(1);
    Eigen::Vector2cd minus = es.eigenvectors().col(0);
    auto fix_phase = [](Eigen::Vector2cd& v) {
        const int lead = std::abs(v(0)) >= std::abs(v(1)) ? 0 : 1;
        const cplx ph = v(lead) / std::abs(v(lead));
        v /= ph;
    };
    fix_phase(plus);
    fix_phase(minus);

    RotatedCoupling out;
    out.Omega = (es.eigenvalues()(1) - es.eigenvalues()(0));
    out.basis.col(0) = plus;
    out.basis.col(1) = minus;

    const Mat2 szr = out.basis.adjoint() * sz * out.basis;  // σ_z in the (|+⟩,|−⟩) basis
    out.c_z = 0.5 * (szr * sz).trace().real();
    out.c_x = 0.5 * (szr * sx).trace().real();
    out.c_y = 0.5 * (szr * sy).trace().real();
    return out;
}

}  // namespace spinboson::chargeq
