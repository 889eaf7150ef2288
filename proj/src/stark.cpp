#include "evatrap/stark.hpp"
#include "evatrap/error.hpp"
#include "evatrap/vector_ops.hpp"

#include <cmath>

namespace evatrap {

QuantizationFrame QuantizationFrame::from_axis(const Eigen::Vector3d& axis) {
    if (!axis.allFinite() || std::abs(axis.norm() - 1.0) > 1e-9)
        throw InvalidArgument("quantization axis must be a unit vector");
    QuantizationFrame frame;
    frame.axis = axis;
    Eigen::Vector3d seed = std::abs(axis.x()) < 0.9 ? Eigen::Vector3d::UnitX()
                                                     : Eigen::Vector3d::UnitY();
    frame.e1 = (seed - seed.dot(axis) * axis).normalized();
    frame.e2 = axis.cross(frame.e1);
    return frame;
}

SpinMatrices::SpinMatrices(HalfInteger f_) : f(f_) {
    const int n = dim();
    const double fv = f.value();
    Eigen::MatrixXd raise = Eigen::MatrixXd::Zero(n, n);
    fz = Eigen::MatrixXcd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        const double m = -fv + k;
        fz(k, k) = m;
        if (k + 1 < n) raise(k + 1, k) = std::sqrt(fv * (fv + 1) - m * (m + 1));
    }
    const Eigen::MatrixXd lower = raise.transpose();
    fx = (0.5 * (raise + lower)).cast<Complex>();
    fy = (Complex(0, -0.5) * (raise - lower).cast<Complex>());
}

void stark_form(const PolarizabilitySet& pol, const SpinMatrices& spins,
                const Eigen::Vector3cd& a, const Eigen::Vector3cd& b, Eigen::MatrixXcd& out) {
    const int n = spins.dim();
    const double fv = spins.f.value();
    // Eigen's dot() conjugates its left operand: a.dot(b) = sum conj(a_i) b_i.
    const Complex overlap = a.dot(b);

    out.setZero(n, n);
    out.diagonal().setConstant(-pol.alpha0 * overlap);

    if (pol.alpha1 != 0.0 && spins.f.twice() > 0) {
        const Eigen::Vector3cd v = spin_density(a, b);
        out -= (pol.alpha1 / fv) * (v(0) * spins.fx + v(1) * spins.fy + v(2) * spins.fz);
    }

    if (pol.alpha2 != 0.0 && spins.f.twice() >= 2) {
        const Eigen::MatrixXcd a_dot_f =
            std::conj(a(0)) * spins.fx + std::conj(a(1)) * spins.fy + std::conj(a(2)) * spins.fz;
        const Eigen::MatrixXcd b_dot_f = b(0) * spins.fx + b(1) * spins.fy + b(2) * spins.fz;
        Eigen::MatrixXcd t = 1.5 * (a_dot_f * b_dot_f + b_dot_f * a_dot_f);
        t.diagonal().array() -= overlap * fv * (fv + 1);
        out -= (pol.alpha2 / (fv * (2 * fv - 1))) * t;
    }
}

ZeemanHamiltonian stark_hamiltonian(const PolarizabilitySet& pol, const Eigen::Vector3cd& e_plus,
                                    const Eigen::Vector3d& quantization_axis) {
    const auto frame = QuantizationFrame::from_axis(quantization_axis);
    const SpinMatrices spins(pol.f);
    const Eigen::Vector3cd local = frame.to_local(e_plus);
    ZeemanHamiltonian h{pol.f, {}};
    stark_form(pol, spins, local, local, h.matrix);
    return h;
}

}  // namespace evatrap
