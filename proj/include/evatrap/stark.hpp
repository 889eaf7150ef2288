#pragma once

#include "evatrap/half_integer.hpp"
#include "evatrap/polarizability.hpp"

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <complex>

namespace evatrap {

using Complex = std::complex<double>;

/// Orthonormal right-handed frame whose third vector is the quantization
/// axis. Spherical field components are taken in this frame.
struct QuantizationFrame {
    Eigen::Vector3d e1, e2, axis;

    /// Throws InvalidArgument when `axis` is not unit length (1e-9).
    static QuantizationFrame from_axis(const Eigen::Vector3d& axis);

    Eigen::Vector3cd to_local(const Eigen::Vector3cd& field) const {
        return {e1.dot(field), e2.dot(field), axis.dot(field)};
    }
};

/// Spin matrices Fx, Fy, Fz in the |m_F> basis ordered m = -F..+F.
struct SpinMatrices {
    explicit SpinMatrices(HalfInteger f);

    HalfInteger f;
    Eigen::MatrixXcd fx, fy, fz;
    int dim() const { return f.twice() + 1; }
};

/// Hermitian light-shift operator on a Zeeman manifold (joules).
struct ZeemanHamiltonian {
    HalfInteger f;
    Eigen::MatrixXcd matrix;
};

/// Sesquilinear light-shift form Q(A, B), antilinear in A and linear in B,
/// with Q(E, E) the Stark Hamiltonian of field E+ = E. Field vectors are
/// given in the local frame. Q(B, A) = Q(A, B)^dagger.
///
///   Q = -a0 (A*.B) - a1 i(A* x B).F / F
///       - a2 [3/2 ((A*.F)(B.F) + (B.F)(A*.F)) - (A*.B) F^2] / (F(2F-1))
///
/// For E+ along the axis the tensor term reduces to
/// -a2 (3|E0|^2-|E|^2)/2 (3 m^2 - F(F+1)) / (F(2F-1)).
void stark_form(const PolarizabilitySet& pol, const SpinMatrices& spins,
                const Eigen::Vector3cd& a_local, const Eigen::Vector3cd& b_local,
                Eigen::MatrixXcd& out);

ZeemanHamiltonian stark_hamiltonian(const PolarizabilitySet& pol, const Eigen::Vector3cd& e_plus,
                                    const Eigen::Vector3d& quantization_axis);

}  // namespace evatrap
