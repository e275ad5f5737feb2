#pragma once

#include "nsbem/geometry.hpp"

#include <stdexcept>

namespace nsbem {

/// Kernel evaluated where it would be singular (source and field points coincide).
class KernelError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct KernelPair {
    double g = 0.0;
    double dg_dn = 0.0;
};

struct EllipticPair {
    double k = 0.0;
    double e = 0.0;
};

/// G = 1/|x - x0| and its derivative along n at x.
KernelPair kernel_3d(const Vec3& x, const Vec3& x0, const Vec3& n);

/// G = -ln|x - x0| (no 1/2pi factor) and its derivative along n at x.
KernelPair kernel_2d(const Vec3& x, const Vec3& x0, const Vec3& n);

/// Complete elliptic integrals K(m), E(m) in the parameter convention, by the
/// arithmetic-geometric mean. Requires 0 <= m < 1.
EllipticPair elliptic_ke(double m);

/// Same as elliptic_ke but takes the complementary parameter m1 = 1 - m, which
/// keeps full relative accuracy of K near the logarithmic end point.
EllipticPair elliptic_ke_complement(double m1);

/// Elliptic parameter of a ring pair: m = 4 r r0 / Rbar^2 with
/// Rbar^2 = (r + r0)^2 + (z - z0)^2. Also returns 1 - m computed without
/// cancellation.
struct AxisymParameter {
    double m = 0.0;
    double one_minus_m = 1.0;
    double rbar = 0.0;
};

AxisymParameter axisym_m(double r, double z, double r0, double z0);

/// Azimuthally integrated 3D kernels for a ring through (r, z) seen from the
/// ring point (r0, 0, z0), including the r dtheta measure:
///   g     = int_0^2pi G r dtheta       = 4 r K / Rbar
///   dg_dn = int_0^2pi dG/dn r dtheta   with n = (n_r cos t, n_r sin t, n_z).
KernelPair kernel_axisym(double r, double z, double n_r, double n_z, double r0, double z0);

}  // namespace nsbem
