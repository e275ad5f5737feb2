#include "nsbem/kernels.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>

namespace nsbem {

KernelPair kernel_3d(const Vec3& x, const Vec3& x0, const Vec3& n) {
    const Vec3 d = x - x0;
    const double r2 = d.squaredNorm();
    if (r2 == 0.0) throw KernelError("kernel_3d evaluated at coincident points");
    const double inv_r = 1.0 / std::sqrt(r2);
    return {inv_r, -d.dot(n) * inv_r * inv_r * inv_r};
}

KernelPair kernel_2d(const Vec3& x, const Vec3& x0, const Vec3& n) {
    const double dx = x.x() - x0.x(), dy = x.y() - x0.y();
    const double r2 = dx * dx + dy * dy;
    if (r2 == 0.0) throw KernelError("kernel_2d evaluated at coincident points");
    return {-0.5 * std::log(r2), -(dx * n.x() + dy * n.y()) / r2};
}

EllipticPair elliptic_ke_complement(double m1) {
    if (!(m1 > 0.0 && m1 <= 1.0))
        throw std::domain_error(fmt::format("elliptic parameter m = {} outside [0, 1)", 1.0 - m1));
    const double m = 1.0 - m1;
    double a = 1.0;
    double b = std::sqrt(m1);
    double c = std::sqrt(m);
    double power = 0.5;  // 2^(n-1)
    double sum = power * c * c;
    for (int n = 0; n < 64; ++n) {
        const double a_next = 0.5 * (a + b);
        const double b_next = std::sqrt(a * b);
        c = 0.5 * (a - b);
        a = a_next;
        b = b_next;
        power *= 2.0;
        sum += power * c * c;
        // c falls quadratically; once at rounding level the remaining terms vanish
        if (std::abs(c) <= 1e-15 * a) break;
    }
    const double k = std::numbers::pi / (2.0 * a);
    return {k, k * (1.0 - sum)};
}

EllipticPair elliptic_ke(double m) {
    if (!(m >= 0.0 && m < 1.0))
        throw std::domain_error(fmt::format("elliptic parameter m = {} outside [0, 1)", m));
    return elliptic_ke_complement(1.0 - m);
}

AxisymParameter axisym_m(double r, double z, double r0, double z0) {
    const double dz2 = (z - z0) * (z - z0);
    const double rbar2 = (r + r0) * (r + r0) + dz2;
    AxisymParameter out;
    out.rbar = std::sqrt(rbar2);
    if (rbar2 == 0.0) return out;  // both points at the same axis point
    out.m = 4.0 * r * r0 / rbar2;
    out.one_minus_m = ((r - r0) * (r - r0) + dz2) / rbar2;
    return out;
}

KernelPair kernel_axisym(double r, double z, double n_r, double n_z, double r0, double z0) {
    const double dr = r - r0, dz = z - z0;
    const double d2 = dr * dr + dz * dz;
    if (d2 == 0.0) throw KernelError("axisymmetric kernel evaluated at the source ring");
    const AxisymParameter p = axisym_m(r, z, r0, z0);
    const EllipticPair ke = elliptic_ke_complement(p.one_minus_m);
    // r times [(r - r0) n_r + (z - z0) n_z - 2 r0 n_r (1 - m)/m], without the 0/0 at r0 = 0
    const double r_bracket = r * (dr * n_r + dz * n_z) - 0.5 * n_r * d2;
    KernelPair out;
    out.g = 4.0 * r * ke.k / p.rbar;
    out.dg_dn = -(4.0 * ke.e * r_bracket / (d2 * p.rbar) + 2.0 * n_r * ke.k / p.rbar);
    return out;
}

}  // namespace nsbem
