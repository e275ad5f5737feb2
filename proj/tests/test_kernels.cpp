#include "nsbem/kernels.hpp"

#include <boost/math/special_functions/ellint_rd.hpp>
#include <boost/math/special_functions/ellint_rf.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include <cmath>
#include <random>

using namespace nsbem;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Carlson symmetric forms take the complementary parameter directly, so the
// oracle keeps full accuracy next to m = 1.
double k_oracle(double m1) { return boost::math::ellint_rf(0.0, m1, 1.0); }
double e_oracle(double m1) {
    const double m = 1.0 - m1;
    return boost::math::ellint_rf(0.0, m1, 1.0) - m / 3.0 * boost::math::ellint_rd(0.0, m1, 1.0);
}

Vec3 random_point(std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    return {u(rng), u(rng), u(rng)};
}

}  // namespace

TEST_CASE("kernel_3d: definition and direct values") {
    auto k = kernel_3d(Vec3(0, 1, 0), Vec3::Zero(), Vec3(1, 0, 0));
    CHECK(k.g == 1.0);
    k = kernel_3d(Vec3(2, 0, 0), Vec3::Zero(), Vec3(1, 0, 0));
    CHECK(k.g == doctest::Approx(0.5));
    CHECK(k.dg_dn == doctest::Approx(-0.25));
    CHECK_THROWS_AS(kernel_3d(Vec3(1, 1, 1), Vec3(1, 1, 1), Vec3(0, 0, 1)), KernelError);
}

TEST_CASE("kernel_3d is symmetric in its points") {
    std::mt19937 rng(3);
    for (int i = 0; i < 100; ++i) {
        const Vec3 a = random_point(rng), b = random_point(rng);
        CHECK(kernel_3d(a, b, Vec3(0, 0, 1)).g == kernel_3d(b, a, Vec3(0, 0, 1)).g);
    }
}

TEST_CASE("kernel_2d: definition and direct values") {
    CHECK(kernel_2d(Vec3(0, 1, 0), Vec3::Zero(), Vec3(1, 0, 0)).g == 0.0);
    CHECK(kernel_2d(Vec3(std::exp(1.0), 0, 0), Vec3::Zero(), Vec3(1, 0, 0)).g == doctest::Approx(-1.0));
    CHECK_THROWS_AS(kernel_2d(Vec3(1, 1, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)), KernelError);
}

TEST_CASE("kernel normal derivatives match centred differences") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
    const double h = 1e-5;
    for (int i = 0; i < 100; ++i) {
        const Vec3 x0 = random_point(rng);
        const double a = angle(rng), b = angle(rng);
        const Vec3 dir(std::cos(a) * std::sin(b), std::sin(a) * std::sin(b), std::cos(b));
        const Vec3 n(std::cos(b), std::sin(b) * std::sin(a), std::sin(b) * std::cos(a));
        const Vec3 x = x0 + 0.5 * dir;
        const double fd3 = (kernel_3d(x + h * n, x0, n).g - kernel_3d(x - h * n, x0, n).g) / (2 * h);
        CHECK(std::abs(fd3 - kernel_3d(x, x0, n).dg_dn) < 1e-8);

        const Vec3 x0p(x0.x(), x0.y(), 0.0);
        const Vec3 np(std::cos(a), std::sin(a), 0.0);
        const Vec3 xp = x0p + 0.5 * Vec3(std::cos(b), std::sin(b), 0.0);
        const double fd2 = (kernel_2d(xp + h * np, x0p, np).g - kernel_2d(xp - h * np, x0p, np).g) / (2 * h);
        CHECK(std::abs(fd2 - kernel_2d(xp, x0p, np).dg_dn) < 1e-8);
    }
}

TEST_CASE("elliptic integrals: closed values") {
    const auto z = elliptic_ke(0.0);
    CHECK(z.k == doctest::Approx(kPi / 2).epsilon(1e-15));
    CHECK(z.e == doctest::Approx(kPi / 2).epsilon(1e-15));
    const auto h = elliptic_ke(0.5);
    CHECK(std::abs(h.k - 1.85407467730137) < 1e-13);
    CHECK(std::abs(h.e - 1.35064388104768) < 1e-13);
    CHECK_THROWS_AS(elliptic_ke(-1e-3), std::domain_error);
    CHECK_THROWS_AS(elliptic_ke(1.0), std::domain_error);
    CHECK_THROWS_AS(elliptic_ke_complement(0.0), std::domain_error);
}

TEST_CASE("elliptic integrals match Carlson forms over [0, 1 - 1e-10]") {
    double prev_k = 0.0, prev_e = 10.0;
    for (int i = 0; i < 1000; ++i) {
        const double m1 = 1.0 - (1.0 - 1e-10) * i / 999.0;  // 1 - m, exact at the end points
        const auto ke = elliptic_ke_complement(m1);
        CHECK(std::abs(ke.k - k_oracle(m1)) <= 1e-12 * k_oracle(m1));
        CHECK(std::abs(ke.e - e_oracle(m1)) <= 1e-12);
        CHECK(ke.k >= kPi / 2);
        CHECK(ke.e <= kPi / 2);
        CHECK(ke.e >= 1.0);
        if (i > 0) {
            CHECK(ke.k > prev_k);
            CHECK(ke.e < prev_e);
        }
        prev_k = ke.k;
        prev_e = ke.e;
    }
}

TEST_CASE("elliptic integrals match adaptive quadrature of the defining integrals") {
    using boost::math::quadrature::gauss_kronrod;
    for (int i = 0; i <= 100; ++i) {
        const double m = 0.999 * i / 100.0;
        const double k = gauss_kronrod<double, 61>::integrate(
            [m](double t) { return 1.0 / std::sqrt(1.0 - m * std::sin(t) * std::sin(t)); }, 0.0, kPi / 2, 15, 1e-15);
        const double e = gauss_kronrod<double, 61>::integrate(
            [m](double t) { return std::sqrt(1.0 - m * std::sin(t) * std::sin(t)); }, 0.0, kPi / 2, 15, 1e-15);
        const auto ke = elliptic_ke(m);
        CHECK(std::abs(ke.k - k) < 1e-12);
        CHECK(std::abs(ke.e - e) < 1e-12);
    }
}

TEST_CASE("Legendre relation for random parameters") {
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> u(1e-6, 1.0 - 1e-6);
    for (int i = 0; i < 50; ++i) {
        const double m = u(rng);
        const auto a = elliptic_ke(m);
        const auto b = elliptic_ke_complement(m);  // parameter 1 - m
        CHECK(std::abs(a.e * b.k + b.e * a.k - a.k * b.k - kPi / 2) < 1e-12);
    }
}

TEST_CASE("axisymmetric parameter") {
    auto p = axisym_m(1.0, 0.0, 1.0, 0.0);
    CHECK(p.m == 1.0);
    CHECK(p.one_minus_m == 0.0);
    p = axisym_m(0.7, 0.3, 0.0, -1.0);
    CHECK(p.m == 0.0);
    p = axisym_m(1.0, 2.0, 1.0, 0.0);
    CHECK(p.m == doctest::Approx(0.5));
    CHECK(p.rbar == doctest::Approx(std::sqrt(8.0)));
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int i = 0; i < 100; ++i) {
        const double r = u(rng), z = u(rng), r0 = u(rng), z0 = u(rng);
        const auto q = axisym_m(r, z, r0, z0);
        CHECK(q.m >= 0.0);
        CHECK(q.m <= 1.0);
        CHECK(q.m + q.one_minus_m == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("ring kernels equal the azimuthal integral of the 3D kernels") {
    std::mt19937 rng(19);
    std::uniform_real_distribution<double> u(0.1, 2.0), a(0.0, 2.0 * kPi);
    for (int i = 0; i < 40; ++i) {
        const double r = u(rng), z = u(rng) - 1.0, r0 = u(rng), z0 = u(rng) + 1.5;
        const double t = a(rng);
        const double nr = std::cos(t), nz = std::sin(t);
        // trapezoid rule on a smooth periodic integrand converges geometrically
        const int n = 4096;
        double g = 0.0, dg = 0.0;
        for (int k = 0; k < n; ++k) {
            const double th = 2.0 * kPi * k / n;
            const Vec3 x(r * std::cos(th), r * std::sin(th), z);
            const Vec3 nn(nr * std::cos(th), nr * std::sin(th), nz);
            const auto kp = kernel_3d(x, Vec3(r0, 0, z0), nn);
            g += kp.g * r * 2.0 * kPi / n;
            dg += kp.dg_dn * r * 2.0 * kPi / n;
        }
        const auto ring = kernel_axisym(r, z, nr, nz, r0, z0);
        CHECK(ring.g == doctest::Approx(g).epsilon(1e-12));
        CHECK(std::abs(ring.dg_dn - dg) < 1e-12 * (std::abs(dg) + std::abs(g)));
    }
}
