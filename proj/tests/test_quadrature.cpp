#include "nsbem/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace nsbem;

namespace {

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// mean of x^a y^b over the reference triangle
double triangle_monomial_mean(int a, int b) { return 2.0 * factorial(a) * factorial(b) / factorial(a + b + 2); }

}  // namespace

TEST_CASE("Gauss-Legendre rules: exact to degree 2n - 1, interior points, unit weight") {
    for (int n = 1; n <= 20; ++n) {
        const auto& rule = gauss_legendre(n);
        REQUIRE(rule.size() == std::size_t(n));
        double wsum = 0.0;
        for (const auto& p : rule) {
            CHECK(p.t > 0.0);
            CHECK(p.t < 1.0);
            wsum += p.w;
        }
        CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
        for (int k = 0; k <= 2 * n - 1; ++k) {
            double s = 0.0;
            for (const auto& p : rule) s += p.w * std::pow(p.t, k);
            CHECK(s == doctest::Approx(1.0 / (k + 1)).epsilon(1e-13));
        }
    }
    CHECK_THROWS(gauss_legendre(0));
    CHECK_THROWS(gauss_legendre(65));
}

TEST_CASE("triangle rules: degrees 1, 2, 5 and interior points") {
    const int degree[8] = {0, 1, 0, 2, 0, 0, 0, 5};
    for (int points : {1, 3, 7}) {
        const auto& rule = triangle_rule(points);
        double wsum = 0.0;
        for (const auto& q : rule) {
            CHECK(q.a > 0.0);
            CHECK(q.b > 0.0);
            CHECK(q.a + q.b < 1.0);
            wsum += q.w;
        }
        CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
        for (int a = 0; a <= degree[points]; ++a)
            for (int b = 0; a + b <= degree[points]; ++b) {
                double s = 0.0;
                for (const auto& q : rule) s += q.w * std::pow(q.a, a) * std::pow(q.b, b);
                CHECK(s == doctest::Approx(triangle_monomial_mean(a, b)).epsilon(1e-13));
            }
    }
}

TEST_CASE("segment integration with refinement toward the collocation point") {
    const Vec3 a(0, 0, 0), b(2, 0, 0);
    QuadratureOptions opt;
    for (const Vec3& x0 : {Vec3(0, 0, 0), Vec3(1, 0.01, 0), Vec3(5, 5, 0)}) {
        double len = 0.0, first = 0.0, n0 = 0.0;
        integrate_segment(a, b, x0, opt, [&](const Vec3& x, double w, double s0, double s1) {
            CHECK(x != x0);
            CHECK(s0 + s1 == doctest::Approx(1.0));
            len += w;
            first += w * x.x();
            n0 += w * s0;
        });
        CHECK(len == doctest::Approx(2.0).epsilon(1e-14));
        CHECK(first == doctest::Approx(2.0).epsilon(1e-14));
        CHECK(n0 == doctest::Approx(1.0).epsilon(1e-14));
    }
    // ln r has an integrable end-point singularity; refinement keeps the error small
    double s = 0.0;
    integrate_segment(a, b, a, opt, [&](const Vec3& x, double w, double, double) { s += w * std::log(x.norm()); });
    CHECK(s == doctest::Approx(2.0 * std::log(2.0) - 2.0).epsilon(1e-3));
}

TEST_CASE("triangle integration: area, moments and collocation avoidance") {
    const Vec3 p0(0, 0, 0), p1(1, 0, 0), p2(0, 2, 0);
    QuadratureOptions opt;
    for (const Vec3& x0 : {p0, p1, Vec3(0.2, 0.3, 0.0), Vec3(30, 0, 0), Vec3(300, 0, 0)}) {
        double area = 0.0, mx = 0.0, my2 = 0.0;
        integrate_triangle(p0, p1, p2, 1.0, x0, opt, [&](const Vec3& x, double w, double n0, double n1, double n2) {
            CHECK(x != x0);
            CHECK(n0 + n1 + n2 == doctest::Approx(1.0));
            area += w;
            mx += w * x.x();
            my2 += w * x.y() * x.y();
        });
        CHECK(area == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(mx == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
        if ((x0 - p0).norm() < 20.0) CHECK(my2 == doctest::Approx(2.0 / 3.0).epsilon(1e-13));
    }
}

TEST_CASE("1/r seen from a vertex: error halves with each refinement level") {
    const Vec3 p0(0, 0, 0), p1(1, 0, 0), p2(0, 2, 0);
    // vertex at the origin: int 1/r dA = int_0^{pi/2} rho_max(theta) dtheta with the hypotenuse 2x + y = 2
    double ref = 0.0;
    for (const auto& p : gauss_legendre(64)) {
        const double th = p.t * 1.5707963267948966;
        ref += p.w * 1.5707963267948966 * 2.0 / (2.0 * std::cos(th) + std::sin(th));
    }
    auto error = [&](int depth) {
        QuadratureOptions opt;
        opt.triangle_self_depth = depth;
        opt.triangle_max_depth = std::max(depth, opt.triangle_max_depth);
        double s = 0.0;
        integrate_triangle(p0, p1, p2, 1.0, p0, opt,
                           [&](const Vec3& x, double w, double, double, double) { s += w / x.norm(); });
        return std::abs(s - ref) / ref;
    };
    double prev = error(1);
    for (int depth = 2; depth <= 6; ++depth) {
        const double e = error(depth);
        CHECK(e < 0.55 * prev);
        prev = e;
    }
    CHECK(error(5) < 2e-3);
}

TEST_CASE("point distances") {
    CHECK(point_segment_distance(Vec3(0.5, 1, 0), Vec3(0, 0, 0), Vec3(1, 0, 0)) == doctest::Approx(1.0));
    CHECK(point_segment_distance(Vec3(-3, 4, 0), Vec3(0, 0, 0), Vec3(1, 0, 0)) == doctest::Approx(5.0));
    const Vec3 a(0, 0, 0), b(1, 0, 0), c(0, 1, 0);
    CHECK(point_triangle_distance(Vec3(0.2, 0.2, 3), a, b, c) == doctest::Approx(3.0));
    CHECK(point_triangle_distance(Vec3(2, 0, 0), a, b, c) == doctest::Approx(1.0));
    CHECK(point_triangle_distance(Vec3(1, 1, 0), a, b, c) == doctest::Approx(std::sqrt(0.5)));
    std::mt19937 rng(43);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int i = 0; i < 200; ++i) {
        const Vec3 p(u(rng), u(rng), u(rng));
        // brute force over a dense barycentric grid
        double best = 1e9;
        for (int j = 0; j <= 200; ++j)
            for (int k = 0; j + k <= 200; ++k) best = std::min(best, (p - (a + j / 200.0 * (b - a) + k / 200.0 * (c - a))).norm());
        const double d = point_triangle_distance(p, a, b, c);
        CHECK(d <= best + 1e-12);
        CHECK(d >= best - 5e-3);
    }
}
