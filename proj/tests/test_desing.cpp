#include "nsbem/desing.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

using namespace nsbem;

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec3 unit(std::mt19937& rng) {
    std::normal_distribution<double> g;
    return Vec3(g(rng), g(rng), g(rng)).normalized();
}

double laplacian_3d(const std::function<double(const Vec3&)>& f, const Vec3& x, double h) {
    double sum = -6.0 * f(x);
    for (int k = 0; k < 3; ++k) {
        Vec3 e = Vec3::Zero();
        e[k] = h;
        sum += f(x + e) + f(x - e);
    }
    return sum / (h * h);
}

double laplacian_2d(const std::function<double(const Vec3&)>& f, const Vec3& x, double h) {
    return (f(x + Vec3(h, 0, 0)) + f(x - Vec3(h, 0, 0)) + f(x + Vec3(0, h, 0)) + f(x - Vec3(0, h, 0)) - 4.0 * f(x)) /
           (h * h);
}

double derivative_along(const std::function<double(const Vec3&)>& f, const Vec3& x, const Vec3& n, double h = 1e-5) {
    return (f(x + h * n) - f(x - h * n)) / (2 * h);
}

// 2D point-in-polygon by winding number
bool inside_polygon(const Vec3& p, const std::vector<Vec3>& poly) {
    double winding = 0.0;
    for (std::size_t k = 0; k < poly.size(); ++k) {
        const Vec3 a = poly[k] - p, b = poly[(k + 1) % poly.size()] - p;
        winding += std::atan2(a.x() * b.y() - a.y() * b.x(), a.dot(b));
    }
    return std::abs(winding) > kPi;
}

}  // namespace

TEST_CASE("linear field: anchor conditions, orthogonality and harmonicity") {
    const Vec3 x0(0.3, -0.2, 0.5), n0 = Vec3(1, 2, 2) / 3.0;
    const auto field = DesingularizingField::linear(x0, n0);
    const auto at = f_linear(x0, n0, field);
    CHECK(at.f == 0.0);
    CHECK(at.grad_dot_n == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(f_linear(Vec3(1, 1, 1), Vec3(2, -1, 0).normalized(), field).grad_dot_n == doctest::Approx(0.0));
    auto f = [&](const Vec3& x) { return field.eval(x, n0).f; };
    CHECK(std::abs(laplacian_3d(f, Vec3(1, 2, 3), 1e-2)) < 1e-10);
    CHECK_THROWS_AS(field.value_at_infinity(), FieldError);
    CHECK_THROWS_AS(f_inverse(x0, n0, field), FieldError);
}

TEST_CASE("inverse-point field: anchor conditions and bounded far field") {
    std::mt19937 rng(23);
    for (int i = 0; i < 50; ++i) {
        const Vec3 n0 = unit(rng);
        const Vec3 x0 = unit(rng);
        Vec3 xd = x0 - (0.5 + i * 0.05) * n0 + 0.3 * unit(rng);
        const auto field = DesingularizingField::inverse_point(x0, n0, xd);
        const auto at = f_inverse(x0, n0, field);
        CHECK(at.f == 0.0);
        CHECK(std::abs(at.grad_dot_n - 1.0) < 1e-12);

        const double rho0 = field.rho0(), d = field.offset();
        CHECK(std::abs(field.value_at_infinity() - rho0 * rho0 / d) < 1e-14 * std::abs(rho0 * rho0 / d));
        const Vec3 far = x0 + 1e6 * rho0 * unit(rng);
        const double f_far = field.eval(far, n0).f;
        CHECK(std::abs(f_far - field.value_at_infinity()) < 1e-5 * std::abs(field.value_at_infinity()));
        // sup |f| over |x - x0| <= 1e6 rho0 is attained at the far boundary or the near side of xD
        for (int k = 0; k < 20; ++k) {
            const Vec3 x = x0 + rho0 * std::pow(10.0, 6.0 * k / 19.0) * unit(rng);
            if ((x - xd).norm() < 0.5 * rho0) continue;
            CHECK(std::abs(field.eval(x, n0).f) <= 2.0 * rho0 * rho0 / std::abs(d) + 1e-12);
        }
    }
}

TEST_CASE("inverse-point gradient matches finite differences; field is harmonic") {
    std::mt19937 rng(29);
    const Vec3 x0(0, 0, 1), n0(0, 0, 1), xd(0.2, 0.1, -0.4);
    const auto field = DesingularizingField::inverse_point(x0, n0, xd);
    auto f = [&](const Vec3& x) { return field.eval(x, n0).f; };
    for (int i = 0; i < 100; ++i) {
        const Vec3 x = xd + (1.0 + i * 0.02) * unit(rng);
        const Vec3 n = unit(rng);
        CHECK(std::abs(derivative_along(f, x, n) - field.eval(x, n).grad_dot_n) < 1e-8);
        CHECK(std::abs(laplacian_3d(f, x, 1e-3)) < 1e-5);
    }
}

TEST_CASE("inverse-point construction rejects a tangent-plane exterior point") {
    CHECK_THROWS_AS(DesingularizingField::inverse_point(Vec3(0, 0, 1), Vec3(0, 0, 1), Vec3(1, 0, 1)), FieldError);
    CHECK_THROWS_AS(DesingularizingField::inverse_point(Vec3(0, 0, 1), Vec3(0, 0, 1), Vec3(0, 0, 1)), FieldError);
    const auto field = DesingularizingField::inverse_point(Vec3(0, 0, 1), Vec3(0, 0, 1), Vec3::Zero());
    CHECK_THROWS_AS(field.eval(Vec3::Zero(), Vec3(0, 0, 1)), FieldError);
}

TEST_CASE("axisymmetric psi equals the 3D inverse-point field at azimuth zero") {
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> u(0.0, 2.0), a(0.0, 2.0 * kPi);
    for (int i = 0; i < 100; ++i) {
        const double t0 = a(rng);
        const Vec3 x0(u(rng) + 0.05, 0.0, u(rng));
        const Vec3 n0(std::cos(t0), 0.0, std::sin(t0));
        const Vec3 xd(0.0, 0.0, -1.5 - u(rng));
        if (std::abs(n0.dot(x0 - xd)) < 1e-3) continue;
        const auto field = DesingularizingField::inverse_point(x0, n0, xd);
        const double t = a(rng);
        const Vec3 x(u(rng), 0.0, u(rng));
        const Vec3 n(std::cos(t), 0.0, std::sin(t));
        const auto axi = psi_axisym(x.x(), x.z(), n.x(), n.z(), field);
        const auto v3 = field.eval(x, n);
        CHECK(std::abs(axi.f - v3.f) < 1e-12 * (1.0 + std::abs(v3.f)));
        CHECK(std::abs(axi.grad_dot_n - v3.grad_dot_n) < 1e-12 * (1.0 + std::abs(v3.grad_dot_n)));
    }
    const auto field = DesingularizingField::inverse_point(Vec3(1, 0, 0), Vec3(1, 0, 0), Vec3::Zero());
    const auto at = psi_axisym(1.0, 0.0, 1.0, 0.0, field);
    CHECK(at.f == 0.0);
    CHECK(at.grad_dot_n == doctest::Approx(1.0));
    // radial normal far away: s ~ rho, so dpsi/dn ~ rho^-2
    const double g1 = psi_axisym(0.0, 1e3, 0.0, 1.0, field).grad_dot_n;
    const double g2 = psi_axisym(0.0, 2e3, 0.0, 1.0, field).grad_dot_n;
    CHECK(g1 / g2 == doctest::Approx(4.0).epsilon(1e-9));
    const auto off_axis = DesingularizingField::inverse_point(Vec3(1, 0, 0), Vec3(1, 0, 0), Vec3(0.1, 0, 0));
    CHECK_THROWS_AS(psi_axisym(1.0, 0.0, 1.0, 0.0, off_axis), FieldError);
}

TEST_CASE("linear corner pair: the four corner conditions for random angles") {
    std::mt19937 rng(37);
    std::uniform_real_distribution<double> a(0.05, kPi - 0.05), rot(0.0, 2.0 * kPi);
    for (int i = 0; i < 100; ++i) {
        const double r = rot(rng), b = a(rng);
        const Vec3 nl(std::cos(r), std::sin(r), 0.0);
        const Vec3 nr(std::cos(r + b), std::sin(r + b), 0.0);
        const Vec3 x0(0.2, 0.4, 0.0);
        const auto p = corner_pair_linear(x0 + Vec3(0.3, -0.1, 0), x0, nl, nr);
        CHECK(std::abs(p.grad_l.dot(nl) - 1.0) < 1e-12);
        CHECK(std::abs(p.grad_l.dot(nr)) < 1e-12);
        CHECK(std::abs(p.grad_r.dot(nr) - 1.0) < 1e-12);
        CHECK(std::abs(p.grad_r.dot(nl)) < 1e-12);
        const auto at = corner_pair_linear(x0, x0, nl, nr);
        CHECK(at.fl == 0.0);
        CHECK(at.fr == 0.0);
    }
    const Vec3 nl(0, -1, 0), nr(1, 0, 0), x(0.7, 0.3, 0);
    CHECK(corner_pair_linear(x, Vec3::Zero(), nl, nr).fl == doctest::Approx(nl.dot(x)));
    CHECK_THROWS_AS(corner_pair_linear(x, Vec3::Zero(), nl, nl), FieldError);
    CHECK_THROWS_AS(corner_pair_linear(x, Vec3::Zero(), nl, -nl), FieldError);
}

TEST_CASE("log corner pair on the unit square corner") {
    const Vec3 x0 = Vec3::Zero();
    const Vec3 nl(-1, 0, 0), nr(0, -1, 0);  // left edge comes down x = 0, right edge leaves along y = 0
    const Vec3 tl(0, 1, 0), tr(1, 0, 0);
    const auto pts = place_corner_exterior_points(x0, nl, nr, tl, tr, 1.0);
    CHECK(pts.left.isApprox(Vec3(-1, 0, 0)));
    CHECK(pts.right.isApprox(Vec3(0, -1, 0)));
    CHECK(std::abs(nr.dot(x0 - pts.left)) < 1e-12);
    CHECK(std::abs(nl.dot(x0 - pts.right)) < 1e-12);
    CHECK(std::abs(nl.dot(x0 - pts.left)) > 0.5);
    CHECK(std::abs(nr.dot(x0 - pts.right)) > 0.5);

    const auto at = corner_pair_log(x0, nl, x0, nl, nr, pts.left, pts.right);
    CHECK(at.fl == 0.0);
    CHECK(at.fr == 0.0);
    CHECK(std::abs(corner_pair_log(x0, nl, x0, nl, nr, pts.left, pts.right).grad_l_dot_n - 1.0) < 1e-12);
    CHECK(std::abs(corner_pair_log(x0, nr, x0, nl, nr, pts.left, pts.right).grad_l_dot_n) < 1e-12);
    CHECK(std::abs(corner_pair_log(x0, nr, x0, nl, nr, pts.left, pts.right).grad_r_dot_n - 1.0) < 1e-12);
    CHECK(std::abs(corner_pair_log(x0, nl, x0, nl, nr, pts.left, pts.right).grad_r_dot_n) < 1e-12);

    auto fl = [&](const Vec3& x) { return corner_pair_log(x, nl, x0, nl, nr, pts.left, pts.right).fl; };
    auto fr = [&](const Vec3& x) { return corner_pair_log(x, nl, x0, nl, nr, pts.left, pts.right).fr; };
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (int i = 0; i < 50; ++i) {
        const Vec3 x(u(rng), u(rng), 0.0);
        CHECK(std::abs(laplacian_2d(fl, x, 1e-3)) < 1e-5);
        CHECK(std::abs(laplacian_2d(fr, x, 1e-3)) < 1e-5);
        const Vec3 n = Vec3(u(rng) - 0.5, u(rng) - 0.5, 0.0).normalized();
        CHECK(std::abs(derivative_along(fl, x, n) -
                       corner_pair_log(x, n, x0, nl, nr, pts.left, pts.right).grad_l_dot_n) < 1e-8);
    }
    CHECK_THROWS_AS(CornerField::log(x0, nl, nr, Vec3(-1, -1, 0), pts.right), FieldError);
}

TEST_CASE("log corner exterior points leave the 45 degree parallelogram") {
    const double b = kPi / 4;
    const std::vector<Vec3> poly{{0, 0, 0}, {1, 0, 0}, {1 + std::cos(b), std::sin(b), 0}, {std::cos(b), std::sin(b), 0}};
    for (std::size_t k = 0; k < 4; ++k) {
        const Vec3 x0 = poly[k];
        const Vec3 prev = poly[(k + 3) % 4], next = poly[(k + 1) % 4];
        const Vec3 tl = (prev - x0).normalized(), tr = (next - x0).normalized();
        // counterclockwise loop: outward normal is the forward tangent rotated by -90 degrees
        const Vec3 fl = (x0 - prev).normalized(), fr = (next - x0).normalized();
        const Vec3 nl(fl.y(), -fl.x(), 0), nr(fr.y(), -fr.x(), 0);
        for (double scale : {0.1, 0.5, 1.0}) {
            const auto pts = place_corner_exterior_points(x0, nl, nr, tl, tr, scale);
            CHECK_FALSE(inside_polygon(pts.left, poly));
            CHECK_FALSE(inside_polygon(pts.right, poly));
        }
    }
    // reflex corner: the edge extensions stay inside
    CHECK_THROWS_AS(place_corner_exterior_points(Vec3::Zero(), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 1, 0),
                                                 Vec3(1, 0, 0), 1.0),
                    FieldError);
}

TEST_CASE("field policy: lateral exterior point rule and part fallback") {
    ExteriorPointRule rule;
    rule.kind = ExteriorPointRule::Kind::Lateral;
    rule.shift = Vec3(1, 1, 0);
    rule.level = 3.0;
    CHECK(rule.place(Vec3(2, -1, 0.1)) == Vec3(3, 0, 3));
    const FieldPolicy policy = FieldPolicy::inverse_point({Vec3(0, 0, 1), Vec3(0, 0, 2)});
    CHECK(policy.part(5).exterior.point == Vec3(0, 0, 2));
    CHECK(policy.part(0).exterior.point == Vec3(0, 0, 1));
    const Mesh m = make_tri_sphere(Vec3::Zero(), 1.0, 0);
    const auto field = FieldPolicy::inverse_point({Vec3::Zero()}).node_field(m, 3);
    CHECK(field.kind() == FieldKind::InversePoint);
    CHECK(field.anchor() == m.nodes[3].position);
    CHECK_THROWS_AS(FieldPolicy::inverse_point({m.nodes[3].position}).node_field(m, 3), FieldError);
}
