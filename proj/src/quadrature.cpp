#include "nsbem/quadrature.hpp"

#include <numbers>
#include <stdexcept>

namespace nsbem {

namespace {

std::vector<LinePoint> build_gauss_legendre(int n) {
    std::vector<LinePoint> rule(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 1; k <= n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p2) / k;
            }
            dp = n * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule[i] = {0.5 * (1.0 - x), 0.5 * w};
        rule[n - 1 - i] = {0.5 * (1.0 + x), 0.5 * w};
    }
    return rule;
}

constexpr int kMaxGauss = 64;

std::vector<TriPoint> seven_point_rule() {
    const double s15 = std::sqrt(15.0);
    const double a1 = (9.0 - 2.0 * s15) / 21.0, b1 = (6.0 + s15) / 21.0, w1 = (155.0 + s15) / 1200.0;
    const double a2 = (9.0 + 2.0 * s15) / 21.0, b2 = (6.0 - s15) / 21.0, w2 = (155.0 - s15) / 1200.0;
    return {
        {1.0 / 3.0, 1.0 / 3.0, 0.225},
        {b1, b1, w1}, {a1, b1, w1}, {b1, a1, w1},
        {b2, b2, w2}, {a2, b2, w2}, {b2, a2, w2},
    };
}

}  // namespace

const std::vector<LinePoint>& gauss_legendre(int n) {
    static const std::vector<std::vector<LinePoint>> table = [] {
        std::vector<std::vector<LinePoint>> t(kMaxGauss + 1);
        for (int k = 1; k <= kMaxGauss; ++k) t[k] = build_gauss_legendre(k);
        return t;
    }();
    if (n < 1 || n > kMaxGauss) throw std::invalid_argument("Gauss-Legendre order must be in [1, 64]");
    return table[n];
}

const std::vector<TriPoint>& triangle_rule(int points) {
    static const std::vector<TriPoint> one{{1.0 / 3.0, 1.0 / 3.0, 1.0}};
    static const std::vector<TriPoint> three{
        {1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0}, {2.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0}, {1.0 / 6.0, 2.0 / 3.0, 1.0 / 3.0}};
    static const std::vector<TriPoint> seven = seven_point_rule();
    switch (points) {
        case 1: return one;
        case 3: return three;
        case 7: return seven;
        default: throw std::invalid_argument("triangle rule must have 1, 3 or 7 points");
    }
}

double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
    const Vec3 ab = b - a;
    const double len2 = ab.squaredNorm();
    double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    // closest-point regions (vertex, edge, face)
    const Vec3 ab = b - a, ac = c - a, ap = p - a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0) return ap.norm();
    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3) return bp.norm();
    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return (p - (a + d1 / (d1 - d3) * ab)).norm();
    const Vec3 cp = p - c;
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6) return cp.norm();
    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return (p - (a + d2 / (d2 - d6) * ac)).norm();
    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
        return (p - (b + (d4 - d3) / ((d4 - d3) + (d5 - d6)) * (c - b))).norm();
    const double denom = 1.0 / (va + vb + vc);
    return (p - (a + ab * (vb * denom) + ac * (vc * denom))).norm();
}

}  // namespace nsbem
