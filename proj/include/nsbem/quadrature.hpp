#pragma once

#include "nsbem/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace nsbem {

/// Point of a rule on the unit segment [0, 1]; weights sum to 1.
struct LinePoint {
    double t = 0.0;
    double w = 0.0;
};

/// Point of a rule on the reference triangle, barycentric (1 - a - b, a, b);
/// weights sum to 1 (multiply by the triangle area).
struct TriPoint {
    double a = 0.0;
    double b = 0.0;
    double w = 0.0;
};

/// Gauss-Legendre rule with n points mapped to [0, 1].
const std::vector<LinePoint>& gauss_legendre(int n);

/// Symmetric triangle rules with 1, 3 or 7 points (degrees 1, 2, 5).
const std::vector<TriPoint>& triangle_rule(int points);

struct QuadratureOptions {
    int line_points = 8;
    int triangle_points = 7;
    double near_ratio = 1.0;   // split while sub-element size > near_ratio * distance to x0
    int line_self_depth = 4;   // refinement depth toward x0 on elements touching it
    int line_max_depth = 14;
    int triangle_self_depth = 2;
    int triangle_max_depth = 5;
    double far_reduce_3 = 4.0;    // distance / diameter beyond which triangles use 3 points
    double far_reduce_1 = 12.0;   // ... and 1 point (0 disables reduction)
    bool exact_spheres = true;    // integrate sphere parts on the sphere, not on the facets
};

/// Euclidean distance from p to the segment [a, b].
double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b);

/// Euclidean distance from p to the triangle (a, b, c).
double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

namespace detail {

template <class F>
void line_recurse(const Vec3& a, const Vec3& b, double t0, double t1, double length, const Vec3& x0,
                  const QuadratureOptions& opt, const std::vector<LinePoint>& rule, int depth, F& fn) {
    const Vec3 pa = a + t0 * (b - a), pb = a + t1 * (b - a);
    const double size = length * (t1 - t0);
    const double dist = point_segment_distance(x0, pa, pb);
    const int limit = dist <= 1e-12 * length ? opt.line_self_depth : opt.line_max_depth;
    if (depth < limit && size > opt.near_ratio * dist) {
        const double tm = 0.5 * (t0 + t1);
        line_recurse(a, b, t0, tm, length, x0, opt, rule, depth + 1, fn);
        line_recurse(a, b, tm, t1, length, x0, opt, rule, depth + 1, fn);
        return;
    }
    const double span = t1 - t0;
    for (const auto& p : rule) {
        const double t = t0 + span * p.t;
        fn(a + t * (b - a), p.w * span * length, 1.0 - t, t);
    }
}

struct SubTriangle {
    std::array<double, 3> a, b;  // barycentric (a, b) of the three corners
};

template <class F>
void triangle_recurse(const Vec3& p0, const Vec3& p1, const Vec3& p2, const SubTriangle& s, double area,
                      const Vec3& x0, const QuadratureOptions& opt, int depth, F& fn) {
    auto at = [&](double a, double b) -> Vec3 { return p0 + a * (p1 - p0) + b * (p2 - p0); };
    const Vec3 c0 = at(s.a[0], s.b[0]), c1 = at(s.a[1], s.b[1]), c2 = at(s.a[2], s.b[2]);
    const double diam = std::max({(c1 - c0).norm(), (c2 - c1).norm(), (c0 - c2).norm()});
    // cheap lower bound first; the exact distance only matters near x0
    const Vec3 centre = (c0 + c1 + c2) / 3.0;
    const double reach = std::max({(c0 - centre).norm(), (c1 - centre).norm(), (c2 - centre).norm()});
    double dist = (x0 - centre).norm() - reach;
    if (!(dist > 0.0 && diam <= opt.near_ratio * dist)) dist = point_triangle_distance(x0, c0, c1, c2);
    const int limit = dist <= 1e-12 * diam ? opt.triangle_self_depth : opt.triangle_max_depth;
    if (depth < limit && diam > opt.near_ratio * dist) {
        const double ma[3] = {0.5 * (s.a[0] + s.a[1]), 0.5 * (s.a[1] + s.a[2]), 0.5 * (s.a[2] + s.a[0])};
        const double mb[3] = {0.5 * (s.b[0] + s.b[1]), 0.5 * (s.b[1] + s.b[2]), 0.5 * (s.b[2] + s.b[0])};
        const SubTriangle kids[4] = {
            {{s.a[0], ma[0], ma[2]}, {s.b[0], mb[0], mb[2]}},
            {{ma[0], s.a[1], ma[1]}, {mb[0], s.b[1], mb[1]}},
            {{ma[2], ma[1], s.a[2]}, {mb[2], mb[1], s.b[2]}},
            {{ma[0], ma[1], ma[2]}, {mb[0], mb[1], mb[2]}},
        };
        for (const auto& k : kids) triangle_recurse(p0, p1, p2, k, area * 0.25, x0, opt, depth + 1, fn);
        return;
    }
    int points = opt.triangle_points;
    if (depth == 0 && opt.far_reduce_1 > 0.0 && dist > opt.far_reduce_1 * diam) points = 1;
    else if (depth == 0 && opt.far_reduce_3 > 0.0 && dist > opt.far_reduce_3 * diam) points = std::min(points, 3);
    for (const auto& q : triangle_rule(points)) {
        const double l0 = 1.0 - q.a - q.b;
        const double a = l0 * s.a[0] + q.a * s.a[1] + q.b * s.a[2];
        const double b = l0 * s.b[0] + q.a * s.b[1] + q.b * s.b[2];
        fn(at(a, b), q.w * area, 1.0 - a - b, a, b);
    }
}

}  // namespace detail

/// Integrate over the segment [a, b] with refinement toward x0. Calls
/// fn(x, weight, N0, N1) where N0, N1 are the linear shape functions.
template <class F>
void integrate_segment(const Vec3& a, const Vec3& b, const Vec3& x0, const QuadratureOptions& opt, F&& fn) {
    detail::line_recurse(a, b, 0.0, 1.0, (b - a).norm(), x0, opt, gauss_legendre(opt.line_points), 0, fn);
}

/// Integrate over the flat triangle (p0, p1, p2) with refinement toward x0 and
/// reduced rules in the far field. Calls fn(x, weight, N0, N1, N2).
template <class F>
void integrate_triangle(const Vec3& p0, const Vec3& p1, const Vec3& p2, double area, const Vec3& x0,
                        const QuadratureOptions& opt, F&& fn) {
    const detail::SubTriangle whole{{0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}};
    detail::triangle_recurse(p0, p1, p2, whole, area, x0, opt, 0, fn);
}

}  // namespace nsbem
