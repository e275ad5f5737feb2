#include "nsbem/postproc.hpp"

#include "nsbem/kernels.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <Eigen/Dense>

#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>

namespace nsbem {

FieldProbe FieldProbe::at_node(const Mesh& mesh, int node, double epsilon) {
    if (node < 0 || static_cast<std::size_t>(node) >= mesh.n_nodes())
        throw EvalError(fmt::format("probe anchor {} is not a node of the mesh", node));
    if (!(epsilon >= 0.0)) throw EvalError("probe offset must be non-negative");
    const Node& n = mesh.nodes[node];
    FieldProbe p;
    p.anchor = node;
    p.epsilon = epsilon;
    p.anchor_point = n.position;
    p.anchor_normal = n.normal;
    p.point = n.position - epsilon * n.normal;
    return p;
}

FieldProbe FieldProbe::at_surface(const Mesh& mesh, int element, double a, double b, double epsilon,
                                  bool exact_spheres) {
    if (mesh.regime != Regime::Surface3D) throw EvalError("surface anchors need a 3D triangulation");
    if (element < 0 || static_cast<std::size_t>(element) >= mesh.n_elements())
        throw EvalError(fmt::format("probe element {} does not exist", element));
    if (!(a >= 0.0 && b >= 0.0 && a + b <= 1.0)) throw EvalError("barycentric anchor outside the triangle");
    if (!(epsilon >= 0.0)) throw EvalError("probe offset must be non-negative");
    const Element& e = mesh.elements[element];
    const double l0 = 1.0 - a - b;
    FieldProbe p;
    p.element = element;
    p.a = a;
    p.b = b;
    p.epsilon = epsilon;
    Vec3 x = l0 * mesh.nodes[e.v[0]].position + a * mesh.nodes[e.v[1]].position + b * mesh.nodes[e.v[2]].position;
    Vec3 n = e.normal;
    double w = 1.0;
    if (const PartSurface* s = exact_spheres ? mesh.sphere_of(e.part) : nullptr) project_to_sphere(*s, e.normal, x, n, w);
    p.anchor_point = x;
    p.anchor_normal =
        (l0 * mesh.nodes[e.v[0]].normal + a * mesh.nodes[e.v[1]].normal + b * mesh.nodes[e.v[2]].normal).normalized();
    p.point = x - epsilon * p.anchor_normal;
    return p;
}

QuadratureOptions near_quadrature() {
    QuadratureOptions q;
    q.triangle_max_depth = 32;
    q.line_max_depth = 40;
    return q;
}

namespace {

constexpr double kPi = std::numbers::pi;

double solid_angle_constant(Regime regime) { return regime == Regime::Planar2D ? 2.0 * kPi : 4.0 * kPi; }

void check_solution(const Solution& sol, const Mesh& mesh) {
    if (sol.phi.size() != mesh.n_nodes() || sol.q.size() != mesh.n_nodes())
        throw EvalError(fmt::format("solution has {} values for {} nodes", sol.phi.size(), mesh.n_nodes()));
}

/// Meridian meshes take evaluation points as (r, 0, z).
Vec3 regime_point(const Vec3& x, Regime regime) {
    if (regime != Regime::Axisymmetric) return x;
    return {std::hypot(x.x(), x.y()), 0.0, x.z()};
}

/// Boundary quadrature with phi and q interpolated from the solution:
/// fn(x, n, w, phi, q).
template <class F>
void for_each_sample(const Mesh& mesh, const Solution& sol, const Vec3& xref, const EvalOptions& opt,
                     const std::vector<PhiStencil>& stencils, F&& fn) {
    for (std::size_t ei = 0; ei < mesh.n_elements(); ++ei) {
        const Element& e = mesh.elements[ei];
        if (mesh.regime == Regime::Surface3D) {
            const PartSurface* sphere = opt.quadrature.exact_spheres ? mesh.sphere_of(e.part) : nullptr;
            integrate_triangle(mesh.nodes[e.v[0]].position, mesh.nodes[e.v[1]].position,
                               mesh.nodes[e.v[2]].position, e.measure, xref, opt.quadrature,
                               [&](Vec3 x, double w, double n0, double n1, double n2) {
                                   Vec3 n = e.normal;
                                   if (sphere) project_to_sphere(*sphere, e.normal, x, n, w);
                                   const double phi = n0 * sol.phi[e.v[0]] + n1 * sol.phi[e.v[1]] + n2 * sol.phi[e.v[2]];
                                   const double q = n0 * sol.q[e.v[0]] + n1 * sol.q[e.v[1]] + n2 * sol.q[e.v[2]];
                                   fn(x, n, w, phi, q);
                               });
        } else {
            const Vec3& pa = mesh.nodes[e.v[0]].position;
            const Vec3& pb = mesh.nodes[e.v[1]].position;
            const PhiStencil* st = stencils.empty() ? nullptr : &stencils[ei];
            const Vec3 t = (pb - pa).normalized();
            integrate_segment(pa, pb, xref, opt.quadrature, [&](const Vec3& x, double w, double n0, double n1) {
                double phi = n0 * sol.phi[e.v[0]] + n1 * sol.phi[e.v[1]];
                if (st && st->count > 2) {
                    double l[4];
                    phi_stencil_weights(*st, (x - pa).dot(t), l);
                    phi = 0.0;
                    for (int j = 0; j < st->count; ++j) phi += l[j] * sol.phi[st->nodes[j]];
                }
                const double q = n0 * sol.q[e.v[0]] + n1 * sol.q[e.v[1]];
                fn(x, e.normal, w, phi, q);
            });
        }
    }
}

/// G and dG/dn at boundary point x (normal n) for the field point xp.
KernelPair kernel_at(Regime regime, const Vec3& x, const Vec3& n, const Vec3& xp) {
    switch (regime) {
        case Regime::Surface3D: return kernel_3d(x, xp, n);
        case Regime::Planar2D: return kernel_2d(x, xp, n);
        case Regime::Axisymmetric: return kernel_axisym(x.x(), x.z(), n.x(), n.z(), xp.x(), xp.z());
    }
    return {};
}

std::vector<PhiStencil> stencils_for(const Mesh& mesh, const EvalOptions& opt) {
    if (mesh.regime != Regime::Planar2D) return {};
    return build_phi_stencils(mesh, opt.planar_phi_order);
}

}  // namespace

BoundaryDistance boundary_distance(const Vec3& point, const Mesh& mesh) {
    if (mesh.n_elements() == 0) throw EvalError("mesh has no elements");
    const Vec3 xp = regime_point(point, mesh.regime);
    BoundaryDistance out;
    out.distance = std::numeric_limits<double>::infinity();
    for (const auto& e : mesh.elements) {
        const double d = e.n_vertices == 3
                             ? point_triangle_distance(xp, mesh.nodes[e.v[0]].position, mesh.nodes[e.v[1]].position,
                                                       mesh.nodes[e.v[2]].position)
                             : point_segment_distance(xp, mesh.nodes[e.v[0]].position, mesh.nodes[e.v[1]].position);
        if (d < out.distance) {
            out.distance = d;
            out.element_size = element_diameter(mesh, e);
        }
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < mesh.n_nodes(); ++i) {
        const double d = (mesh.nodes[i].position - xp).norm();
        if (d < best) {
            best = d;
            out.nearest_node = static_cast<int>(i);
        }
    }
    return out;
}

double eval_interior(const Vec3& point, const Solution& solution, const Mesh& mesh, const EvalOptions& options) {
    check_solution(solution, mesh);
    const Vec3 xp = regime_point(point, mesh.regime);
    const BoundaryDistance bd = boundary_distance(xp, mesh);
    if (bd.distance <= bd.element_size)
        throw EvalError(fmt::format("point ({}, {}, {}) is {:.3g} from the boundary, within one element size "
                                    "({:.3g}); use eval_near_boundary",
                                    point.x(), point.y(), point.z(), bd.distance, bd.element_size));
    const auto stencils = stencils_for(mesh, options);
    double sum = 0.0;
    for_each_sample(mesh, solution, xp, options, stencils,
                    [&](const Vec3& x, const Vec3& n, double w, double phi, double q) {
                        const KernelPair k = kernel_at(mesh.regime, x, n, xp);
                        sum += w * (q * k.g - phi * k.dg_dn);
                    });
    return sum / solid_angle_constant(mesh.regime);
}

double eval_near_boundary(const FieldProbe& probe, const Solution& solution, const Mesh& mesh,
                          const FieldPolicy& policy, const EvalOptions& options) {
    check_solution(solution, mesh);
    const Vec3 xp = regime_point(probe.point, mesh.regime);
    Vec3 x0, n0;
    double phi0 = 0.0, q0 = 0.0;
    DesingularizingField field;
    if (probe.element >= 0) {
        if (mesh.regime != Regime::Surface3D || static_cast<std::size_t>(probe.element) >= mesh.n_elements())
            throw EvalError("surface-anchored probe does not match the mesh");
        const Element& e = mesh.elements[probe.element];
        const double l[3] = {1.0 - probe.a - probe.b, probe.a, probe.b};
        for (int k = 0; k < 3; ++k) {
            phi0 += l[k] * solution.phi[e.v[k]];
            q0 += l[k] * solution.q[e.v[k]];
        }
        x0 = probe.anchor_point;
        n0 = probe.anchor_normal;
        const PartField& pf = policy.part(e.part);
        field = pf.kind == FieldKind::Linear ? DesingularizingField::linear(x0, n0)
                                             : DesingularizingField::inverse_point(x0, n0, pf.exterior.place(x0));
    } else {
        if (probe.anchor < 0 || static_cast<std::size_t>(probe.anchor) >= mesh.n_nodes())
            throw EvalError("near-boundary evaluation needs a probe anchored on the boundary");
        const Node& anchor = mesh.nodes[probe.anchor];
        if (anchor.is_corner())
            throw EvalError(fmt::format("anchor {} is a corner copy; anchor at a regular node", probe.anchor));
        x0 = anchor.position;
        n0 = anchor.normal;
        phi0 = solution.phi[probe.anchor];
        q0 = solution.q[probe.anchor];
        field = mesh.regime == Regime::Planar2D ? DesingularizingField::linear(x0, n0)
                                                : policy.node_field(mesh, probe.anchor);
    }
    const double scale = 1.0 + x0.norm();
    if ((x0 - xp).dot(n0) < -1e-12 * scale)
        throw EvalError("probe point lies outside the domain (beyond the anchor's tangent plane)");
    if ((xp - x0).norm() == 0.0) return phi0;

    const auto stencils = stencils_for(mesh, options);
    double dl = 0.0, sl = 0.0;
    for_each_sample(mesh, solution, xp, options, stencils,
                    [&](const Vec3& x, const Vec3& n, double w, double phi, double q) {
                        // a surface anchor can coincide with a quadrature point; the
                        // integrand is bounded there, so such samples are dropped
                        if ((x - x0).norm() <= 1e-10 * scale) return;
                        const FieldValue fv = mesh.regime == Regime::Axisymmetric
                                                  ? psi_axisym(x.x(), x.z(), n.x(), n.z(), field)
                                                  : field.eval(x, n);
                        const KernelPair kp = kernel_at(mesh.regime, x, n, xp);
                        const KernelPair k0 = kernel_at(mesh.regime, x, n, x0);
                        dl += w * (phi - phi0 - q0 * fv.f) * (kp.dg_dn - k0.dg_dn);
                        sl += w * (q - q0 * fv.grad_dot_n) * (kp.g - k0.g);
                    });
    const double psi = phi0 + q0 * field.eval(xp, n0).f;
    return psi + (sl - dl) / solid_angle_constant(mesh.regime);
}

double eval_potential(const Vec3& point, const Solution& solution, const Mesh& mesh, const FieldPolicy& policy,
                      const EvalOptions& options) {
    const BoundaryDistance bd = boundary_distance(point, mesh);
    if (bd.distance > options.near_diameters * bd.element_size && bd.distance > bd.element_size)
        return eval_interior(point, solution, mesh, options);
    FieldProbe probe;
    probe.point = point;
    probe.anchor = bd.nearest_node;
    probe.epsilon = (mesh.nodes[bd.nearest_node].position - regime_point(point, mesh.regime)).norm();
    return eval_near_boundary(probe, solution, mesh, policy, options);
}

SurfaceVelocity surface_velocity(const Solution& solution, const Mesh& mesh) {
    check_solution(solution, mesh);
    const auto nb = node_neighbours(mesh);
    SurfaceVelocity out;
    out.u.resize(mesh.n_nodes());
    for (std::size_t i = 0; i < mesh.n_nodes(); ++i) {
        const Node& node = mesh.nodes[i];
        const Vec3& n = node.normal;
        const double qi = solution.q[i], phii = solution.phi[i];
        if (nb[i].empty()) throw EvalError(fmt::format("node {} is isolated; no neighbours for the gradient fit", i));
        Vec3 tangential = Vec3::Zero();
        if (mesh.regime == Regime::Surface3D) {
            const Vec3 a = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
            const Vec3 t1 = a.cross(n).normalized();
            const Vec3 t2 = n.cross(t1);
            Eigen::Matrix2d m = Eigen::Matrix2d::Zero();
            Eigen::Vector2d b = Eigen::Vector2d::Zero();
            for (int j : nb[i]) {
                const Vec3 dx = mesh.nodes[j].position - node.position;
                const double w = 1.0 / dx.squaredNorm();
                const double dphi = solution.phi[j] - phii - qi * n.dot(dx);
                const Eigen::Vector2d a2(t1.dot(dx), t2.dot(dx));
                m += w * a2 * a2.transpose();
                b += w * dphi * a2;
            }
            if (std::abs(m.determinant()) <= 1e-12 * m.squaredNorm())
                throw EvalError(fmt::format("node {}: neighbours are colinear; tangential gradient undefined", i));
            const Eigen::Vector2d g = m.ldlt().solve(b);
            tangential = g(0) * t1 + g(1) * t2;
        } else {
            const bool on_axis = mesh.regime == Regime::Axisymmetric &&
                                 node.position.x() <= 1e-12 * (1.0 + node.position.norm());
            if (!on_axis) {
                const Vec3 t = mesh.regime == Regime::Planar2D ? Vec3(-n.y(), n.x(), 0.0) : Vec3(-n.z(), 0.0, n.x());
                double m = 0.0, b = 0.0;
                for (int j : nb[i]) {
                    const Vec3 dx = mesh.nodes[j].position - node.position;
                    const double w = 1.0 / dx.squaredNorm();
                    const double s = t.dot(dx);
                    m += w * s * s;
                    b += w * s * (solution.phi[j] - phii - qi * n.dot(dx));
                }
                tangential = (b / m) * t;
            }
        }
        out.u[i] = qi * n + tangential;
    }
    return out;
}

std::vector<double> node_pressure(const Mesh& mesh, int part, const std::vector<std::vector<double>>& phi_history,
                                  const SurfaceVelocity& velocity, const PressureInputs& in) {
    if (phi_history.size() < 2)
        throw EvalError(fmt::format("dphi/dt needs at least 2 time samples, got {}", phi_history.size()));
    if (!(in.dt > 0.0)) throw EvalError("time-sample spacing dt must be positive");
    const auto& now = phi_history.back();
    const auto& before = phi_history[phi_history.size() - 2];
    if (now.size() != mesh.n_nodes() || before.size() != mesh.n_nodes() || velocity.u.size() != mesh.n_nodes())
        throw EvalError("phi samples and velocities must cover every mesh node");
    std::vector<double> p(mesh.n_nodes(), 0.0);
    for (std::size_t i = 0; i < mesh.n_nodes(); ++i) {
        if (mesh.nodes[i].part != part) continue;
        const Vec3& u = velocity.u[i];
        const double dphi_dt = (now[i] - before[i]) / in.dt - in.body_velocity.dot(u);
        p[i] = -in.rho * (dphi_dt + 0.5 * u.squaredNorm() + in.g * mesh.nodes[i].position.z()) + in.reference_pressure;
    }
    return p;
}

Vec3 integrate_pressure(const Mesh& mesh, int part, const std::vector<double>& pressure) {
    if (pressure.size() != mesh.n_nodes()) throw EvalError("pressure must cover every mesh node");
    Vec3 force = Vec3::Zero();
    for (const auto& e : mesh.elements) {
        if (e.part != part) continue;
        double p = 0.0;
        for (int k = 0; k < e.n_vertices; ++k) p += pressure[e.v[k]];
        p /= e.n_vertices;
        double area = e.measure;
        if (mesh.regime == Regime::Axisymmetric) {
            const double r = 0.5 * (mesh.nodes[e.v[0]].position.x() + mesh.nodes[e.v[1]].position.x());
            area *= 2.0 * kPi * r;
            force.z() += p * e.normal.z() * area;  // radial components cancel around the ring
            continue;
        }
        force += p * area * e.normal;
    }
    return force;
}

Vec3 pressure_and_force(const Mesh& mesh, int part, const std::vector<std::vector<double>>& phi_history,
                        const SurfaceVelocity& velocity, const PressureInputs& inputs) {
    if (part < 0 || part >= static_cast<int>(mesh.part_names.size()))
        throw EvalError(fmt::format("part {} does not exist", part));
    return integrate_pressure(mesh, part, node_pressure(mesh, part, phi_history, velocity, inputs));
}

void write_probe_csv(std::ostream& out, const std::vector<ProbeRow>& rows) {
    out << "x,y,z,phi,ux,uy,uz\n";
    for (const auto& r : rows)
        fmt::print(out, "{:.12g},{:.12g},{:.12g},{:.12g},{:.12g},{:.12g},{:.12g}\n", r.x.x(), r.x.y(), r.x.z(), r.phi,
                   r.u.x(), r.u.y(), r.u.z());
}

void write_probe_csv(const std::string& path, const std::vector<ProbeRow>& rows) {
    std::ofstream f(path);
    if (!f) throw EvalError(fmt::format("cannot open {} for writing", path));
    write_probe_csv(f, rows);
}

}  // namespace nsbem
