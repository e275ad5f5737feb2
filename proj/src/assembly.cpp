#include "nsbem/assembly.hpp"

#include "nsbem/kernels.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace nsbem {

BoundaryConditions BoundaryConditions::dirichlet(std::vector<double> phi) {
    BoundaryConditions bc;
    bc.kind.assign(phi.size(), BcKind::Dirichlet);
    bc.value = std::move(phi);
    return bc;
}

BoundaryConditions BoundaryConditions::neumann(std::vector<double> q) {
    BoundaryConditions bc;
    bc.kind.assign(q.size(), BcKind::Neumann);
    bc.value = std::move(q);
    return bc;
}

void DenseSystem::add(int row, int node, double phi_coef, double q_coef) {
    if (bcs.kind[node] == BcKind::Dirichlet) {
        matrix(row, node) += q_coef;
        rhs(row) -= phi_coef * bcs.value[node];
    } else {
        matrix(row, node) += phi_coef;
        rhs(row) -= q_coef * bcs.value[node];
    }
}

namespace {

void check_finite(double v, int element, int row) {
    if (!std::isfinite(v))
        throw AssemblyError(fmt::format("non-finite kernel value on element {} for collocation node {}", element, row));
}

struct ElementSums {
    double a[3] = {0.0, 0.0, 0.0};  // sum N_k w dG/dn
    double b[3] = {0.0, 0.0, 0.0};  // sum N_k w G
    double dg = 0.0;                // sum w dG/dn
    double self_q = 0.0;            // sum w (-f dG/dn + df/dn G)

    void flush(const Element& e, int element, int row, RowCoefficients& out) const {
        check_finite(dg, element, row);
        check_finite(self_q, element, row);
        for (int k = 0; k < e.n_vertices; ++k) {
            check_finite(a[k] + b[k], element, row);
            out.phi[e.v[k]] += a[k];
            out.q[e.v[k]] -= b[k];
        }
        out.phi[row] -= dg;
        out.q[row] += self_q;
    }
};

void check_inputs(const Mesh& mesh, const BoundaryConditions& bcs, Regime regime, const char* what) {
    if (mesh.regime != regime)
        throw AssemblyError(fmt::format("{} needs a {} mesh, got {}", what, to_string(regime), to_string(mesh.regime)));
    if (bcs.kind.size() != mesh.n_nodes() || bcs.value.size() != mesh.n_nodes())
        throw AssemblyError(fmt::format("{}: {} boundary conditions for {} nodes", what, bcs.kind.size(),
                                        mesh.n_nodes()));
    for (std::size_t i = 0; i < mesh.n_elements(); ++i) {
        const auto& e = mesh.elements[i];
        for (int k = 0; k < e.n_vertices; ++k)
            if (e.v[k] < 0 || static_cast<std::size_t>(e.v[k]) >= mesh.n_nodes())
                throw AssemblyError(fmt::format("element {} references invalid node {}", i, e.v[k]));
    }
}

DenseSystem empty_system(const Mesh& mesh, const BoundaryConditions& bcs) {
    DenseSystem sys;
    const auto n = static_cast<Eigen::Index>(mesh.n_nodes());
    sys.matrix = Eigen::MatrixXd::Zero(n, n);
    sys.rhs = Eigen::VectorXd::Zero(n);
    sys.bcs = bcs;
    sys.regime = mesh.regime;
    sys.needs_gauge = std::all_of(bcs.kind.begin(), bcs.kind.end(), [](BcKind k) { return k == BcKind::Neumann; });
    return sys;
}

void scatter_row(DenseSystem& sys, int row, const RowCoefficients& c) {
    for (std::size_t j = 0; j < c.phi.size(); ++j) sys.add(row, static_cast<int>(j), c.phi[j], c.q[j]);
}

/// Runs body(row, coefficients) over rows in parallel, one coefficient buffer
/// per thread, rethrowing the first error after the loop.
template <class Body>
void for_each_row(int n_rows, std::size_t n_nodes, int threads, Body&& body) {
    std::exception_ptr error;
#ifdef _OPENMP
    const int team = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel num_threads(team)
#endif
    {
        RowCoefficients coef(n_nodes);
#ifdef _OPENMP
#pragma omp for schedule(dynamic, 4)
#endif
        for (int row = 0; row < n_rows; ++row) {
            try {
                coef.reset();
                body(row, coef);
            } catch (...) {
#ifdef _OPENMP
#pragma omp critical(nsbem_assembly_error)
#endif
                if (!error) error = std::current_exception();
            }
        }
    }
    if (error) std::rethrow_exception(error);
}

/// Spreads the double-layer weight of a planar segment over its phi stencil.
struct PhiSpread {
    const PhiStencil* st = nullptr;
    Vec3 origin, t;
    double acc[4] = {0.0, 0.0, 0.0, 0.0};

    PhiSpread(const PhiStencil* stencil, const Vec3& a, const Vec3& b) : origin(a), t((b - a).normalized()) {
        if (stencil && stencil->count > 2) st = stencil;
    }
    bool active() const { return st != nullptr; }
    void add(const Vec3& x, double wdg) {
        double l[4];
        phi_stencil_weights(*st, (x - origin).dot(t), l);
        for (int j = 0; j < st->count; ++j) acc[j] += l[j] * wdg;
    }
    void flush(int element, int row, RowCoefficients& out) const {
        for (int j = 0; j < st->count; ++j) {
            check_finite(acc[j], element, row);
            out.phi[st->nodes[j]] += acc[j];
        }
    }
};

}  // namespace

void phi_stencil_weights(const PhiStencil& st, double s, double* weights) {
    for (int j = 0; j < st.count; ++j) {
        double v = 1.0;
        for (int m = 0; m < st.count; ++m)
            if (m != j) v *= (s - st.s[m]) / (st.s[j] - st.s[m]);
        weights[j] = v;
    }
}

std::vector<PhiStencil> build_phi_stencils(const Mesh& mesh, int order) {
    if (order != 1 && order != 3) throw AssemblyError(fmt::format("planar phi order must be 1 or 3, got {}", order));
    const std::size_t ne = mesh.n_elements();
    std::vector<PhiStencil> out(ne);
    // segments meeting at each node; corner copies belong to one segment only
    std::vector<std::vector<int>> touching(mesh.n_nodes());
    for (std::size_t e = 0; e < ne; ++e) {
        const auto& el = mesh.elements[e];
        if (el.n_vertices != 2) throw AssemblyError("phi stencils need segment elements");
        touching[el.v[0]].push_back(static_cast<int>(e));
        touching[el.v[1]].push_back(static_cast<int>(e));
    }
    for (std::size_t e = 0; e < ne; ++e) {
        const auto& el = mesh.elements[e];
        const Vec3 a = mesh.nodes[el.v[0]].position, b = mesh.nodes[el.v[1]].position;
        const double len = (b - a).norm();
        const Vec3 t = (b - a) / len;
        PhiStencil& st = out[e];
        auto neighbour = [&](int node) -> int {
            if (order == 1 || touching[node].size() != 2) return -1;
            const int other = touching[node][0] == static_cast<int>(e) ? touching[node][1] : touching[node][0];
            const auto& oe = mesh.elements[other];
            const int far = oe.v[0] == node ? oe.v[1] : oe.v[0];
            const Vec3 d = mesh.nodes[far].position - a;
            if ((d - d.dot(t) * t).norm() > 1e-9 * len) return -1;  // edge bends here
            return far;
        };
        const int before = neighbour(el.v[0]);
        const int after = neighbour(el.v[1]);
        for (int node : {before, el.v[0], el.v[1], after}) {
            if (node < 0) continue;
            st.nodes[st.count] = node;
            st.s[st.count] = (mesh.nodes[node].position - a).dot(t);
            ++st.count;
        }
    }
    return out;
}

void integrate_element(const Mesh& mesh, int element, int row, const DesingularizingField& field,
                       const QuadratureOptions& quadrature, RowCoefficients& out, const PhiStencil* stencil) {
    const Element& e = mesh.elements[element];
    const Vec3& x0 = mesh.nodes[row].position;
    const Vec3& n = e.normal;
    ElementSums s;

    if (mesh.regime == Regime::Surface3D) {
        const Vec3& p0 = mesh.nodes[e.v[0]].position;
        const Vec3& p1 = mesh.nodes[e.v[1]].position;
        const Vec3& p2 = mesh.nodes[e.v[2]].position;
        const PartSurface* sphere = quadrature.exact_spheres ? mesh.sphere_of(e.part) : nullptr;
        integrate_triangle(p0, p1, p2, e.measure, x0, quadrature,
                           [&](Vec3 x, double w, double n0, double n1, double n2) {
                               Vec3 n = e.normal;
                               if (sphere) project_to_sphere(*sphere, e.normal, x, n, w);
                               const Vec3 d = x - x0;
                               const double inv_r = 1.0 / d.norm();
                               const double g = inv_r;
                               const double dg = -d.dot(n) * inv_r * inv_r * inv_r;
                               const FieldValue fv = field.eval(x, n);
                               const double wdg = w * dg, wg = w * g;
                               s.a[0] += n0 * wdg, s.a[1] += n1 * wdg, s.a[2] += n2 * wdg;
                               s.b[0] += n0 * wg, s.b[1] += n1 * wg, s.b[2] += n2 * wg;
                               s.dg += wdg;
                               s.self_q += -fv.f * wdg + fv.grad_dot_n * wg;
                           });
    } else if (mesh.regime == Regime::Planar2D) {
        if (field.kind() != FieldKind::Linear)
            throw AssemblyError("planar boundaries need the linear field (inverse-point f is not 2D-harmonic)");
        const Vec3& pa = mesh.nodes[e.v[0]].position;
        const Vec3& pb = mesh.nodes[e.v[1]].position;
        PhiSpread spread(stencil, pa, pb);
        integrate_segment(pa, pb, x0, quadrature, [&](const Vec3& x, double w, double n0, double n1) {
            const Vec3 d = x - x0;
            const double r2 = d.squaredNorm();
            const double g = -0.5 * std::log(r2);
            const double dg = -d.dot(n) / r2;
            const FieldValue fv = field.eval(x, n);
            const double wdg = w * dg, wg = w * g;
            if (spread.active()) spread.add(x, wdg);
            else s.a[0] += n0 * wdg, s.a[1] += n1 * wdg;
            s.b[0] += n0 * wg, s.b[1] += n1 * wg;
            s.dg += wdg;
            s.self_q += -fv.f * wdg + fv.grad_dot_n * wg;
        });
        if (spread.active()) spread.flush(element, row, out);
    } else {
        const Vec3& pa = mesh.nodes[e.v[0]].position;
        const Vec3& pb = mesh.nodes[e.v[1]].position;
        const double r0 = x0.x(), z0 = x0.z();
        integrate_segment(pa, pb, x0, quadrature, [&](const Vec3& x, double w, double n0, double n1) {
            const KernelPair k = kernel_axisym(x.x(), x.z(), n.x(), n.z(), r0, z0);
            const FieldValue fv = psi_axisym(x.x(), x.z(), n.x(), n.z(), field);
            const double wdg = w * k.dg_dn, wg = w * k.g;
            s.a[0] += n0 * wdg, s.a[1] += n1 * wdg;
            s.b[0] += n0 * wg, s.b[1] += n1 * wg;
            s.dg += wdg;
            s.self_q += -fv.f * wdg + fv.grad_dot_n * wg;
        });
    }
    s.flush(e, element, row, out);
}

void integrate_element_corner(const Mesh& mesh, int element, const Corner& corner, const CornerField& field,
                              const QuadratureOptions& quadrature, RowCoefficients& out,
                              const PhiStencil* stencil) {
    const Element& e = mesh.elements[element];
    const Vec3& x0 = mesh.nodes[corner.left].position;
    const Vec3& n = e.normal;
    const Vec3& pa = mesh.nodes[e.v[0]].position;
    const Vec3& pb = mesh.nodes[e.v[1]].position;
    PhiSpread spread(stencil, pa, pb);
    double a[2] = {0.0, 0.0}, b[2] = {0.0, 0.0}, sdg = 0.0, ql = 0.0, qr = 0.0;
    integrate_segment(pa, pb, x0, quadrature,
                      [&](const Vec3& x, double w, double n0, double n1) {
                          const Vec3 d = x - x0;
                          const double r2 = d.squaredNorm();
                          const double wg = -0.5 * std::log(r2) * w;
                          const double wdg = -d.dot(n) / r2 * w;
                          const auto v = field.eval(x, n);
                          if (spread.active()) spread.add(x, wdg);
                          else a[0] += n0 * wdg, a[1] += n1 * wdg;
                          b[0] += n0 * wg, b[1] += n1 * wg;
                          sdg += wdg;
                          ql += -v.fl * wdg + v.dfl_dn * wg;
                          qr += -v.fr * wdg + v.dfr_dn * wg;
                      });
    for (double v : {a[0], a[1], b[0], b[1], sdg, ql, qr}) check_finite(v, element, corner.left);
    for (int k = 0; k < 2; ++k) {
        out.phi[e.v[k]] += a[k];
        out.q[e.v[k]] -= b[k];
    }
    if (spread.active()) spread.flush(element, corner.left, out);
    out.phi[corner.left] -= sdg;
    out.q[corner.left] += ql;
    out.q[corner.right] += qr;
}

namespace {

/// Depth-0 test of the triangle recursion, precomputed per element.
struct TriangleBounds {
    Vec3 centre = Vec3::Zero();
    double reach = 0.0;
    double diam = 0.0;

    bool one_point(const Vec3& x0, const QuadratureOptions& q) const {
        const double dist = (x0 - centre).norm() - reach;
        return dist > 0.0 && diam <= q.near_ratio * dist && dist > q.far_reduce_1 * diam;
    }
};

TriangleBounds triangle_bounds(const Mesh& mesh, const Element& e) {
    const Vec3& c0 = mesh.nodes[e.v[0]].position;
    const Vec3& c1 = mesh.nodes[e.v[1]].position;
    const Vec3& c2 = mesh.nodes[e.v[2]].position;
    TriangleBounds b;
    b.diam = std::max({(c1 - c0).norm(), (c2 - c1).norm(), (c0 - c2).norm()});
    b.centre = (c0 + c1 + c2) / 3.0;
    b.reach = std::max({(c0 - b.centre).norm(), (c1 - b.centre).norm(), (c2 - b.centre).norm()});
    return b;
}

/// One-point centroid rule, as the recursion uses it far from x0.
void integrate_far_triangle(const Mesh& mesh, int element, int row, const DesingularizingField& field,
                            const QuadratureOptions& quadrature, RowCoefficients& out) {
    const Element& e = mesh.elements[element];
    const Vec3& p0 = mesh.nodes[e.v[0]].position;
    const Vec3& p1 = mesh.nodes[e.v[1]].position;
    const Vec3& p2 = mesh.nodes[e.v[2]].position;
    constexpr double third = 1.0 / 3.0;
    Vec3 x = p0 + third * (p1 - p0) + third * (p2 - p0);
    Vec3 n = e.normal;
    double w = e.measure;
    if (const PartSurface* sphere = quadrature.exact_spheres ? mesh.sphere_of(e.part) : nullptr)
        project_to_sphere(*sphere, e.normal, x, n, w);
    const Vec3 d = x - mesh.nodes[row].position;
    const double inv_r = 1.0 / d.norm();
    const double dg = -d.dot(n) * inv_r * inv_r * inv_r;
    const FieldValue fv = field.eval(x, n);
    const double wdg = w * dg, wg = w * inv_r;
    const double l0 = 1.0 - third - third;
    ElementSums s;
    s.a[0] = l0 * wdg, s.a[1] = third * wdg, s.a[2] = third * wdg;
    s.b[0] = l0 * wg, s.b[1] = third * wg, s.b[2] = third * wg;
    s.dg = wdg;
    s.self_q = -fv.f * wdg + fv.grad_dot_n * wg;
    s.flush(e, element, row, out);
}

DenseSystem assemble_regular(const Mesh& mesh, const BoundaryConditions& bcs, const FieldPolicy& policy,
                             const AssemblyOptions& options) {
    DenseSystem sys = empty_system(mesh, bcs);
    const int n = static_cast<int>(mesh.n_nodes());
    const int ne = static_cast<int>(mesh.n_elements());
    const QuadratureOptions& quad = options.quadrature;
    std::vector<TriangleBounds> bounds;
    if (mesh.regime == Regime::Surface3D && quad.far_reduce_1 > 0.0) {
        bounds.reserve(ne);
        for (const auto& e : mesh.elements) bounds.push_back(triangle_bounds(mesh, e));
    }
    for_each_row(n, mesh.n_nodes(), options.threads, [&](int row, RowCoefficients& coef) {
        const DesingularizingField field = policy.node_field(mesh, row);
        const Vec3& x0 = mesh.nodes[row].position;
        for (int e = 0; e < ne; ++e) {
            if (!bounds.empty() && bounds[e].one_point(x0, quad)) {
                integrate_far_triangle(mesh, e, row, field, quad, coef);
                continue;
            }
            integrate_element(mesh, e, row, field, quad, coef);
        }
        scatter_row(sys, row, coef);
    });
    return sys;
}

}  // namespace

DenseSystem assemble_3d(const Mesh& mesh, const BoundaryConditions& bcs, const FieldPolicy& policy,
                        const AssemblyOptions& options) {
    check_inputs(mesh, bcs, Regime::Surface3D, "assemble_3d");
    for (const auto& e : mesh.elements)
        if (e.n_vertices != 3) throw AssemblyError("assemble_3d needs triangle elements");
    return assemble_regular(mesh, bcs, policy, options);
}

DenseSystem assemble_axisym(const Mesh& mesh, const BoundaryConditions& bcs, const FieldPolicy& policy,
                            const AssemblyOptions& options) {
    check_inputs(mesh, bcs, Regime::Axisymmetric, "assemble_axisym");
    for (std::size_t i = 0; i < mesh.n_nodes(); ++i) {
        if (mesh.nodes[i].position.x() < 0.0) throw AssemblyError(fmt::format("meridian node {} has r < 0", i));
        if (policy.part(mesh.nodes[i].part).kind != FieldKind::InversePoint)
            throw AssemblyError("assemble_axisym needs inverse-point fields with xD on the axis");
    }
    for (const auto& e : mesh.elements)
        if (e.n_vertices != 2) throw AssemblyError("assemble_axisym needs segment elements");
    return assemble_regular(mesh, bcs, policy, options);
}

std::vector<double> first_derivative_weights(const std::vector<double>& x) {
    // Fornberg's recursion for derivative orders 0 and 1 at the origin
    const int n = static_cast<int>(x.size());
    std::vector<std::vector<double>> c(n, std::vector<double>(2, 0.0));
    double c1 = 1.0, c4 = x[0];
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, 1);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i];
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) w[i] = c[i][1];
    return w;
}

double corner_tangential_derivative(const Mesh& mesh, const BoundaryConditions& bcs, int corner_copy) {
    constexpr int kStencil = 5;
    const Vec3 x0 = mesh.nodes[corner_copy].position;
    const Vec3 t = edge_tangent_away(mesh, corner_copy);
    std::vector<int> walk{corner_copy};
    int prev_element = -1;
    while (static_cast<int>(walk.size()) < kStencil) {
        const int cur = walk.back();
        if (walk.size() > 1 && mesh.nodes[cur].is_corner()) break;
        int next = -1;
        for (int e = 0; e < static_cast<int>(mesh.n_elements()); ++e) {
            const auto& el = mesh.elements[e];
            if (e == prev_element || el.n_vertices != 2) continue;
            if (el.v[0] == cur) next = el.v[1];
            else if (el.v[1] == cur) next = el.v[0];
            if (next >= 0) {
                prev_element = e;
                break;
            }
        }
        if (next < 0) break;
        walk.push_back(next);
    }
    if (static_cast<int>(walk.size()) < kStencil)
        throw AssemblyError(fmt::format("corner copy {}: fewer than {} nodes on its edge for the fourth-order "
                                        "tangential derivative", corner_copy, kStencil));
    std::vector<double> s(kStencil);
    for (int k = 0; k < kStencil; ++k) {
        const Vec3 d = mesh.nodes[walk[k]].position - x0;
        s[k] = d.dot(t);
        if ((d - s[k] * t).norm() > 1e-9 * (1.0 + std::abs(s[k])))
            throw AssemblyError(fmt::format("corner copy {}: edge is not straight over the derivative stencil",
                                            corner_copy));
    }
    const auto w = first_derivative_weights(s);
    double deriv = 0.0;
    for (int k = 0; k < kStencil; ++k) deriv += w[k] * bcs.value[walk[k]];
    return deriv;
}

DenseSystem assemble_2d_corners(const Mesh& mesh, const BoundaryConditions& bcs, const FieldPolicy& policy,
                                const AssemblyOptions& options) {
    check_inputs(mesh, bcs, Regime::Planar2D, "assemble_2d_corners");
    for (const auto& e : mesh.elements)
        if (e.n_vertices != 2) throw AssemblyError("assemble_2d_corners needs segment elements");
    for (std::size_t i = 0; i < mesh.n_nodes(); ++i)
        if (!mesh.nodes[i].is_corner() && policy.part(mesh.nodes[i].part).kind != FieldKind::Linear)
            throw AssemblyError("planar boundaries need the linear field (inverse-point f is not 2D-harmonic)");
    for (std::size_t c = 0; c < mesh.corners.size(); ++c) {
        const auto& corner = mesh.corners[c];
        if (bcs.kind[corner.left] != BcKind::Dirichlet || bcs.kind[corner.right] != BcKind::Dirichlet)
            throw AssemblyError(fmt::format("corner {}: only Dirichlet data on both edges is supported", c));
        if (bcs.value[corner.left] != bcs.value[corner.right])
            throw AssemblyError(fmt::format("corner {}: the two copies carry different potentials", c));
    }

    DenseSystem sys = empty_system(mesh, bcs);
    std::vector<int> corner_of(mesh.n_nodes(), -1);
    for (std::size_t c = 0; c < mesh.corners.size(); ++c) {
        corner_of[mesh.corners[c].left] = static_cast<int>(c);
        corner_of[mesh.corners[c].right] = static_cast<int>(c);
    }
    // compatibility rows are cheap and need the edge walk; build them serially
    for (const auto& corner : mesh.corners) {
        const Vec3& nl = mesh.nodes[corner.left].normal;
        const Vec3& nr = mesh.nodes[corner.right].normal;
        const Vec3 tl = edge_tangent_away(mesh, corner.left);
        const double dphi_dt = corner_tangential_derivative(mesh, bcs, corner.left);
        sys.matrix(corner.right, corner.left) = nl.dot(nr);
        sys.matrix(corner.right, corner.right) = -1.0;
        sys.rhs(corner.right) = -dphi_dt * tl.dot(nr);
    }
    const auto stencils = build_phi_stencils(mesh, options.planar_phi_order);
    const int n = static_cast<int>(mesh.n_nodes());
    const int ne = static_cast<int>(mesh.n_elements());
    for_each_row(n, mesh.n_nodes(), options.threads, [&](int row, RowCoefficients& coef) {
        const Node& node = mesh.nodes[row];
        if (node.side == CornerSide::Right) return;
        if (node.side == CornerSide::Left) {
            const Corner& corner = mesh.corners[corner_of[row]];
            const CornerField field = policy.corner_field(mesh, corner);
            for (int e = 0; e < ne; ++e) integrate_element_corner(mesh, e, corner, field, options.quadrature, coef, &stencils[e]);
        } else {
            const auto field = DesingularizingField::linear(node.position, node.normal);
            for (int e = 0; e < ne; ++e) integrate_element(mesh, e, row, field, options.quadrature, coef, &stencils[e]);
        }
        scatter_row(sys, row, coef);
    });
    return sys;
}

ClosureTerms infinity_closure_terms(const DesingularizingField& field, double solid_angle) {
    if (field.kind() != FieldKind::InversePoint)
        throw AssemblyError("far-field closure needs inverse-point fields (linear f is unbounded at infinity)");
    return {solid_angle, solid_angle * field.value_at_infinity()};
}

void add_semi_infinite_closure(DenseSystem& system, const Mesh& mesh, const FieldPolicy& policy,
                               const ClosureOptions& options, const std::vector<int>& rows) {
    if (system.size() != mesh.n_nodes()) throw AssemblyError("closure: system and mesh sizes differ");
    if (options.plane_annulus && !(options.annulus_radius > 0.0))
        throw AssemblyError("closure: annulus radius must be positive");
    std::vector<int> all;
    const std::vector<int>* list = &rows;
    if (rows.empty()) {
        all.resize(mesh.n_nodes());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
        list = &all;
    }
    const auto& gs = gauss_legendre(options.radial_points);
    const int na = options.angular_points;
    const Vec3 up(0.0, 0.0, 1.0);
    const int count = static_cast<int>(list->size());
    std::vector<ClosureTerms> terms(count);
    std::exception_ptr error;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int k = 0; k < count; ++k) {
        try {
            const int row = (*list)[k];
            const DesingularizingField field = policy.node_field(mesh, row);
            ClosureTerms t = infinity_closure_terms(field, options.solid_angle);
            if (options.plane_annulus) {
                // rho = R_T / s maps the plane beyond the disc onto s in (0, 1]
                const Vec3& x0 = mesh.nodes[row].position;
                const double rt = options.annulus_radius;
                const double dtheta = 2.0 * std::numbers::pi / na;
                double sphi = 0.0, sq = 0.0;
                for (const auto& p : gs) {
                    const double rho = rt / p.t;
                    const double jac = p.w * rt * rt / (p.t * p.t * p.t) * dtheta;
                    for (int a = 0; a < na; ++a) {
                        const double th = (a + 0.5) * dtheta;
                        const Vec3 x = options.annulus_center +
                                       Vec3(rho * std::cos(th), rho * std::sin(th), options.plane_z - options.annulus_center.z());
                        const Vec3 d = x - x0;
                        const double inv_r = 1.0 / d.norm();
                        const double dg = -d.z() * inv_r * inv_r * inv_r;
                        const FieldValue fv = field.eval(x, up);
                        sphi -= jac * dg;
                        sq += jac * (-fv.f * dg + fv.grad_dot_n * inv_r);
                    }
                }
                t.phi += sphi;
                t.q += sq;
            }
            terms[k] = t;
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical(nsbem_closure_error)
#endif
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
    for (int k = 0; k < count; ++k) system.add((*list)[k], (*list)[k], terms[k].phi, terms[k].q);
    system.needs_gauge = false;
}

}  // namespace nsbem
