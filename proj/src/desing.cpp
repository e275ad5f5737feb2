#include "nsbem/desing.hpp"

#include <fmt/format.h>

#include <cmath>

namespace nsbem {

DesingularizingField DesingularizingField::linear(const Vec3& x0, const Vec3& n0) {
    DesingularizingField field;
    field.kind_ = FieldKind::Linear;
    field.x0_ = x0;
    field.n0_ = n0;
    return field;
}

DesingularizingField DesingularizingField::inverse_point(const Vec3& x0, const Vec3& n0, const Vec3& xd) {
    DesingularizingField field;
    field.kind_ = FieldKind::InversePoint;
    field.x0_ = x0;
    field.n0_ = n0;
    field.xd_ = xd;
    field.rho0_ = (x0 - xd).norm();
    field.d_ = n0.dot(x0 - xd);
    if (!(field.rho0_ > 0.0))
        throw FieldError("exterior point coincides with the collocation node");
    if (!(std::abs(field.d_) > 1e-12 * field.rho0_))
        throw FieldError(fmt::format("n0 . (x0 - xD) = 0 at x0 = ({}, {}, {}); move the exterior point", x0.x(),
                                     x0.y(), x0.z()));
    return field;
}

double DesingularizingField::value_at_infinity() const {
    if (kind_ != FieldKind::InversePoint) throw FieldError("linear field is unbounded at infinity");
    return rho0_ * rho0_ / d_;
}

FieldValue DesingularizingField::eval_inverse(const Vec3& x, const Vec3& n) const {
    const Vec3 dx = x - xd_;
    const double r2 = dx.squaredNorm();
    if (r2 == 0.0) throw FieldError("inverse-point field evaluated at its exterior point");
    const double r = std::sqrt(r2);
    const double inv_r = 1.0 / r;
    const double c = rho0_ * rho0_ / d_;
    return {c * (r - rho0_) * inv_r, c * rho0_ * dx.dot(n) * inv_r * inv_r * inv_r};
}

FieldValue f_linear(const Vec3& x, const Vec3& n, const DesingularizingField& field) {
    if (field.kind() != FieldKind::Linear) throw FieldError("f_linear needs a linear field");
    return field.eval(x, n);
}

FieldValue f_inverse(const Vec3& x, const Vec3& n, const DesingularizingField& field) {
    if (field.kind() != FieldKind::InversePoint) throw FieldError("f_inverse needs an inverse-point field");
    return field.eval(x, n);
}

FieldValue psi_axisym(double r, double z, double n_r, double n_z, const DesingularizingField& field) {
    if (field.kind() != FieldKind::InversePoint) throw FieldError("axisymmetric psi needs an inverse-point field");
    const Vec3& xd = field.exterior_point();
    if (xd.x() != 0.0 || xd.y() != 0.0) throw FieldError("axisymmetric exterior point must lie on the axis");
    const double zd = xd.z();
    const Vec3& x0 = field.anchor();
    const Vec3& n0 = field.anchor_normal();
    const double rho0 = std::hypot(x0.x(), x0.z() - zd);
    const double s0 = x0.x() * n0.x() + (x0.z() - zd) * n0.z();
    const double rho = std::hypot(r, z - zd);
    if (rho == 0.0) throw FieldError("axisymmetric psi evaluated at its exterior point");
    const double s = r * n_r + (z - zd) * n_z;
    const double ratio = rho0 / rho;
    return {(rho - rho0) / rho * rho0 * rho0 / s0, ratio * ratio * ratio * s / s0};
}

// ---------------------------------------------------------------------------

CornerField CornerField::linear(const Vec3& x0, const Vec3& nl, const Vec3& nr) {
    const double c = nl.dot(nr);
    if (!(std::abs(c) < 1.0 - 1e-10)) throw FieldError("corner normals are parallel; node is not a corner");
    CornerField field;
    field.kind_ = CornerKind::Linear;
    field.x0_ = x0;
    field.nl_ = nl;
    field.nr_ = nr;
    field.gl_ = (nl - c * nr) / (1.0 - c * c);
    field.gr_ = (nr - c * nl) / (1.0 - c * c);
    return field;
}

CornerField CornerField::log(const Vec3& x0, const Vec3& nl, const Vec3& nr, const Vec3& xdl, const Vec3& xdr) {
    CornerField field;
    field.kind_ = CornerKind::Log;
    field.x0_ = x0;
    field.nl_ = nl;
    field.nr_ = nr;
    field.xdl_ = xdl;
    field.xdr_ = xdr;
    const Vec3 al = x0 - xdl, ar = x0 - xdr;
    field.rl_ = al.norm();
    field.rr_ = ar.norm();
    const double tol = 1e-10;
    if (!(field.rl_ > 0.0 && field.rr_ > 0.0)) throw FieldError("corner exterior point coincides with the corner");
    if (!(std::abs(nl.dot(al)) > tol * field.rl_) || !(std::abs(nr.dot(al)) <= tol * field.rl_) ||
        !(std::abs(nr.dot(ar)) > tol * field.rr_) || !(std::abs(nl.dot(ar)) <= tol * field.rr_))
        throw FieldError("corner exterior points violate nL.(x0-xDL) != 0, nR.(x0-xDL) = 0, "
                         "nR.(x0-xDR) != 0, nL.(x0-xDR) = 0");
    field.cl_ = al.squaredNorm() / nl.dot(al);
    field.cr_ = ar.squaredNorm() / nr.dot(ar);
    return field;
}

CornerField::Value CornerField::eval(const Vec3& x, const Vec3& n) const {
    Value v;
    if (kind_ == CornerKind::Linear) {
        const Vec3 d = x - x0_;
        v.fl = gl_.dot(d);
        v.fr = gr_.dot(d);
        v.dfl_dn = gl_.dot(n);
        v.dfr_dn = gr_.dot(n);
        return v;
    }
    const Vec3 dl = x - xdl_, dr = x - xdr_;
    const double l2 = dl.squaredNorm(), r2 = dr.squaredNorm();
    if (l2 == 0.0 || r2 == 0.0) throw FieldError("corner log field evaluated at its exterior point");
    v.fl = 0.5 * cl_ * std::log(l2 / (rl_ * rl_));
    v.fr = 0.5 * cr_ * std::log(r2 / (rr_ * rr_));
    v.dfl_dn = cl_ * dl.dot(n) / l2;
    v.dfr_dn = cr_ * dr.dot(n) / r2;
    return v;
}

Vec3 CornerField::grad_left(const Vec3& x) const {
    if (kind_ == CornerKind::Linear) return gl_;
    const Vec3 d = x - xdl_;
    return cl_ * d / d.squaredNorm();
}

Vec3 CornerField::grad_right(const Vec3& x) const {
    if (kind_ == CornerKind::Linear) return gr_;
    const Vec3 d = x - xdr_;
    return cr_ * d / d.squaredNorm();
}

CornerLinearPair corner_pair_linear(const Vec3& x, const Vec3& x0, const Vec3& nl, const Vec3& nr) {
    const CornerField field = CornerField::linear(x0, nl, nr);
    CornerLinearPair out;
    out.grad_l = field.grad_left(x);
    out.grad_r = field.grad_right(x);
    out.fl = out.grad_l.dot(x - x0);
    out.fr = out.grad_r.dot(x - x0);
    return out;
}

CornerLogPair corner_pair_log(const Vec3& x, const Vec3& n, const Vec3& x0, const Vec3& nl, const Vec3& nr,
                              const Vec3& xdl, const Vec3& xdr) {
    const auto v = CornerField::log(x0, nl, nr, xdl, xdr).eval(x, n);
    return {v.fl, v.fr, v.dfl_dn, v.dfr_dn};
}

CornerExteriorPoints place_corner_exterior_points(const Vec3& x0, const Vec3& nl, const Vec3& nr, const Vec3& tl,
                                                  const Vec3& tr, double scale) {
    if (!(scale > 0.0)) throw FieldError("corner exterior point scale must be positive");
    // The backward extension of one edge leaves the domain only at a convex corner.
    if (!(nl.dot(tr) < -1e-12) || !(nr.dot(tl) < -1e-12))
        throw FieldError("reflex corner: edge extensions stay inside the domain; use the linear corner pair");
    CornerExteriorPoints out{x0 - scale * tr, x0 - scale * tl};
    CornerField::log(x0, nl, nr, out.left, out.right);  // re-checks the four conditions
    return out;
}

// ---------------------------------------------------------------------------

Vec3 ExteriorPointRule::place(const Vec3& x0) const {
    if (kind == Kind::Fixed) return point;
    return {x0.x() + shift.x(), x0.y() + shift.y(), level};
}

FieldPolicy FieldPolicy::linear() {
    FieldPolicy policy;
    policy.parts.push_back({FieldKind::Linear, {}});
    return policy;
}

FieldPolicy FieldPolicy::inverse_point(const std::vector<Vec3>& exterior_points) {
    FieldPolicy policy;
    for (const auto& p : exterior_points) {
        PartField part;
        part.kind = FieldKind::InversePoint;
        part.exterior.kind = ExteriorPointRule::Kind::Fixed;
        part.exterior.point = p;
        policy.parts.push_back(part);
    }
    return policy;
}

const PartField& FieldPolicy::part(int index) const {
    if (parts.empty()) throw FieldError("field policy has no part entries");
    if (index < 0) index = 0;
    return parts[std::min<std::size_t>(static_cast<std::size_t>(index), parts.size() - 1)];
}

DesingularizingField FieldPolicy::node_field(const Mesh& mesh, int node) const {
    const Node& n = mesh.nodes.at(node);
    const PartField& pf = part(n.part);
    if (pf.kind == FieldKind::Linear) return DesingularizingField::linear(n.position, n.normal);
    try {
        return DesingularizingField::inverse_point(n.position, n.normal, pf.exterior.place(n.position));
    } catch (const FieldError& e) {
        throw FieldError(fmt::format("node {}: {}", node, e.what()));
    }
}

Vec3 edge_tangent_away(const Mesh& mesh, int corner_copy) {
    for (const auto& e : mesh.elements) {
        if (e.n_vertices != 2) continue;
        int other = -1;
        if (e.v[0] == corner_copy) other = e.v[1];
        if (e.v[1] == corner_copy) other = e.v[0];
        if (other >= 0) return (mesh.nodes[other].position - mesh.nodes[corner_copy].position).normalized();
    }
    throw FieldError(fmt::format("corner copy {} belongs to no segment", corner_copy));
}

CornerField FieldPolicy::corner_field(const Mesh& mesh, const Corner& corner) const {
    const Node& left = mesh.nodes.at(corner.left);
    const Node& right = mesh.nodes.at(corner.right);
    if (corner_kind == CornerKind::Linear) return CornerField::linear(left.position, left.normal, right.normal);
    const auto points = place_corner_exterior_points(left.position, left.normal, right.normal,
                                                     edge_tangent_away(mesh, corner.left),
                                                     edge_tangent_away(mesh, corner.right), corner_scale);
    return CornerField::log(left.position, left.normal, right.normal, points.left, points.right);
}

}  // namespace nsbem
