#pragma once

#include "nsbem/geometry.hpp"

#include <stdexcept>
#include <vector>

namespace nsbem {

/// A desingularizing field violates its construction conditions.
class FieldError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct FieldValue {
    double f = 0.0;           // f(x)
    double grad_dot_n = 0.0;  // grad f(x) . n
};

enum class FieldKind { Linear, InversePoint };

/// Harmonic f with f(x0) = 0 and grad f(x0) . n0 = 1, so that
/// psi = phi0 + q0 f matches the potential and its normal derivative at x0.
///
///   Linear:        f = n0 . (x - x0)
///   InversePoint:  f = (rho0^2 / d) (1 - rho0 / |x - xD|),
///                  rho0 = |x0 - xD|, d = n0 . (x0 - xD)
///
/// The inverse-point form stays bounded at infinity (f -> rho0^2 / d), which
/// is what exterior and semi-infinite problems need.
class DesingularizingField {
public:
    static DesingularizingField linear(const Vec3& x0, const Vec3& n0);
    static DesingularizingField inverse_point(const Vec3& x0, const Vec3& n0, const Vec3& xd);

    FieldKind kind() const { return kind_; }
    const Vec3& anchor() const { return x0_; }
    const Vec3& anchor_normal() const { return n0_; }
    const Vec3& exterior_point() const { return xd_; }
    double rho0() const { return rho0_; }
    double offset() const { return d_; }  // n0 . (x0 - xD)

    /// Limit of f at infinity (inverse-point kind only).
    double value_at_infinity() const;

    FieldValue eval(const Vec3& x, const Vec3& n) const {
        if (kind_ == FieldKind::Linear) return {n0_.dot(x - x0_), n0_.dot(n)};
        return eval_inverse(x, n);
    }

private:
    FieldValue eval_inverse(const Vec3& x, const Vec3& n) const;

    FieldKind kind_ = FieldKind::Linear;
    Vec3 x0_ = Vec3::Zero();
    Vec3 n0_ = Vec3::Zero();
    Vec3 xd_ = Vec3::Zero();
    double rho0_ = 0.0;
    double d_ = 0.0;
};

/// Separate entry points for each field family, mirroring DesingularizingField::eval.
FieldValue f_linear(const Vec3& x, const Vec3& n, const DesingularizingField& field);
FieldValue f_inverse(const Vec3& x, const Vec3& n, const DesingularizingField& field);

/// Axisymmetric psi written in meridian variables: for xD = (0, 0, zD) on the
/// axis, returns ((rho - rho0)/rho) rho0^2 / s0 and (rho0/rho)^3 s/s0 with
/// rho = sqrt(r^2 + (z - zD)^2) and s = r n_r + (z - zD) n_z.
FieldValue psi_axisym(double r, double z, double n_r, double n_z, const DesingularizingField& field);

// --- corners ----------------------------------------------------------------

enum class CornerKind { Linear, Log };

/// Left/right pair of corner fields:
///   fL(x0) = 0, grad fL . nL = 1, grad fL . nR = 0 at x0,
/// and the mirror conditions for fR.
class CornerField {
public:
    static CornerField linear(const Vec3& x0, const Vec3& nl, const Vec3& nr);
    static CornerField log(const Vec3& x0, const Vec3& nl, const Vec3& nr, const Vec3& xdl, const Vec3& xdr);

    struct Value {
        double fl = 0.0, fr = 0.0;
        double dfl_dn = 0.0, dfr_dn = 0.0;
    };

    CornerKind kind() const { return kind_; }
    const Vec3& anchor() const { return x0_; }
    const Vec3& normal_left() const { return nl_; }
    const Vec3& normal_right() const { return nr_; }

    Value eval(const Vec3& x, const Vec3& n) const;
    Vec3 grad_left(const Vec3& x) const;
    Vec3 grad_right(const Vec3& x) const;

private:
    CornerKind kind_ = CornerKind::Linear;
    Vec3 x0_ = Vec3::Zero(), nl_ = Vec3::Zero(), nr_ = Vec3::Zero();
    Vec3 gl_ = Vec3::Zero(), gr_ = Vec3::Zero();  // linear: constant gradients
    Vec3 xdl_ = Vec3::Zero(), xdr_ = Vec3::Zero();
    double cl_ = 0.0, cr_ = 0.0;  // log: |x0 - xD|^2 / (n . (x0 - xD))
    double rl_ = 0.0, rr_ = 0.0;  // log: |x0 - xD|
};

struct CornerLinearPair {
    double fl = 0.0, fr = 0.0;
    Vec3 grad_l = Vec3::Zero(), grad_r = Vec3::Zero();
};

CornerLinearPair corner_pair_linear(const Vec3& x, const Vec3& x0, const Vec3& nl, const Vec3& nr);

struct CornerLogPair {
    double fl = 0.0, fr = 0.0;
    double grad_l_dot_n = 0.0, grad_r_dot_n = 0.0;
};

CornerLogPair corner_pair_log(const Vec3& x, const Vec3& n, const Vec3& x0, const Vec3& nl, const Vec3& nr,
                              const Vec3& xdl, const Vec3& xdr);

struct CornerExteriorPoints {
    Vec3 left = Vec3::Zero();
    Vec3 right = Vec3::Zero();
};

/// Exterior points for the log pair. tl and tr are unit tangents pointing along
/// each edge away from the corner. xDL sits on the backward extension of the
/// right edge, so nR . (x0 - xDL) = 0, and symmetrically for xDR.
CornerExteriorPoints place_corner_exterior_points(const Vec3& x0, const Vec3& nl, const Vec3& nr, const Vec3& tl,
                                                  const Vec3& tr, double scale);

// --- per-node policy --------------------------------------------------------

/// Where the exterior point xD of an inverse-point field sits.
struct ExteriorPointRule {
    enum class Kind { Fixed, Lateral };
    Kind kind = Kind::Fixed;
    Vec3 point = Vec3::Zero();    // Fixed: xD itself
    Vec3 shift = Vec3::Zero();    // Lateral: xD = (x0.x + shift.x, x0.y + shift.y, level)
    double level = 0.0;

    Vec3 place(const Vec3& x0) const;
};

struct PartField {
    FieldKind kind = FieldKind::Linear;
    ExteriorPointRule exterior;
};

/// Chooses the desingularizing field for every collocation node.
struct FieldPolicy {
    std::vector<PartField> parts;  // indexed by mesh part; the last entry covers higher indices
    CornerKind corner_kind = CornerKind::Linear;
    double corner_scale = 1.0;

    static FieldPolicy linear();
    /// Inverse-point fields with xD fixed per part (e.g. each sphere's centre).
    static FieldPolicy inverse_point(const std::vector<Vec3>& exterior_points);

    const PartField& part(int index) const;
    DesingularizingField node_field(const Mesh& mesh, int node) const;
    CornerField corner_field(const Mesh& mesh, const Corner& corner) const;
};

/// Unit tangent along the edge of a corner copy, pointing away from the corner.
Vec3 edge_tangent_away(const Mesh& mesh, int corner_copy);

}  // namespace nsbem
