#pragma once

#include "nsbem/desing.hpp"
#include "nsbem/geometry.hpp"
#include "nsbem/quadrature.hpp"

#include <Eigen/Dense>

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsbem {

/// Invalid assembly input: missing data, unsupported configuration or a
/// non-finite coefficient.
class AssemblyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class BcKind { Dirichlet, Neumann };

/// Per-node boundary data: phi for Dirichlet nodes, q = dphi/dn for Neumann nodes.
struct BoundaryConditions {
    std::vector<BcKind> kind;
    std::vector<double> value;

    static BoundaryConditions dirichlet(std::vector<double> phi);
    static BoundaryConditions neumann(std::vector<double> q);
    std::size_t size() const { return kind.size(); }
};

/// Square collocation system. Node j owns column j; the unknown is q for a
/// Dirichlet node and phi for a Neumann node. Corner copies are separate nodes,
/// so a Dirichlet corner carries two q unknowns.
struct DenseSystem {
    Eigen::MatrixXd matrix;
    Eigen::VectorXd rhs;
    BoundaryConditions bcs;
    bool needs_gauge = false;  // pure Neumann interior problem: phi fixed up to a constant
    Regime regime = Regime::Surface3D;

    std::size_t size() const { return static_cast<std::size_t>(rhs.size()); }
    /// Add phi(node) * phi_coef + q(node) * q_coef to the left side of `row`.
    void add(int row, int node, double phi_coef, double q_coef);
};

struct AssemblyOptions {
    QuadratureOptions quadrature;
    int threads = 0;       // 0 keeps the OpenMP default
    int planar_phi_order = 3;  // 1: linear phi on segments; 3: cubic along straight edges
};

/// Nodes and arc-length abscissae used to reconstruct phi on a planar segment.
/// q stays linear; phi is interpolated through up to four nodes of the same
/// straight edge (the segment's own two plus one neighbour on each side).
struct PhiStencil {
    int count = 0;
    std::array<int, 4> nodes{-1, -1, -1, -1};
    std::array<double, 4> s{0.0, 0.0, 0.0, 0.0};  // along the segment, origin at its first vertex
};

/// order 1 gives two-node (linear) stencils everywhere.
std::vector<PhiStencil> build_phi_stencils(const Mesh& mesh, int order);

/// Lagrange weights of the stencil nodes at abscissa s.
void phi_stencil_weights(const PhiStencil& stencil, double s, double* weights);

/// Coefficients of one collocation row before the boundary data split them
/// between matrix and right-hand side.
struct RowCoefficients {
    std::vector<double> phi;
    std::vector<double> q;

    explicit RowCoefficients(std::size_t n = 0) : phi(n, 0.0), q(n, 0.0) {}
    void reset() {
        std::fill(phi.begin(), phi.end(), 0.0);
        std::fill(q.begin(), q.end(), 0.0);
    }
};

/// Accumulate the desingularized integrands of one element into the row of
/// node `row`, using the field of that row. 3D triangles and 2D segments use
/// the free-space kernels of their regime; meridian segments use the ring
/// kernels and axisymmetric psi.
void integrate_element(const Mesh& mesh, int element, int row, const DesingularizingField& field,
                       const QuadratureOptions& quadrature, RowCoefficients& out,
                       const PhiStencil* stencil = nullptr);

/// Corner variant: psi = phi0 + qL fL + qR fR with q slots at the two copies.
void integrate_element_corner(const Mesh& mesh, int element, const Corner& corner, const CornerField& field,
                              const QuadratureOptions& quadrature, RowCoefficients& out,
                              const PhiStencil* stencil = nullptr);

DenseSystem assemble_3d(const Mesh& mesh, const BoundaryConditions& bcs, const FieldPolicy& policy,
                        const AssemblyOptions& options = {});

DenseSystem assemble_axisym(const Mesh& mesh, const BoundaryConditions& bcs, const FieldPolicy& policy,
                            const AssemblyOptions& options = {});

/// 2D boundary with double-node corners. Regular nodes use the linear field;
/// each corner gets one integral-equation row (Left copy) and one
/// compatibility row (Right copy).
DenseSystem assemble_2d_corners(const Mesh& mesh, const BoundaryConditions& bcs, const FieldPolicy& policy,
                                const AssemblyOptions& options = {});

/// Fourth-order one-sided tangential derivative of Dirichlet phi at a corner
/// copy, along its edge, away from the corner.
double corner_tangential_derivative(const Mesh& mesh, const BoundaryConditions& bcs, int corner_copy);

/// Finite-difference weights for the first derivative at x = 0 from samples at
/// the given abscissae.
std::vector<double> first_derivative_weights(const std::vector<double>& abscissae);

/// Far-field closure for exterior and semi-infinite domains.
struct ClosureOptions {
    double solid_angle = 2.0 * 3.14159265358979323846;  // 4 pi whole space, 2 pi half space
    bool plane_annulus = false;  // integrate psi over z = plane_z beyond the truncated disc
    Vec3 annulus_center = Vec3::Zero();
    double annulus_radius = 0.0;
    double plane_z = 0.0;
    int radial_points = 16;
    int angular_points = 64;
};

/// Adds the surface at infinity, solid_angle * (phi0 + q0 rho0^2 / d), to
/// every row listed in `rows` (all rows when empty); optionally also the psi
/// part of the plane beyond the truncation radius, where phi = q = 0 is
/// assumed. Every listed row must use an inverse-point field.
void add_semi_infinite_closure(DenseSystem& system, const Mesh& mesh, const FieldPolicy& policy,
                               const ClosureOptions& options, const std::vector<int>& rows = {});

/// Closure coefficient pair (phi0, q0) a single row receives from the surface at infinity.
struct ClosureTerms {
    double phi = 0.0;
    double q = 0.0;
};
ClosureTerms infinity_closure_terms(const DesingularizingField& field, double solid_angle);

}  // namespace nsbem
