#pragma once

#include "nsbem/assembly.hpp"
#include "nsbem/desing.hpp"
#include "nsbem/linsolve.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsbem {

/// Off-boundary evaluation or force integration received an invalid request.
class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Evaluation point tied to a boundary anchor x0 with normal n0 (pointing out
/// of the domain): point = x0 - epsilon n0. The anchor is either a node, or a
/// point inside a triangle (barycentric a, b) whose phi0, q0 and n0 are
/// interpolated from the nodes.
struct FieldProbe {
    Vec3 point = Vec3::Zero();
    int anchor = -1;        // node anchor
    int element = -1;       // surface anchor
    double a = 0.0, b = 0.0;
    double epsilon = 0.0;
    Vec3 anchor_point = Vec3::Zero();
    Vec3 anchor_normal = Vec3::Zero();

    static FieldProbe at_node(const Mesh& mesh, int node, double epsilon);
    /// Anchor inside triangle `element`; on exact-sphere parts x0 is projected
    /// onto the sphere, as the quadrature does.
    static FieldProbe at_surface(const Mesh& mesh, int element, double a, double b, double epsilon,
                                 bool exact_spheres = true);
};

/// Assembly defaults with refinement deep enough to resolve probes down to
/// about 1e-9 of an element size from the surface.
QuadratureOptions near_quadrature();

struct EvalOptions {
    QuadratureOptions quadrature = near_quadrature();
    int planar_phi_order = 3;     // must match the assembly
    double near_diameters = 1.0;  // eval_potential switches to the near form inside this many element sizes
};

/// Representation formula phi(xp) = (1/c)[int q G - int phi dG/dn] with
/// c = 4 pi (3D, axisymmetric) or 2 pi (planar). Exterior problems assume
/// phi -> 0 at infinity. Throws when xp lies within one local element size of
/// the boundary.
double eval_interior(const Vec3& point, const Solution& solution, const Mesh& mesh, const EvalOptions& options = {});

/// Desingularized evaluation close to the boundary:
///   phi(xp) = psi(xp) - (1/c) int (phi - psi) [dG(x,xp)/dn - dG(x,x0)/dn]
///                     + (1/c) int (q - dpsi/dn) [G(x,xp) - G(x,x0)],
/// with psi = phi0 + q0 f the anchor's own field. At epsilon = 0 it returns
/// phi(x0).
double eval_near_boundary(const FieldProbe& probe, const Solution& solution, const Mesh& mesh,
                          const FieldPolicy& policy, const EvalOptions& options = {});

/// Distance from a point to the nearest element and that element's diameter.
struct BoundaryDistance {
    double distance = 0.0;
    double element_size = 0.0;
    int nearest_node = -1;
};
BoundaryDistance boundary_distance(const Vec3& point, const Mesh& mesh);

/// eval_interior away from the boundary, eval_near_boundary anchored at the
/// nearest node otherwise.
double eval_potential(const Vec3& point, const Solution& solution, const Mesh& mesh, const FieldPolicy& policy,
                      const EvalOptions& options = {});

/// Per-node velocity u = q n + tangential gradient of phi. The tangential part
/// is a weighted least-squares fit over the 1-ring, after removing the normal
/// component q (n . dx) of each neighbour difference. Axis nodes of meridian
/// meshes have no tangential part (reflection symmetry).
struct SurfaceVelocity {
    std::vector<Vec3> u;
};
SurfaceVelocity surface_velocity(const Solution& solution, const Mesh& mesh);

/// Inputs of the unsteady Bernoulli pressure on a rigid part.
struct PressureInputs {
    double rho = 1.0;
    double g = 9.81;
    double dt = 0.0;                     // spacing of the phi samples
    double reference_pressure = 0.0;
    Vec3 body_velocity = Vec3::Zero();   // velocity of the part's material points
};

/// p = -rho (dphi/dt + |u|^2 / 2 + g z) + p_ref at the nodes of `part`.
/// `phi_history` holds per-node phi samples, oldest first, taken at points
/// moving with the body; dphi/dt = (phi_n - phi_{n-1}) / dt - U . u.
std::vector<double> node_pressure(const Mesh& mesh, int part, const std::vector<std::vector<double>>& phi_history,
                                  const SurfaceVelocity& velocity, const PressureInputs& inputs);

/// F = sum over elements of the part of p_avg n A, with n the mesh normal
/// (out of the fluid, i.e. into the body for an exterior problem).
Vec3 pressure_and_force(const Mesh& mesh, int part, const std::vector<std::vector<double>>& phi_history,
                        const SurfaceVelocity& velocity, const PressureInputs& inputs);

/// Force from given node pressures.
Vec3 integrate_pressure(const Mesh& mesh, int part, const std::vector<double>& pressure);

struct ProbeRow {
    Vec3 x = Vec3::Zero();
    double phi = 0.0;
    Vec3 u = Vec3::Zero();
};

/// CSV with columns x,y,z,phi,ux,uy,uz.
void write_probe_csv(std::ostream& out, const std::vector<ProbeRow>& rows);
void write_probe_csv(const std::string& path, const std::vector<ProbeRow>& rows);

}  // namespace nsbem
