#pragma once

#include "nsbem/assembly.hpp"
#include "nsbem/geometry.hpp"
#include "nsbem/postproc.hpp"

#include <functional>
#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsbem {

/// Invalid simulation configuration or a failed time step.
class SimError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Integrator { Euler, Midpoint };

/// Two spheres of radius R, centres D apart along x, at depth H below the
/// undisturbed free surface z = 0, moving in +x at U0. D = inf gives one
/// sphere; H = inf removes the free surface (closed exterior problem).
struct SimConfig {
    static constexpr double kInf = std::numeric_limits<double>::infinity();

    double R = 1.0;
    double D = 2.4;
    double H = 2.0;
    double U0 = 0.0;       // 0: derived from froude as Fr sqrt(g H)
    double froude = 1.0;   // used only when U0 = 0
    double g = 9.81;
    double rho = 1000.0;
    double dt = 0.0;       // 0: 0.02 R / U0
    double travel = 30.0;  // distance the spheres cover, in lengths (same unit as R)
    double truncation_radius = 20.0;
    int surface_elements = 2000;
    int sphere_subdivision = 2;
    double disc_growth = 1.15;
    int smoothing_interval = 5;     // 0 disables smoothing
    double smoothing_strength = 0.5;
    Integrator integrator = Integrator::Euler;
    int threads = 0;
    QuadratureOptions quadrature;

    /// Fills U0 and dt, checks the invariants; throws SimError.
    SimConfig resolved() const;
    double froude_number() const;  // U0 / sqrt(g H), 0 for H = inf
    int steps() const;             // travel / (U0 dt), rounded
    bool has_free_surface() const { return std::isfinite(H); }
    bool two_spheres() const { return std::isfinite(D); }
};

struct ForceRecord {
    int step = 0;
    double t = 0.0;
    Vec3 leading = Vec3::Zero();
    Vec3 trailing = Vec3::Zero();  // NaN when there is a single sphere
};

/// Free surface + spheres in one mesh. Parts: "free-surface" (absent when
/// H = inf), "sphere-leading", "sphere-trailing" (absent when D = inf). Sphere
/// normals point into the spheres (out of the fluid).
struct SimState {
    int step = 0;
    double time = 0.0;
    Mesh mesh;
    std::vector<double> phi;  // per node; the free-surface entries are the state variable
    int surface_part = -1;
    int leading_part = -1;
    int trailing_part = -1;
    std::vector<double> sphere_phi_prev;  // last sphere potentials (material points)
    std::vector<bool> rim;                // free-surface rim nodes, held at z = 0 with phi = 0
    std::vector<Vec3> first_velocity;     // step-0 velocities, kept until the step-0 force can be formed
    Solution last_solution;
    std::vector<ForceRecord> forces;
};

SimState init_state(const SimConfig& config);

/// Mixed problem at the current geometry: Dirichlet phi on the free surface,
/// Neumann q = U0 . n on the spheres, inverse-point fields and far-field
/// closure.
Solution solve_flow(const SimState& state, const SimConfig& config);

/// Advance one time step (config must be resolved).
void step(SimState& state, const SimConfig& config);

struct SmoothingReport {
    int moved = 0;
    int skipped = 0;  // nodes left in place (degenerate neighbourhood)
};

/// Tangential Laplacian relaxation of the free-surface part: interior nodes
/// move horizontally a fraction `strength` toward their 1-ring centroid; z and
/// phi at the new position come from a quadratic least-squares fit of the
/// pre-smoothing surface over the 2-ring. Rim nodes stay fixed.
SmoothingReport smooth_free_surface(Mesh& mesh, int part, std::vector<double>& phi, double strength);

/// Output sinks for run(). Snapshots are written after the listed steps and
/// every `snapshot_stride` steps (0 disables the stride).
struct RunSinks {
    std::ostream* force_csv = nullptr;
    std::string snapshot_prefix;  // empty: no snapshots
    int snapshot_stride = 0;
    std::vector<int> snapshot_steps;
    std::function<void(const SimState&)> on_step;
    int max_steps = -1;  // -1: config.steps()
};

std::vector<ForceRecord> run(const SimConfig& config, const RunSinks& sinks = {});

void write_force_header(std::ostream& out);
void write_force_row(std::ostream& out, const ForceRecord& record);

/// 1/2 rho U0^2 pi R^2.
double drag_scale(const SimConfig& config);

}  // namespace nsbem
