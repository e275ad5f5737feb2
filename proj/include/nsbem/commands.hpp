#pragma once

#include "nsbem/assembly.hpp"
#include "nsbem/config.hpp"
#include "nsbem/linsolve.hpp"
#include "nsbem/wavesim.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace nsbem {

/// Where a command writes, and how many assembly threads it may use.
/// Thread count never changes results.
struct CommandContext {
    std::filesystem::path out_dir = ".";
    int threads = 0;
    std::ostream* log = nullptr;  // one-line summaries; null for silence
};

// --- solve-corner -------------------------------------------------------------

/// Harmonic test fields on the parallelogram: I phi = 1 - x; II phi = 1 - x y;
/// III phi = sinh(pi y) sin(pi x) / sinh(pi) + 1.
enum class CornerCase { I, II, III };

double corner_case_phi(CornerCase c, const Vec3& x);
Vec3 corner_case_gradient(CornerCase c, const Vec3& x);

struct CornerSpec {
    double beta_degrees = 90.0;
    int nodes_per_edge = 21;
    CornerCase cs = CornerCase::I;
    CornerKind corner = CornerKind::Linear;
    double corner_scale = 1.0;
    AssemblyOptions assembly;
};

struct CornerReport {
    Mesh mesh;
    Solution solution;
    std::vector<double> q_exact;
    double max_error_percent = 0.0;  // 100 max |q - q_exact|
};

CornerReport solve_corner(const CornerSpec& spec);

// --- demo-spheres -------------------------------------------------------------

/// Two coaxial spheres, radius r1 centred at the origin and r2 below it with a
/// gap between them, translating together along the axis (exterior flow).
struct SpheresSpec {
    double r1 = 1.0;
    double r2 = 1.5;
    double gap = 1e-4;
    int nodes_per_sphere = 101;
    double velocity = 1.0;
    double gap_window_degrees = 30.0;  // polar-angle band around the gap
    bool self_convergence = true;      // also solve with 2 n - 1 nodes per sphere
    AssemblyOptions assembly;
};

struct SpheresReport {
    Mesh mesh;
    Solution solution;
    double max_phi = 0.0;
    double max_phi_refined = 0.0;    // NaN without the refined solve
    double self_convergence = 0.0;   // |max_phi_refined - max_phi| / max_phi
    double max_gap_oscillation = 0.0;  // max |phi_i - (phi_{i-1} + phi_{i+1}) / 2| / |phi_i| in the gap band
};

SpheresReport solve_spheres(const SpheresSpec& spec);

// --- solve-axisym / solve-3d ---------------------------------------------------

/// Sphere problems with closed-form answers:
///   translating:         exterior, q = U n_z, phi = -(U R / 2) cos(theta)
///   constant-dirichlet:  interior, phi = c, q = 0
///   linear-dirichlet:    interior, phi = U z, q = U n_z
///   linear-neumann:      interior, q = U n_z, phi = U z up to a constant
enum class SphereProblem { Translating, ConstantDirichlet, LinearDirichlet, LinearNeumann };

struct SphereSpec {
    SphereProblem problem = SphereProblem::Translating;
    double radius = 1.0;
    double value = 1.0;        // U or c
    int nodes = 101;           // meridian nodes (axisymmetric)
    int subdivision = 3;       // icosphere level (3D)
    FieldKind field = FieldKind::InversePoint;
    bool exterior_point_set = false;
    Vec3 exterior_point = Vec3::Zero();  // default: centre (exterior) or (0, 0, 3R) (interior)
    AssemblyOptions assembly;
};

struct SphereReport {
    Mesh mesh;
    Solution solution;
    std::string compared;         // "phi" or "q"
    std::vector<double> exact;    // per node, of the compared quantity
    double max_error = 0.0;       // absolute
    double error_scale = 1.0;     // max_error / error_scale is the relative error
};

SphereReport solve_sphere_axisym(const SphereSpec& spec);
SphereReport solve_sphere_3d(const SphereSpec& spec);

// --- config front ends ----------------------------------------------------------

/// Typed settings from a configuration; every range check happens here, before
/// any computation. Throws ConfigError.
CornerSpec corner_spec(const RunConfig& config);
SpheresSpec spheres_spec(const RunConfig& config);
SphereSpec sphere_spec(const RunConfig& config, bool axisymmetric);

struct WavesimSpec {
    SimConfig sim;
    int snapshot_stride = 0;
    std::vector<int> snapshot_steps;
    bool snapshots = true;
    int max_steps = -1;  // -1: the full travel
};
WavesimSpec wavesim_spec(const RunConfig& config);

/// Validates the whole configuration for its [run] command without running it.
std::string validate(const RunConfig& config);

CornerReport cmd_solve_corner(const RunConfig& config, const CommandContext& ctx);
SpheresReport cmd_demo_spheres(const RunConfig& config, const CommandContext& ctx);
SphereReport cmd_solve_axisym(const RunConfig& config, const CommandContext& ctx);
SphereReport cmd_solve_3d(const RunConfig& config, const CommandContext& ctx);
std::vector<ForceRecord> cmd_wavesim(const RunConfig& config, const CommandContext& ctx);

/// Runs the command named by run.command.
void run_command(const RunConfig& config, const CommandContext& ctx);

/// "# key = value" metadata lines every CSV starts with.
void write_csv_preamble(std::ostream& out, const std::string& command, const RunConfig& config,
                        const std::vector<std::pair<std::string, std::string>>& extra = {});

}  // namespace nsbem
