#include "nsbem/commands.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>

namespace nsbem {

namespace {

constexpr double kPi = std::numbers::pi;

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::ofstream open_output(const CommandContext& ctx, const std::string& name) {
    std::error_code ec;
    std::filesystem::create_directories(ctx.out_dir, ec);
    if (ec) throw ConfigError(fmt::format("cannot create output directory '{}': {}", ctx.out_dir.string(), ec.message()));
    std::ofstream out(ctx.out_dir / name);
    if (!out) throw ConfigError(fmt::format("cannot write '{}'", (ctx.out_dir / name).string()));
    return out;
}

void echo_config(const RunConfig& config, const CommandContext& ctx) {
    auto out = open_output(ctx, "config.ini");
    fmt::print(out, "; source: {}\n; hash: {}\n{}", config.source(), config.hash(), config.canonical());
}

void log_line(const CommandContext& ctx, const std::string& line) {
    if (ctx.log) *ctx.log << line << '\n';
}

std::string num(double v) { return fmt::format("{:.10g}", v); }

double positive(const RunConfig& c, const std::string& key, double fallback) {
    const double v = c.get_double(key, fallback);
    if (!(v > 0.0) || !std::isfinite(v)) c.fail(key, "must be a positive finite number");
    return v;
}

QuadratureOptions quadrature_options(const RunConfig& c, QuadratureOptions q = {}) {
    q.line_points = c.get_int("quadrature.line_points", q.line_points);
    q.triangle_points = c.get_int("quadrature.triangle_points", q.triangle_points);
    q.near_ratio = c.get_double("quadrature.near_ratio", q.near_ratio);
    q.line_self_depth = c.get_int("quadrature.line_self_depth", q.line_self_depth);
    q.line_max_depth = c.get_int("quadrature.line_max_depth", q.line_max_depth);
    q.triangle_self_depth = c.get_int("quadrature.triangle_self_depth", q.triangle_self_depth);
    q.triangle_max_depth = c.get_int("quadrature.triangle_max_depth", q.triangle_max_depth);
    q.far_reduce_3 = c.get_double("quadrature.far_reduce_3", q.far_reduce_3);
    q.far_reduce_1 = c.get_double("quadrature.far_reduce_1", q.far_reduce_1);
    q.exact_spheres = c.get_bool("quadrature.exact_spheres", q.exact_spheres);
    if (q.line_points < 1 || q.line_points > 64) c.fail("quadrature.line_points", "must be in [1, 64]");
    if (q.triangle_points != 1 && q.triangle_points != 3 && q.triangle_points != 7)
        c.fail("quadrature.triangle_points", "must be 1, 3 or 7");
    if (!(q.near_ratio > 0.0)) c.fail("quadrature.near_ratio", "must be positive");
    for (const char* k : {"quadrature.line_self_depth", "quadrature.line_max_depth", "quadrature.triangle_self_depth",
                          "quadrature.triangle_max_depth"}) {
        const int v = c.get_int(k, 0);
        if (v < 0 || v > 60) c.fail(k, "must be in [0, 60]");
    }
    if (q.far_reduce_3 < 0.0) c.fail("quadrature.far_reduce_3", "must be >= 0 (0 disables)");
    if (q.far_reduce_1 < 0.0) c.fail("quadrature.far_reduce_1", "must be >= 0 (0 disables)");
    return q;
}

AssemblyOptions assembly_options(const RunConfig& c) {
    AssemblyOptions a;
    a.quadrature = quadrature_options(c);
    a.planar_phi_order = c.get_int("solver.planar_phi_order", a.planar_phi_order);
    if (a.planar_phi_order != 1 && a.planar_phi_order != 3) c.fail("solver.planar_phi_order", "must be 1 or 3");
    return a;
}

void check_command(const RunConfig& c, const std::string& expected) {
    const std::string cmd = c.require_string("run.command");
    if (cmd != expected) c.fail("run.command", fmt::format("expected '{}' for this entry point, got '{}'", expected, cmd));
    // single declared length scale
    const std::string unit = c.get_string("run.length_unit", "R");
    if (unit.empty()) c.fail("run.length_unit", "must name the length scale");
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

void write_csv_preamble(std::ostream& out, const std::string& command, const RunConfig& config,
                        const std::vector<std::pair<std::string, std::string>>& extra) {
    fmt::print(out, "# nsbem {}\n# config_hash = {}\n# config_source = {}\n", command, config.hash(), config.source());
    for (const auto& [k, v] : extra) fmt::print(out, "# {} = {}\n", k, v);
}

// --- solve-corner -------------------------------------------------------------

double corner_case_phi(CornerCase c, const Vec3& x) {
    switch (c) {
        case CornerCase::I: return 1.0 - x.x();
        case CornerCase::II: return 1.0 - x.x() * x.y();
        case CornerCase::III: return std::sinh(kPi * x.y()) / std::sinh(kPi) * std::sin(kPi * x.x()) + 1.0;
    }
    return 0.0;
}

Vec3 corner_case_gradient(CornerCase c, const Vec3& x) {
    switch (c) {
        case CornerCase::I: return {-1.0, 0.0, 0.0};
        case CornerCase::II: return {-x.y(), -x.x(), 0.0};
        case CornerCase::III: {
            const double s = std::sinh(kPi);
            return {kPi * std::sinh(kPi * x.y()) / s * std::cos(kPi * x.x()),
                    kPi * std::cosh(kPi * x.y()) / s * std::sin(kPi * x.x()), 0.0};
        }
    }
    return Vec3::Zero();
}

CornerReport solve_corner(const CornerSpec& spec) {
    CornerReport r;
    r.mesh = make_parallelogram_boundary(spec.beta_degrees, spec.nodes_per_edge);
    std::vector<double> phi;
    for (const auto& n : r.mesh.nodes) phi.push_back(corner_case_phi(spec.cs, n.position));
    FieldPolicy policy = FieldPolicy::linear();
    policy.corner_kind = spec.corner;
    policy.corner_scale = spec.corner_scale;
    r.solution = solve_dense(assemble_2d_corners(r.mesh, BoundaryConditions::dirichlet(phi), policy, spec.assembly));
    double e = 0.0;
    for (std::size_t i = 0; i < r.mesh.n_nodes(); ++i) {
        const auto& n = r.mesh.nodes[i];
        r.q_exact.push_back(corner_case_gradient(spec.cs, n.position).dot(n.normal));
        e = std::max(e, std::abs(r.solution.q[i] - r.q_exact.back()));
    }
    r.max_error_percent = 100.0 * e;
    return r;
}

CornerSpec corner_spec(const RunConfig& c) {
    check_command(c, "solve-corner");
    CornerSpec s;
    s.beta_degrees = c.get_double("geometry.beta", s.beta_degrees);
    if (!(s.beta_degrees > 0.0 && s.beta_degrees < 180.0)) c.fail("geometry.beta", "must be in (0, 180) degrees");
    s.nodes_per_edge = c.get_int("geometry.nodes_per_edge", s.nodes_per_edge);
    if (s.nodes_per_edge < 5)
        c.fail("geometry.nodes_per_edge", "needs at least 5 nodes (fourth-order corner stencil)");
    const std::string cs = c.get_string("boundary-conditions.case", "I");
    if (cs == "I" || cs == "1") s.cs = CornerCase::I;
    else if (cs == "II" || cs == "2") s.cs = CornerCase::II;
    else if (cs == "III" || cs == "3") s.cs = CornerCase::III;
    else c.fail("boundary-conditions.case", fmt::format("expected I, II or III, got '{}'", cs));
    const std::string kind = lower(c.get_string("desingularization.corner", "linear"));
    if (kind == "linear") s.corner = CornerKind::Linear;
    else if (kind == "log") s.corner = CornerKind::Log;
    else c.fail("desingularization.corner", fmt::format("expected linear or log, got '{}'", kind));
    s.corner_scale = positive(c, "desingularization.corner_scale", s.corner_scale);
    s.assembly = assembly_options(c);
    return s;
}

CornerReport cmd_solve_corner(const RunConfig& config, const CommandContext& ctx) {
    CornerSpec spec = corner_spec(config);
    config.check_all_used();
    spec.assembly.threads = ctx.threads;
    echo_config(config, ctx);
    CornerReport r = solve_corner(spec);
    auto out = open_output(ctx, "corner.csv");
    write_csv_preamble(out, "solve-corner", config,
                       {{"beta_degrees", num(spec.beta_degrees)},
                        {"nodes_per_edge", std::to_string(spec.nodes_per_edge)},
                        {"max_abs_error_percent", num(r.max_error_percent)},
                        {"residual", num(r.solution.residual)}});
    out << "node,x,y,corner_id,q,q_exact,abs_error\n";
    for (std::size_t i = 0; i < r.mesh.n_nodes(); ++i) {
        const auto& n = r.mesh.nodes[i];
        fmt::print(out, "{},{},{},{},{},{},{}\n", i, num(n.position.x()), num(n.position.y()), n.corner_id,
                   num(r.solution.q[i]), num(r.q_exact[i]), num(std::abs(r.solution.q[i] - r.q_exact[i])));
    }
    log_line(ctx, fmt::format("solve-corner: beta {} nodes/edge {}: max |q - q_exact| = {:.4f}%", spec.beta_degrees,
                              spec.nodes_per_edge, r.max_error_percent));
    return r;
}

// --- demo-spheres -------------------------------------------------------------

namespace {

struct SpheresSolve {
    Mesh mesh;
    Solution solution;
};

SpheresSolve solve_sphere_pair(const SpheresSpec& s, int nodes) {
    const double z2 = -(s.r1 + s.r2 + s.gap);
    SpheresSolve out;
    out.mesh = make_meridian_spheres({{s.r1, 0.0}, {s.r2, z2}}, nodes);
    flip_normals(out.mesh);
    std::vector<double> q;
    for (const auto& n : out.mesh.nodes) q.push_back(s.velocity * n.normal.z());
    const FieldPolicy policy = FieldPolicy::inverse_point({Vec3::Zero(), Vec3(0.0, 0.0, z2)});
    DenseSystem sys = assemble_axisym(out.mesh, BoundaryConditions::neumann(q), policy, s.assembly);
    ClosureOptions closure;
    closure.solid_angle = 4.0 * kPi;
    add_semi_infinite_closure(sys, out.mesh, policy, closure);
    out.solution = solve_dense(sys);
    return out;
}

}  // namespace

SpheresReport solve_spheres(const SpheresSpec& spec) {
    SpheresReport r;
    SpheresSolve base = solve_sphere_pair(spec, spec.nodes_per_sphere);
    r.mesh = std::move(base.mesh);
    r.solution = std::move(base.solution);
    r.max_phi = max_abs(r.solution.phi);
    r.max_phi_refined = std::numeric_limits<double>::quiet_NaN();
    r.self_convergence = std::numeric_limits<double>::quiet_NaN();
    if (spec.self_convergence) {
        const SpheresSolve fine = solve_sphere_pair(spec, 2 * spec.nodes_per_sphere - 1);
        r.max_phi_refined = max_abs(fine.solution.phi);
        r.self_convergence = std::abs(r.max_phi_refined - r.max_phi) / r.max_phi;
    }
    // gap band: bottom of the first sphere, top of the second, in profile order
    const int n = spec.nodes_per_sphere;
    const double band = spec.gap_window_degrees * kPi / 180.0;
    auto in_band = [&](int i) {
        const double theta = kPi * (i % n) / (n - 1);
        return i < n ? theta >= kPi - band : theta <= band;
    };
    const auto& phi = r.solution.phi;
    for (int i = 1; i + 1 < 2 * n; ++i) {
        if (!in_band(i - 1) || !in_band(i) || !in_band(i + 1)) continue;
        const double osc = std::abs(phi[i] - 0.5 * (phi[i - 1] + phi[i + 1])) / std::abs(phi[i]);
        r.max_gap_oscillation = std::max(r.max_gap_oscillation, osc);
    }
    return r;
}

SpheresSpec spheres_spec(const RunConfig& c) {
    check_command(c, "demo-spheres");
    SpheresSpec s;
    s.r1 = positive(c, "geometry.radius_1", s.r1);
    s.r2 = positive(c, "geometry.radius_2", s.r2);
    s.gap = positive(c, "geometry.gap", s.gap);
    s.nodes_per_sphere = c.get_int("geometry.nodes_per_sphere", s.nodes_per_sphere);
    if (s.nodes_per_sphere < 5) c.fail("geometry.nodes_per_sphere", "needs at least 5 nodes");
    s.velocity = c.get_double("boundary-conditions.velocity", s.velocity);
    if (!std::isfinite(s.velocity) || s.velocity == 0.0) c.fail("boundary-conditions.velocity", "must be finite and non-zero");
    s.gap_window_degrees = c.get_double("output.gap_window_degrees", s.gap_window_degrees);
    if (!(s.gap_window_degrees > 0.0 && s.gap_window_degrees <= 90.0))
        c.fail("output.gap_window_degrees", "must be in (0, 90]");
    s.self_convergence = c.get_bool("output.self_convergence", s.self_convergence);
    s.assembly = assembly_options(c);
    return s;
}

SpheresReport cmd_demo_spheres(const RunConfig& config, const CommandContext& ctx) {
    SpheresSpec spec = spheres_spec(config);
    config.check_all_used();
    spec.assembly.threads = ctx.threads;
    echo_config(config, ctx);
    SpheresReport r = solve_spheres(spec);
    auto out = open_output(ctx, "spheres.csv");
    write_csv_preamble(out, "demo-spheres", config,
                       {{"max_abs_phi", num(r.max_phi)},
                        {"max_abs_phi_refined", num(r.max_phi_refined)},
                        {"self_convergence", num(r.self_convergence)},
                        {"max_gap_oscillation", num(r.max_gap_oscillation)}});
    out << "node,sphere,r,z,theta_deg,phi\n";
    const int n = spec.nodes_per_sphere;
    for (std::size_t i = 0; i < r.mesh.n_nodes(); ++i) {
        const auto& p = r.mesh.nodes[i].position;
        const double theta = 180.0 * (static_cast<int>(i) % n) / (n - 1);
        fmt::print(out, "{},{},{},{},{},{}\n", i + 1, static_cast<int>(i) / n + 1, num(p.x()), num(p.z()), num(theta),
                   num(r.solution.phi[i]));
    }
    log_line(ctx, fmt::format("demo-spheres: max|phi| = {:.6g}, self-convergence {:.3e}, gap oscillation {:.3e}",
                              r.max_phi, r.self_convergence, r.max_gap_oscillation));
    return r;
}

// --- solve-axisym / solve-3d ---------------------------------------------------

namespace {

bool is_exterior(SphereProblem p) { return p == SphereProblem::Translating; }

BoundaryConditions sphere_bcs(const SphereSpec& s, const Mesh& mesh) {
    std::vector<double> v;
    for (const auto& n : mesh.nodes) {
        switch (s.problem) {
            case SphereProblem::Translating:
            case SphereProblem::LinearNeumann: v.push_back(s.value * n.normal.z()); break;
            case SphereProblem::ConstantDirichlet: v.push_back(s.value); break;
            case SphereProblem::LinearDirichlet: v.push_back(s.value * n.position.z()); break;
        }
    }
    const bool neumann = s.problem == SphereProblem::Translating || s.problem == SphereProblem::LinearNeumann;
    return neumann ? BoundaryConditions::neumann(std::move(v)) : BoundaryConditions::dirichlet(std::move(v));
}

FieldPolicy sphere_policy(const SphereSpec& s) {
    if (s.field == FieldKind::Linear) return FieldPolicy::linear();
    Vec3 xd = s.exterior_point;
    if (!s.exterior_point_set) xd = is_exterior(s.problem) ? Vec3::Zero() : Vec3(0.0, 0.0, 3.0 * s.radius);
    return FieldPolicy::inverse_point({xd});
}

SphereReport finish_sphere(const SphereSpec& s, Mesh mesh, DenseSystem sys, const FieldPolicy& policy) {
    if (is_exterior(s.problem)) {
        ClosureOptions closure;
        closure.solid_angle = 4.0 * kPi;
        add_semi_infinite_closure(sys, mesh, policy, closure);
    }
    SphereReport r;
    r.solution = solve_dense(sys);
    const std::size_t n = mesh.n_nodes();
    switch (s.problem) {
        case SphereProblem::Translating:
            r.compared = "phi";
            for (const auto& node : mesh.nodes) r.exact.push_back(-0.5 * s.value * node.position.z());
            r.error_scale = 0.5 * std::abs(s.value) * s.radius;
            break;
        case SphereProblem::ConstantDirichlet:
            r.compared = "q";
            r.exact.assign(n, 0.0);
            r.error_scale = 1.0;
            break;
        case SphereProblem::LinearDirichlet:
            r.compared = "q";
            for (const auto& node : mesh.nodes) r.exact.push_back(s.value * node.normal.z());
            r.error_scale = std::abs(s.value);
            break;
        case SphereProblem::LinearNeumann: {
            r.compared = "phi";
            // phi is fixed up to a constant: match the means
            double shift = 0.0;
            for (std::size_t i = 0; i < n; ++i) shift += r.solution.phi[i] - s.value * mesh.nodes[i].position.z();
            shift /= static_cast<double>(n);
            for (const auto& node : mesh.nodes) r.exact.push_back(s.value * node.position.z() + shift);
            r.error_scale = std::abs(s.value) * s.radius;
            break;
        }
    }
    const auto& got = r.compared == "phi" ? r.solution.phi : r.solution.q;
    for (std::size_t i = 0; i < n; ++i) r.max_error = std::max(r.max_error, std::abs(got[i] - r.exact[i]));
    r.mesh = std::move(mesh);
    return r;
}

}  // namespace

SphereReport solve_sphere_axisym(const SphereSpec& s) {
    Mesh mesh = make_meridian_spheres({{s.radius, 0.0}}, s.nodes);
    if (is_exterior(s.problem)) flip_normals(mesh);
    if (s.field != FieldKind::InversePoint)
        throw AssemblyError("axisymmetric solves need inverse-point fields with the exterior point on the axis");
    const FieldPolicy policy = sphere_policy(s);
    DenseSystem sys = assemble_axisym(mesh, sphere_bcs(s, mesh), policy, s.assembly);
    return finish_sphere(s, std::move(mesh), std::move(sys), policy);
}

SphereReport solve_sphere_3d(const SphereSpec& s) {
    Mesh mesh = make_tri_sphere(Vec3::Zero(), s.radius, s.subdivision);
    if (is_exterior(s.problem)) {
        flip_normals(mesh);
        if (s.field != FieldKind::InversePoint)
            throw AssemblyError("exterior solves need inverse-point fields (bounded at infinity)");
    }
    const FieldPolicy policy = sphere_policy(s);
    DenseSystem sys = assemble_3d(mesh, sphere_bcs(s, mesh), policy, s.assembly);
    return finish_sphere(s, std::move(mesh), std::move(sys), policy);
}

SphereSpec sphere_spec(const RunConfig& c, bool axisymmetric) {
    check_command(c, axisymmetric ? "solve-axisym" : "solve-3d");
    SphereSpec s;
    const std::string shape = c.get_string("geometry.shape", "sphere");
    if (shape != "sphere") c.fail("geometry.shape", fmt::format("only 'sphere' is supported, got '{}'", shape));
    s.radius = positive(c, "geometry.radius", s.radius);
    if (axisymmetric) {
        s.nodes = c.get_int("geometry.nodes", s.nodes);
        if (s.nodes < 3) c.fail("geometry.nodes", "needs at least 3 meridian nodes");
    } else {
        s.subdivision = c.get_int("geometry.subdivision", s.subdivision);
        if (s.subdivision < 0 || s.subdivision > 6) c.fail("geometry.subdivision", "must be in [0, 6]");
    }
    const std::string problem = lower(c.require_string("boundary-conditions.problem"));
    if (problem == "translating") s.problem = SphereProblem::Translating;
    else if (problem == "constant-dirichlet") s.problem = SphereProblem::ConstantDirichlet;
    else if (problem == "linear-dirichlet") s.problem = SphereProblem::LinearDirichlet;
    else if (problem == "linear-neumann") s.problem = SphereProblem::LinearNeumann;
    else
        c.fail("boundary-conditions.problem",
               fmt::format("expected translating, constant-dirichlet, linear-dirichlet or linear-neumann, got '{}'",
                           problem));
    s.value = c.get_double("boundary-conditions.value", s.value);
    if (!std::isfinite(s.value)) c.fail("boundary-conditions.value", "must be finite");
    const std::string field =
        lower(c.get_string("desingularization.field", axisymmetric || is_exterior(s.problem) ? "inverse-point" : "linear"));
    if (field == "linear") s.field = FieldKind::Linear;
    else if (field == "inverse-point") s.field = FieldKind::InversePoint;
    else c.fail("desingularization.field", fmt::format("expected linear or inverse-point, got '{}'", field));
    if (axisymmetric && s.field != FieldKind::InversePoint)
        c.fail("desingularization.field", "axisymmetric solves need inverse-point fields");
    if (is_exterior(s.problem) && s.field != FieldKind::InversePoint)
        c.fail("desingularization.field", "exterior problems need inverse-point fields (bounded at infinity)");
    if (c.has("desingularization.exterior_point")) {
        const auto p = c.get_double_list("desingularization.exterior_point");
        if (p.size() != 3) c.fail("desingularization.exterior_point", "expected three coordinates x, y, z");
        s.exterior_point = Vec3(p[0], p[1], p[2]);
        s.exterior_point_set = true;
        const double d = s.exterior_point.norm();
        const bool outside = is_exterior(s.problem) ? d < s.radius : d > s.radius;
        if (!outside) c.fail("desingularization.exterior_point", "must lie outside the fluid domain");
        if (axisymmetric && (s.exterior_point.x() != 0.0 || s.exterior_point.y() != 0.0))
            c.fail("desingularization.exterior_point", "must lie on the symmetry axis (x = y = 0)");
    }
    s.assembly = assembly_options(c);
    return s;
}

namespace {

SphereReport run_sphere_command(const RunConfig& config, const CommandContext& ctx, bool axisymmetric) {
    SphereSpec spec = sphere_spec(config, axisymmetric);
    config.check_all_used();
    spec.assembly.threads = ctx.threads;
    echo_config(config, ctx);
    SphereReport r = axisymmetric ? solve_sphere_axisym(spec) : solve_sphere_3d(spec);
    const std::string command = axisymmetric ? "solve-axisym" : "solve-3d";
    auto out = open_output(ctx, "solution.csv");
    write_csv_preamble(out, command, config,
                       {{"compared", r.compared},
                        {"max_abs_error", num(r.max_error)},
                        {"max_rel_error", num(r.max_error / r.error_scale)},
                        {"residual", num(r.solution.residual)},
                        {"gauge", r.solution.gauge.empty() ? "none" : r.solution.gauge}});
    out << (axisymmetric ? "node,r,z,nr,nz,phi,q," : "node,x,y,z,nx,ny,nz,phi,q,") << r.compared << "_exact\n";
    for (std::size_t i = 0; i < r.mesh.n_nodes(); ++i) {
        const auto& n = r.mesh.nodes[i];
        if (axisymmetric)
            fmt::print(out, "{},{},{},{},{},", i, num(n.position.x()), num(n.position.z()), num(n.normal.x()),
                       num(n.normal.z()));
        else
            fmt::print(out, "{},{},{},{},{},{},{},", i, num(n.position.x()), num(n.position.y()), num(n.position.z()),
                       num(n.normal.x()), num(n.normal.y()), num(n.normal.z()));
        fmt::print(out, "{},{},{}\n", num(r.solution.phi[i]), num(r.solution.q[i]), num(r.exact[i]));
    }
    log_line(ctx, fmt::format("{}: max |{} - exact| = {:.4e} ({:.4f}% of scale)", command, r.compared, r.max_error,
                              100.0 * r.max_error / r.error_scale));
    return r;
}

}  // namespace

SphereReport cmd_solve_axisym(const RunConfig& config, const CommandContext& ctx) {
    return run_sphere_command(config, ctx, true);
}

SphereReport cmd_solve_3d(const RunConfig& config, const CommandContext& ctx) {
    return run_sphere_command(config, ctx, false);
}

// --- wavesim ----------------------------------------------------------------------

WavesimSpec wavesim_spec(const RunConfig& c) {
    check_command(c, "wavesim");
    WavesimSpec w;
    SimConfig& s = w.sim;
    s.R = c.get_double("simulation.R", s.R);
    s.D = c.get_double("simulation.D", s.D);
    s.H = c.get_double("simulation.H", s.H);
    s.U0 = c.get_double("simulation.U0", s.U0);
    s.froude = c.get_double("simulation.froude", s.froude);
    s.g = c.get_double("simulation.g", s.g);
    s.rho = c.get_double("simulation.rho", s.rho);
    s.dt = c.get_double("simulation.dt", s.dt);
    s.travel = c.get_double("simulation.travel", s.travel);
    s.smoothing_interval = c.get_int("simulation.smoothing_interval", s.smoothing_interval);
    s.smoothing_strength = c.get_double("simulation.smoothing_strength", s.smoothing_strength);
    const std::string integrator = lower(c.get_string("simulation.integrator", "euler"));
    if (integrator == "euler") s.integrator = Integrator::Euler;
    else if (integrator == "midpoint") s.integrator = Integrator::Midpoint;
    else c.fail("simulation.integrator", fmt::format("expected euler or midpoint, got '{}'", integrator));
    s.truncation_radius = c.get_double("geometry.truncation_radius", s.truncation_radius);
    s.surface_elements = c.get_int("geometry.surface_elements", s.surface_elements);
    s.sphere_subdivision = c.get_int("geometry.sphere_subdivision", s.sphere_subdivision);
    s.disc_growth = c.get_double("geometry.disc_growth", s.disc_growth);
    if (!(s.disc_growth >= 1.0)) c.fail("geometry.disc_growth", "must be >= 1");
    if (s.sphere_subdivision < 0 || s.sphere_subdivision > 5) c.fail("geometry.sphere_subdivision", "must be in [0, 5]");
    s.quadrature = quadrature_options(c);
    w.snapshot_stride = c.get_int("output.snapshot_stride", w.snapshot_stride);
    if (w.snapshot_stride < 0) c.fail("output.snapshot_stride", "must be >= 0 (0 disables)");
    w.snapshot_steps = c.get_int_list("output.snapshot_steps");
    for (int k : w.snapshot_steps)
        if (k < 0) c.fail("output.snapshot_steps", "steps must be non-negative");
    w.snapshots = c.get_bool("output.snapshots", w.snapshots);
    const int max_steps = c.get_int("simulation.max_steps", -1);
    if (max_steps < -1) c.fail("simulation.max_steps", "must be -1 (full run) or >= 0");
    w.max_steps = max_steps;
    try {
        w.sim = s.resolved();
    } catch (const SimError& e) {
        throw ConfigError(fmt::format("{}: [simulation]: {}", c.source(), e.what()));
    }
    return w;
}

std::vector<ForceRecord> cmd_wavesim(const RunConfig& config, const CommandContext& ctx) {
    WavesimSpec spec = wavesim_spec(config);
    config.check_all_used();
    spec.sim.threads = ctx.threads;
    echo_config(config, ctx);
    auto out = open_output(ctx, "forces.csv");
    const SimConfig& s = spec.sim;
    write_csv_preamble(out, "wavesim", config,
                       {{"U0", num(s.U0)},
                        {"froude", num(s.froude_number())},
                        {"dt", num(s.dt)},
                        {"steps", std::to_string(spec.max_steps >= 0 ? spec.max_steps : s.steps())},
                        {"drag_scale", num(drag_scale(s))}});
    RunSinks sinks;
    sinks.force_csv = &out;
    if (spec.snapshots && (spec.snapshot_stride > 0 || !spec.snapshot_steps.empty())) {
        std::filesystem::create_directories(ctx.out_dir / "snapshots");
        sinks.snapshot_prefix = (ctx.out_dir / "snapshots" / "surface").string();
        sinks.snapshot_stride = spec.snapshot_stride;
        sinks.snapshot_steps = spec.snapshot_steps;
    }
    sinks.max_steps = spec.max_steps;
    if (ctx.log) {
        sinks.on_step = [&](const SimState& st) {
            if (st.step % 100 == 0) log_line(ctx, fmt::format("wavesim: step {} t = {:.4g}", st.step, st.time));
        };
    }
    auto forces = run(s, sinks);
    log_line(ctx, fmt::format("wavesim: {} force records written", forces.size()));
    return forces;
}

// --- dispatch -------------------------------------------------------------------

std::string validate(const RunConfig& config) {
    const std::string cmd = config.require_string("run.command");
    if (cmd == "solve-corner") corner_spec(config);
    else if (cmd == "demo-spheres") spheres_spec(config);
    else if (cmd == "solve-axisym") sphere_spec(config, true);
    else if (cmd == "solve-3d") sphere_spec(config, false);
    else if (cmd == "wavesim") wavesim_spec(config);
    else
        config.fail("run.command", fmt::format("unknown command '{}' (solve-corner, demo-spheres, solve-axisym, "
                                               "solve-3d, wavesim)", cmd));
    config.check_all_used();
    return cmd;
}

void run_command(const RunConfig& config, const CommandContext& ctx) {
    const std::string cmd = validate(config);
    if (cmd == "solve-corner") cmd_solve_corner(config, ctx);
    else if (cmd == "demo-spheres") cmd_demo_spheres(config, ctx);
    else if (cmd == "solve-axisym") cmd_solve_axisym(config, ctx);
    else if (cmd == "solve-3d") cmd_solve_3d(config, ctx);
    else cmd_wavesim(config, ctx);
}

}  // namespace nsbem
