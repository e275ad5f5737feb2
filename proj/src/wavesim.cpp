#include "nsbem/wavesim.hpp"

#include "nsbem/linsolve.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>

namespace nsbem {

SimConfig SimConfig::resolved() const {
    SimConfig c = *this;
    if (!(c.R > 0.0)) throw SimError("sphere radius R must be positive");
    if (!(c.g > 0.0)) throw SimError("gravity g must be positive");
    if (!(c.rho > 0.0)) throw SimError("density rho must be positive");
    if (!(c.H > c.R)) throw SimError(fmt::format("depth H = {} must exceed R = {} (spheres submerged)", c.H, c.R));
    if (!(c.D > 2.0 * c.R)) throw SimError(fmt::format("separation D = {} makes the spheres intersect (R = {})", c.D, c.R));
    if (c.U0 == 0.0) {
        if (!c.has_free_surface()) throw SimError("U0 must be given when H is infinite (Froude number undefined)");
        if (!(c.froude > 0.0)) throw SimError("Froude number must be positive");
        c.U0 = c.froude * std::sqrt(c.g * c.H);
    }
    if (!(c.U0 > 0.0)) throw SimError("speed U0 must be positive");
    if (c.has_free_surface()) c.froude = c.U0 / std::sqrt(c.g * c.H);
    if (c.dt == 0.0) c.dt = 0.02 * c.R / c.U0;
    if (!(c.dt > 0.0)) throw SimError("time step must be positive");
    if (!(c.travel > 0.0)) throw SimError("travel distance must be positive");
    if (c.has_free_surface()) {
        if (!(c.truncation_radius > c.travel / 2.0 + c.D / 2.0 + c.R))
            throw SimError(fmt::format("truncation radius {} does not cover the sphere track (travel {} centred on "
                                       "the disc)", c.truncation_radius, c.travel));
        if (c.surface_elements < 8) throw SimError("surface_elements must be at least 8");
    }
    if (c.sphere_subdivision < 0) throw SimError("sphere subdivision must be non-negative");
    if (c.smoothing_interval < 0 || !(c.smoothing_strength >= 0.0 && c.smoothing_strength <= 1.0))
        throw SimError("smoothing interval must be >= 0 and strength in [0, 1]");
    return c;
}

double SimConfig::froude_number() const { return has_free_surface() ? U0 / std::sqrt(g * H) : 0.0; }

int SimConfig::steps() const { return static_cast<int>(std::lround(travel / (U0 * dt))); }

double drag_scale(const SimConfig& config) {
    return 0.5 * config.rho * config.U0 * config.U0 * std::numbers::pi * config.R * config.R;
}

namespace {

constexpr double kPi = std::numbers::pi;

FieldPolicy flow_policy(const SimState& s, const SimConfig& c) {
    FieldPolicy policy;
    policy.parts.resize(s.mesh.part_names.size());
    for (int p = 0; p < static_cast<int>(policy.parts.size()); ++p) {
        PartField& pf = policy.parts[p];
        pf.kind = FieldKind::InversePoint;
        if (p == s.surface_part) {
            pf.exterior.kind = ExteriorPointRule::Kind::Lateral;
            pf.exterior.shift = Vec3(c.R, c.R, 0.0);
            pf.exterior.level = 3.0 * c.R;
        } else {
            pf.exterior.kind = ExteriorPointRule::Kind::Fixed;
            const PartSurface* sphere = s.mesh.sphere_of(p);
            if (!sphere) throw SimError(fmt::format("part {} is not a sphere", s.mesh.part_names[p]));
            pf.exterior.point = sphere->center;
        }
    }
    return policy;
}

bool is_sphere(const SimState& s, int part) { return part == s.leading_part || part == s.trailing_part; }

/// Force on one sphere part from two potential samples at its nodes.
Vec3 sphere_force(const SimState& s, const SimConfig& c, int part, const std::vector<double>& before,
                  const std::vector<double>& now, const std::vector<Vec3>& velocity) {
    PressureInputs in;
    in.rho = c.rho;
    in.g = c.g;
    in.dt = c.dt;
    in.body_velocity = Vec3(c.U0, 0.0, 0.0);
    return pressure_and_force(s.mesh, part, {before, now}, SurfaceVelocity{velocity}, in);
}

void record_forces(SimState& s, const SimConfig& c, const Solution& sol, const std::vector<Vec3>& velocity) {
    if (s.step == 0) {
        s.sphere_phi_prev = sol.phi;
        s.forces.clear();
        // the first record waits for the second sample (impulsive start)
        s.forces.push_back({});
        s.first_velocity = velocity;
        return;
    }
    const auto& before = s.sphere_phi_prev;
    const auto& now = sol.phi;
    auto make = [&](int step, double t, const std::vector<Vec3>& u) {
        ForceRecord r;
        r.step = step;
        r.t = t;
        r.leading = sphere_force(s, c, s.leading_part, before, now, u);
        r.trailing = s.trailing_part >= 0 ? sphere_force(s, c, s.trailing_part, before, now, u)
                                          : Vec3::Constant(std::numeric_limits<double>::quiet_NaN());
        return r;
    };
    if (s.step == 1) {
        s.forces[0] = make(0, 0.0, s.first_velocity);
        s.first_velocity.clear();
    }
    s.forces.push_back(make(s.step, s.time, velocity));
    s.sphere_phi_prev = now;
}

/// Moves the free surface with velocities u (evaluated at elevations z_ref)
/// over dt, starting from positions x0 and potentials phi0.
void advance_surface(SimState& s, const SimConfig& c, const std::vector<Vec3>& x0, const std::vector<double>& phi0,
                     const std::vector<Vec3>& u, const std::vector<double>& z_ref, double dt) {
    for (std::size_t i = 0; i < s.mesh.n_nodes(); ++i) {
        if (s.mesh.nodes[i].part != s.surface_part || s.rim[i]) continue;
        s.mesh.nodes[i].position = x0[i] + dt * u[i];
        s.phi[i] = phi0[i] + dt * (0.5 * u[i].squaredNorm() - c.g * z_ref[i]);
    }
}

void move_spheres(SimState& s, const SimConfig& c, double dt) {
    const Vec3 shift(c.U0 * dt, 0.0, 0.0);
    for (int p : {s.leading_part, s.trailing_part})
        if (p >= 0) translate_part(s.mesh, p, shift);
}

void check_surface(const SimState& s, int step_index) {
    if (s.surface_part < 0) return;
    for (std::size_t k = 0; k < s.mesh.n_elements(); ++k) {
        const Element& e = s.mesh.elements[k];
        if (e.part != s.surface_part) continue;
        if (!(e.normal.z() > 0.05) || !std::isfinite(e.measure))
            throw SimError(fmt::format("step {}: free-surface element {} inverted or folded (n_z = {:.3g})",
                                       step_index, k, e.normal.z()));
    }
}

void refresh_surface(SimState& s) {
    if (s.surface_part < 0) return;
    try {
        recompute_part_geometry(s.mesh, s.surface_part);
    } catch (const GeometryError& e) {
        throw SimError(fmt::format("step {}: {}", s.step, e.what()));
    }
}

}  // namespace

SimState init_state(const SimConfig& config) {
    const SimConfig c = config.resolved();
    SimState s;
    Mesh mesh;
    if (c.has_free_surface()) {
        DiscOptions disc;
        disc.growth = c.disc_growth;
        mesh = make_free_surface_disc(c.truncation_radius, c.surface_elements, disc);
        s.surface_part = 0;
    }
    // the pair passes under the disc centre half way through the run
    const double start = c.has_free_surface() ? -0.5 * c.travel : 0.0;
    const double depth = c.has_free_surface() ? -c.H : 0.0;
    auto add_sphere = [&](double x, const char* name) {
        Mesh sphere = make_tri_sphere(Vec3(x, 0.0, depth), c.R, c.sphere_subdivision);
        flip_normals(sphere);
        sphere.part_names = {name};
        mesh.append(sphere);
        return static_cast<int>(mesh.part_names.size()) - 1;
    };
    if (c.two_spheres()) {
        s.leading_part = add_sphere(start + 0.5 * c.D, "sphere-leading");
        s.trailing_part = add_sphere(start - 0.5 * c.D, "sphere-trailing");
    } else {
        s.leading_part = add_sphere(start, "sphere-leading");
    }
    s.mesh = std::move(mesh);
    s.phi.assign(s.mesh.n_nodes(), 0.0);
    s.rim = boundary_nodes(s.mesh);
    return s;
}

Solution solve_flow(const SimState& s, const SimConfig& c) {
    const std::size_t n = s.mesh.n_nodes();
    BoundaryConditions bcs;
    bcs.kind.resize(n);
    bcs.value.resize(n);
    const Vec3 u0(c.U0, 0.0, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const Node& node = s.mesh.nodes[i];
        if (node.part == s.surface_part) {
            bcs.kind[i] = BcKind::Dirichlet;
            bcs.value[i] = s.phi[i];
        } else {
            bcs.kind[i] = BcKind::Neumann;
            bcs.value[i] = u0.dot(node.normal);
        }
    }
    const FieldPolicy policy = flow_policy(s, c);
    AssemblyOptions opt;
    opt.quadrature = c.quadrature;
    opt.threads = c.threads;
    DenseSystem sys = assemble_3d(s.mesh, bcs, policy, opt);
    ClosureOptions closure;
    if (c.has_free_surface()) {
        closure.solid_angle = 2.0 * kPi;
        closure.plane_annulus = true;
        closure.annulus_center = Vec3::Zero();
        closure.annulus_radius = c.truncation_radius;
        closure.plane_z = 0.0;
    } else {
        closure.solid_angle = 4.0 * kPi;
    }
    add_semi_infinite_closure(sys, s.mesh, policy, closure);
    try {
        return solve_dense(sys);
    } catch (const SolveError& e) {
        throw SimError(fmt::format("step {}: {}", s.step, e.what()));
    }
}

void step(SimState& s, const SimConfig& c) {
    const Solution sol = solve_flow(s, c);
    const SurfaceVelocity vel = surface_velocity(sol, s.mesh);
    for (std::size_t i = 0; i < s.mesh.n_nodes(); ++i)
        if (is_sphere(s, s.mesh.nodes[i].part)) s.phi[i] = sol.phi[i];
    record_forces(s, c, sol, vel.u);

    std::vector<Vec3> x0(s.mesh.n_nodes());
    std::vector<double> z0(s.mesh.n_nodes());
    for (std::size_t i = 0; i < s.mesh.n_nodes(); ++i) {
        x0[i] = s.mesh.nodes[i].position;
        z0[i] = x0[i].z();
    }
    const std::vector<double> phi0 = s.phi;
    if (c.integrator == Integrator::Euler) {
        advance_surface(s, c, x0, phi0, vel.u, z0, c.dt);
        move_spheres(s, c, c.dt);
    } else {
        // midpoint: derivatives from a half step, applied from the start of the step
        advance_surface(s, c, x0, phi0, vel.u, z0, 0.5 * c.dt);
        move_spheres(s, c, 0.5 * c.dt);
        refresh_surface(s);
        check_surface(s, s.step);
        const SurfaceVelocity mid = surface_velocity(solve_flow(s, c), s.mesh);
        std::vector<double> zmid(s.mesh.n_nodes());
        for (std::size_t i = 0; i < s.mesh.n_nodes(); ++i) zmid[i] = s.mesh.nodes[i].position.z();
        advance_surface(s, c, x0, phi0, mid.u, zmid, c.dt);
        move_spheres(s, c, 0.5 * c.dt);
    }
    refresh_surface(s);
    check_surface(s, s.step);
    s.last_solution = sol;
    ++s.step;
    s.time = s.step * c.dt;
    if (s.surface_part >= 0 && c.smoothing_interval > 0 && s.step % c.smoothing_interval == 0) {
        smooth_free_surface(s.mesh, s.surface_part, s.phi, c.smoothing_strength);
        refresh_surface(s);
        check_surface(s, s.step);
    }
}

SmoothingReport smooth_free_surface(Mesh& mesh, int part, std::vector<double>& phi, double strength) {
    if (phi.size() != mesh.n_nodes()) throw SimError("smoothing: phi must cover every mesh node");
    SmoothingReport report;
    const auto ring = node_neighbours(mesh);
    const auto rim = boundary_nodes(mesh);
    const std::size_t n = mesh.n_nodes();
    std::vector<Vec3> new_pos(n);
    std::vector<double> new_phi = phi;
    for (std::size_t i = 0; i < n; ++i) new_pos[i] = mesh.nodes[i].position;

    for (std::size_t i = 0; i < n; ++i) {
        if (mesh.nodes[i].part != part || rim[i] || ring[i].empty()) continue;
        const Vec3& xi = mesh.nodes[i].position;
        double cx = 0.0, cy = 0.0;
        for (int j : ring[i]) {
            cx += mesh.nodes[j].position.x();
            cy += mesh.nodes[j].position.y();
        }
        const double dx = strength * (cx / ring[i].size() - xi.x());
        const double dy = strength * (cy / ring[i].size() - xi.y());
        double h = 0.0;
        for (int j : ring[i]) h = std::max(h, (mesh.nodes[j].position - xi).norm());
        if (std::hypot(dx, dy) <= 1e-14 * h) continue;

        // quadratic fit over the 2-ring, in the increment form f(d) - f(0)
        std::vector<int> patch;
        for (int j : ring[i]) {
            patch.push_back(j);
            for (int k : ring[j])
                if (k != static_cast<int>(i)) patch.push_back(k);
        }
        std::sort(patch.begin(), patch.end());
        patch.erase(std::unique(patch.begin(), patch.end()), patch.end());
        if (patch.size() < 8) {
            ++report.skipped;
            continue;
        }
        Eigen::MatrixXd a(patch.size(), 5);
        Eigen::MatrixXd b(patch.size(), 2);
        for (std::size_t r = 0; r < patch.size(); ++r) {
            const Vec3 d = (mesh.nodes[patch[r]].position - xi) / h;
            a.row(r) << d.x(), d.y(), d.x() * d.x(), d.x() * d.y(), d.y() * d.y();
            b(r, 0) = mesh.nodes[patch[r]].position.z() - xi.z();
            b(r, 1) = phi[patch[r]] - phi[i];
        }
        const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
        if (qr.rank() < 5) {
            ++report.skipped;
            continue;
        }
        const Eigen::MatrixXd coef = qr.solve(b);
        const double ux = dx / h, uy = dy / h;
        Eigen::RowVectorXd basis(5);
        basis << ux, uy, ux * ux, ux * uy, uy * uy;
        new_pos[i] = Vec3(xi.x() + dx, xi.y() + dy, xi.z() + (basis * coef.col(0))(0));
        new_phi[i] = phi[i] + (basis * coef.col(1))(0);
        ++report.moved;
    }
    for (std::size_t i = 0; i < n; ++i) mesh.nodes[i].position = new_pos[i];
    phi = std::move(new_phi);
    if (report.skipped > 0)
        fmt::print(stderr, "warning: smoothing left {} free-surface nodes in place (degenerate neighbourhood)\n",
                   report.skipped);
    return report;
}

void write_force_header(std::ostream& out) { out << "step,t,Fx_leading,Fx_trailing,Fz_leading,Fz_trailing\n"; }

void write_force_row(std::ostream& out, const ForceRecord& r) {
    fmt::print(out, "{},{:.10g},{:.10g},{:.10g},{:.10g},{:.10g}\n", r.step, r.t, r.leading.x(), r.trailing.x(),
               r.leading.z(), r.trailing.z());
}

namespace {

void write_state_snapshot(const SimState& s, const std::string& prefix) {
    const std::string path = fmt::format("{}_{:05d}.txt", prefix, s.step);
    std::vector<double> elevation(s.mesh.n_nodes()), part(s.mesh.n_nodes());
    for (std::size_t i = 0; i < s.mesh.n_nodes(); ++i) {
        elevation[i] = s.mesh.nodes[i].part == s.surface_part ? s.mesh.nodes[i].position.z() : 0.0;
        part[i] = s.mesh.nodes[i].part;
    }
    write_snapshot(path, s.mesh, {{"phi", s.phi}, {"elevation", elevation}, {"part", part}});
}

}  // namespace

std::vector<ForceRecord> run(const SimConfig& config, const RunSinks& sinks) {
    const SimConfig c = config.resolved();
    SimState s = init_state(c);
    const int total = sinks.max_steps >= 0 ? sinks.max_steps : c.steps();
    if (sinks.force_csv) write_force_header(*sinks.force_csv);
    auto wants_snapshot = [&](int k) {
        if (sinks.snapshot_prefix.empty()) return false;
        if (sinks.snapshot_stride > 0 && k % sinks.snapshot_stride == 0) return true;
        return std::find(sinks.snapshot_steps.begin(), sinks.snapshot_steps.end(), k) != sinks.snapshot_steps.end();
    };
    if (wants_snapshot(0)) write_state_snapshot(s, sinks.snapshot_prefix);
    std::size_t written = 0;
    for (int k = 0; k < total; ++k) {
        step(s, c);
        // the step-0 record is completed one step late
        const std::size_t ready = s.step >= 2 ? s.forces.size() : 0;
        if (sinks.force_csv)
            for (; written < ready; ++written) write_force_row(*sinks.force_csv, s.forces[written]);
        if (wants_snapshot(s.step)) write_state_snapshot(s, sinks.snapshot_prefix);
        if (sinks.on_step) sinks.on_step(s);
    }
    if (s.forces.size() == 1 && total == 1) {
        // a single step never gets its second sample; drop the placeholder
        s.forces.clear();
    }
    if (sinks.force_csv)
        for (; written < s.forces.size(); ++written) write_force_row(*sinks.force_csv, s.forces[written]);
    return s.forces;
}

}  // namespace nsbem
