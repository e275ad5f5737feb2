#include "nsbem/geometry.hpp"

#include <fmt/format.h>
#include <fstream>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <ostream>
#include <utility>

namespace nsbem {

namespace {

constexpr double pi = std::numbers::pi;

Vec3 rotate_cw(const Vec3& t) { return {t.y(), -t.x(), 0.0}; }

std::string corner_label(const Node& node) {
    if (!node.is_corner()) return "-1";
    return fmt::format("{}{}", node.corner_id, node.side == CornerSide::Left ? 'L' : 'R');
}

}  // namespace

const char* to_string(Regime regime) {
    switch (regime) {
        case Regime::Planar2D: return "planar2d";
        case Regime::Axisymmetric: return "axisymmetric";
        case Regime::Surface3D: return "surface3d";
    }
    return "unknown";
}

int Mesh::part_index(const std::string& name) const {
    auto it = std::find(part_names.begin(), part_names.end(), name);
    if (it == part_names.end()) return -1;
    return static_cast<int>(it - part_names.begin());
}

const PartSurface* Mesh::sphere_of(int part) const {
    if (part < 0 || part >= static_cast<int>(part_surfaces.size())) return nullptr;
    return part_surfaces[part].sphere ? &part_surfaces[part] : nullptr;
}

void Mesh::append(const Mesh& other) {
    if (!nodes.empty() && other.regime != regime)
        throw GeometryError("cannot append meshes of different regimes");
    if (nodes.empty()) regime = other.regime;
    const int node_shift = static_cast<int>(nodes.size());
    const int part_shift = static_cast<int>(part_names.size());
    for (Node n : other.nodes) {
        n.part += part_shift;
        nodes.push_back(n);
    }
    for (Element e : other.elements) {
        for (int k = 0; k < e.n_vertices; ++k) e.v[k] += node_shift;
        e.part += part_shift;
        elements.push_back(e);
    }
    for (Corner c : other.corners) {
        c.left += node_shift;
        c.right += node_shift;
        corners.push_back(c);
    }
    part_surfaces.resize(part_names.size());
    part_names.insert(part_names.end(), other.part_names.begin(), other.part_names.end());
    part_surfaces.insert(part_surfaces.end(), other.part_surfaces.begin(), other.part_surfaces.end());
    part_surfaces.resize(part_names.size());
}

// ---------------------------------------------------------------------------

Mesh make_polygon_boundary(const std::vector<Vec3>& vertices, const std::vector<int>& nodes_per_edge) {
    const int nv = static_cast<int>(vertices.size());
    if (nv < 3) throw GeometryError("polygon needs at least 3 vertices");
    if (static_cast<int>(nodes_per_edge.size()) != nv)
        throw GeometryError("nodes_per_edge must list one count per edge");
    for (int count : nodes_per_edge)
        if (count < 2) throw GeometryError("every edge needs at least 2 nodes");

    std::vector<Vec3> tangent(nv), normal(nv);
    for (int k = 0; k < nv; ++k) {
        Vec3 d = vertices[(k + 1) % nv] - vertices[k];
        d.z() = 0.0;
        if (d.norm() == 0.0) throw GeometryError(fmt::format("polygon edge {} has zero length", k));
        tangent[k] = d.normalized();
        normal[k] = rotate_cw(tangent[k]);
    }
    // vertex k joins edge k-1 (incoming) and edge k (outgoing)
    std::vector<bool> flat(nv);
    for (int k = 0; k < nv; ++k) {
        const Vec3& a = tangent[(k + nv - 1) % nv];
        const Vec3& b = tangent[k];
        flat[k] = std::abs(a.x() * b.y() - a.y() * b.x()) < 1e-12 && a.dot(b) > 0.0;
    }

    Mesh mesh;
    mesh.regime = Regime::Planar2D;
    mesh.part_names = {"boundary"};

    std::vector<int> corner_of_vertex(nv, -1);
    for (int k = 0; k < nv; ++k) {
        if (!flat[k]) {
            corner_of_vertex[k] = static_cast<int>(mesh.corners.size());
            mesh.corners.push_back({});
        }
    }

    auto add_node = [&](const Vec3& p, const Vec3& n, int corner, CornerSide side) {
        Node node;
        node.position = Vec3(p.x(), p.y(), 0.0);
        node.normal = n;
        node.corner_id = corner;
        node.side = side;
        mesh.nodes.push_back(node);
        return static_cast<int>(mesh.nodes.size()) - 1;
    };

    int first_start = -1;
    int pending_start = -1;  // regular node shared across a flat vertex
    for (int k = 0; k < nv; ++k) {
        const Vec3& a = vertices[k];
        const Vec3& b = vertices[(k + 1) % nv];
        const int count = nodes_per_edge[k];

        int start;
        if (corner_of_vertex[k] >= 0) {
            start = add_node(a, normal[k], corner_of_vertex[k], CornerSide::Right);
            mesh.corners[corner_of_vertex[k]].right = start;
        } else if (pending_start >= 0) {
            start = pending_start;
        } else {
            start = add_node(a, normal[k], -1, CornerSide::None);
        }
        if (k == 0) first_start = start;

        std::vector<int> ids{start};
        for (int j = 1; j < count - 1; ++j) {
            const double s = static_cast<double>(j) / (count - 1);
            ids.push_back(add_node(a + s * (b - a), normal[k], -1, CornerSide::None));
        }
        const int next = (k + 1) % nv;
        int end;
        if (corner_of_vertex[next] >= 0) {
            end = add_node(b, normal[k], corner_of_vertex[next], CornerSide::Left);
            mesh.corners[corner_of_vertex[next]].left = end;
            pending_start = -1;
        } else if (next == 0) {
            end = first_start;
        } else {
            end = add_node(b, normal[k], -1, CornerSide::None);
            pending_start = end;
        }
        ids.push_back(end);

        for (std::size_t j = 0; j + 1 < ids.size(); ++j) {
            Element e;
            e.v = {ids[j], ids[j + 1], -1};
            e.n_vertices = 2;
            e.normal = normal[k];
            e.measure = (mesh.nodes[ids[j + 1]].position - mesh.nodes[ids[j]].position).norm();
            mesh.elements.push_back(e);
        }
    }
    return mesh;
}

Mesh make_parallelogram_boundary(double beta_degrees, int nodes_per_edge) {
    if (!(beta_degrees > 0.0 && beta_degrees < 180.0))
        throw GeometryError(fmt::format("parallelogram angle {} deg is outside (0, 180)", beta_degrees));
    if (nodes_per_edge < 3)
        throw GeometryError(fmt::format("nodes_per_edge = {} (need at least 3)", nodes_per_edge));
    const double beta = beta_degrees * pi / 180.0;
    const double c = std::cos(beta), s = std::sin(beta);
    const std::vector<Vec3> vertices{{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {1.0 + c, s, 0.0}, {c, s, 0.0}};
    return make_polygon_boundary(vertices, std::vector<int>(4, nodes_per_edge));
}

Mesh make_tri_sphere(const Vec3& center, double radius, int subdivision) {
    if (!(radius > 0.0)) throw GeometryError("sphere radius must be positive");
    if (subdivision < 0) throw GeometryError("subdivision must be non-negative");

    const double g = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> p{{-1, g, 0}, {1, g, 0}, {-1, -g, 0}, {1, -g, 0},
                        {0, -1, g}, {0, 1, g}, {0, -1, -g}, {0, 1, -g},
                        {g, 0, -1}, {g, 0, 1}, {-g, 0, -1}, {-g, 0, 1}};
    for (auto& v : p) v.normalize();
    std::vector<std::array<int, 3>> faces{
        {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
        {11, 10, 2}, {10, 7, 6}, {7, 1, 8}, {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8},
        {3, 8, 9}, {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};

    for (int level = 0; level < subdivision; ++level) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            p.push_back((p[a] + p[b]).normalized());
            const int id = static_cast<int>(p.size()) - 1;
            midpoint.emplace(key, id);
            return id;
        };
        std::vector<std::array<int, 3>> refined;
        refined.reserve(faces.size() * 4);
        for (const auto& f : faces) {
            const int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
            refined.push_back({f[0], ab, ca});
            refined.push_back({f[1], bc, ab});
            refined.push_back({f[2], ca, bc});
            refined.push_back({ab, bc, ca});
        }
        faces = std::move(refined);
    }

    Mesh mesh;
    mesh.regime = Regime::Surface3D;
    mesh.part_names = {"sphere"};
    mesh.part_surfaces = {PartSurface{true, center, radius}};
    mesh.nodes.reserve(p.size());
    for (const auto& v : p) {
        Node node;
        node.position = center + radius * v;
        node.normal = v;
        mesh.nodes.push_back(node);
    }
    for (auto f : faces) {
        const Vec3 n = (p[f[1]] - p[f[0]]).cross(p[f[2]] - p[f[0]]);
        if (n.dot(p[f[0]] + p[f[1]] + p[f[2]]) < 0.0) std::swap(f[1], f[2]);
        Element e;
        e.v = f;
        e.n_vertices = 3;
        mesh.elements.push_back(e);
    }
    recompute_element_geometry(mesh);
    return mesh;
}

Mesh make_meridian_spheres(const std::vector<MeridianSphere>& spheres, int nodes_per_sphere) {
    if (spheres.empty()) throw GeometryError("at least one sphere is required");
    if (nodes_per_sphere < 5)
        throw GeometryError(fmt::format("nodes_per_sphere = {} (need at least 5)", nodes_per_sphere));
    for (std::size_t i = 0; i < spheres.size(); ++i) {
        if (!(spheres[i].radius > 0.0))
            throw GeometryError(fmt::format("sphere {} has non-positive radius", i + 1));
        for (std::size_t j = 0; j < i; ++j) {
            const double gap = std::abs(spheres[i].z_center - spheres[j].z_center) -
                               spheres[i].radius - spheres[j].radius;
            if (gap <= 0.0)
                throw GeometryError(fmt::format("spheres {} and {} overlap", j + 1, i + 1));
        }
    }

    Mesh mesh;
    mesh.regime = Regime::Axisymmetric;
    for (std::size_t s = 0; s < spheres.size(); ++s) {
        const auto& sphere = spheres[s];
        const int part = static_cast<int>(s);
        mesh.part_names.push_back(fmt::format("sphere-{}", s + 1));
        const int first = static_cast<int>(mesh.nodes.size());
        for (int j = 0; j < nodes_per_sphere; ++j) {
            const double theta = pi * j / (nodes_per_sphere - 1);
            Node node;
            node.part = part;
            if (j == 0) {
                node.normal = Vec3(0, 0, 1);
            } else if (j == nodes_per_sphere - 1) {
                node.normal = Vec3(0, 0, -1);
            } else {
                node.normal = Vec3(std::sin(theta), 0.0, std::cos(theta));
            }
            node.position = Vec3(0.0, 0.0, sphere.z_center) + sphere.radius * node.normal;
            mesh.nodes.push_back(node);
        }
        for (int j = 0; j + 1 < nodes_per_sphere; ++j) {
            Element e;
            e.v = {first + j, first + j + 1, -1};
            e.n_vertices = 2;
            e.part = part;
            e.normal = (mesh.nodes[first + j].normal + mesh.nodes[first + j + 1].normal).normalized();
            mesh.elements.push_back(e);
        }
    }
    recompute_element_geometry(mesh);
    return mesh;
}

// ---------------------------------------------------------------------------

namespace {

struct RingLayout {
    std::vector<double> radius;
    std::vector<int> count;
};

RingLayout ring_layout(double truncation_radius, double core_spacing, const DiscOptions& options) {
    RingLayout layout;
    const double core = options.inner_fraction * truncation_radius;
    std::vector<double> r{0.0};
    std::vector<double> h;
    double spacing = core_spacing;
    while (r.back() < truncation_radius) {
        if (r.back() >= core) spacing *= options.growth;
        h.push_back(spacing);
        r.push_back(r.back() + spacing);
    }
    if (r.size() > 2 && r.back() - truncation_radius > 0.5 * h.back()) {
        r.pop_back();
        h.pop_back();
    }
    const double scale = truncation_radius / r.back();
    for (auto& v : r) v *= scale;
    for (auto& v : h) v *= scale;

    layout.radius = r;
    layout.count.assign(r.size(), 1);
    for (std::size_t k = 1; k < r.size(); ++k) {
        const double local = k < h.size() ? 0.5 * (h[k - 1] + h[k]) : h[k - 1];
        layout.count[k] = std::max(6, static_cast<int>(std::lround(2.0 * pi * r[k] / local)));
    }
    return layout;
}

long disc_element_count(const RingLayout& layout) {
    long total = layout.count.size() > 1 ? layout.count[1] : 0;
    for (std::size_t k = 1; k + 1 < layout.count.size(); ++k) total += layout.count[k] + layout.count[k + 1];
    return total;
}

Mesh triangulate_rings(const RingLayout& layout) {
    Mesh mesh;
    mesh.regime = Regime::Surface3D;
    mesh.part_names = {"free-surface"};

    std::vector<std::vector<int>> ring_ids(layout.radius.size());
    std::vector<double> offset(layout.radius.size(), 0.0);
    auto add = [&](double r, double angle) {
        Node node;
        node.position = Vec3(r * std::cos(angle), r * std::sin(angle), 0.0);
        node.normal = Vec3(0, 0, 1);
        mesh.nodes.push_back(node);
        return static_cast<int>(mesh.nodes.size()) - 1;
    };
    ring_ids[0].push_back(add(0.0, 0.0));
    for (std::size_t k = 1; k < layout.radius.size(); ++k) {
        const int n = layout.count[k];
        offset[k] = (k % 2 == 0) ? pi / n : 0.0;
        for (int j = 0; j < n; ++j) ring_ids[k].push_back(add(layout.radius[k], offset[k] + 2.0 * pi * j / n));
    }

    auto add_triangle = [&](int a, int b, int c) {
        Element e;
        e.v = {a, b, c};
        e.n_vertices = 3;
        const Vec3 n = (mesh.nodes[b].position - mesh.nodes[a].position)
                           .cross(mesh.nodes[c].position - mesh.nodes[a].position);
        if (n.z() < 0.0) std::swap(e.v[1], e.v[2]);
        mesh.elements.push_back(e);
    };

    if (layout.radius.size() > 1) {
        const auto& ring = ring_ids[1];
        for (std::size_t j = 0; j < ring.size(); ++j)
            add_triangle(ring_ids[0][0], ring[j], ring[(j + 1) % ring.size()]);
    }
    for (std::size_t k = 1; k + 1 < layout.radius.size(); ++k) {
        const auto& inner = ring_ids[k];
        const auto& outer = ring_ids[k + 1];
        const int na = static_cast<int>(inner.size()), nb = static_cast<int>(outer.size());
        const double da = 2.0 * pi / na, db = 2.0 * pi / nb;
        const double a0 = offset[k];
        // outer start: first node at or after a0 - db/2
        int j0 = static_cast<int>(std::ceil((a0 - offset[k + 1]) / db - 0.5));
        auto angle_a = [&](int i) { return a0 + da * i; };
        auto angle_b = [&](int j) { return offset[k + 1] + db * j; };
        auto wrap = [](int i, int n) { return ((i % n) + n) % n; };
        int i = 0, j = j0;
        while (i < na || j < j0 + nb) {
            const bool advance_inner =
                j >= j0 + nb || (i < na && angle_a(i + 1) <= angle_b(j + 1));
            if (advance_inner) {
                add_triangle(inner[wrap(i, na)], inner[wrap(i + 1, na)], outer[wrap(j, nb)]);
                ++i;
            } else {
                add_triangle(inner[wrap(i, na)], outer[wrap(j + 1, nb)], outer[wrap(j, nb)]);
                ++j;
            }
        }
    }
    recompute_element_geometry(mesh);
    return mesh;
}

}  // namespace

Mesh make_free_surface_disc(double truncation_radius, int target_elements, const DiscOptions& options) {
    if (!(truncation_radius > 0.0)) throw GeometryError("truncation radius must be positive");
    if (target_elements < 8)
        throw GeometryError(fmt::format("target_elements = {} is too small for a disc (need >= 8)", target_elements));
    if (!(options.growth >= 1.0 && options.growth <= 1.2))
        throw GeometryError("ring spacing growth must lie in [1, 1.2]");
    if (!(options.inner_fraction > 0.0 && options.inner_fraction <= 1.0))
        throw GeometryError("inner_fraction must lie in (0, 1]");

    // element count decreases monotonically (up to rounding) with core spacing
    double lo = truncation_radius / 2000.0, hi = truncation_radius;
    RingLayout best = ring_layout(truncation_radius, hi, options);
    long best_miss = std::abs(disc_element_count(best) - target_elements);
    for (int iter = 0; iter < 80 && best_miss > 0; ++iter) {
        const double mid = std::sqrt(lo * hi);
        RingLayout layout = ring_layout(truncation_radius, mid, options);
        const long count = disc_element_count(layout);
        const long miss = std::abs(count - target_elements);
        if (miss < best_miss) {
            best_miss = miss;
            best = layout;
        }
        if (count > target_elements) lo = mid; else hi = mid;
        if (hi / lo < 1.0 + 1e-9) break;
    }
    return triangulate_rings(best);
}

// ---------------------------------------------------------------------------

void recompute_element_geometry(Mesh& mesh) {
    for (std::size_t k = 0; k < mesh.elements.size(); ++k) {
        Element& e = mesh.elements[k];
        for (int j = 0; j < e.n_vertices; ++j)
            if (e.v[j] < 0 || e.v[j] >= static_cast<int>(mesh.nodes.size()))
                throw GeometryError(fmt::format("element {} references missing node {}", k, e.v[j]));
        const Vec3& a = mesh.nodes[e.v[0]].position;
        const Vec3& b = mesh.nodes[e.v[1]].position;
        if (e.n_vertices == 3) {
            const Vec3& c = mesh.nodes[e.v[2]].position;
            const Vec3 cr = (b - a).cross(c - a);
            const double scale = std::max({(b - a).squaredNorm(), (c - a).squaredNorm(), (c - b).squaredNorm()});
            const double twice_area = cr.norm();
            if (!(twice_area > 1e-14 * scale) || !std::isfinite(twice_area))
                throw GeometryError(fmt::format("element {} is degenerate (zero area)", k));
            e.measure = 0.5 * twice_area;
            e.normal = cr / twice_area;
        } else {
            const Vec3 d = b - a;
            const double length = d.norm();
            if (!(length > 0.0) || !std::isfinite(length))
                throw GeometryError(fmt::format("element {} is degenerate (zero length)", k));
            const Vec3 t = d / length;
            Vec3 n = mesh.regime == Regime::Axisymmetric ? Vec3(t.z(), 0.0, -t.x()) : rotate_cw(t);
            Vec3 reference = e.normal;
            if (reference.squaredNorm() == 0.0)
                reference = mesh.nodes[e.v[0]].normal + mesh.nodes[e.v[1]].normal;
            if (n.dot(reference) < 0.0) n = -n;
            e.measure = length;
            e.normal = n;
        }
    }
}

void recompute_geometry(Mesh& mesh) {
    recompute_element_geometry(mesh);
    std::vector<Vec3> acc(mesh.nodes.size(), Vec3::Zero());
    for (const auto& e : mesh.elements)
        for (int j = 0; j < e.n_vertices; ++j) acc[e.v[j]] += e.measure * e.normal;
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
        Node& node = mesh.nodes[i];
        if (node.is_corner()) {
            // keep the normal of the node's own edge
            for (const auto& e : mesh.elements)
                if (e.v[0] == static_cast<int>(i) || e.v[1] == static_cast<int>(i)) {
                    node.normal = e.normal;
                    break;
                }
            continue;
        }
        if (acc[i].squaredNorm() == 0.0) continue;  // isolated node keeps its normal
        Vec3 n = acc[i].normalized();
        if (mesh.regime == Regime::Axisymmetric && node.position.x() == 0.0)
            n = Vec3(0.0, 0.0, n.z() >= 0.0 ? 1.0 : -1.0);
        node.normal = n;
    }
}

void flip_normals(Mesh& mesh) {
    for (auto& n : mesh.nodes) n.normal = -n.normal;
    for (auto& e : mesh.elements) {
        e.normal = -e.normal;
        if (e.n_vertices == 3) std::swap(e.v[1], e.v[2]);  // keep winding consistent with the normal
    }
}

void recompute_part_geometry(Mesh& mesh, int part) {
    std::vector<Vec3> acc(mesh.nodes.size(), Vec3::Zero());
    for (std::size_t k = 0; k < mesh.elements.size(); ++k) {
        Element& e = mesh.elements[k];
        if (e.part != part || e.n_vertices != 3) continue;
        const Vec3& a = mesh.nodes[e.v[0]].position;
        const Vec3 cr = (mesh.nodes[e.v[1]].position - a).cross(mesh.nodes[e.v[2]].position - a);
        const double twice_area = cr.norm();
        if (!(twice_area > 0.0) || !std::isfinite(twice_area))
            throw GeometryError(fmt::format("element {} is degenerate (zero area)", k));
        e.measure = 0.5 * twice_area;
        e.normal = cr / twice_area;
        for (int j = 0; j < 3; ++j) acc[e.v[j]] += e.measure * e.normal;
    }
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
        if (mesh.nodes[i].part == part && acc[i].squaredNorm() > 0.0) mesh.nodes[i].normal = acc[i].normalized();
}

void translate(Mesh& mesh, const Vec3& shift) {
    for (auto& n : mesh.nodes) n.position += shift;
    for (auto& s : mesh.part_surfaces) s.center += shift;
}

void translate_part(Mesh& mesh, int part, const Vec3& shift) {
    for (auto& n : mesh.nodes)
        if (n.part == part) n.position += shift;
    if (part >= 0 && part < static_cast<int>(mesh.part_surfaces.size())) mesh.part_surfaces[part].center += shift;
}

std::vector<std::vector<int>> node_neighbours(const Mesh& mesh) {
    std::vector<std::vector<int>> nb(mesh.nodes.size());
    for (const auto& e : mesh.elements)
        for (int a = 0; a < e.n_vertices; ++a)
            for (int b = 0; b < e.n_vertices; ++b)
                if (a != b) nb[e.v[a]].push_back(e.v[b]);
    for (auto& list : nb) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }
    return nb;
}

std::vector<std::vector<int>> node_elements(const Mesh& mesh) {
    std::vector<std::vector<int>> out(mesh.nodes.size());
    for (std::size_t k = 0; k < mesh.elements.size(); ++k)
        for (int j = 0; j < mesh.elements[k].n_vertices; ++j)
            out[mesh.elements[k].v[j]].push_back(static_cast<int>(k));
    return out;
}

std::vector<bool> boundary_nodes(const Mesh& mesh) {
    std::vector<bool> on_boundary(mesh.nodes.size(), false);
    std::map<std::pair<int, int>, int> edge_use;
    for (const auto& e : mesh.elements) {
        if (e.n_vertices == 2) {
            for (int j = 0; j < 2; ++j) edge_use[{e.v[j], e.v[j]}]++;
            continue;
        }
        for (int j = 0; j < 3; ++j) edge_use[std::minmax(e.v[j], e.v[(j + 1) % 3])]++;
    }
    for (const auto& [edge, uses] : edge_use)
        if (uses == 1) on_boundary[edge.first] = on_boundary[edge.second] = true;
    return on_boundary;
}

Vec3 element_centroid(const Mesh& mesh, const Element& element) {
    Vec3 c = Vec3::Zero();
    for (int j = 0; j < element.n_vertices; ++j) c += mesh.nodes[element.v[j]].position;
    return c / element.n_vertices;
}

double element_diameter(const Mesh& mesh, const Element& element) {
    double d = 0.0;
    for (int a = 0; a < element.n_vertices; ++a)
        for (int b = a + 1; b < element.n_vertices; ++b)
            d = std::max(d, (mesh.nodes[element.v[a]].position - mesh.nodes[element.v[b]].position).norm());
    return d;
}

Vec3 normal_area_sum(const Mesh& mesh) {
    Vec3 s = Vec3::Zero();
    for (const auto& e : mesh.elements) s += e.measure * e.normal;
    return s;
}

double total_measure(const Mesh& mesh) {
    double s = 0.0;
    for (const auto& e : mesh.elements) s += e.measure;
    return s;
}

double enclosed_volume(const Mesh& mesh) {
    double v = 0.0;
    for (const auto& e : mesh.elements) {
        if (e.n_vertices != 3) throw GeometryError("enclosed_volume needs a triangulated surface");
        const Vec3& a = mesh.nodes[e.v[0]].position;
        const Vec3& b = mesh.nodes[e.v[1]].position;
        const Vec3& c = mesh.nodes[e.v[2]].position;
        double signed_vol = a.dot(b.cross(c)) / 6.0;
        if ((b - a).cross(c - a).dot(e.normal) < 0.0) signed_vol = -signed_vol;
        v += signed_vol;
    }
    return v;
}

double min_angle(const Mesh& mesh, const Element& element) {
    if (element.n_vertices != 3) return 0.0;
    double smallest = pi;
    for (int j = 0; j < 3; ++j) {
        const Vec3& p = mesh.nodes[element.v[j]].position;
        const Vec3 u = (mesh.nodes[element.v[(j + 1) % 3]].position - p).normalized();
        const Vec3 w = (mesh.nodes[element.v[(j + 2) % 3]].position - p).normalized();
        smallest = std::min(smallest, std::acos(std::clamp(u.dot(w), -1.0, 1.0)));
    }
    return smallest;
}

// ---------------------------------------------------------------------------

void write_snapshot(std::ostream& out, const Mesh& mesh, const std::vector<NodeColumn>& extra) {
    for (const auto& column : extra)
        if (column.values.size() != mesh.nodes.size())
            throw GeometryError(fmt::format("snapshot column '{}' has {} values for {} nodes", column.name,
                                            column.values.size(), mesh.nodes.size()));
    std::string header = fmt::format("{} {} {}", to_string(mesh.regime), mesh.nodes.size(), mesh.elements.size());
    for (const auto& column : extra) header += " " + column.name;
    out << header << '\n';
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
        const Node& n = mesh.nodes[i];
        std::string line = fmt::format("{} {:.15g} {:.15g} {:.15g} {:.15g} {:.15g} {:.15g} {}", i, n.position.x(),
                                       n.position.y(), n.position.z(), n.normal.x(), n.normal.y(), n.normal.z(),
                                       corner_label(n));
        for (const auto& column : extra) line += fmt::format(" {:.15g}", column.values[i]);
        out << line << '\n';
    }
    for (std::size_t k = 0; k < mesh.elements.size(); ++k) {
        const Element& e = mesh.elements[k];
        out << k;
        for (int j = 0; j < e.n_vertices; ++j) out << ' ' << e.v[j];
        out << '\n';
    }
}

void write_snapshot(const std::string& path, const Mesh& mesh, const std::vector<NodeColumn>& extra) {
    std::ofstream file(path);
    if (!file) throw std::runtime_error("cannot open " + path + " for writing");
    write_snapshot(file, mesh, extra);
}

}  // namespace nsbem
