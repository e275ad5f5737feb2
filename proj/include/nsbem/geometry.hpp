#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsbem {

using Vec3 = Eigen::Vector3d;

/// Raised when a mesh builder or geometry refresh receives invalid input.
class GeometryError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Which of the two integral-equation geometries a mesh describes.
///
/// Planar meshes live in the z = 0 plane. Axisymmetric meshes store the
/// meridian in the (x, z) plane with x playing the role of the radius r, so a
/// node at (r, 0, z) is the azimuth-zero point of the revolved surface.
enum class Regime { Planar2D, Axisymmetric, Surface3D };

const char* to_string(Regime regime);

enum class CornerSide { None, Left, Right };

/// A boundary node. Corners of planar boundaries are stored twice: the
/// Left copy closes the incoming edge and the Right copy opens the outgoing
/// edge. Both copies share a position but carry their own edge normal.
struct Node {
    Vec3 position = Vec3::Zero();
    Vec3 normal = Vec3::Zero();
    int corner_id = -1;
    CornerSide side = CornerSide::None;
    int part = 0;

    bool is_corner() const { return corner_id >= 0; }
};

/// Linear element: a segment (2 vertices) or a flat triangle (3 vertices).
struct Element {
    std::array<int, 3> v{-1, -1, -1};
    int n_vertices = 0;
    Vec3 normal = Vec3::Zero();
    double measure = 0.0;
    int part = 0;
};

/// Pair of corner copies sharing one physical corner.
struct Corner {
    int left = -1;   // copy attached to the incoming edge
    int right = -1;  // copy attached to the outgoing edge
};

/// Exact surface a part approximates. Sphere parts let 3D quadrature put its
/// points on the sphere instead of on the flat facets.
struct PartSurface {
    bool sphere = false;
    Vec3 center = Vec3::Zero();
    double radius = 0.0;
};

struct Mesh {
    Regime regime = Regime::Surface3D;
    std::vector<Node> nodes;
    std::vector<Element> elements;
    std::vector<std::string> part_names;
    std::vector<PartSurface> part_surfaces;  // may be shorter than part_names
    std::vector<Corner> corners;

    std::size_t n_nodes() const { return nodes.size(); }
    std::size_t n_elements() const { return elements.size(); }

    int part_index(const std::string& name) const;
    /// Sphere description of a part, or nullptr for parts without one.
    const PartSurface* sphere_of(int part) const;
    /// Appends `other` (same regime) with node/element/part indices shifted.
    void append(const Mesh& other);
};

// --- builders ---------------------------------------------------------------

/// Polygon boundary with straight edges, traversed counterclockwise.
///
/// Vertex k starts edge k. A vertex whose adjacent edges are colinear becomes
/// an ordinary node; every other vertex becomes a corner double node.
Mesh make_polygon_boundary(const std::vector<Vec3>& vertices,
                           const std::vector<int>& nodes_per_edge);

/// Unit-edge parallelogram (0,0), (1,0), (1+cos b, sin b), (cos b, sin b).
Mesh make_parallelogram_boundary(double beta_degrees, int nodes_per_edge);

/// Icosphere: icosahedron refined `subdivision` times, projected to the sphere.
Mesh make_tri_sphere(const Vec3& center, double radius, int subdivision);

struct MeridianSphere {
    double radius = 1.0;
    double z_center = 0.0;
};

/// Meridian semicircles from the upper pole (polar angle 0) to the lower pole,
/// uniform in polar angle. Normals point radially away from each centre.
Mesh make_meridian_spheres(const std::vector<MeridianSphere>& spheres, int nodes_per_sphere);

struct DiscOptions {
    double inner_fraction = 0.8;  // uniform-spacing core radius / truncation radius
    double growth = 1.15;         // spacing ratio between rings outside the core
};

/// Flat triangulated disc in z = 0 with normals +z, built from concentric rings.
Mesh make_free_surface_disc(double truncation_radius, int target_elements,
                            const DiscOptions& options = {});

/// Refresh element normals and measures, then node normals as area-weighted
/// averages of adjacent element normals. Corner copies keep the normal of their
/// own edge.
void recompute_geometry(Mesh& mesh);

/// Element normals and measures only; node normals are left untouched.
void recompute_element_geometry(Mesh& mesh);

/// Reverse every node and element normal (interior <-> exterior domain);
/// triangle windings are reversed too so a later geometry refresh agrees.
void flip_normals(Mesh& mesh);

/// Triangle normals and areas of one part, then area-weighted node normals of
/// that part's nodes. Other parts are untouched.
void recompute_part_geometry(Mesh& mesh, int part);

void translate(Mesh& mesh, const Vec3& shift);

/// Rigid shift of the nodes (and exact surface) of one part.
void translate_part(Mesh& mesh, int part, const Vec3& shift);

/// Radial projection of a facet quadrature point onto its sphere: moves x onto
/// the surface, replaces n by the radial normal (keeping the facet's
/// orientation) and scales the weight by the area Jacobian.
inline void project_to_sphere(const PartSurface& s, const Vec3& facet_normal, Vec3& x, Vec3& n, double& w) {
    const Vec3 d = x - s.center;
    const double r = d.norm();
    const Vec3 u = d / r;
    const double c = facet_normal.dot(u);
    w *= s.radius * s.radius * std::abs(c) / (r * r);
    x = s.center + s.radius * u;
    n = c >= 0.0 ? u : Vec3(-u);
}

// --- queries ---------------------------------------------------------------

/// Node-to-node adjacency through shared elements, sorted, without self.
std::vector<std::vector<int>> node_neighbours(const Mesh& mesh);

/// Elements incident to each node.
std::vector<std::vector<int>> node_elements(const Mesh& mesh);

/// Nodes lying on an edge used by exactly one triangle.
std::vector<bool> boundary_nodes(const Mesh& mesh);

Vec3 element_centroid(const Mesh& mesh, const Element& element);
double element_diameter(const Mesh& mesh, const Element& element);

/// Sum of element normal times measure; zero for a closed surface.
Vec3 normal_area_sum(const Mesh& mesh);
double total_measure(const Mesh& mesh);

/// Volume enclosed by a closed, outward-oriented triangulation.
double enclosed_volume(const Mesh& mesh);

/// Smallest interior angle of a triangle, in radians.
double min_angle(const Mesh& mesh, const Element& element);

// --- snapshot I/O ----------------------------------------------------------

/// Optional per-node columns appended to the snapshot (e.g. phi, elevation).
struct NodeColumn {
    std::string name;
    std::vector<double> values;
};

void write_snapshot(std::ostream& out, const Mesh& mesh,
                    const std::vector<NodeColumn>& extra = {});
void write_snapshot(const std::string& path, const Mesh& mesh,
                    const std::vector<NodeColumn>& extra = {});

}  // namespace nsbem
