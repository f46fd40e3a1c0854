#pragma once

#include <array>
#include <cmath>
#include <iosfwd>
#include <string>
#include <vector>

namespace dynbc {

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
    friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
    friend Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
    friend bool operator==(Point a, Point b) = default;
};

inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }

enum class DomainKind { Square, Disk, External };

std::string to_string(DomainKind kind);

using Triangle = std::array<int, 3>;
using Edge = std::array<int, 2>;

/// Immutable 2D triangulation with its boundary as one counterclockwise loop.
///
/// Invariants checked on construction: positive triangle areas, the boundary
/// loop is closed, covers exactly the edges that belong to one triangle, and
/// (for Disk meshes) boundary vertices lie on the unit circle.
class Mesh {
public:
    Mesh(std::vector<Point> vertices, std::vector<Triangle> triangles, std::vector<Edge> boundary,
         DomainKind kind);

    const std::vector<Point>& vertices() const noexcept { return vertices_; }
    const std::vector<Triangle>& triangles() const noexcept { return triangles_; }
    /// Ordered boundary loop; edge i ends where edge i+1 starts.
    const std::vector<Edge>& boundary_edges() const noexcept { return boundary_; }
    const std::vector<bool>& boundary_vertex_flags() const noexcept { return on_boundary_; }
    DomainKind kind() const noexcept { return kind_; }
    /// Longest edge over all triangles.
    double h() const noexcept { return h_; }

    int num_vertices() const noexcept { return static_cast<int>(vertices_.size()); }
    int num_triangles() const noexcept { return static_cast<int>(triangles_.size()); }

    /// Interior vertex indices followed by boundary vertex indices, both ascending.
    std::vector<int> interior_vertices() const;
    /// Boundary vertices in loop order.
    std::vector<int> boundary_vertices() const;

    double triangle_area(int t) const;
    double area() const;
    double min_angle_degrees() const;
    /// (longest edge)/(shortest edge) over the whole mesh.
    double edge_ratio() const;

private:
    std::vector<Point> vertices_;
    std::vector<Triangle> triangles_;
    std::vector<Edge> boundary_;
    std::vector<bool> on_boundary_;
    DomainKind kind_;
    double h_ = 0.0;
};

/// Structured mesh of [0,1]^2 with n subdivisions per side (each cell split
/// along its (0,0)-(1,1) diagonal).
Mesh generate_square_mesh(int n);

/// Unit disk with n_boundary equally spaced boundary vertices (n_boundary even,
/// at least 6); interior filled by concentric rings.
Mesh generate_disk_mesh(int n_boundary);

/// Red refinement: every triangle split into four. Disk boundary midpoints are
/// projected radially onto the unit circle.
Mesh refine(const Mesh& mesh);

Mesh refine(const Mesh& mesh, int times);

/// Lengths of the boundary edges in loop order.
std::vector<double> boundary_arclengths(const Mesh& mesh);

/// Text format: `nv nt nb`, then vertices, triangles, boundary edges.
void write_mesh(std::ostream& os, const Mesh& mesh);
Mesh read_mesh(std::istream& is, DomainKind kind = DomainKind::External);

}  // namespace dynbc
