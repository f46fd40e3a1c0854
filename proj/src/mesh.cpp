#include "dynbc/mesh.hpp"

#include "dynbc/errors.hpp"

#include <algorithm>
#include <iomanip>
#include <limits>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

namespace dynbc {

std::string to_string(DomainKind kind) {
    switch (kind) {
        case DomainKind::Square: return "square";
        case DomainKind::Disk: return "disk";
        case DomainKind::External: return "external";
    }
    return "unknown";
}

namespace {

constexpr double kCircleTolerance = 1e-12;

std::pair<int, int> undirected(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

}  // namespace

Mesh::Mesh(std::vector<Point> vertices, std::vector<Triangle> triangles, std::vector<Edge> boundary,
           DomainKind kind)
    : vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      boundary_(std::move(boundary)),
      on_boundary_(vertices_.size(), false),
      kind_(kind) {
    const int nv = num_vertices();
    if (triangles_.empty()) throw InvalidArgument("mesh has no triangles");
    if (boundary_.size() < 3) throw InvalidArgument("mesh boundary loop needs at least three edges");

    // Directed edge -> owning triangle count; used for both the boundary and orientation checks.
    std::map<std::pair<int, int>, int> edge_count;
    std::map<std::pair<int, int>, bool> directed;
    for (int t = 0; t < num_triangles(); ++t) {
        const auto& tri = triangles_[t];
        for (int v : tri)
            if (v < 0 || v >= nv) throw InvalidArgument("triangle references a missing vertex");
        if (!(triangle_area(t) > 0.0))
            throw InvalidArgument("triangle " + std::to_string(t) + " has nonpositive signed area");
        for (int k = 0; k < 3; ++k) {
            const int a = tri[k];
            const int b = tri[(k + 1) % 3];
            ++edge_count[undirected(a, b)];
            directed[{a, b}] = true;
        }
    }
    std::size_t single = 0;
    for (const auto& [e, c] : edge_count) {
        if (c > 2) throw InvalidArgument("edge shared by more than two triangles");
        if (c == 1) ++single;
    }
    if (single != boundary_.size())
        throw InvalidArgument("boundary loop does not cover exactly the edges with one triangle");

    std::vector<bool> seen(nv, false);
    for (std::size_t i = 0; i < boundary_.size(); ++i) {
        const auto [a, b] = boundary_[i];
        if (a < 0 || a >= nv || b < 0 || b >= nv) throw InvalidArgument("boundary edge references a missing vertex");
        const auto it = edge_count.find(undirected(a, b));
        if (it == edge_count.end() || it->second != 1)
            throw InvalidArgument("boundary edge is not a single-triangle edge");
        if (!directed.contains({a, b}))
            throw InvalidArgument("boundary loop is not counterclockwise");
        if (boundary_[(i + 1) % boundary_.size()][0] != b) throw InvalidArgument("boundary edges do not form a closed loop");
        if (seen[a]) throw InvalidArgument("boundary loop visits a vertex twice");
        seen[a] = true;
        on_boundary_[a] = true;
    }

    if (kind_ == DomainKind::Disk) {
        for (int v : boundary_vertices())
            if (std::abs(norm(vertices_[v]) - 1.0) > kCircleTolerance)
                throw InvalidArgument("disk boundary vertex is off the unit circle");
    }

    for (const auto& tri : triangles_)
        for (int k = 0; k < 3; ++k)
            h_ = std::max(h_, norm(vertices_[tri[(k + 1) % 3]] - vertices_[tri[k]]));
}

std::vector<int> Mesh::interior_vertices() const {
    std::vector<int> out;
    for (int v = 0; v < num_vertices(); ++v)
        if (!on_boundary_[v]) out.push_back(v);
    return out;
}

std::vector<int> Mesh::boundary_vertices() const {
    std::vector<int> out;
    out.reserve(boundary_.size());
    for (const auto& e : boundary_) out.push_back(e[0]);
    return out;
}

double Mesh::triangle_area(int t) const {
    const auto& tri = triangles_[t];
    return 0.5 * cross(vertices_[tri[1]] - vertices_[tri[0]], vertices_[tri[2]] - vertices_[tri[0]]);
}

double Mesh::area() const {
    double a = 0.0;
    for (int t = 0; t < num_triangles(); ++t) a += triangle_area(t);
    return a;
}

double Mesh::min_angle_degrees() const {
    double m = 180.0;
    for (const auto& tri : triangles_) {
        for (int k = 0; k < 3; ++k) {
            const Point p = vertices_[tri[k]];
            const Point u = vertices_[tri[(k + 1) % 3]] - p;
            const Point w = vertices_[tri[(k + 2) % 3]] - p;
            const double angle = std::atan2(std::abs(cross(u, w)), dot(u, w));
            m = std::min(m, angle * 180.0 / std::numbers::pi);
        }
    }
    return m;
}

double Mesh::edge_ratio() const {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const auto& tri : triangles_)
        for (int k = 0; k < 3; ++k) {
            const double l = norm(vertices_[tri[(k + 1) % 3]] - vertices_[tri[k]]);
            lo = std::min(lo, l);
            hi = std::max(hi, l);
        }
    return hi / lo;
}

Mesh generate_square_mesh(int n) {
    if (n < 1) throw InvalidArgument("generate_square_mesh: n must be at least 1");
    const auto id = [n](int i, int j) { return j * (n + 1) + i; };
    std::vector<Point> v;
    v.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) v.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
    std::vector<Triangle> t;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            t.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            t.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    std::vector<Edge> b;
    for (int i = 0; i < n; ++i) b.push_back({id(i, 0), id(i + 1, 0)});
    for (int j = 0; j < n; ++j) b.push_back({id(n, j), id(n, j + 1)});
    for (int i = n; i > 0; --i) b.push_back({id(i, n), id(i - 1, n)});
    for (int j = n; j > 0; --j) b.push_back({id(0, j), id(0, j - 1)});
    return Mesh(std::move(v), std::move(t), std::move(b), DomainKind::Square);
}

Mesh generate_disk_mesh(int n_boundary) {
    if (n_boundary < 6 || n_boundary % 2 != 0)
        throw InvalidArgument("generate_disk_mesh: n_boundary must be even and at least 6");
    const double two_pi = 2.0 * std::numbers::pi;
    const int rings = std::max(1, static_cast<int>(std::lround(n_boundary / two_pi)));

    std::vector<Point> v{{0.0, 0.0}};
    std::vector<std::vector<int>> ring_ids(rings + 1);
    ring_ids[0] = {0};
    for (int k = 1; k <= rings; ++k) {
        const int count = k == rings ? n_boundary
                                     : std::max(3, static_cast<int>(std::lround(static_cast<double>(n_boundary) * k / rings)));
        const double r = static_cast<double>(k) / rings;
        // Inner rings are staggered by half a spacing; the boundary starts at angle 0.
        const double offset = k == rings ? 0.0 : std::numbers::pi / count;
        for (int j = 0; j < count; ++j) {
            const double theta = offset + two_pi * j / count;
            ring_ids[k].push_back(static_cast<int>(v.size()));
            if (k == rings)
                v.push_back({std::cos(theta), std::sin(theta)});
            else
                v.push_back({r * std::cos(theta), r * std::sin(theta)});
        }
    }

    std::vector<Triangle> t;
    const auto& first = ring_ids[1];
    for (std::size_t j = 0; j < first.size(); ++j) t.push_back({0, first[j], first[(j + 1) % first.size()]});

    for (int k = 1; k < rings; ++k) {
        const auto& in = ring_ids[k];
        const auto& out = ring_ids[k + 1];
        const int p = static_cast<int>(in.size());
        const int q = static_cast<int>(out.size());
        // Start from the outer vertex closest to inner vertex 0.
        int j0 = 0;
        double best = std::numeric_limits<double>::infinity();
        for (int j = 0; j < q; ++j) {
            const double d = norm(v[out[j]] - v[in[0]]);
            if (d < best) {
                best = d;
                j0 = j;
            }
        }
        int i = 0;
        int j = 0;
        while (i < p || j < q) {
            const int a = in[i % p];
            const int b = out[(j0 + j) % q];
            const int a_next = in[(i + 1) % p];
            const int b_next = out[(j0 + j + 1) % q];
            bool advance_outer;
            if (i == p)
                advance_outer = true;
            else if (j == q)
                advance_outer = false;
            else
                advance_outer = norm(v[b_next] - v[a]) <= norm(v[a_next] - v[b]);
            if (advance_outer) {
                t.push_back({a, b, b_next});
                ++j;
            } else {
                t.push_back({a, b, a_next});
                ++i;
            }
        }
    }

    const auto& bnd = ring_ids[rings];
    std::vector<Edge> b;
    for (std::size_t j = 0; j < bnd.size(); ++j) b.push_back({bnd[j], bnd[(j + 1) % bnd.size()]});
    return Mesh(std::move(v), std::move(t), std::move(b), DomainKind::Disk);
}

Mesh refine(const Mesh& mesh) {
    std::vector<Point> v = mesh.vertices();
    std::map<std::pair<int, int>, int> midpoint;
    const auto mid = [&](int a, int b) {
        const auto key = undirected(a, b);
        const auto it = midpoint.find(key);
        if (it != midpoint.end()) return it->second;
        const int id = static_cast<int>(v.size());
        v.push_back(0.5 * (v[a] + v[b]));
        midpoint.emplace(key, id);
        return id;
    };
    std::vector<Triangle> t;
    t.reserve(4 * mesh.triangles().size());
    for (const auto& [a, b, c] : mesh.triangles()) {
        const int ab = mid(a, b);
        const int bc = mid(b, c);
        const int ca = mid(c, a);
        t.push_back({a, ab, ca});
        t.push_back({ab, b, bc});
        t.push_back({ca, bc, c});
        t.push_back({ab, bc, ca});
    }
    std::vector<Edge> b;
    b.reserve(2 * mesh.boundary_edges().size());
    for (const auto& [p, q] : mesh.boundary_edges()) {
        const int m = mid(p, q);
        if (mesh.kind() == DomainKind::Disk) {
            const double r = norm(v[m]);
            v[m] = {v[m].x / r, v[m].y / r};
        }
        b.push_back({p, m});
        b.push_back({m, q});
    }
    return Mesh(std::move(v), std::move(t), std::move(b), mesh.kind());
}

Mesh refine(const Mesh& mesh, int times) {
    Mesh m = mesh;
    for (int i = 0; i < times; ++i) m = refine(m);
    return m;
}

std::vector<double> boundary_arclengths(const Mesh& mesh) {
    std::vector<double> out;
    out.reserve(mesh.boundary_edges().size());
    for (const auto& [a, b] : mesh.boundary_edges()) out.push_back(norm(mesh.vertices()[b] - mesh.vertices()[a]));
    return out;
}

void write_mesh(std::ostream& os, const Mesh& mesh) {
    const auto old = os.precision();
    os << std::setprecision(17);
    os << mesh.num_vertices() << ' ' << mesh.num_triangles() << ' ' << mesh.boundary_edges().size() << '\n';
    for (const auto& p : mesh.vertices()) os << p.x << ' ' << p.y << '\n';
    for (const auto& [a, b, c] : mesh.triangles()) os << a << ' ' << b << ' ' << c << '\n';
    for (const auto& [a, b] : mesh.boundary_edges()) os << a << ' ' << b << '\n';
    os.precision(old);
}

Mesh read_mesh(std::istream& is, DomainKind kind) {
    int line_no = 0;
    std::string line;
    const auto next = [&]() -> std::istringstream {
        while (std::getline(is, line)) {
            ++line_no;
            if (line.find_first_not_of(" \t\r") != std::string::npos) return std::istringstream(line);
        }
        throw ConfigError("mesh file ended early", line_no);
    };
    int nv = 0, nt = 0, nb = 0;
    if (!(next() >> nv >> nt >> nb) || nv < 3 || nt < 1 || nb < 3) throw ConfigError("bad mesh header", line_no);
    std::vector<Point> v(nv);
    for (auto& p : v)
        if (!(next() >> p.x >> p.y)) throw ConfigError("bad vertex line", line_no);
    std::vector<Triangle> t(nt);
    for (auto& tri : t)
        if (!(next() >> tri[0] >> tri[1] >> tri[2])) throw ConfigError("bad triangle line", line_no);
    std::vector<Edge> b(nb);
    for (auto& e : b)
        if (!(next() >> e[0] >> e[1])) throw ConfigError("bad boundary edge line", line_no);
    return Mesh(std::move(v), std::move(t), std::move(b), kind);
}

}  // namespace dynbc
