#include "dynbc/assembly.hpp"

#include "dynbc/errors.hpp"
#include "dynbc/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace dynbc {

namespace q = quadrature;

Coefficient Coefficient::constant(double value) {
    Coefficient c;
    c.field = [value](Point, double) { return value; };
    c.identically_zero = value == 0.0;
    return c;
}

Coefficient Coefficient::varying(ScalarField f, bool constant_in_time, bool constant_in_space) {
    Coefficient c;
    c.field = std::move(f);
    c.constant_in_time = constant_in_time;
    c.constant_in_space = constant_in_space;
    return c;
}

std::string to_string(Lumping mode) {
    switch (mode) {
        case Lumping::Consistent: return "consistent";
        case Lumping::FullLumped: return "full";
        case Lumping::BulkOnlyLumped: return "bulk";
    }
    return "unknown";
}

Lumping parse_lumping(const std::string& name) {
    if (name == "consistent" || name == "none") return Lumping::Consistent;
    if (name == "full" || name == "lumped" || name == "full_lumped") return Lumping::FullLumped;
    if (name == "bulk" || name == "bulk_only" || name == "bulk_lumped") return Lumping::BulkOnlyLumped;
    throw InvalidArgument("unknown lumping mode '" + name + "' (expected consistent, full or bulk)");
}

Vector AssembledSystem::mass_diagonal() const {
    if (!mass.is_diagonal())
        throw PreconditionError("mass matrix is not diagonal; assemble with full mass lumping");
    return mass.diagonal_entries();
}

Vector LoadVector::total() const {
    Vector t = bulk;
    axpy(1.0, surf, t);
    return t;
}

namespace {

std::array<Point, 3> corners(const Mesh& mesh, const Triangle& tri) {
    return {mesh.vertices()[tri[0]], mesh.vertices()[tri[1]], mesh.vertices()[tri[2]]};
}

bool lumps_bulk(Lumping m) { return m != Lumping::Consistent; }
bool lumps_surf(Lumping m) { return m == Lumping::FullLumped; }

/// Samples μ and β at every point the assembly touches and enforces their sign rules.
void validate_coefficients(const Mesh& mesh, const CoefficientSet& c, double t) {
    bool beta_positive = false;
    bool beta_zero = false;
    const auto check = [&](Point x) {
        const double mu = c.mu(x, t);
        if (!(mu > 0.0))
            throw CoefficientViolation("mu must be strictly positive; got " + std::to_string(mu) + " at (" +
                                       std::to_string(x.x) + ", " + std::to_string(x.y) + ")");
        const double beta = c.beta(x, t);
        if (beta < 0.0 || std::isnan(beta)) throw CoefficientViolation("beta must be nonnegative");
        (beta > 0.0 ? beta_positive : beta_zero) = true;
        if (std::isnan(c.kappa(x, t))) throw CoefficientViolation("kappa is not a number");
    };
    for (const auto& [a, b] : mesh.boundary_edges()) {
        const Point pa = mesh.vertices()[a];
        const Point pb = mesh.vertices()[b];
        check(pa);
        for (const auto& g : q::kGauss2) check(q::map(pa, pb, g.s));
    }
    if (beta_positive && beta_zero)
        throw CoefficientViolation("beta must be either strictly positive everywhere or identically zero");
}

/// ∫_e c φ_a φ_b over a boundary edge; 2x2 local matrix.
std::array<double, 4> edge_mass(const Coefficient& c, Point pa, Point pb, double t) {
    const double len = norm(pb - pa);
    if (c.constant_in_space) {
        const double v = c(pa, t) * len / 6.0;
        return {2 * v, v, v, 2 * v};
    }
    std::array<double, 4> m{};
    for (const auto& g : q::kGauss2) {
        const double w = g.weight * len * c(q::map(pa, pb, g.s), t);
        const double phi[2] = {1.0 - g.s, g.s};
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) m[2 * i + j] += w * phi[i] * phi[j];
    }
    return m;
}

double edge_integral(const Coefficient& c, Point pa, Point pb, double t) {
    const double len = norm(pb - pa);
    if (c.constant_in_space) return c(pa, t) * len;
    double s = 0.0;
    for (const auto& g : q::kGauss2) s += g.weight * len * c(q::map(pa, pb, g.s), t);
    return s;
}

SparseMatrix lumped_bulk_mass(const Mesh& mesh) {
    Vector d(mesh.num_vertices(), 0.0);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const double a3 = mesh.triangle_area(t) / 3.0;
        for (int v : mesh.triangles()[t]) d[v] += a3;
    }
    return SparseMatrix::diagonal(d);
}

// μ sampled at the edge endpoints inside the trapezoidal rule.
SparseMatrix lumped_surf_mass(const Mesh& mesh, const Coefficient& mu, double t) {
    Vector d(mesh.num_vertices(), 0.0);
    for (const auto& [a, b] : mesh.boundary_edges()) {
        const Point pa = mesh.vertices()[a];
        const Point pb = mesh.vertices()[b];
        const double half = 0.5 * norm(pb - pa);
        d[a] += half * mu(pa, t);
        d[b] += half * mu(pb, t);
    }
    return SparseMatrix::diagonal(d);
}

DofPartition make_partition(const Mesh& mesh) { return {mesh.interior_vertices(), mesh.boundary_vertices()}; }

void finish(AssembledSystem& s) {
    s.mass = s.mass_bulk + s.mass_surf;
    s.stiffness_bulk = s.stiff_bulk;
    s.stiffness_surf = s.stiff_surf + s.react_surf;
    s.stiffness = s.stiffness_bulk + s.stiffness_surf;
}

}  // namespace

AssembledSystem assemble(const Mesh& mesh, const CoefficientSet& coeffs, double t, Lumping lumping) {
    validate_coefficients(mesh, coeffs, t);
    const int n = mesh.num_vertices();

    std::vector<Triplet> mb, kb;
    mb.reserve(9 * mesh.triangles().size());
    kb.reserve(9 * mesh.triangles().size());
    for (int e = 0; e < mesh.num_triangles(); ++e) {
        const auto& tri = mesh.triangles()[e];
        const auto v = corners(mesh, tri);
        const double area = mesh.triangle_area(e);
        const auto grad = q::barycentric_gradients(v, area);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                mb.push_back({tri[i], tri[j], area / 12.0 * (i == j ? 2.0 : 1.0)});
                kb.push_back({tri[i], tri[j], area * dot(grad[i], grad[j])});
            }
    }

    std::vector<Triplet> ms, ks, cs;
    for (const auto& [a, b] : mesh.boundary_edges()) {
        const Point pa = mesh.vertices()[a];
        const Point pb = mesh.vertices()[b];
        const int ids[2] = {a, b};
        const auto m = edge_mass(coeffs.mu, pa, pb, t);
        const auto c = edge_mass(coeffs.kappa, pa, pb, t);
        const double len = norm(pb - pa);
        const double kint = coeffs.beta.identically_zero ? 0.0 : edge_integral(coeffs.beta, pa, pb, t) / (len * len);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                ms.push_back({ids[i], ids[j], m[2 * i + j]});
                cs.push_back({ids[i], ids[j], c[2 * i + j]});
                ks.push_back({ids[i], ids[j], i == j ? kint : -kint});
            }
    }

    AssembledSystem s;
    s.mass_bulk = SparseMatrix::from_triplets(n, std::move(mb));
    s.stiff_bulk = SparseMatrix::from_triplets(n, std::move(kb));
    s.mass_surf = SparseMatrix::from_triplets(n, std::move(ms));
    s.stiff_surf = SparseMatrix::from_triplets(n, std::move(ks));
    s.react_surf = SparseMatrix::from_triplets(n, std::move(cs));
    s.mass_consistent = s.mass_bulk + s.mass_surf;
    s.partition = make_partition(mesh);
    s.time = t;
    s.lumping = Lumping::Consistent;
    finish(s);
    if (lumping != Lumping::Consistent) return lump(s, mesh, coeffs, lumping);
    return s;
}

AssembledSystem lump(const AssembledSystem& system, const Mesh& mesh, const CoefficientSet& coeffs, Lumping mode) {
    if (system.lumping != Lumping::Consistent) throw PreconditionError("lump: input system is already lumped");
    if (system.size() != mesh.num_vertices()) throw InvalidArgument("lump: system does not match mesh");
    AssembledSystem s = system;
    s.lumping = mode;
    if (lumps_bulk(mode)) s.mass_bulk = lumped_bulk_mass(mesh);
    if (lumps_surf(mode)) s.mass_surf = lumped_surf_mass(mesh, coeffs.mu, system.time);
    finish(s);
    return s;
}

LoadVector assemble_load_split(const Mesh& mesh, const CoefficientSet& coeffs, const ScalarField& f_bulk,
                               const ScalarField& f_surf, double t, Lumping lumping) {
    const int n = mesh.num_vertices();
    LoadVector b{Vector(n, 0.0), Vector(n, 0.0)};
    if (f_bulk) {
        for (int e = 0; e < mesh.num_triangles(); ++e) {
            const auto& tri = mesh.triangles()[e];
            const auto v = corners(mesh, tri);
            const double area = mesh.triangle_area(e);
            if (lumps_bulk(lumping)) {
                for (int i = 0; i < 3; ++i) b.bulk[tri[i]] += area / 3.0 * f_bulk(v[i], t);
                continue;
            }
            for (const auto& qp : q::kTriangleMidpoints) {
                const double fw = qp.weight * area * f_bulk(q::map(v, qp.bary), t);
                for (int i = 0; i < 3; ++i) b.bulk[tri[i]] += fw * qp.bary[i];
            }
        }
    }
    if (f_surf) {
        for (const auto& [a, c] : mesh.boundary_edges()) {
            const Point pa = mesh.vertices()[a];
            const Point pc = mesh.vertices()[c];
            const double len = norm(pc - pa);
            if (lumps_surf(lumping)) {
                b.surf[a] += 0.5 * len * coeffs.mu(pa, t) * f_surf(pa, t);
                b.surf[c] += 0.5 * len * coeffs.mu(pc, t) * f_surf(pc, t);
                continue;
            }
            for (const auto& g : q::kGauss2) {
                const Point x = q::map(pa, pc, g.s);
                const double fw = g.weight * len * coeffs.mu(x, t) * f_surf(x, t);
                b.surf[a] += fw * (1.0 - g.s);
                b.surf[c] += fw * g.s;
            }
        }
    }
    return b;
}

Vector assemble_load(const Mesh& mesh, const CoefficientSet& coeffs, const ScalarField& f_bulk,
                     const ScalarField& f_surf, double t, Lumping lumping) {
    return assemble_load_split(mesh, coeffs, f_bulk, f_surf, t, lumping).total();
}

namespace {

// Shared loop for F(u) (values) and dF/du (Jacobian triplets). `f` is applied
// to u_h at each quadrature point; the lumped parts use nodal values.
template <class BulkSink, class SurfSink>
void nonlinear_quadrature(const Mesh& mesh, const CoefficientSet& coeffs, const AssembledSystem& system,
                          std::span<const double> u, const PointwiseMap& f_bulk, const PointwiseMap& f_surf,
                          BulkSink&& bulk, SurfSink&& surf) {
    if (static_cast<int>(u.size()) != mesh.num_vertices()) throw InvalidArgument("nonlinearity: dimension mismatch");
    const double t = system.time;
    if (f_bulk) {
        if (lumps_bulk(system.lumping)) {
            const Vector d = system.mass_bulk.diagonal_entries();
            for (int i = 0; i < mesh.num_vertices(); ++i) bulk(i, i, d[i] * f_bulk(u[i]));
        } else {
            for (int e = 0; e < mesh.num_triangles(); ++e) {
                const auto& tri = mesh.triangles()[e];
                const double area = mesh.triangle_area(e);
                for (const auto& qp : q::kTriangleMidpoints) {
                    const double uq = qp.bary[0] * u[tri[0]] + qp.bary[1] * u[tri[1]] + qp.bary[2] * u[tri[2]];
                    const double fw = qp.weight * area * f_bulk(uq);
                    for (int i = 0; i < 3; ++i)
                        for (int j = 0; j < 3; ++j) bulk(tri[i], tri[j], fw * qp.bary[i] * qp.bary[j]);
                }
            }
        }
    }
    if (f_surf) {
        if (lumps_surf(system.lumping)) {
            const Vector d = system.mass_surf.diagonal_entries();
            for (int i : system.partition.boundary) surf(i, i, d[i] * f_surf(u[i]));
        } else {
            for (const auto& [a, b] : mesh.boundary_edges()) {
                const Point pa = mesh.vertices()[a];
                const Point pb = mesh.vertices()[b];
                const double len = norm(pb - pa);
                const int ids[2] = {a, b};
                for (const auto& g : q::kGauss2) {
                    const double phi[2] = {1.0 - g.s, g.s};
                    const double uq = phi[0] * u[a] + phi[1] * u[b];
                    const double fw = g.weight * len * coeffs.mu(q::map(pa, pb, g.s), t) * f_surf(uq);
                    for (int i = 0; i < 2; ++i)
                        for (int j = 0; j < 2; ++j) surf(ids[i], ids[j], fw * phi[i] * phi[j]);
                }
            }
        }
    }
}

}  // namespace

Vector evaluate_nonlinearity(const Mesh& mesh, const CoefficientSet& coeffs, const AssembledSystem& system,
                             std::span<const double> u, const PointwiseMap& f_bulk, const PointwiseMap& f_surf) {
    Vector out(u.size(), 0.0);
    // Partition of unity: summing φ_j over j turns the Jacobian-shaped loop into F_i.
    const auto sink = [&out](int i, int, double v) { out[i] += v; };
    nonlinear_quadrature(mesh, coeffs, system, u, f_bulk, f_surf, sink, sink);
    return out;
}

SparseMatrix nonlinearity_jacobian(const Mesh& mesh, const CoefficientSet& coeffs, const AssembledSystem& system,
                                   std::span<const double> u, const PointwiseMap& df_bulk,
                                   const PointwiseMap& df_surf) {
    std::vector<Triplet> t;
    const auto sink = [&t](int i, int j, double v) { t.push_back({i, j, v}); };
    nonlinear_quadrature(mesh, coeffs, system, u, df_bulk, df_surf, sink, sink);
    return SparseMatrix::from_triplets(static_cast<int>(u.size()), std::move(t));
}

BoundaryUnitMatrices boundary_unit_matrices(const Mesh& mesh) {
    const auto bnd = mesh.boundary_vertices();
    const int nb = static_cast<int>(bnd.size());
    BoundaryUnitMatrices out{Eigen::MatrixXd::Zero(nb, nb), Eigen::MatrixXd::Zero(nb, nb)};
    // Boundary edge k joins loop positions k and k+1.
    for (int k = 0; k < nb; ++k) {
        const int a = k;
        const int b = (k + 1) % nb;
        const double len = norm(mesh.vertices()[bnd[b]] - mesh.vertices()[bnd[a]]);
        out.mass(a, a) += len / 3.0;
        out.mass(b, b) += len / 3.0;
        out.mass(a, b) += len / 6.0;
        out.mass(b, a) += len / 6.0;
        out.stiffness(a, a) += 1.0 / len;
        out.stiffness(b, b) += 1.0 / len;
        out.stiffness(a, b) -= 1.0 / len;
        out.stiffness(b, a) -= 1.0 / len;
    }
    return out;
}

}  // namespace dynbc
