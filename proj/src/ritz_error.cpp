#include "dynbc/ritz_error.hpp"

#include "dynbc/errors.hpp"
#include "dynbc/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace dynbc {

namespace {

std::array<Point, 3> corners(const Mesh& mesh, const Triangle& tri) {
    const auto& v = mesh.vertices();
    return {v[tri[0]], v[tri[1]], v[tri[2]]};
}

Point project_if_disk(DomainKind domain, Point p) {
    if (domain != DomainKind::Disk) return p;
    const double r = norm(p);
    return r == 0.0 ? Point{1.0, 0.0} : Point{p.x / r, p.y / r};
}

}  // namespace

double default_ritz_shift(const Mesh& mesh, const CoefficientSet& coeffs, double t) {
    double kmin = std::numeric_limits<double>::infinity();
    const auto& v = mesh.vertices();
    for (const auto& e : mesh.boundary_edges()) {
        const Point a = v[e[0]], b = v[e[1]];
        kmin = std::min(kmin, coeffs.kappa(a, t));
        for (const auto& q : quadrature::kGauss2) kmin = std::min(kmin, coeffs.kappa(quadrature::map(a, b, q.s), t));
    }
    if (kmin > 0.0) return 0.0;
    return std::abs(kmin) + 1.0;
}

namespace {

Vector ritz_load(const Mesh& mesh, const CoefficientSet& coeffs, const ExactSolution& exact, double t,
                 double shift) {
    if (!exact.grad || !exact.trace || !exact.surface_grad || !exact.u)
        throw InvalidArgument("ritz_project: exact solution needs u, grad, trace and surface_grad");
    if (shift < 0.0) throw InvalidArgument("ritz_project: negative shift");
    const int n = mesh.num_vertices();
    Vector rho(n, 0.0);

    for (int k = 0; k < mesh.num_triangles(); ++k) {
        const auto& tri = mesh.triangles()[k];
        const auto v = corners(mesh, tri);
        const double area = mesh.triangle_area(k);
        const auto g = quadrature::barycentric_gradients(v, area);
        for (const auto& q : quadrature::kTriangleDegree4) {
            const Point x = quadrature::map(v, q.bary);
            const Point gu = exact.grad(x, t);
            const double uu = shift != 0.0 ? exact.u(x, t) : 0.0;
            for (int i = 0; i < 3; ++i)
                rho[tri[i]] += q.weight * area * (dot(gu, g[i]) + shift * uu * q.bary[i]);
        }
    }

    const bool has_beta = !coeffs.beta.identically_zero;
    const bool has_kappa = !coeffs.kappa.identically_zero;
    for (const auto& e : mesh.boundary_edges()) {
        const Point a = mesh.vertices()[e[0]], b = mesh.vertices()[e[1]];
        const Point d = b - a;
        const double len = norm(d);
        const Point tan{d.x / len, d.y / len};
        for (const auto& q : quadrature::kGauss3) {
            const Point x = quadrature::map(a, b, q.s);
            const double w = q.weight * len;
            const double tr = exact.trace(x, t);
            double zeroth = 0.0;
            if (has_kappa) zeroth += coeffs.kappa(x, t) * tr;
            if (shift != 0.0) zeroth += shift * coeffs.mu(x, t) * tr;
            double first = 0.0;
            if (has_beta) first = coeffs.beta(x, t) * dot(exact.surface_grad(x, t), tan) / len;
            rho[e[0]] += w * (zeroth * (1.0 - q.s) - first);
            rho[e[1]] += w * (zeroth * q.s + first);
        }
    }

    return rho;
}

}  // namespace

RitzProjector::RitzProjector(const Mesh& mesh, const AssembledSystem& system, const CoefficientSet& coeffs,
                             double shift)
    : mesh_(&mesh),
      coeffs_(coeffs),
      shift_(shift),
      op_(shift != 0.0 ? add_scaled(system.stiffness, shift, system.mass_consistent) : system.stiffness),
      factor_(op_) {
    if (shift < 0.0) throw InvalidArgument("ritz_project: negative shift");
}

RitzResult RitzProjector::operator()(const ExactSolution& exact, double t) const {
    const Vector rho = ritz_load(*mesh_, coeffs_, exact, t, shift_);
    RitzResult out;
    out.values = factor_.solve(rho);
    // Iterative refinement with residuals accumulated in extended precision;
    // projections enter time-stepping loads, where solver noise would accumulate.
    const auto offsets = op_.row_offsets();
    const auto cols = op_.col_indices();
    const auto vals = op_.values();
    const int n = op_.size();
    Vector r(n);
    const auto residual = [&] {
        double worst = 0.0;
        for (int i = 0; i < n; ++i) {
            long double acc = rho[i];
            for (int p = offsets[i]; p < offsets[i + 1]; ++p)
                acc -= static_cast<long double>(vals[p]) * out.values[cols[p]];
            r[i] = static_cast<double>(acc);
            worst = std::max(worst, std::abs(r[i]));
        }
        return worst;
    };
    double worst = residual();
    for (int sweep = 0; sweep < 2 && worst > 0.0; ++sweep) {
        axpy(1.0, factor_.solve(r), out.values);
        worst = residual();
    }
    const double scale = norm_inf(rho);
    out.orthogonality_residual = scale > 0.0 ? worst / scale : worst;
    return out;
}

RitzResult ritz_project(const Mesh& mesh, const AssembledSystem& system, const CoefficientSet& coeffs,
                        const ExactSolution& exact, double t, double shift) {
    return RitzProjector(mesh, system, coeffs, shift)(exact, t);
}

ExactSolution time_derivative(const ExactSolution& exact, DomainKind domain) {
    if (!exact.u_t || !exact.grad_t || !exact.trace_t)
        throw InvalidArgument("time_derivative: exact solution needs u_t, grad_t and trace_t");
    ExactSolution d;
    d.u = exact.u_t;
    d.grad = exact.grad_t;
    d.trace = exact.trace_t;
    d.surface_grad = [g = exact.grad_t, domain](Point p, double t) {
        const Point q = project_if_disk(domain, p);
        const Point n = boundary_normal(domain, q);
        const Point v = g(q, t);
        const double vn = dot(v, n);
        return Point{v.x - vn * n.x, v.y - vn * n.y};
    };
    return d;
}

Vector interpolate(const Mesh& mesh, const ScalarField& f, double t) {
    Vector out(mesh.num_vertices());
    for (int i = 0; i < mesh.num_vertices(); ++i) out[i] = f(mesh.vertices()[i], t);
    return out;
}

ErrorMeasure::ErrorMeasure(const Mesh& mesh)
    : mesh_(&mesh),
      boundary_(mesh.boundary_vertices()),
      hminus_half_([&] {
          const auto m = boundary_unit_matrices(mesh);
          return HMinusHalfNorm(m.mass, m.stiffness);
      }()) {}

ErrorNorms ErrorMeasure::operator()(std::span<const double> uh, const ExactSolution& exact,
                                    const CoefficientSet& coeffs, double t) const {
    const Mesh& mesh = *mesh_;
    if (static_cast<int>(uh.size()) != mesh.num_vertices())
        throw InvalidArgument("error_norms: vector size does not match the mesh");
    if (!exact.u || !exact.grad) throw InvalidArgument("error_norms: exact solution needs u and grad");

    double bulk2 = 0.0, grad2 = 0.0;
    for (int k = 0; k < mesh.num_triangles(); ++k) {
        const auto& tri = mesh.triangles()[k];
        const auto v = corners(mesh, tri);
        const double area = mesh.triangle_area(k);
        const auto g = quadrature::barycentric_gradients(v, area);
        const Point guh{uh[tri[0]] * g[0].x + uh[tri[1]] * g[1].x + uh[tri[2]] * g[2].x,
                        uh[tri[0]] * g[0].y + uh[tri[1]] * g[1].y + uh[tri[2]] * g[2].y};
        for (const auto& q : quadrature::kTriangleDegree4) {
            const Point x = quadrature::map(v, q.bary);
            const double val = q.bary[0] * uh[tri[0]] + q.bary[1] * uh[tri[1]] + q.bary[2] * uh[tri[2]];
            const double e = val - exact.u(x, t);
            const Point ge = guh - exact.grad(x, t);
            bulk2 += q.weight * area * e * e;
            grad2 += q.weight * area * dot(ge, ge);
        }
    }

    const bool has_beta = !coeffs.beta.identically_zero;
    const bool has_kappa = !coeffs.kappa.identically_zero;
    if (has_beta && !exact.surface_grad) throw InvalidArgument("error_norms: exact solution needs surface_grad");
    double surf2 = 0.0, mu2 = 0.0, kappa2 = 0.0, beta2 = 0.0;
    for (const auto& e : mesh.boundary_edges()) {
        const Point a = mesh.vertices()[e[0]], b = mesh.vertices()[e[1]];
        const Point d = b - a;
        const double len = norm(d);
        const Point tan{d.x / len, d.y / len};
        const double slope = (uh[e[1]] - uh[e[0]]) / len;
        for (const auto& q : quadrature::kGauss3) {
            const Point x = quadrature::map(a, b, q.s);
            const double w = q.weight * len;
            const double err = (1.0 - q.s) * uh[e[0]] + q.s * uh[e[1]] - exact.u(x, t);
            surf2 += w * err * err;
            mu2 += w * coeffs.mu(x, t) * err * err;
            if (has_kappa) kappa2 += w * coeffs.kappa(x, t) * err * err;
            if (has_beta) {
                const double es = slope - dot(exact.surface_grad(x, t), tan);
                beta2 += w * coeffs.beta(x, t) * es * es;
            }
        }
    }

    Vector g(boundary_.size());
    for (std::size_t k = 0; k < boundary_.size(); ++k) {
        const Point x = mesh.vertices()[boundary_[k]];
        g[k] = uh[boundary_[k]] - exact.u(x, t);
    }

    ErrorNorms out;
    out.l2_bulk = std::sqrt(bulk2);
    out.l2_surf = std::sqrt(surf2);
    out.energy = std::sqrt(std::max(0.0, grad2 + kappa2 + beta2));
    out.h_combined = std::sqrt(bulk2 + mu2);
    out.hminus_half_surf = hminus_half_(g);
    return out;
}

ErrorNorms ErrorMeasure::discrete(std::span<const double> d, const AssembledSystem& system) const {
    if (system.lumping != Lumping::Consistent)
        throw PreconditionError("ErrorMeasure::discrete needs a consistent system");
    if (static_cast<int>(d.size()) != system.size())
        throw InvalidArgument("ErrorMeasure::discrete: vector size does not match the system");
    Vector g(boundary_.size());
    for (std::size_t k = 0; k < boundary_.size(); ++k) g[k] = d[boundary_[k]];
    double surf2 = 0.0;
    const auto& v = mesh_->vertices();
    for (const auto& e : mesh_->boundary_edges()) {
        const double len = norm(v[e[1]] - v[e[0]]);
        const double a = d[e[0]], b = d[e[1]];
        surf2 += len / 3.0 * (a * a + a * b + b * b);
    }
    ErrorNorms out;
    out.l2_bulk = std::sqrt(std::max(0.0, system.mass_bulk.bilinear(d, d)));
    out.l2_surf = std::sqrt(surf2);
    out.energy = std::sqrt(std::max(0.0, system.stiffness.bilinear(d, d)));
    out.h_combined = std::sqrt(std::max(0.0, system.mass.bilinear(d, d)));
    out.hminus_half_surf = hminus_half_(g);
    return out;
}

ErrorNorms error_norms(std::span<const double> uh, const ExactSolution& exact, const Mesh& mesh,
                       const CoefficientSet& coeffs, double t) {
    return ErrorMeasure(mesh)(uh, exact, coeffs, t);
}

std::string to_string(NormKind kind) {
    switch (kind) {
        case NormKind::L2Bulk: return "l2_bulk";
        case NormKind::L2Surf: return "l2_surf";
        case NormKind::Energy: return "energy";
        case NormKind::HCombined: return "h_combined";
        case NormKind::HMinusHalf: return "hminus_half_surf";
    }
    return "?";
}

double select(const ErrorNorms& e, NormKind kind) {
    switch (kind) {
        case NormKind::L2Bulk: return e.l2_bulk;
        case NormKind::L2Surf: return e.l2_surf;
        case NormKind::Energy: return e.energy;
        case NormKind::HCombined: return e.h_combined;
        case NormKind::HMinusHalf: return e.hminus_half_surf;
    }
    return 0.0;
}

std::vector<std::optional<double>> eoc(std::span<const double> steps, std::span<const double> errors) {
    if (steps.size() != errors.size()) throw InvalidArgument("eoc: steps and errors differ in length");
    std::vector<std::optional<double>> out(steps.size());
    for (std::size_t i = 1; i < steps.size(); ++i) {
        if (errors[i - 1] > 0.0 && errors[i] > 0.0 && steps[i - 1] != steps[i])
            out[i] = std::log(errors[i - 1] / errors[i]) / std::log(steps[i - 1] / steps[i]);
    }
    return out;
}

void ErrorTable::add(ErrorRow row) {
    if (!(row.step > 0.0)) throw InvalidArgument("ErrorTable: step must be positive");
    if (!rows_.empty() && !(row.step < rows_.back().step))
        throw InvalidArgument("ErrorTable: steps must decrease");
    rows_.push_back(row);
}

std::vector<std::optional<double>> ErrorTable::rates(NormKind kind) const {
    std::vector<double> s, e;
    for (const auto& r : rows_) {
        s.push_back(r.step);
        e.push_back(select(r.errors, kind));
    }
    return eoc(s, e);
}

void ErrorTable::write_csv(std::ostream& os) const {
    constexpr NormKind kinds[] = {NormKind::L2Bulk, NormKind::L2Surf, NormKind::Energy, NormKind::HCombined,
                                  NormKind::HMinusHalf};
    os << "level," << step_name_ << ",dofs";
    for (auto k : kinds) os << ',' << to_string(k) << ",eoc_" << to_string(k);
    os << '\n';
    std::vector<std::vector<std::optional<double>>> r;
    for (auto k : kinds) r.push_back(rates(k));
    const auto old = os.precision(17);
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        os << rows_[i].level << ',' << rows_[i].step << ',' << rows_[i].dofs;
        for (std::size_t k = 0; k < std::size(kinds); ++k) {
            os << ',' << select(rows_[i].errors, kinds[k]) << ',';
            if (r[k][i]) os << *r[k][i];
        }
        os << '\n';
    }
    os.precision(old);
}

double discrete_energy(std::span<const double> u, const AssembledSystem& system, const Mesh& mesh,
                       const std::optional<Potentials>& potentials) {
    double e = 0.5 * system.stiffness.bilinear(u, u);
    if (!potentials) return e;
    if (potentials->bulk) {
        for (int k = 0; k < mesh.num_triangles(); ++k) {
            const double w = mesh.triangle_area(k) / 3.0;
            for (int i : mesh.triangles()[k]) e += w * potentials->bulk(u[i]);
        }
    }
    if (potentials->surf) {
        const auto& v = mesh.vertices();
        for (const auto& ed : mesh.boundary_edges()) {
            const double w = norm(v[ed[1]] - v[ed[0]]) / 2.0;
            e += w * (potentials->surf(u[ed[0]]) + potentials->surf(u[ed[1]]));
        }
    }
    return e;
}

}  // namespace dynbc
