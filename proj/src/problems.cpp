#include "dynbc/problems.hpp"

#include "dynbc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dynbc {

namespace {

constexpr double kPi = std::numbers::pi;

Point tangential(Point v, Point normal) {
    const double vn = dot(v, normal);
    return {v.x - vn * normal.x, v.y - vn * normal.y};
}

Point project_to_circle(Point x) {
    const double r = norm(x);
    if (r == 0.0) return {1.0, 0.0};
    return {x.x / r, x.y / r};
}

}  // namespace

Point boundary_normal(DomainKind domain, Point x) {
    if (domain == DomainKind::Disk) return project_to_circle(x);
    // Square: normal of the nearest side.
    const double d[4] = {x.x, 1.0 - x.x, x.y, 1.0 - x.y};
    const Point n[4] = {{-1.0, 0.0}, {1.0, 0.0}, {0.0, -1.0}, {0.0, 1.0}};
    return n[std::min_element(d, d + 4) - d];
}

ExactSolution cosine_square_solution() {
    ExactSolution e;
    e.u = [](Point p, double t) { return std::exp(-t) * std::cos(kPi * p.x) * std::cos(kPi * p.y); };
    e.u_t = [u = e.u](Point p, double t) { return -u(p, t); };
    e.grad = [](Point p, double t) {
        const double s = -kPi * std::exp(-t);
        return Point{s * std::sin(kPi * p.x) * std::cos(kPi * p.y), s * std::cos(kPi * p.x) * std::sin(kPi * p.y)};
    };
    e.grad_t = [g = e.grad](Point p, double t) { return -1.0 * g(p, t); };
    e.laplacian = [u = e.u](Point p, double t) { return -2.0 * kPi * kPi * u(p, t); };
    e.trace = e.u;
    e.trace_t = e.u_t;
    e.surface_grad = [g = e.grad](Point p, double t) {
        return tangential(g(p, t), boundary_normal(DomainKind::Square, p));
    };
    // Straight sides: Δ_Γ u = t^T (∇²u) t.
    e.surface_laplacian = [](Point p, double t) {
        const Point n = boundary_normal(DomainKind::Square, p);
        const Point tau{-n.y, n.x};
        const double c = std::exp(-t) * kPi * kPi;
        const double hxx = -c * std::cos(kPi * p.x) * std::cos(kPi * p.y);
        const double hxy = c * std::sin(kPi * p.x) * std::sin(kPi * p.y);
        return tau.x * tau.x * hxx + 2.0 * tau.x * tau.y * hxy + tau.y * tau.y * hxx;
    };
    e.normal_derivative = [g = e.grad](Point p, double t) { return dot(g(p, t), boundary_normal(DomainKind::Square, p)); };
    return e;
}

ExactSolution harmonic_disk_solution() {
    ExactSolution e;
    e.u = [](Point p, double t) { return std::exp(-t) * (p.x * p.x - p.y * p.y); };
    e.u_t = [u = e.u](Point p, double t) { return -u(p, t); };
    e.grad = [](Point p, double t) { return Point{2.0 * std::exp(-t) * p.x, -2.0 * std::exp(-t) * p.y}; };
    e.grad_t = [g = e.grad](Point p, double t) { return -1.0 * g(p, t); };
    e.laplacian = [](Point, double) { return 0.0; };
    // On the unit circle u = e^{-t} cos 2θ: ∂_ν u = 2u and Δ_Γ u = -4u.
    e.trace = [u = e.u](Point p, double t) { return u(project_to_circle(p), t); };
    e.trace_t = [u = e.u](Point p, double t) { return -u(project_to_circle(p), t); };
    e.surface_grad = [g = e.grad](Point p, double t) {
        const Point q = project_to_circle(p);
        return tangential(g(q, t), q);
    };
    e.surface_laplacian = [u = e.u](Point p, double t) { return -4.0 * u(project_to_circle(p), t); };
    e.normal_derivative = [u = e.u](Point p, double t) { return 2.0 * u(project_to_circle(p), t); };
    return e;
}

ExactSolution plateau_square_solution() {
    ExactSolution e;
    e.u = [](Point p, double t) { return 1.0 + std::exp(-t) * std::sin(kPi * p.x) * std::sin(kPi * p.y); };
    e.u_t = [](Point p, double t) { return -std::exp(-t) * std::sin(kPi * p.x) * std::sin(kPi * p.y); };
    e.grad = [](Point p, double t) {
        const double s = kPi * std::exp(-t);
        return Point{s * std::cos(kPi * p.x) * std::sin(kPi * p.y), s * std::sin(kPi * p.x) * std::cos(kPi * p.y)};
    };
    e.grad_t = [g = e.grad](Point p, double t) { return -1.0 * g(p, t); };
    e.laplacian = [ut = e.u_t](Point p, double t) { return 2.0 * kPi * kPi * ut(p, t); };
    // The trace is identically 1.
    e.trace = [](Point, double) { return 1.0; };
    e.trace_t = [](Point, double) { return 0.0; };
    e.surface_grad = [](Point, double) { return Point{0.0, 0.0}; };
    e.surface_laplacian = [](Point, double) { return 0.0; };
    e.normal_derivative = [g = e.grad](Point p, double t) { return dot(g(p, t), boundary_normal(DomainKind::Square, p)); };
    return e;
}

ExactSolution linear_solution(double a, double b, double c, DomainKind domain) {
    ExactSolution e;
    e.u = [a, b, c](Point p, double) { return a + b * p.x + c * p.y; };
    e.u_t = [](Point, double) { return 0.0; };
    e.grad = [b, c](Point, double) { return Point{b, c}; };
    e.grad_t = [](Point, double) { return Point{0.0, 0.0}; };
    e.laplacian = [](Point, double) { return 0.0; };
    e.trace = e.u;
    e.trace_t = e.u_t;
    e.surface_grad = [b, c, domain](Point p, double) { return tangential({b, c}, boundary_normal(domain, p)); };
    e.surface_laplacian = [b, c, domain](Point p, double) {
        if (domain != DomainKind::Disk) return 0.0;
        // Unit circle: Δ_Γ u = t^T ∇²u t - ∂_ν u with ∇²u = 0.
        return -dot({b, c}, project_to_circle(p));
    };
    e.normal_derivative = [b, c, domain](Point p, double) { return dot({b, c}, boundary_normal(domain, p)); };
    return e;
}

namespace {

template <class F>
const F& require(const F& f, const char* name) {
    if (!f) throw ConfigError(std::string("exact solution is missing the '") + name + "' closure");
    return f;
}

}  // namespace

Sources mms_sources(const ExactSolution& exact, const CoefficientSet& coeffs) {
    const auto& u_t = require(exact.u_t, "u_t");
    const auto& lap = require(exact.laplacian, "laplacian");
    const auto& trace = require(exact.trace, "trace");
    const auto& trace_t = require(exact.trace_t, "trace_t");
    const auto& lap_g = require(exact.surface_laplacian, "surface_laplacian");
    const auto& dn = require(exact.normal_derivative, "normal_derivative");
    if (!coeffs.beta.constant_in_space)
        throw ConfigError("manufactured sources require a spatially constant beta");
    Sources s;
    s.f_bulk = [u_t, lap](Point x, double t) { return u_t(x, t) - lap(x, t); };
    s.f_surf = [=, c = coeffs](Point x, double t) {
        const double beta_term = c.beta.identically_zero ? 0.0 : c.beta(x, t) * lap_g(x, t);
        return trace_t(x, t) + (c.kappa(x, t) * trace(x, t) - beta_term + dn(x, t)) / c.mu(x, t);
    };
    return s;
}

Sources mms_sources(const ExactSolution& exact, const CoefficientSet& coeffs, const Nonlinearity& nl) {
    Sources s = mms_sources(exact, coeffs);
    if (nl.f_bulk)
        s.f_bulk = [f = s.f_bulk, nb = nl.f_bulk, u = exact.u](Point x, double t) { return f(x, t) - nb(u(x, t)); };
    if (nl.f_surf)
        s.f_surf = [f = s.f_surf, ns = nl.f_surf, tr = exact.trace](Point x, double t) {
            return f(x, t) - ns(tr(x, t));
        };
    return s;
}

std::vector<std::string> builtin_names() {
    return {"wentzell_square",   "coupled_square",        "splitting_square",       "coupled_disk",
            "nonauto_square",    "allen_cahn_square",     "allen_cahn_mms_square", "reaction_diffusion_disk"};
}

namespace {

void attach_mms(ProblemSpec& p) {
    const Sources s = p.nonlinearity ? mms_sources(*p.exact, p.coeffs, *p.nonlinearity) : mms_sources(*p.exact, p.coeffs);
    p.f_bulk = s.f_bulk;
    p.f_surf = s.f_surf;
    p.u0 = [u = p.exact->u](Point x, double) { return u(x, 0.0); };
}

CoefficientSet constants(double mu, double kappa, double beta) {
    return {Coefficient::constant(mu), Coefficient::constant(kappa), Coefficient::constant(beta)};
}

Nonlinearity allen_cahn_nonlinearity(double mu) {
    // W(u) = (u^2 - 1)^2, f = -W'(u) in the bulk and -W'(u)/μ on the surface.
    Nonlinearity nl;
    nl.f_bulk = [](double u) { return -4.0 * u * (u * u - 1.0); };
    nl.df_bulk = [](double u) { return -12.0 * u * u + 4.0; };
    nl.f_surf = [mu](double u) { return -4.0 * u * (u * u - 1.0) / mu; };
    nl.df_surf = [mu](double u) { return (-12.0 * u * u + 4.0) / mu; };
    return nl;
}

Potentials double_well() {
    const auto w = [](double u) { return (u * u - 1.0) * (u * u - 1.0); };
    return {w, w};
}

}  // namespace

ProblemSpec builtin(const std::string& name) {
    ProblemSpec p;
    p.name = name;
    if (name == "wentzell_square") {
        p.domain = DomainKind::Square;
        p.coeffs = constants(1.0, 1.0, 0.0);
        p.exact = cosine_square_solution();
        p.description = "heat equation with Wentzell boundary condition on the unit square";
    } else if (name == "coupled_square") {
        p.domain = DomainKind::Square;
        p.coeffs = constants(1.0, 0.0, 1.0);
        p.exact = cosine_square_solution();
        p.description = "bulk diffusion coupled to surface diffusion on the unit square";
    } else if (name == "splitting_square") {
        p.domain = DomainKind::Square;
        p.coeffs = constants(1.0, 0.0, 1.0);
        p.exact = plateau_square_solution();
        p.description = "coupled bulk-surface diffusion whose solution has a constant trace";
    } else if (name == "coupled_disk") {
        p.domain = DomainKind::Disk;
        p.coeffs = constants(1.0, 0.0, 1.0);
        p.exact = harmonic_disk_solution();
        p.description = "bulk diffusion coupled to surface diffusion on the unit disk";
    } else if (name == "nonauto_square") {
        p.domain = DomainKind::Square;
        p.coeffs.mu = Coefficient::varying([](Point, double t) { return 2.0 + std::sin(t); }, false, true);
        p.coeffs.kappa = Coefficient::varying([](Point x, double t) { return 1.0 + 0.5 * std::cos(t) * x.x; }, false, false);
        p.coeffs.beta = Coefficient::varying([](Point, double t) { return 1.0 + 0.5 * std::sin(t); }, false, true);
        p.exact = cosine_square_solution();
        p.description = "non-autonomous dynamic boundary condition with time-dependent mu, kappa, beta";
    } else if (name == "allen_cahn_square") {
        p.domain = DomainKind::Square;
        p.coeffs = constants(1.0, 0.0, 1.0);
        p.nonlinearity = allen_cahn_nonlinearity(1.0);
        p.potentials = double_well();
        p.u0 = [](Point x, double) { return 0.2 + 0.1 * std::cos(kPi * x.x) * std::cos(kPi * x.y); };
        p.T = 0.5;
        p.description = "Allen-Cahn gradient flow with dynamic boundary condition (double-well potentials)";
        return p;
    } else if (name == "allen_cahn_mms_square") {
        p.domain = DomainKind::Square;
        p.coeffs = constants(1.0, 0.0, 1.0);
        p.nonlinearity = allen_cahn_nonlinearity(1.0);
        p.potentials = double_well();
        p.exact = cosine_square_solution();
        p.description = "Allen-Cahn with dynamic boundary condition and manufactured solution";
    } else if (name == "reaction_diffusion_disk") {
        p.domain = DomainKind::Disk;
        p.coeffs = constants(1.0, 0.0, 1.0);
        Nonlinearity nl;
        // ψ(1 - ψ²) with ψ clipped to [-10, 10], so f stays bounded.
        nl.f_surf = [](double u) {
            const double c = std::clamp(u, -10.0, 10.0);
            return c * (1.0 - c * c);
        };
        nl.df_surf = [](double u) { return std::abs(u) > 10.0 ? 0.0 : 1.0 - 3.0 * u * u; };
        p.nonlinearity = nl;
        p.exact = harmonic_disk_solution();
        p.description = "surface reaction-diffusion coupled to bulk diffusion on the unit disk";
    } else {
        std::string list;
        for (const auto& n : builtin_names()) list += (list.empty() ? "" : ", ") + n;
        throw ConfigError("unknown problem '" + name + "'; builtins are: " + list);
    }
    attach_mms(p);
    return p;
}

ProblemSpec with_constant_coefficients(ProblemSpec spec, std::optional<double> mu, std::optional<double> kappa,
                                       std::optional<double> beta) {
    if (mu) spec.coeffs.mu = Coefficient::constant(*mu);
    if (kappa) spec.coeffs.kappa = Coefficient::constant(*kappa);
    if (beta) spec.coeffs.beta = Coefficient::constant(*beta);
    if (spec.nonlinearity && spec.name.rfind("allen_cahn", 0) == 0 && mu) {
        const Potentials pot = *spec.potentials;
        spec.nonlinearity = allen_cahn_nonlinearity(*mu);
        spec.potentials = pot;
    }
    if (spec.exact) attach_mms(spec);
    return spec;
}

}  // namespace dynbc
