#pragma once

#include "dynbc/assembly.hpp"
#include "dynbc/mesh.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace dynbc {

using VectorField = std::function<Point(Point, double)>;

/// Closures describing a smooth exact solution u(x, t).
///
/// Surface closures (trace, surface gradient, Laplace-Beltrami, normal
/// derivative) are evaluated at points of the discrete boundary; on curved
/// domains they refer to the closest point of the exact boundary.
struct ExactSolution {
    ScalarField u;
    ScalarField u_t;
    VectorField grad;
    /// ∇(∂_t u); used to Ritz-project the time derivative.
    VectorField grad_t;
    ScalarField laplacian;
    ScalarField trace;
    /// ∂_t of the trace.
    ScalarField trace_t;
    VectorField surface_grad;
    ScalarField surface_laplacian;
    ScalarField normal_derivative;
};

/// Nonlinearity of a semi-linear problem: f_bulk(u) in Ω, f_surf(u) on Γ,
/// entering the weak form as (f_bulk, v)_Ω + (μ f_surf, v)_Γ.
struct Nonlinearity {
    PointwiseMap f_bulk;
    PointwiseMap df_bulk;
    PointwiseMap f_surf;
    PointwiseMap df_surf;
};

/// Double-well potentials W (bulk) and W_Γ (surface) for energy monitoring.
struct Potentials {
    PointwiseMap bulk;
    PointwiseMap surf;
};

struct ProblemSpec {
    std::string name;
    DomainKind domain = DomainKind::Square;
    CoefficientSet coeffs;
    /// Linear sources (f_bulk, f_surf); either may be null (zero).
    ScalarField f_bulk;
    ScalarField f_surf;
    std::optional<Nonlinearity> nonlinearity;
    std::optional<Potentials> potentials;
    std::optional<ExactSolution> exact;
    ScalarField u0;
    double T = 1.0;
    std::string description;

    bool is_linear() const { return !nonlinearity.has_value(); }
};

struct Sources {
    ScalarField f_bulk;
    ScalarField f_surf;
};

/// Manufactured sources making `exact` solve the strong problem:
/// f_bulk = ∂_t u - Δu and f_surf = ∂_t u + (κ γu - β Δ_Γ u + ∂_ν u)/μ.
/// β must be constant in space. Throws ConfigError naming a missing closure.
Sources mms_sources(const ExactSolution& exact, const CoefficientSet& coeffs);

/// Same, with a nonlinearity moved to the left-hand side:
/// the returned sources g satisfy f(u) + g = (linear MMS source).
Sources mms_sources(const ExactSolution& exact, const CoefficientSet& coeffs, const Nonlinearity& nl);

/// Names accepted by `builtin`.
std::vector<std::string> builtin_names();

/// wentzell_square, coupled_square, splitting_square, coupled_disk, nonauto_square,
/// allen_cahn_square, allen_cahn_mms_square, reaction_diffusion_disk.
/// Throws ConfigError listing the builtins for an unknown name.
ProblemSpec builtin(const std::string& name);

/// Replaces constant coefficients and regenerates MMS sources when the
/// problem carries an exact solution. Empty optionals leave a coefficient
/// unchanged.
ProblemSpec with_constant_coefficients(ProblemSpec spec, std::optional<double> mu, std::optional<double> kappa,
                                       std::optional<double> beta);

/// Separable exact solutions used by the builtins.
ExactSolution cosine_square_solution();
ExactSolution harmonic_disk_solution();
/// u = 1 + e^{-t} sin(πx) sin(πy) on the unit square: trace identically 1.
ExactSolution plateau_square_solution();
/// Exact bundle for a linear function a + b x + c y (constant in time).
ExactSolution linear_solution(double a, double b, double c, DomainKind domain);

/// Outward unit normal of the exact boundary at (or nearest to) x.
Point boundary_normal(DomainKind domain, Point x);

}  // namespace dynbc
