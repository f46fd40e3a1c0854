#pragma once

#include "dynbc/assembly.hpp"
#include "dynbc/linalg.hpp"
#include "dynbc/problems.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dynbc {

/// Shift c for the Ritz form a(·,·) + c(·,·): zero when κ is strictly
/// positive at every boundary sample, |κ_min| + 1 otherwise.
double default_ritz_shift(const Mesh& mesh, const CoefficientSet& coeffs, double t);

struct RitzResult {
    Vector values;
    /// max_i |((A + cM) r - ρ)_i| / ||ρ||_∞
    double orthogonality_residual = 0.0;
};

/// Ritz projection: solves (A + cM) r = ρ with ρ_i = a(u, φ_i) + c (u, φ_i)
/// integrated from the exact closures (grad, trace, surface_grad), using the
/// stiffness of `system` and the consistent mass.
RitzResult ritz_project(const Mesh& mesh, const AssembledSystem& system, const CoefficientSet& coeffs,
                        const ExactSolution& exact, double t, double shift);

/// Ritz projection with the operator A + cM factored once, for repeated
/// projections against one system.
class RitzProjector {
public:
    RitzProjector(const Mesh& mesh, const AssembledSystem& system, const CoefficientSet& coeffs, double shift);
    /// `t` is the time at which the exact closures and coefficients are evaluated.
    RitzResult operator()(const ExactSolution& exact, double t) const;

private:
    const Mesh* mesh_;
    CoefficientSet coeffs_;
    double shift_;
    SparseMatrix op_;
    SparseFactorization factor_;
};

/// Bundle for ∂_t u built from the time-derivative closures, so the Ritz
/// projection of the time derivative can be formed.
ExactSolution time_derivative(const ExactSolution& exact, DomainKind domain);

/// Nodal interpolant of a field at time t.
Vector interpolate(const Mesh& mesh, const ScalarField& f, double t);

struct ErrorNorms {
    double l2_bulk = 0.0;
    double l2_surf = 0.0;     ///< unweighted L²(Γ_h)
    double energy = 0.0;      ///< a(e, e)^{1/2}
    double h_combined = 0.0;  ///< (||e||²_Ω + ∫_Γ μ e²)^{1/2}
    double hminus_half_surf = 0.0;
};

/// Error of a finite element function against an exact solution, measured by
/// quadrature at physical points of Ω_h and Γ_h (degree-4 rule in the bulk,
/// 3-point Gauss on boundary edges). Caches the boundary H^{-1/2} operator.
class ErrorMeasure {
public:
    explicit ErrorMeasure(const Mesh& mesh);

    ErrorNorms operator()(std::span<const double> uh, const ExactSolution& exact, const CoefficientSet& coeffs,
                          double t) const;

    /// Norms of a nodal difference d between two discrete solutions.
    ErrorNorms discrete(std::span<const double> d, const AssembledSystem& consistent_system) const;

    const Mesh& mesh() const noexcept { return *mesh_; }

private:
    const Mesh* mesh_;
    std::vector<int> boundary_;
    HMinusHalfNorm hminus_half_;
};

ErrorNorms error_norms(std::span<const double> uh, const ExactSolution& exact, const Mesh& mesh,
                       const CoefficientSet& coeffs, double t);

/// Norm columns carried by an ErrorTable.
enum class NormKind { L2Bulk, L2Surf, Energy, HCombined, HMinusHalf };
std::string to_string(NormKind kind);
double select(const ErrorNorms& e, NormKind kind);

struct ErrorRow {
    double step;  ///< h or τ
    int level = 0;
    int dofs = 0;
    ErrorNorms errors;
};

/// Pairwise rates log(e_{i-1}/e_i)/log(s_{i-1}/s_i); empty when an error is zero.
std::vector<std::optional<double>> eoc(std::span<const double> steps, std::span<const double> errors);

class ErrorTable {
public:
    explicit ErrorTable(std::string step_name = "h") : step_name_(std::move(step_name)) {}

    /// Rows must arrive with strictly decreasing step.
    void add(ErrorRow row);
    const std::vector<ErrorRow>& rows() const noexcept { return rows_; }
    std::vector<std::optional<double>> rates(NormKind kind) const;
    const std::string& step_name() const noexcept { return step_name_; }

    /// CSV: one row per refinement, each norm followed by its rate column.
    void write_csv(std::ostream& os) const;

private:
    std::string step_name_;
    std::vector<ErrorRow> rows_;
};

/// ½ u^T A u plus, with potentials, the trapezoidal-rule integrals of W(u)
/// over Ω_h and W_Γ(u) over Γ_h.
double discrete_energy(std::span<const double> u, const AssembledSystem& system, const Mesh& mesh,
                       const std::optional<Potentials>& potentials = std::nullopt);

}  // namespace dynbc
