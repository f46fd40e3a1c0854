#pragma once

#include "dynbc/mesh.hpp"
#include "dynbc/sparse.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace dynbc {

/// Scalar field of position and time.
using ScalarField = std::function<double(Point, double)>;
/// Pointwise nonlinearity u -> f(u).
using PointwiseMap = std::function<double(double)>;

/// One coefficient of the boundary forms, with constancy flags that let
/// assembly use closed-form element matrices and skip reassembly.
struct Coefficient {
    ScalarField field;
    bool constant_in_time = true;
    bool constant_in_space = true;
    /// Known to be zero everywhere (only set by `constant(0)`).
    bool identically_zero = false;

    static Coefficient constant(double value);
    static Coefficient varying(ScalarField f, bool constant_in_time, bool constant_in_space);

    double operator()(Point x, double t) const { return field(x, t); }
};

/// (μ, κ, β): surface mass weight, surface reaction, surface diffusion.
struct CoefficientSet {
    Coefficient mu = Coefficient::constant(1.0);
    Coefficient kappa = Coefficient::constant(0.0);
    Coefficient beta = Coefficient::constant(0.0);

    bool autonomous() const {
        return mu.constant_in_time && kappa.constant_in_time && beta.constant_in_time;
    }
};

enum class Lumping { Consistent, FullLumped, BulkOnlyLumped };

std::string to_string(Lumping mode);
Lumping parse_lumping(const std::string& name);

/// Interior DOFs (ascending) and boundary DOFs (boundary-loop order).
struct DofPartition {
    std::vector<int> interior;
    std::vector<int> boundary;
};

/// Mass and stiffness pieces of the semi-discrete system M u' + A u = b.
struct AssembledSystem {
    SparseMatrix mass_bulk;    ///< ∫_Ω φ_j φ_i (possibly lumped)
    SparseMatrix mass_surf;    ///< ∫_Γ μ φ_j φ_i (possibly lumped)
    SparseMatrix stiff_bulk;   ///< ∫_Ω ∇φ_j·∇φ_i
    SparseMatrix stiff_surf;   ///< ∫_Γ β ∇_Γφ_j·∇_Γφ_i
    SparseMatrix react_surf;   ///< ∫_Γ κ φ_j φ_i
    SparseMatrix mass;         ///< mass_bulk + mass_surf
    SparseMatrix stiffness;    ///< stiff_bulk + stiff_surf + react_surf
    SparseMatrix stiffness_bulk;  ///< A_Ω = stiff_bulk
    SparseMatrix stiffness_surf;  ///< A_Γ = stiff_surf + react_surf
    /// Consistent mass, kept for Ritz shifts and error measurement.
    SparseMatrix mass_consistent;
    Lumping lumping = Lumping::Consistent;
    DofPartition partition;
    double time = 0.0;

    int size() const noexcept { return mass.size(); }
    /// Diagonal of `mass`; throws PreconditionError when `mass` is not diagonal.
    Vector mass_diagonal() const;
};

/// Assembles all pieces at time t and applies `lumping`.
///
/// Bulk element matrices are exact for linear elements; boundary terms are 1D
/// linear FEM along the boundary loop. Spatially varying coefficients are
/// integrated with the 2-point Gauss rule per boundary edge. Throws
/// CoefficientViolation if μ ≤ 0 or β < 0 at a sampled point, or if β is
/// positive somewhere and zero elsewhere.
AssembledSystem assemble(const Mesh& mesh, const CoefficientSet& coeffs, double t,
                         Lumping lumping = Lumping::Consistent);

/// Replaces the mass pieces by trapezoidal-rule diagonals; stiffness unchanged.
/// Requires a consistent system and the mesh and coefficients it came from.
AssembledSystem lump(const AssembledSystem& system, const Mesh& mesh, const CoefficientSet& coeffs,
                     Lumping mode);

struct LoadVector {
    Vector bulk;  ///< ∫_Ω f_bulk φ_i
    Vector surf;  ///< ∫_Γ μ f_surf φ_i
    Vector total() const;
};

/// Load vector split in bulk and surface parts. Consistent parts use the
/// edge-midpoint rule (bulk) and 2-point Gauss (surface); lumped parts use the
/// trapezoidal rule with nodal values, matching the lumped mass.
LoadVector assemble_load_split(const Mesh& mesh, const CoefficientSet& coeffs, const ScalarField& f_bulk,
                               const ScalarField& f_surf, double t, Lumping lumping = Lumping::Consistent);

Vector assemble_load(const Mesh& mesh, const CoefficientSet& coeffs, const ScalarField& f_bulk,
                     const ScalarField& f_surf, double t, Lumping lumping = Lumping::Consistent);

/// F_i(u) = (f_bulk(u_h), φ_i)_Ω + (μ f_surf(u_h), φ_i)_Γ, with the quadrature
/// matching the system's lumping for each part. Null maps contribute nothing.
Vector evaluate_nonlinearity(const Mesh& mesh, const CoefficientSet& coeffs, const AssembledSystem& system,
                             std::span<const double> u, const PointwiseMap& f_bulk, const PointwiseMap& f_surf);

/// Jacobian dF/du for the derivative maps f_bulk', f_surf' (same quadrature).
SparseMatrix nonlinearity_jacobian(const Mesh& mesh, const CoefficientSet& coeffs, const AssembledSystem& system,
                                   std::span<const double> u, const PointwiseMap& df_bulk,
                                   const PointwiseMap& df_surf);

/// Boundary-only mass (μ=1) and Laplace-Beltrami stiffness (β=1) as dense
/// matrices indexed in boundary-loop order.
struct BoundaryUnitMatrices {
    Eigen::MatrixXd mass;
    Eigen::MatrixXd stiffness;
};
BoundaryUnitMatrices boundary_unit_matrices(const Mesh& mesh);

}  // namespace dynbc
