#pragma once

#include "dynbc/assembly.hpp"
#include "dynbc/linalg.hpp"
#include "dynbc/problems.hpp"
#include "dynbc/ritz_error.hpp"

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace dynbc {

enum class Method { BDF, ExpEuler, SplitForceLie, SplitForceStrang, SplitCompLie, SplitCompStrang };
enum class Startup { ExactRitz, Bootstrap };

std::string to_string(Method m);
Method parse_method(const std::string& name);
std::string to_string(Startup s);
Startup parse_startup(const std::string& name);

/// How the load vector b(t) is formed.
///  Pde: quadrature of the problem sources.
///  Ritz: b = M R_h ∂_t u + A R_h u, which makes the Ritz projection of the
///        exact solution the exact semi-discrete solution (needs the exact
///        bundle with u_t and grad_t).
///  Interpolant: b = M I_h ∂_t u + A I_h u.
enum class LoadMode { Pde, Ritz, Interpolant };
std::string to_string(LoadMode m);
LoadMode parse_load_mode(const std::string& name);

struct IntegratorConfig {
    Method method = Method::BDF;
    int k = 2;  ///< BDF order
    double tau = 0.01;
    double T = 1.0;
    double newton_tol = 1e-10;
    int newton_max_iter = 25;
    Startup startup = Startup::ExactRitz;
    /// Linearly implicit semi-linear BDF (nonlinearity at the extrapolated value).
    bool extrapolated = false;
    /// Splitting: ½(b(t₀)+b(t₁)) instead of b(t_{1/2}) in the middle substep.
    bool averaged_source = false;
    double phi_tol = 1e-12;
    MatrixFunctionMethod phi_method = MatrixFunctionMethod::Auto;
    /// Snapshot times (the nearest step is stored); the final state is always kept.
    std::vector<double> output_times;
};

/// BDF coefficients δ₀..δ_k from Σ δ_j ζ^j = Σ_{ℓ=1}^k (1/ℓ)(1-ζ)^ℓ.
std::vector<double> bdf_coefficients(int k);

/// Coefficients γ₀..γ_{k-1} of the order-k extrapolation u* = Σ γ_j u^{n-1-j}.
std::vector<double> extrapolation_coefficients(int k);

/// Autonomous dense flows above this size fall back to Krylov.
inline constexpr int kDenseSpectrumLimit = 1600;

/// Exact flow of  M u' = -A u + c  (diagonal M > 0, constant c) over a time s:
/// u(s) = u₀ + s φ(-s M⁻¹A)(M⁻¹c - M⁻¹A u₀), evaluated in y = M^{1/2}u with
/// Â = M^{-1/2} A M^{-1/2}. Caches the dense spectrum of Â when allowed.
class ExactFlow {
public:
    ExactFlow(Vector mass_diag, const SparseMatrix& a, double tol, MatrixFunctionMethod method);

    Vector advance(std::span<const double> u0, std::span<const double> c, double s) const;
    int size() const noexcept { return static_cast<int>(mass_diag_.size()); }
    /// Total Lanczos iterations spent (Krylov path only).
    int krylov_iterations() const noexcept { return krylov_iterations_; }

private:
    Vector mass_diag_;
    Vector sqrt_m_;
    SparseMatrix a_hat_;
    double tol_;
    MatrixFunctionMethod method_;
    std::optional<SymmetricSpectrum> spectrum_;
    mutable int krylov_iterations_ = 0;
};

/// Spatially discrete model: a problem on a mesh with a lumping mode.
/// Caches the assembled system for autonomous coefficients and shares exact
/// flows between runs on the same model.
class DiscreteModel {
public:
    DiscreteModel(ProblemSpec problem, const Mesh& mesh, Lumping lumping, LoadMode load = LoadMode::Pde);

    const ProblemSpec& problem() const noexcept { return problem_; }
    const Mesh& mesh() const noexcept { return *mesh_; }
    Lumping lumping() const noexcept { return lumping_; }
    LoadMode load_mode() const noexcept { return load_mode_; }
    int size() const noexcept { return mesh_->num_vertices(); }
    double ritz_shift() const noexcept { return shift_; }

    /// System at time t (the cached one for autonomous coefficients).
    const AssembledSystem& system(double t) const;
    /// Consistent system at time t, for error measurement.
    const AssembledSystem& consistent_system(double t) const;
    /// Bulk and surface parts of b(t) (linear sources only).
    LoadVector load(double t) const;
    /// b(t) - A(t) u. In the Ritz and interpolant load modes this is formed as
    /// M w_t + A (w - u), avoiding cancellation between b and A u.
    Vector load_residual(double t, std::span<const double> u) const;

    /// Ritz projection of the exact solution at t; throws PreconditionError without one.
    Vector ritz(double t) const;
    /// Discrete counterpart of the exact solution used for starting values:
    /// the nodal interpolant in Interpolant load mode, the Ritz projection otherwise.
    Vector exact_discrete(double t) const;
    /// exact_discrete(0) if an exact solution is known, else the nodal interpolant of u0.
    Vector initial_value() const;

    /// Flow for a named block, built on first use (autonomous problems only).
    const ExactFlow& cached_flow(const std::string& key, const std::function<ExactFlow()>& build) const;

private:
    ProblemSpec problem_;
    const Mesh* mesh_;
    Lumping lumping_;
    LoadMode load_mode_;
    double shift_;
    mutable std::optional<AssembledSystem> cached_;
    mutable std::optional<AssembledSystem> cached_consistent_;
    mutable std::map<std::string, std::unique_ptr<ExactFlow>> flows_;
    mutable std::unique_ptr<RitzProjector> projector_;
    mutable double projector_time_ = 0.0;

    const RitzProjector& projector(double t) const;
    /// Discrete representative w of the exact solution and its time derivative.
    std::pair<Vector, Vector> representative(double t) const;
};

struct Snapshot {
    double t;
    Vector u;
};

struct RunReport {
    std::vector<Snapshot> snapshots;
    Vector final;
    double t_final = 0.0;
    int steps = 0;
    int newton_iterations = 0;
    int krylov_iterations = 0;
};

/// Called after every step (n ≥ 0, n = 0 is the initial value).
using StepObserver = std::function<void(int n, double t, const Vector& u)>;

RunReport run_bdf(const DiscreteModel& model, const IntegratorConfig& config, const StepObserver& observer = {});
RunReport run_exp_euler(const DiscreteModel& model, const IntegratorConfig& config,
                        const StepObserver& observer = {});
RunReport run_splitting(const DiscreteModel& model, const IntegratorConfig& config,
                        const StepObserver& observer = {});

/// Dispatch on config.method.
RunReport run(const DiscreteModel& model, const IntegratorConfig& config, const StepObserver& observer = {});

}  // namespace dynbc
