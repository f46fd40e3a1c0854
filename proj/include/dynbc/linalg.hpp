#pragma once

#include "dynbc/sparse.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <memory>
#include <span>

namespace dynbc {

/// Below this dimension dense algorithms are used as fallback or cross-check.
inline constexpr int kDenseFallbackLimit = 600;

struct SolveStats {
    int iterations = 0;
    double relative_residual = 0.0;
    bool dense = false;
};

/// Solves A x = b for symmetric positive definite A.
///
/// Jacobi-preconditioned conjugate gradients to ||Ax - b|| <= tol ||b||; dense
/// Cholesky for n <= kDenseFallbackLimit. Throws SolverFailure after 10n CG
/// iterations without convergence.
Vector solve_spd(const SparseMatrix& a, std::span<const double> b, double tol = 1e-12,
                 SolveStats* stats = nullptr);

/// Force the CG path regardless of size (used by tests and large systems).
Vector solve_spd_cg(const SparseMatrix& a, std::span<const double> b, double tol,
                    SolveStats* stats = nullptr);

/// Sparse LDL^T factorization reused across many right-hand sides.
///
/// Time integrators factor their step matrix once per distinct matrix; LDL^T
/// (rather than LL^T) also tolerates the mildly indefinite Newton matrices of
/// semi-linear problems.
class SparseFactorization {
public:
    SparseFactorization() = default;
    explicit SparseFactorization(const SparseMatrix& a) { factor(a); }

    void factor(const SparseMatrix& a);
    Vector solve(std::span<const double> b) const;
    int size() const noexcept { return n_; }

private:
    int n_ = 0;
    bool pattern_ready_ = false;
    std::unique_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> ldlt_;
};

/// Â = M^{-1/2} A M^{-1/2} for a strictly positive diagonal M.
SparseMatrix sym_scale(std::span<const double> mass_diag, const SparseMatrix& a);

/// φ(z) = (e^z - 1)/z with φ(0) = 1, evaluated without cancellation.
double phi1(double z);

/// Eigendecomposition Â = Q diag(λ) Q^T of a dense symmetric matrix, with
/// spectral application of exp(-sÂ) and φ(-sÂ).
class SymmetricSpectrum {
public:
    SymmetricSpectrum() = default;
    explicit SymmetricSpectrum(const Eigen::MatrixXd& a);

    int size() const noexcept { return static_cast<int>(eigenvalues_.size()); }
    const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }
    const Eigen::MatrixXd& eigenvectors() const noexcept { return eigenvectors_; }

    /// Q diag(f(λ)) Q^T v
    template <class F>
    Eigen::VectorXd apply(F&& f, const Eigen::VectorXd& v) const {
        Eigen::VectorXd c = eigenvectors_.transpose() * v;
        for (Eigen::Index i = 0; i < c.size(); ++i) c(i) *= f(eigenvalues_(i));
        return eigenvectors_ * c;
    }
    template <class F>
    Eigen::MatrixXd function(F&& f) const {
        Eigen::VectorXd d(eigenvalues_.size());
        for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = f(eigenvalues_(i));
        return eigenvectors_ * d.asDiagonal() * eigenvectors_.transpose();
    }

    Eigen::VectorXd exp_apply(double s, const Eigen::VectorXd& v) const;
    Eigen::VectorXd phi1_apply(double s, const Eigen::VectorXd& v) const;

private:
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXd eigenvectors_;
};

enum class MatrixFunctionMethod { Auto, Krylov, Dense };

struct KrylovStats {
    int iterations = 0;
    double error_estimate = 0.0;
    bool dense = false;
};

/// Approximates φ(-sÂ)v for symmetric positive semidefinite Â.
///
/// Lanczos with full reorthogonalization, at most 100 iterations, stopped when
/// the a posteriori estimate drops below tol*||v||. Auto uses the dense
/// eigendecomposition for n <= kDenseFallbackLimit.
Vector phi1_apply(const SparseMatrix& a_hat, std::span<const double> v, double s, double tol,
                  MatrixFunctionMethod method = MatrixFunctionMethod::Auto,
                  KrylovStats* stats = nullptr);

/// Same machinery for exp(-sÂ)v.
Vector exp_apply(const SparseMatrix& a_hat, std::span<const double> v, double s, double tol,
                 MatrixFunctionMethod method = MatrixFunctionMethod::Auto,
                 KrylovStats* stats = nullptr);

/// Discrete H^{-1/2} norm of a boundary nodal vector g:
/// (Σ_k (λ_k + 1)^{-1/2} (v_k^T M g)^2)^{1/2} over the M-orthonormal
/// eigenpairs of K v = λ M v. Dense only; more than 2000 boundary DOFs is
/// rejected with UnsupportedSize.
double hminus_half_norm(std::span<const double> g, const Eigen::MatrixXd& mass_unit,
                        const Eigen::MatrixXd& stiffness_unit);

/// Precomputed form of hminus_half_norm for repeated evaluation on one boundary.
class HMinusHalfNorm {
public:
    HMinusHalfNorm(const Eigen::MatrixXd& mass_unit, const Eigen::MatrixXd& stiffness_unit);
    double operator()(std::span<const double> g) const;

private:
    Eigen::MatrixXd weighted_;  // rows: (λ_k+1)^{-1/4} v_k^T M
};

/// Smallest eigenvalue of a symmetric matrix (dense).
double min_eigenvalue(const Eigen::MatrixXd& a);

}  // namespace dynbc
