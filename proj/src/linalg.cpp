#include "dynbc/linalg.hpp"

#include "dynbc/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

namespace dynbc {

namespace {

Eigen::Map<const Eigen::VectorXd> as_eigen(std::span<const double> v) {
    return {v.data(), static_cast<Eigen::Index>(v.size())};
}

Vector to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

Vector solve_spd_cg(const SparseMatrix& a, std::span<const double> b, double tol, SolveStats* stats) {
    const int n = a.size();
    if (static_cast<int>(b.size()) != n) throw InvalidArgument("solve_spd: dimension mismatch");
    Vector x(n, 0.0);
    const double bnorm = norm2(b);
    if (stats) *stats = {};
    if (bnorm == 0.0) return x;

    Vector inv_diag = a.diagonal_entries();
    for (double& d : inv_diag) {
        if (!(d > 0.0)) throw InvalidArgument("solve_spd: nonpositive diagonal entry");
        d = 1.0 / d;
    }
    Vector r(b.begin(), b.end());
    Vector z(n), p(n), ap(n);
    for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = dot(r, z);
    double rnorm = bnorm;
    const int max_iter = 10 * n;
    for (int it = 1; it <= max_iter; ++it) {
        a.multiply(p, ap);
        const double alpha = rz / dot(p, ap);
        axpy(alpha, p, x);
        axpy(-alpha, ap, r);
        rnorm = norm2(r);
        if (rnorm <= tol * bnorm) {
            // Confirm with the true residual; the recurrence drifts near roundoff.
            Vector res = a * x;
            for (int i = 0; i < n; ++i) res[i] = b[i] - res[i];
            rnorm = norm2(res);
            if (rnorm <= tol * bnorm) {
                if (stats) *stats = {it, rnorm / bnorm, false};
                return x;
            }
            r = res;
        }
        for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    throw SolverFailure("conjugate gradients did not converge in " + std::to_string(max_iter) +
                            " iterations (relative residual " + std::to_string(rnorm / bnorm) + ")",
                        rnorm / bnorm);
}

Vector solve_spd(const SparseMatrix& a, std::span<const double> b, double tol, SolveStats* stats) {
    const int n = a.size();
    if (static_cast<int>(b.size()) != n) throw InvalidArgument("solve_spd: dimension mismatch");
    if (n > kDenseFallbackLimit) return solve_spd_cg(a, b, tol, stats);

    const Eigen::LLT<Eigen::MatrixXd> llt(a.to_dense());
    if (llt.info() != Eigen::Success)
        throw SolverFailure("dense Cholesky failed: matrix is not positive definite", 0.0);
    const Eigen::VectorXd x = llt.solve(as_eigen(b));
    const double bnorm = norm2(b);
    Vector xv = to_vector(x);
    Vector res = a * xv;
    for (int i = 0; i < n; ++i) res[i] = b[i] - res[i];
    const double rel = bnorm > 0.0 ? norm2(res) / bnorm : 0.0;
    if (stats) *stats = {0, rel, true};
    if (rel > tol) {
        // Ill-conditioned but SPD: polish with CG from scratch.
        return solve_spd_cg(a, b, tol, stats);
    }
    return xv;
}

void SparseFactorization::factor(const SparseMatrix& a) {
    const Eigen::SparseMatrix<double> e = a.to_eigen();
    if (!ldlt_ || a.size() != n_) {
        ldlt_ = std::make_unique<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>();
        pattern_ready_ = false;
    }
    n_ = a.size();
    if (!pattern_ready_) {
        ldlt_->analyzePattern(e);
        pattern_ready_ = true;
    }
    ldlt_->factorize(e);
    if (ldlt_->info() != Eigen::Success) throw SolverFailure("sparse LDL^T factorization failed", 0.0);
}

Vector SparseFactorization::solve(std::span<const double> b) const {
    if (!ldlt_) throw InvalidArgument("SparseFactorization::solve before factor");
    if (static_cast<int>(b.size()) != n_) throw InvalidArgument("SparseFactorization: dimension mismatch");
    const Eigen::VectorXd x = ldlt_->solve(as_eigen(b));
    if (ldlt_->info() != Eigen::Success) throw SolverFailure("sparse LDL^T solve failed", 0.0);
    return to_vector(x);
}

SparseMatrix sym_scale(std::span<const double> mass_diag, const SparseMatrix& a) {
    if (static_cast<int>(mass_diag.size()) != a.size()) throw InvalidArgument("sym_scale: dimension mismatch");
    Vector s(mass_diag.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!(mass_diag[i] > 0.0)) throw InvalidArgument("sym_scale: mass diagonal must be strictly positive");
        s[i] = 1.0 / std::sqrt(mass_diag[i]);
    }
    std::vector<Triplet> t;
    t.reserve(a.nonzeros());
    const auto off = a.row_offsets();
    const auto col = a.col_indices();
    const auto val = a.values();
    for (int r = 0; r < a.size(); ++r)
        for (int k = off[r]; k < off[r + 1]; ++k) t.push_back({r, col[k], val[k] * s[r] * s[col[k]]});
    return SparseMatrix::from_triplets(a.size(), std::move(t));
}

double phi1(double z) {
    if (z == 0.0) return 1.0;
    return std::expm1(z) / z;
}

SymmetricSpectrum::SymmetricSpectrum(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols()) throw InvalidArgument("SymmetricSpectrum: matrix must be square");
    if (a.rows() == 0) return;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    if (es.info() != Eigen::Success) throw SolverFailure("symmetric eigendecomposition failed", 0.0);
    eigenvalues_ = es.eigenvalues();
    eigenvectors_ = es.eigenvectors();
}

Eigen::VectorXd SymmetricSpectrum::exp_apply(double s, const Eigen::VectorXd& v) const {
    return apply([s](double l) { return std::exp(-s * l); }, v);
}

Eigen::VectorXd SymmetricSpectrum::phi1_apply(double s, const Eigen::VectorXd& v) const {
    return apply([s](double l) { return phi1(-s * l); }, v);
}

namespace {

enum class Kernel { Exp, Phi1 };

double kernel_value(Kernel k, double z) { return k == Kernel::Exp ? std::exp(z) : phi1(z); }

Vector krylov_apply(const SparseMatrix& a, std::span<const double> v, double s, double tol, Kernel kernel,
                    KrylovStats* stats) {
    constexpr int kMaxIter = 100;
    const int n = a.size();
    const double vnorm = norm2(v);
    if (stats) *stats = {};
    if (vnorm == 0.0) return Vector(n, 0.0);

    const int m_max = std::min(kMaxIter, n);
    Eigen::MatrixXd basis(n, m_max + 1);
    basis.col(0) = as_eigen(v) / vnorm;
    std::vector<double> alpha, beta;
    Vector w(n);
    Eigen::VectorXd coeffs;
    double estimate = 0.0;

    for (int j = 0; j < m_max; ++j) {
        const Eigen::VectorXd vj = basis.col(j);
        a.multiply(std::span<const double>(vj.data(), n), w);
        Eigen::Map<Eigen::VectorXd> we(w.data(), n);
        alpha.push_back(vj.dot(we));
        // Full reorthogonalization, applied twice.
        for (int pass = 0; pass < 2; ++pass) {
            const Eigen::VectorXd h = basis.leftCols(j + 1).transpose() * we;
            we -= basis.leftCols(j + 1) * h;
        }
        const double b = we.norm();
        const int m = j + 1;

        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) t(i, i) = alpha[i];
        for (int i = 0; i + 1 < m; ++i) t(i, i + 1) = t(i + 1, i) = beta[i];
        const SymmetricSpectrum small(t);
        Eigen::VectorXd e1 = Eigen::VectorXd::Zero(m);
        e1(0) = 1.0;
        coeffs = small.apply([s, kernel](double l) { return kernel_value(kernel, -s * l); }, e1);

        const bool breakdown = b <= 1e-13 * std::max(1.0, std::abs(alpha.back()));
        estimate = vnorm * b * std::abs(coeffs(m - 1));
        if (breakdown || (m >= 2 && estimate <= tol * vnorm)) {
            if (stats) *stats = {m, breakdown ? 0.0 : estimate, false};
            const Eigen::VectorXd y = vnorm * (basis.leftCols(m) * coeffs);
            return to_vector(y);
        }
        beta.push_back(b);
        basis.col(j + 1) = we / b;
    }
    if (m_max == n) {
        // The Krylov space spans the whole space; the projection is exact.
        if (stats) *stats = {m_max, 0.0, false};
        const Eigen::VectorXd y = vnorm * (basis.leftCols(m_max) * coeffs);
        return to_vector(y);
    }
    throw SolverFailure("Krylov matrix function stagnated after " + std::to_string(m_max) +
                            " iterations (estimate " + std::to_string(estimate / vnorm) +
                            "); use the dense method or a smaller step",
                        estimate / vnorm);
}

Vector matrix_function_apply(const SparseMatrix& a, std::span<const double> v, double s, double tol,
                             MatrixFunctionMethod method, KrylovStats* stats, Kernel kernel) {
    if (static_cast<int>(v.size()) != a.size()) throw InvalidArgument("matrix function: dimension mismatch");
    if (!(s > 0.0)) throw InvalidArgument("matrix function: scale must be positive");
    const bool dense = method == MatrixFunctionMethod::Dense ||
                       (method == MatrixFunctionMethod::Auto && a.size() <= kDenseFallbackLimit);
    if (dense) {
        const SymmetricSpectrum spec(a.to_dense());
        const Eigen::VectorXd x = as_eigen(v);
        const Eigen::VectorXd y = kernel == Kernel::Exp ? spec.exp_apply(s, x) : spec.phi1_apply(s, x);
        if (stats) *stats = {0, 0.0, true};
        return to_vector(y);
    }
    return krylov_apply(a, v, s, tol, kernel, stats);
}

}  // namespace

Vector phi1_apply(const SparseMatrix& a_hat, std::span<const double> v, double s, double tol,
                  MatrixFunctionMethod method, KrylovStats* stats) {
    return matrix_function_apply(a_hat, v, s, tol, method, stats, Kernel::Phi1);
}

Vector exp_apply(const SparseMatrix& a_hat, std::span<const double> v, double s, double tol,
                 MatrixFunctionMethod method, KrylovStats* stats) {
    return matrix_function_apply(a_hat, v, s, tol, method, stats, Kernel::Exp);
}

HMinusHalfNorm::HMinusHalfNorm(const Eigen::MatrixXd& mass_unit, const Eigen::MatrixXd& stiffness_unit) {
    constexpr Eigen::Index kMaxDofs = 2000;
    if (mass_unit.rows() > kMaxDofs)
        throw UnsupportedSize("H^{-1/2} norm: more than 2000 boundary DOFs is not supported (dense eigensolver)");
    if (mass_unit.rows() != stiffness_unit.rows() || mass_unit.rows() != mass_unit.cols())
        throw InvalidArgument("H^{-1/2} norm: matrix dimension mismatch");
    if (mass_unit.rows() == 0) return;
    const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(stiffness_unit, mass_unit);
    if (es.info() != Eigen::Success) throw SolverFailure("generalized eigensolver failed", 0.0);
    const Eigen::MatrixXd& v = es.eigenvectors();  // M-orthonormal
    const Eigen::VectorXd& lambda = es.eigenvalues();
    weighted_ = v.transpose() * mass_unit;
    for (Eigen::Index k = 0; k < lambda.size(); ++k)
        weighted_.row(k) *= std::pow(std::max(lambda(k), 0.0) + 1.0, -0.25);
}

double HMinusHalfNorm::operator()(std::span<const double> g) const {
    if (static_cast<Eigen::Index>(g.size()) != weighted_.cols()) throw InvalidArgument("H^{-1/2} norm: dimension mismatch");
    if (g.empty()) return 0.0;
    return (weighted_ * as_eigen(g)).norm();
}

double hminus_half_norm(std::span<const double> g, const Eigen::MatrixXd& mass_unit,
                        const Eigen::MatrixXd& stiffness_unit) {
    return HMinusHalfNorm(mass_unit, stiffness_unit)(g);
}

double min_eigenvalue(const Eigen::MatrixXd& a) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

}  // namespace dynbc
