#include "dynbc/assembly.hpp"
#include "dynbc/errors.hpp"
#include "dynbc/linalg.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace dynbc;
using dynbc::testing::as_eigen;

namespace {

SparseMatrix from_dense(const Eigen::MatrixXd& a) {
    std::vector<Triplet> t;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            if (a(i, j) != 0.0) t.push_back({i, j, a(i, j)});
    return SparseMatrix::from_triplets(static_cast<int>(a.rows()), t);
}

Eigen::MatrixXd random_spd(int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd b(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) b(i, j) = normal(rng);
    return b * b.transpose() + n * Eigen::MatrixXd::Identity(n, n);
}

// 1D Dirichlet Laplacian (tridiagonal 2, -1).
SparseMatrix laplacian_1d(int n, double scale) {
    std::vector<Triplet> t;
    for (int i = 0; i < n; ++i) {
        t.push_back({i, i, 2.0 * scale});
        if (i > 0) t.push_back({i, i - 1, -scale});
        if (i + 1 < n) t.push_back({i, i + 1, -scale});
    }
    return SparseMatrix::from_triplets(n, t);
}

Vector random_vector(int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1, 1);
    Vector v(n);
    for (double& x : v) x = dist(rng);
    return v;
}

}  // namespace

TEST(SolveSpd, Examples) {
    const Vector x = solve_spd(SparseMatrix::identity(3), Vector{1, 2, 3});
    EXPECT_EQ(x, (Vector{1, 2, 3}));
    const Vector d = solve_spd(SparseMatrix::diagonal(Vector{1, 2, 4}), Vector{1, 1, 1});
    EXPECT_NEAR(d[0], 1.0, 1e-15);
    EXPECT_NEAR(d[1], 0.5, 1e-15);
    EXPECT_NEAR(d[2], 0.25, 1e-15);
}

TEST(SolveSpd, RandomMatchesDenseOnBothPaths) {
    const Eigen::MatrixXd a = random_spd(50, 7);
    const SparseMatrix s = from_dense(a);
    const Vector b = random_vector(50, 8);
    const Eigen::VectorXd ref = a.llt().solve(as_eigen(b));
    SolveStats dense, cg;
    const Vector x1 = solve_spd(s, b, 1e-14, &dense);
    const Vector x2 = solve_spd_cg(s, b, 1e-14, &cg);
    EXPECT_TRUE(dense.dense);
    EXPECT_FALSE(cg.dense);
    EXPECT_GT(cg.iterations, 0);
    EXPECT_LE((as_eigen(x1) - ref).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((as_eigen(x2) - ref).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(SolveSpd, LargeSystemUsesCg) {
    const int n = 1000;
    const SparseMatrix a = laplacian_1d(n, 1.0);
    const Vector b = random_vector(n, 2);
    SolveStats stats;
    const Vector x = solve_spd(a, b, 1e-12, &stats);
    EXPECT_FALSE(stats.dense);
    const Vector r = a * x;
    double err = 0.0;
    for (int i = 0; i < n; ++i) err = std::max(err, std::abs(r[i] - b[i]));
    EXPECT_LE(err, 1e-10);
}

TEST(SolveSpd, UnreachableToleranceThrows) {
    const SparseMatrix a = laplacian_1d(1000, 1.0);
    EXPECT_THROW(solve_spd_cg(a, random_vector(1000, 4), 1e-300), SolverFailure);
}

TEST(SparseFactorization, SolvesRepeatedly) {
    const Eigen::MatrixXd a = random_spd(30, 3);
    SparseFactorization f(from_dense(a));
    for (unsigned seed : {1u, 2u, 3u}) {
        const Vector b = random_vector(30, seed);
        const Vector x = f.solve(b);
        EXPECT_LE((as_eigen(x) - a.llt().solve(as_eigen(b))).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(SymScale, Examples) {
    const SparseMatrix a = from_dense(random_spd(5, 1));
    EXPECT_EQ(sym_scale(Vector(5, 1.0), a).to_dense(), a.to_dense());
    EXPECT_LE((sym_scale(Vector(5, 4.0), a).to_dense() - 0.25 * a.to_dense()).cwiseAbs().maxCoeff(), 1e-15);
    const Vector m{1, 2, 3, 4, 5};
    const Eigen::MatrixXd s = sym_scale(m, a).to_dense();
    EXPECT_LE((s - s.transpose()).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_GT(min_eigenvalue(s), 0.0);
    const Eigen::VectorXd r = as_eigen(m).cwiseSqrt().cwiseInverse();
    EXPECT_LE((s - r.asDiagonal() * a.to_dense() * r.asDiagonal()).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_THROW(sym_scale(Vector{1, 0, 1, 1, 1}, a), InvalidArgument);
    EXPECT_THROW(sym_scale(Vector{1, -1, 1, 1, 1}, a), InvalidArgument);
}

TEST(Phi1, Scalars) {
    EXPECT_EQ(phi1(0.0), 1.0);
    EXPECT_NEAR(phi1(-1.0), 1.0 - std::exp(-1.0), 1e-15);
    EXPECT_NEAR(phi1(1e-10), 1.0 + 0.5e-10, 1e-15);
    EXPECT_NEAR(phi1(-1e-8), 1.0 - 0.5e-8, 1e-15);
    EXPECT_NEAR(phi1(-50.0), 1.0 / 50.0, 1e-15);
    EXPECT_NEAR(phi1(2.0), (std::exp(2.0) - 1.0) / 2.0, 1e-14);
}

TEST(Phi1Apply, SmallExamples) {
    const Vector v{1, 2, 3};
    for (auto method : {MatrixFunctionMethod::Dense, MatrixFunctionMethod::Krylov}) {
        const Vector z = phi1_apply(SparseMatrix::from_triplets(3, {}), v, 0.7, 1e-12, method);
        for (int i = 0; i < 3; ++i) EXPECT_NEAR(z[i], v[i], 1e-12);
        const Vector e = phi1_apply(SparseMatrix::identity(3), Vector{1, 1, 1}, 1.0, 1e-12, method);
        for (double x : e) EXPECT_NEAR(x, 0.63212055882855767, 1e-11);
        const Vector d = phi1_apply(SparseMatrix::diagonal(Vector{1, 2}), Vector{1, 1}, 1.0, 1e-12, method);
        EXPECT_NEAR(d[0], 1.0 - std::exp(-1.0), 1e-11);
        EXPECT_NEAR(d[1], (1.0 - std::exp(-2.0)) / 2.0, 1e-11);
    }
}

TEST(Phi1Apply, KrylovMatchesDense) {
    const int n = 800;
    const SparseMatrix a = laplacian_1d(n, 100.0);
    const Vector v = random_vector(n, 12);
    const double tol = 1e-10;
    const SymmetricSpectrum spec(a.to_dense());
    for (double s : {1e-3, 1e-2, 0.1}) {
        KrylovStats stats;
        const Vector k = phi1_apply(a, v, s, tol, MatrixFunctionMethod::Auto, &stats);
        EXPECT_FALSE(stats.dense);
        EXPECT_GT(stats.iterations, 0);
        const Eigen::VectorXd ref = spec.apply([s](double l) { return phi1(-s * l); }, as_eigen(v));
        EXPECT_LE((as_eigen(k) - ref).norm(), 10 * tol * norm2(v)) << s;
        const Vector ek = exp_apply(a, v, s, tol, MatrixFunctionMethod::Krylov);
        const Eigen::VectorXd eref = spec.apply([s](double l) { return std::exp(-s * l); }, as_eigen(v));
        EXPECT_LE((as_eigen(ek) - eref).norm(), 10 * tol * norm2(v)) << s;
    }
}

TEST(Phi1Apply, ExpIdentity) {
    // exp(-sA) v = v - s A φ(-sA) v
    const SparseMatrix a = from_dense(random_spd(20, 9));
    const Vector v = random_vector(20, 10);
    const double s = 0.05;
    const Vector p = phi1_apply(a, v, s, 1e-13);
    const Vector e = exp_apply(a, v, s, 1e-13);
    const Vector ap = a * p;
    for (int i = 0; i < 20; ++i) EXPECT_NEAR(e[i], v[i] - s * ap[i], 1e-12);
}

TEST(HMinusHalf, Examples) {
    const auto b = boundary_unit_matrices(generate_disk_mesh(6));
    const HMinusHalfNorm norm(b.mass, b.stiffness);
    EXPECT_EQ(norm(Vector(6, 0.0)), 0.0);
    EXPECT_NEAR(norm(Vector(6, 2.0)), 2.0 * std::sqrt(6.0), 1e-13);
    EXPECT_NEAR(hminus_half_norm(Vector(6, 2.0), b.mass, b.stiffness), 2.0 * std::sqrt(6.0), 1e-13);
}

TEST(HMinusHalf, NormProperties) {
    const Mesh m = refine(generate_disk_mesh(16), 2);
    const auto b = boundary_unit_matrices(m);
    const HMinusHalfNorm norm(b.mass, b.stiffness);
    const int n = static_cast<int>(b.mass.rows());
    for (unsigned seed = 0; seed < 10; ++seed) {
        const Vector g = random_vector(n, seed), h = random_vector(n, seed + 100);
        const double l2 = std::sqrt(as_eigen(g).dot(b.mass * as_eigen(g)));
        EXPECT_LE(norm(g), l2 * (1 + 1e-12));
        Vector sum(n), scaled(n);
        for (int i = 0; i < n; ++i) {
            sum[i] = g[i] + h[i];
            scaled[i] = -3.0 * g[i];
        }
        EXPECT_LE(norm(sum), norm(g) + norm(h) + 1e-12);
        EXPECT_NEAR(norm(scaled), 3.0 * norm(g), 1e-12);
    }
    // Oscillatory data is much smaller in H^{-1/2} than in L2.
    Vector osc(n);
    for (int i = 0; i < n; ++i) osc[i] = i % 2 ? 1.0 : -1.0;
    const double l2 = std::sqrt(as_eigen(osc).dot(b.mass * as_eigen(osc)));
    EXPECT_LT(norm(osc), 0.2 * l2);
}

TEST(HMinusHalf, RejectsLargeBoundary) {
    const int n = 2001;
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    EXPECT_THROW(hminus_half_norm(Vector(n, 1.0), id, id), UnsupportedSize);
}

TEST(MinEigenvalue, Example) {
    Eigen::MatrixXd a(2, 2);
    a << 2, 1, 1, 2;
    EXPECT_NEAR(min_eigenvalue(a), 1.0, 1e-15);
}
