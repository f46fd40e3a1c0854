#include "dynbc/assembly.hpp"
#include "dynbc/errors.hpp"
#include "dynbc/linalg.hpp"
#include "dynbc/problems.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace dynbc;

namespace {

Mesh unit_triangle() {
    return Mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}, {{0, 1}, {1, 2}, {2, 0}}, DomainKind::External);
}

CoefficientSet constants(double mu, double kappa, double beta) {
    return {Coefficient::constant(mu), Coefficient::constant(kappa), Coefficient::constant(beta)};
}

Vector ones(int n) { return Vector(n, 1.0); }

// Independent boundary oracle: 1D linear FEM summed over the loop.
Eigen::MatrixXd boundary_oracle(const Mesh& m, double weight, bool stiffness) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m.num_vertices(), m.num_vertices());
    for (const auto& e : m.boundary_edges()) {
        const double len = norm(m.vertices()[e[1]] - m.vertices()[e[0]]);
        Eigen::Matrix2d el;
        if (stiffness) el << 1, -1, -1, 1;
        else el << 2, 1, 1, 2;
        el *= stiffness ? weight / len : weight * len / 6.0;
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) out(e[a], e[b]) += el(a, b);
    }
    return out;
}

}  // namespace

TEST(Assembly, UnitTriangleBulkStiffness) {
    const auto s = assemble(unit_triangle(), constants(1, 0, 0), 0.0);
    Eigen::Matrix3d expected;
    expected << 1, -0.5, -0.5, -0.5, 0.5, 0, -0.5, 0, 0.5;
    EXPECT_LE((s.stiff_bulk.to_dense() - expected).cwiseAbs().maxCoeff(), 1e-15);
    // Bulk mass of a triangle: area/12 * [[2,1,1],[1,2,1],[1,1,2]].
    Eigen::Matrix3d mass;
    mass << 2, 1, 1, 1, 2, 1, 1, 1, 2;
    mass *= 0.5 / 12.0;
    EXPECT_LE((s.mass_bulk.to_dense() - mass).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Assembly, BoundaryEdgeMatrices) {
    const Mesh m = unit_triangle();
    const double mu = 2.5, kappa = 0.7, beta = 1.5;
    const auto s = assemble(m, constants(mu, kappa, beta), 0.0);
    EXPECT_LE((s.mass_surf.to_dense() - boundary_oracle(m, mu, false)).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LE((s.react_surf.to_dense() - boundary_oracle(m, kappa, false)).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LE((s.stiff_surf.to_dense() - boundary_oracle(m, beta, true)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Assembly, SpatiallyVaryingCoefficientIsIntegrated) {
    // μ(x) = 1 + x is linear, so 2-point Gauss integrates μ φ_i φ_j exactly.
    const Mesh m = generate_square_mesh(3);
    CoefficientSet c = constants(1, 0, 0);
    c.mu = Coefficient::varying([](Point p, double) { return 1.0 + p.x; }, true, false);
    const auto s = assemble(m, c, 0.0);
    // 1ᵀ M_surf 1 = ∫_Γ (1 + x) = 4 + (1/2 + 1/2 + 1 + 0) = 6.
    EXPECT_NEAR(s.mass_surf.bilinear(ones(16), ones(16)), 6.0, 1e-13);
    // ∫_Γ (1+x) x = bottom 5/6, top 5/6, right 2, left 0.
    Vector x(16);
    for (int i = 0; i < 16; ++i) x[i] = m.vertices()[i].x;
    EXPECT_NEAR(s.mass_surf.bilinear(ones(16), x), 5.0 / 6.0 + 5.0 / 6.0 + 2.0, 1e-13);
}

TEST(Assembly, ConstantTestSquare) {
    const Mesh m = generate_square_mesh(2);
    const auto s = assemble(m, constants(1, 1, 0), 0.0);
    const Vector e = ones(m.num_vertices());
    EXPECT_NEAR(s.mass.bilinear(e, e), 5.0, 1e-14);
    EXPECT_NEAR(s.mass_bulk.bilinear(e, e), 1.0, 1e-14);
}

TEST(Assembly, ConstantTestDisk) {
    const Mesh m = refine(generate_disk_mesh(16), 2);
    const double mu = 3.0;
    const auto s = assemble(m, constants(mu, 1, 2), 0.0);
    const Vector e = ones(m.num_vertices());
    double perimeter = 0.0;
    for (double l : boundary_arclengths(m)) perimeter += l;
    EXPECT_NEAR(s.mass.bilinear(e, e), m.area() + mu * perimeter, 1e-12);
    EXPECT_LE(norm_inf(s.stiff_bulk * e), 1e-13 * s.stiff_bulk.max_abs());
    EXPECT_LE(norm_inf(s.stiff_surf * e), 1e-13 * s.stiff_surf.max_abs());
}

TEST(Lumping, UnitTriangle) {
    const double mu = 2.0;
    const auto s = assemble(unit_triangle(), constants(mu, 0, 1), 0.0, Lumping::FullLumped);
    ASSERT_TRUE(s.mass_bulk.is_diagonal());
    for (double d : s.mass_bulk.diagonal_entries()) EXPECT_NEAR(d, 1.0 / 6.0, 1e-15);
    // Surface: μℓ/2 per endpoint; vertex 0 touches edges of length 1 and 1,
    // vertices 1 and 2 touch one unit edge and the √2 hypotenuse.
    const Vector ms = s.mass_surf.diagonal_entries();
    EXPECT_NEAR(ms[0], mu * (0.5 + 0.5), 1e-15);
    EXPECT_NEAR(ms[1], mu * (0.5 + std::sqrt(2.0) / 2.0), 1e-15);
    EXPECT_NEAR(ms[2], mu * (0.5 + std::sqrt(2.0) / 2.0), 1e-15);
}

TEST(Lumping, RowSumsPreserved) {
    for (const Mesh& m : {generate_square_mesh(4), refine(generate_disk_mesh(8), 1)}) {
        const CoefficientSet c = constants(1.7, 0.3, 0.9);
        const auto consistent = assemble(m, c, 0.0);
        for (Lumping mode : {Lumping::FullLumped, Lumping::BulkOnlyLumped}) {
            const auto l = lump(consistent, m, c, mode);
            const Vector a = consistent.mass.row_sums(), b = l.mass.row_sums();
            for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-14);
            EXPECT_TRUE(l.mass_bulk.is_diagonal());
            EXPECT_EQ(l.mass_surf.is_diagonal(), mode == Lumping::FullLumped);
            EXPECT_EQ(l.stiffness.to_dense(), consistent.stiffness.to_dense());
        }
        const auto full = lump(consistent, m, c, Lumping::FullLumped);
        for (double d : full.mass.diagonal_entries()) EXPECT_GT(d, 0.0);
        EXPECT_NO_THROW(full.mass_diagonal());
        EXPECT_THROW(consistent.mass_diagonal(), PreconditionError);
    }
}

TEST(Load, Examples) {
    const Mesh m = generate_square_mesh(4);
    const CoefficientSet c = constants(1, 0, 0);
    const ScalarField zero = [](Point, double) { return 0.0; };
    const ScalarField one = [](Point, double) { return 1.0; };
    for (double v : assemble_load(m, c, zero, zero, 0.0)) EXPECT_EQ(v, 0.0);

    const Vector b = assemble_load(m, c, one, zero, 0.0);
    Vector support(m.num_vertices(), 0.0);
    for (int t = 0; t < m.num_triangles(); ++t)
        for (int v : m.triangles()[t]) support[v] += m.triangle_area(t);
    for (int i = 0; i < m.num_vertices(); ++i) EXPECT_NEAR(b[i], support[i] / 3.0, 1e-15);

    const Vector s = assemble_load(m, c, zero, one, 0.0);
    double sum = 0.0;
    for (double v : s) sum += v;
    EXPECT_NEAR(sum, 4.0, 1e-14);
}

TEST(Load, QuadratureDegreeTwo) {
    // f = x² is integrated exactly against hat functions by the edge-midpoint rule.
    const Mesh m = generate_square_mesh(3);
    const CoefficientSet c = constants(1, 0, 0);
    const Vector b = assemble_load(m, c, [](Point p, double) { return p.x; }, nullptr, 0.0);
    Vector x(m.num_vertices());
    for (int i = 0; i < m.num_vertices(); ++i) x[i] = m.vertices()[i].x;
    // Σ_i b_i x_i = ∫ x · x = 1/3 for the linear field x.
    EXPECT_NEAR(dot(b, x), 1.0 / 3.0, 1e-14);
}

TEST(Nonlinearity, Examples) {
    const Mesh m = generate_square_mesh(1);
    const CoefficientSet c = constants(1, 0, 0);
    const Vector u = ones(4);
    const auto consistent = assemble(m, c, 0.0);
    const PointwiseMap zero = [](double) { return 0.0; };
    for (double v : evaluate_nonlinearity(m, c, consistent, u, zero, zero)) EXPECT_EQ(v, 0.0);

    const PointwiseMap sq = [](double v) { return v * v; };
    double sum = 0.0;
    for (double v : evaluate_nonlinearity(m, c, consistent, u, sq, sq)) sum += v;
    EXPECT_NEAR(sum, 5.0, 1e-14);

    const Mesh m4 = generate_square_mesh(4);
    const CoefficientSet c4 = constants(1.3, 0, 0);
    const auto lumped = assemble(m4, c4, 0.0, Lumping::FullLumped);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dist(-1, 1);
    Vector r(m4.num_vertices());
    for (double& v : r) v = dist(rng);
    const PointwiseMap id = [](double v) { return v; };
    const Vector f = evaluate_nonlinearity(m4, c4, lumped, r, id, id);
    const Vector mu = lumped.mass * r;
    for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(f[i], mu[i], 1e-15);
}

TEST(Nonlinearity, JacobianMatchesFiniteDifferences) {
    const Mesh m = generate_square_mesh(3);
    const CoefficientSet c = constants(1.2, 0, 0);
    const PointwiseMap f = [](double v) { return v - v * v * v; };
    const PointwiseMap df = [](double v) { return 1.0 - 3.0 * v * v; };
    for (Lumping mode : {Lumping::Consistent, Lumping::FullLumped, Lumping::BulkOnlyLumped}) {
        const auto s = assemble(m, c, 0.0, mode);
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> dist(-1, 1);
        Vector u(m.num_vertices());
        for (double& v : u) v = dist(rng);
        const Eigen::MatrixXd j = nonlinearity_jacobian(m, c, s, u, df, df).to_dense();
        const double eps = 1e-6;
        for (int col = 0; col < m.num_vertices(); ++col) {
            Vector up = u, um = u;
            up[col] += eps;
            um[col] -= eps;
            const Vector fp = evaluate_nonlinearity(m, c, s, up, f, f);
            const Vector fm = evaluate_nonlinearity(m, c, s, um, f, f);
            for (int row = 0; row < m.num_vertices(); ++row)
                EXPECT_NEAR(j(row, col), (fp[row] - fm[row]) / (2 * eps), 1e-8);
        }
    }
}

TEST(Assembly, CoefficientViolations) {
    const Mesh m = generate_square_mesh(2);
    EXPECT_THROW(assemble(m, constants(0.0, 1, 0), 0.0), CoefficientViolation);
    EXPECT_THROW(assemble(m, constants(1.0, 1, -1), 0.0), CoefficientViolation);
    CoefficientSet mixed = constants(1, 0, 0);
    mixed.beta = Coefficient::varying([](Point p, double) { return p.x > 0.5 ? 1.0 : 0.0; }, true, false);
    EXPECT_THROW(assemble(m, mixed, 0.0), CoefficientViolation);
    // κ ≤ 0 is allowed.
    EXPECT_NO_THROW(assemble(m, constants(1, -2, 1), 0.0));
}

TEST(Assembly, SurfaceTermsVanishAtInteriorDofs) {
    const Mesh m = generate_square_mesh(4);
    const auto s = assemble(m, constants(1, 1, 1), 0.0);
    for (int i : m.interior_vertices()) {
        for (const SparseMatrix* a : {&s.mass_surf, &s.stiff_surf, &s.react_surf}) {
            for (int j = 0; j < m.num_vertices(); ++j) {
                EXPECT_EQ(a->at(i, j), 0.0);
                EXPECT_EQ(a->at(j, i), 0.0);
            }
        }
    }
}

TEST(Assembly, SymmetryAndDefiniteness) {
    for (const Mesh& m : {generate_square_mesh(6), refine(generate_disk_mesh(16), 1)}) {
        const auto s = assemble(m, constants(1, 1, 1), 0.0);
        EXPECT_EQ(s.mass.asymmetry(), 0.0);
        EXPECT_LE(s.stiffness.asymmetry(), 1e-14 * s.stiffness.max_abs());
        EXPECT_GT(min_eigenvalue(s.mass.to_dense()), 0.0);
        EXPECT_GT(min_eigenvalue(s.stiffness.to_dense()), 0.0);
        EXPECT_GT(min_eigenvalue(s.stiff_bulk.to_dense()), -1e-12);
        EXPECT_GT(min_eigenvalue(s.stiff_surf.to_dense()), -1e-12);
    }
}

TEST(Assembly, PartitionAndSplit) {
    const Mesh m = generate_square_mesh(3);
    const auto s = assemble(m, constants(1, 2, 3), 0.0);
    EXPECT_EQ(s.partition.interior, m.interior_vertices());
    EXPECT_EQ(s.partition.boundary, m.boundary_vertices());
    EXPECT_LE((s.stiffness.to_dense() - s.stiffness_bulk.to_dense() - s.stiffness_surf.to_dense()).cwiseAbs().maxCoeff(),
              1e-14);
    EXPECT_LE((s.mass.to_dense() - s.mass_bulk.to_dense() - s.mass_surf.to_dense()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Assembly, TimeDependentCoefficients) {
    const Mesh m = generate_square_mesh(2);
    CoefficientSet c = constants(1, 0, 0);
    c.mu = Coefficient::varying([](Point, double t) { return 2.0 + t; }, false, true);
    const Vector e = ones(9);
    EXPECT_NEAR(assemble(m, c, 0.0).mass_surf.bilinear(e, e), 8.0, 1e-14);
    EXPECT_NEAR(assemble(m, c, 1.0).mass_surf.bilinear(e, e), 12.0, 1e-14);
}

TEST(Assembly, CoordinateExport) {
    const auto s = assemble(generate_square_mesh(1), constants(1, 0, 0), 0.0);
    std::stringstream ss;
    s.mass.write_coordinate(ss);
    int i, j, pi = -1, pj = -1, count = 0;
    double v;
    while (ss >> i >> j >> v) {
        EXPECT_TRUE(i > pi || (i == pi && j > pj));
        EXPECT_EQ(v, s.mass.at(i, j));
        pi = i;
        pj = j;
        ++count;
    }
    EXPECT_EQ(count, static_cast<int>(s.mass.nonzeros()));
}

TEST(Assembly, BoundaryUnitMatrices) {
    const Mesh m = generate_disk_mesh(6);
    const auto b = boundary_unit_matrices(m);
    ASSERT_EQ(b.mass.rows(), 6);
    // Hexagon with unit sides: mass diagonal 2/3, neighbors 1/6; stiffness diagonal 2.
    for (int i = 0; i < 6; ++i) {
        EXPECT_NEAR(b.mass(i, i), 2.0 / 3.0, 1e-14);
        EXPECT_NEAR(b.mass(i, (i + 1) % 6), 1.0 / 6.0, 1e-14);
        EXPECT_NEAR(b.stiffness(i, i), 2.0, 1e-14);
        EXPECT_NEAR(b.stiffness(i, (i + 1) % 6), -1.0, 1e-14);
    }
}

TEST(Assembly, InverseEstimateBounded) {
    // max over random v of |v|_A / (h^{-1} |v|_M) stays bounded under refinement.
    std::vector<double> ratios;
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal;
    for (int n : {4, 8, 16}) {
        const Mesh m = generate_square_mesh(n);
        const auto s = assemble(m, constants(1, 1, 1), 0.0);
        double worst = 0.0;
        for (int k = 0; k < 20; ++k) {
            Vector v(m.num_vertices());
            for (double& x : v) x = normal(rng);
            worst = std::max(worst, std::sqrt(s.stiffness.bilinear(v, v)) * m.h() / std::sqrt(s.mass.bilinear(v, v)));
        }
        ratios.push_back(worst);
    }
    for (double r : ratios) EXPECT_LT(r, 2.0 * ratios.front());
}
