#include "dynbc/errors.hpp"
#include "dynbc/integrators.hpp"
#include "dynbc/stability_lab.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace dynbc;
using namespace dynbc::testing;

namespace {

BlockSystem scalar_blocks(double a00, double a11, double a01) {
    BlockSystem b;
    b.a00 = Eigen::MatrixXd::Constant(1, 1, a00);
    b.a11 = Eigen::MatrixXd::Constant(1, 1, a11);
    b.a01 = Eigen::MatrixXd::Constant(1, 1, a01);
    return b;
}

// Independent matrix exponential of a symmetric matrix.
Eigen::MatrixXd expm_sym(const Eigen::MatrixXd& a, double s) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    return es.eigenvectors() * (-s * es.eigenvalues()).array().exp().matrix().asDiagonal() *
           es.eigenvectors().transpose();
}

double norm2(const Eigen::MatrixXd& a) {
    return Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues()(0);
}

ProblemSpec lumped_problem(double mu, double kappa, double beta) {
    ProblemSpec p;
    p.name = "lab";
    p.domain = DomainKind::Square;
    p.coeffs = {Coefficient::constant(mu), Coefficient::constant(kappa), Coefficient::constant(beta)};
    p.u0 = [](Point, double) { return 0.0; };
    return p;
}

}  // namespace

TEST(Subflows, Trivial) {
    std::mt19937_64 rng(1);
    const auto b = *random_block_system(4, 3, rng);
    const auto f0 = subflow_matrices(b, 0.0);
    EXPECT_LE((f0.e0 - Eigen::MatrixXd::Identity(7, 7)).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LE((f0.e1 - Eigen::MatrixXd::Identity(7, 7)).cwiseAbs().maxCoeff(), 1e-14);

    BlockSystem d = b;
    d.a01.setZero();
    const auto f = subflow_matrices(d, 0.7);
    Eigen::MatrixXd expected = Eigen::MatrixXd::Identity(7, 7);
    expected.topLeftCorner(4, 4) = expm_sym(d.a00, 0.7);
    EXPECT_LE((f.e0 - expected).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Subflows, ScalarExample) {
    const auto f = subflow_matrices(scalar_blocks(1, 1, 0.5), 1.0);
    EXPECT_NEAR(f.e0(0, 1), -(1 - std::exp(-1.0)) * 0.5, 1e-15);
    EXPECT_NEAR(f.e0(0, 1), -0.31606, 1e-5);
    EXPECT_NEAR(f.e0(0, 0), std::exp(-1.0), 1e-15);
    EXPECT_EQ(f.e0(1, 0), 0.0);
    EXPECT_EQ(f.e0(1, 1), 1.0);
    EXPECT_NEAR(f.e1(1, 0), -(1 - std::exp(-1.0)) * 0.5, 1e-15);
}

TEST(Strang, DecoupledAndSmallStep) {
    std::mt19937_64 rng(2);
    BlockSystem b = *random_block_system(5, 3, rng);
    BlockSystem d = b;
    d.a01.setZero();
    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(8, 8);
    expected.topLeftCorner(5, 5) = expm_sym(d.a00, 0.3);
    expected.bottomRightCorner(3, 3) = expm_sym(d.a11, 0.3);
    EXPECT_LE((strang_propagator(d, 0.3) - expected).cwiseAbs().maxCoeff(), 1e-13);

    const double tau = 1e-6;
    const Eigen::MatrixXd s = strang_propagator(b, tau);
    EXPECT_LE(norm2(s - Eigen::MatrixXd::Identity(8, 8)), 2 * tau * norm2(b.full()));
    // Both propagators are consistent with e^{-τÂ} to first order.
    const Eigen::MatrixXd l = lie_propagator(b, 0.01);
    EXPECT_LE(norm2(l - expm_sym(b.full(), 0.01)), 0.01 * 0.01 * norm2(b.full()) * norm2(b.full()));
}

TEST(Strang, MatchesComponentSplittingIntegrator) {
    const Mesh mesh = generate_square_mesh(4);
    const ProblemSpec p = lumped_problem(1.3, 0.5, 0.8);
    const DiscreteModel base(p, mesh, Lumping::FullLumped);
    const auto& sys = base.system(0.0);
    const BlockSystem blocks = block_system(sys);
    const Vector m = sys.mass_diagonal();
    std::vector<int> order = sys.partition.interior;
    order.insert(order.end(), sys.partition.boundary.begin(), sys.partition.boundary.end());
    const int n = mesh.num_vertices();

    for (const auto& [method, tau] : {std::pair{Method::SplitCompStrang, 0.1}, std::pair{Method::SplitCompLie, 0.5}}) {
        const Eigen::MatrixXd s =
            method == Method::SplitCompStrang ? strang_propagator(blocks, tau) : lie_propagator(blocks, tau);
        for (int j = 0; j < n; ++j) {
            // y = M^{1/2} u in block order; start from e_j.
            Eigen::VectorXd u0 = Eigen::VectorXd::Zero(n);
            u0(order[j]) = 1.0 / std::sqrt(m[order[j]]);
            ProblemSpec pj = p;
            pj.u0 = vertex_field(mesh, u0, [](double) { return 1.0; });
            const DiscreteModel model(pj, mesh, Lumping::FullLumped);
            IntegratorConfig c;
            c.method = method;
            c.tau = tau;
            c.T = tau;
            const Vector u1 = run(model, c).final;
            for (int i = 0; i < n; ++i)
                EXPECT_NEAR(std::sqrt(m[order[i]]) * u1[order[i]], s(i, j), 1e-10) << to_string(method);
        }
    }
}

TEST(StabilityTransform, ScalarL10) {
    const auto t = stability_transform(scalar_blocks(1, 1, 0.5), 1.0);
    const double q = std::exp(-0.5);
    const double expected = std::sqrt((1 - q) / (1 + q)) * 0.5;
    EXPECT_NEAR(t.L10(0, 0), expected, 1e-15);
    EXPECT_NEAR(t.l10_norm, 0.24745, 1e-5);
    // L lower-left block = L₁₀ Â₀₀^{1/2} = L₁₀ here.
    EXPECT_NEAR(t.L(1, 0), expected, 1e-15);
    EXPECT_EQ(t.L(0, 1), 0.0);
    EXPECT_NEAR(t.L(0, 0), 1.0 / std::sqrt(1 - std::exp(-1.0)), 1e-14);
}

TEST(StabilityTransform, InverseAndBlockStructure) {
    std::mt19937_64 rng(3);
    const auto b = *random_block_system(6, 4, rng);
    for (double tau : {1e-3, 0.1, 10.0}) {
        const auto t = stability_transform(b, tau);
        EXPECT_LE((t.L * t.L_inv - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff(), 1e-9 * norm2(t.L));
        EXPECT_EQ(t.L.topRightCorner(6, 4).cwiseAbs().maxCoeff(), 0.0);
    }
    BlockSystem d = b;
    d.a01.setZero();
    const auto td = stability_transform(d, 0.5);
    EXPECT_EQ(td.L.bottomLeftCorner(4, 6).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(td.l10_norm, 0.0);
}

TEST(StabilityTransform, Errors) {
    EXPECT_THROW(stability_transform(scalar_blocks(1, 1, 0.5), 1e-16), DegenerateStepsize);
    EXPECT_THROW(stability_transform(scalar_blocks(-1, 1, 0.0), 1.0), PreconditionError);
    const Mesh big = generate_square_mesh(30);
    const auto sys = assemble(big, {Coefficient::constant(1), Coefficient::constant(1), Coefficient::constant(0)}, 0.0,
                              Lumping::FullLumped);
    EXPECT_THROW(block_system(sys), UnsupportedSize);
    const auto consistent = assemble(generate_square_mesh(3),
                                     {Coefficient::constant(1), Coefficient::constant(1), Coefficient::constant(0)}, 0.0);
    EXPECT_THROW(block_system(consistent), PreconditionError);
}

TEST(VerifyStability, DecoupledNorm) {
    std::mt19937_64 rng(4);
    BlockSystem d = *random_block_system(4, 4, rng);
    d.a01.setZero();
    const double tau = 0.2;
    const auto r = verify_stability(d, tau);
    const double expected = std::max(norm2(expm_sym(d.a00, tau)), norm2(expm_sym(d.a11, tau)));
    EXPECT_NEAR(r.lsl_norm, expected, 1e-12);
    EXPECT_LT(r.lsl_norm, 1.0);
    EXPECT_TRUE(r.pass);
}

TEST(VerifyStability, AssembledSquareSystem) {
    const Mesh mesh = generate_square_mesh(4);
    const auto sys = assemble(mesh, {Coefficient::constant(1), Coefficient::constant(1), Coefficient::constant(0)}, 0.0,
                              Lumping::FullLumped);
    const auto blocks = block_system(sys);
    // Â blocks against an independent M^{-1/2} A M^{-1/2}.
    const Vector m = sys.mass_diagonal();
    Eigen::VectorXd r = as_eigen(m).cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd a_hat = r.asDiagonal() * sys.stiffness.to_dense() * r.asDiagonal();
    const auto& in = sys.partition.interior;
    const auto& bd = sys.partition.boundary;
    for (std::size_t i = 0; i < in.size(); ++i)
        for (std::size_t j = 0; j < bd.size(); ++j) EXPECT_NEAR(blocks.a01(i, j), a_hat(in[i], bd[j]), 1e-13);
    EXPECT_GT(blocks.schur_min_eigenvalue(), 0.0);

    for (double tau : {0.01, 0.1, 1.0, 10.0}) {
        const auto rep = verify_stability(blocks, tau);
        EXPECT_TRUE(rep.pass) << tau;
        EXPECT_LE(rep.lsl_norm, 1 + 1e-10);
        EXPECT_LE(rep.l10_norm, 1 + 1e-10);
        EXPECT_LE(rep.sym_defect, 1e-10);
        EXPECT_LE(rep.coupling_norm, 1 + 1e-10);
        const auto direct = symmetrized_lie_direct(blocks, tau);
        if (direct) {
            EXPECT_NEAR(norm2(*direct), rep.sym_lie_norm, 1e-8 * rep.sym_lie_norm);
        }
    }
}

TEST(VerifyStability, RandomSystems) {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> n0(1, 20), n1(1, 12);
    int tested = 0;
    while (tested < 100) {
        const auto b = random_block_system(n0(rng), n1(rng), rng);
        if (!b) continue;
        ++tested;
        for (double tau : {1e-3, 1e-2, 0.1, 1.0, 10.0}) {
            const auto r = verify_stability(*b, tau);
            EXPECT_LE(r.sym_lie_norm, 1 + 1e-10);
            EXPECT_LE(r.lsl_norm, 1 + 1e-10);
            EXPECT_LE(r.coupling_norm, 1 + 1e-10);
        }
    }
}

TEST(VerifyStability, CsvRows) {
    std::mt19937_64 rng(5);
    const auto b = *random_block_system(3, 2, rng);
    std::vector<StabilityRow> rows{{"sys0", verify_stability(b, 0.1)}, {"sys0", verify_stability(b, 1.0)}};
    std::stringstream ss;
    write_stability_csv(ss, rows);
    std::string line;
    int count = 0;
    while (std::getline(ss, line)) ++count;
    EXPECT_EQ(count, 3);
}
