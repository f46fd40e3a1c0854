#include "dynbc/stability_lab.hpp"

#include "dynbc/errors.hpp"
#include "dynbc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace dynbc {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Eig {
    VectorXd lambda;
    MatrixXd q;

    template <class F>
    MatrixXd apply(F&& f) const {
        VectorXd d(lambda.size());
        for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = f(lambda(i));
        return q * d.asDiagonal() * q.transpose();
    }
};

Eig eig(const MatrixXd& a) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (a + a.transpose()));
    if (es.info() != Eigen::Success) throw SolverFailure("symmetric eigensolver failed", 0.0);
    return {es.eigenvalues(), es.eigenvectors()};
}

double one_minus_exp(double x) { return -std::expm1(-x); }

double spectral_norm(const MatrixXd& a) {
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<MatrixXd> svd(a);
    return svd.singularValues()(0);
}

void require_spd(const Eig& e, const char* which) {
    if (e.lambda.size() > 0 && !(e.lambda(0) > 0.0))
        throw PreconditionError(std::string(which) + " is not positive definite (lambda_min = " +
                                std::to_string(e.lambda(0)) + ")");
}

void check_size(const BlockSystem& b) {
    if (b.size() > kStabilityLabLimit)
        throw UnsupportedSize("stability lab is limited to " + std::to_string(kStabilityLabLimit) + " DOFs, got " +
                              std::to_string(b.size()));
    if (b.a01.rows() != b.n0() || b.a01.cols() != b.n1())
        throw InvalidArgument("block system: coupling block has the wrong shape");
}

}  // namespace

MatrixXd BlockSystem::full() const {
    MatrixXd a(size(), size());
    a.topLeftCorner(n0(), n0()) = a00;
    a.topRightCorner(n0(), n1()) = a01;
    a.bottomLeftCorner(n1(), n0()) = a10();
    a.bottomRightCorner(n1(), n1()) = a11;
    return a;
}

double BlockSystem::schur_min_eigenvalue() const {
    const MatrixXd s = a00 - a01 * a11.llt().solve(a10());
    return eig(s).lambda(0);
}

BlockSystem block_system(const AssembledSystem& system) {
    if (system.size() > kStabilityLabLimit)
        throw UnsupportedSize("stability lab is limited to " + std::to_string(kStabilityLabLimit) + " DOFs");
    const Vector m = system.mass_diagonal();
    const SparseMatrix a_hat = sym_scale(m, system.stiffness);
    const auto& in = system.partition.interior;
    const auto& bd = system.partition.boundary;
    return {a_hat.dense_block(in, in), a_hat.dense_block(bd, bd), a_hat.dense_block(in, bd)};
}

std::optional<BlockSystem> random_block_system(int n0, int n1, std::mt19937_64& rng, double eps) {
    if (n0 < 1 || n1 < 1) throw InvalidArgument("random block system needs positive block sizes");
    const int n = n0 + n1;
    std::normal_distribution<double> normal;
    MatrixXd g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = normal(rng);
    const MatrixXd a = g.transpose() * g + eps * MatrixXd::Identity(n, n);
    // Random partition: a random permutation, first n0 indices interior.
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    BlockSystem b{MatrixXd(n0, n0), MatrixXd(n1, n1), MatrixXd(n0, n1)};
    for (int i = 0; i < n0; ++i) {
        for (int j = 0; j < n0; ++j) b.a00(i, j) = a(perm[i], perm[j]);
        for (int j = 0; j < n1; ++j) b.a01(i, j) = a(perm[i], perm[n0 + j]);
    }
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n1; ++j) b.a11(i, j) = a(perm[n0 + i], perm[n0 + j]);
    if (!(b.schur_min_eigenvalue() > 0.0)) return std::nullopt;
    return b;
}

SubflowMatrices subflow_matrices(const BlockSystem& blocks, double s) {
    check_size(blocks);
    const int n0 = blocks.n0(), n1 = blocks.n1(), n = blocks.size();
    const Eig e0 = eig(blocks.a00), e1 = eig(blocks.a11);
    require_spd(e0, "A00");
    require_spd(e1, "A11");
    // (1 - e^{-sλ})/λ; λ > 0 on both blocks.
    const auto phi = [s](double l) { return one_minus_exp(s * l) / l; };
    SubflowMatrices out{MatrixXd::Identity(n, n), MatrixXd::Identity(n, n)};
    out.e0.topLeftCorner(n0, n0) = e0.apply([s](double l) { return std::exp(-s * l); });
    out.e0.topRightCorner(n0, n1) = -e0.apply(phi) * blocks.a01;
    out.e1.bottomRightCorner(n1, n1) = e1.apply([s](double l) { return std::exp(-s * l); });
    out.e1.bottomLeftCorner(n1, n0) = -e1.apply(phi) * blocks.a10();
    return out;
}

MatrixXd strang_propagator(const BlockSystem& blocks, double tau) {
    const auto half = subflow_matrices(blocks, 0.5 * tau);
    const auto full = subflow_matrices(blocks, tau);
    return half.e1 * full.e0 * half.e1;
}

MatrixXd lie_propagator(const BlockSystem& blocks, double tau) {
    const auto f = subflow_matrices(blocks, tau);
    return f.e0 * f.e1;
}

StabilityTransform stability_transform(const BlockSystem& blocks, double tau) {
    check_size(blocks);
    if (!(tau > 0.0)) throw InvalidArgument("stability_transform: tau must be positive");
    const Eig e0 = eig(blocks.a00), e1 = eig(blocks.a11);
    require_spd(e0, "A00");
    require_spd(e1, "A11");
    if (tau * std::min(e0.lambda(0), e1.lambda(0)) < 1e-14)
        throw DegenerateStepsize("I - exp(-tau A) is numerically singular for tau = " + std::to_string(tau));
    const int n0 = blocks.n0(), n1 = blocks.n1(), n = blocks.size();

    const auto d = [tau](double l) { return std::sqrt(l / one_minus_exp(tau * l)); };
    const auto d_inv = [tau](double l) { return std::sqrt(one_minus_exp(tau * l) / l); };
    const MatrixXd d0 = e0.apply(d), d1 = e1.apply(d);
    const MatrixXd d0_inv = e0.apply(d_inv), d1_inv = e1.apply(d_inv);
    const MatrixXd a00_mhalf = e0.apply([](double l) { return 1.0 / std::sqrt(l); });
    const MatrixXd a00_half = e0.apply([](double l) { return std::sqrt(l); });
    const MatrixXd ratio = e1.apply([tau](double l) {
        const double q = std::exp(-0.5 * tau * l);
        return std::sqrt(one_minus_exp(0.5 * tau * l) / (1.0 + q)) / std::sqrt(l);
    });

    StabilityTransform out;
    out.L10 = ratio * blocks.a10() * a00_mhalf;
    const MatrixXd lower = out.L10 * a00_half;
    out.L = MatrixXd::Zero(n, n);
    out.L.topLeftCorner(n0, n0) = d0;
    out.L.bottomRightCorner(n1, n1) = d1;
    out.L.bottomLeftCorner(n1, n0) = lower;
    out.L_inv = MatrixXd::Zero(n, n);
    out.L_inv.topLeftCorner(n0, n0) = d0_inv;
    out.L_inv.bottomRightCorner(n1, n1) = d1_inv;
    out.L_inv.bottomLeftCorner(n1, n0) = -d1_inv * lower * d0_inv;
    out.l10_norm = spectral_norm(out.L10);
    return out;
}

std::optional<MatrixXd> symmetrized_lie_direct(const BlockSystem& blocks, double tau) {
    const Eig e0 = eig(blocks.a00), e1 = eig(blocks.a11);
    require_spd(e0, "A00");
    require_spd(e1, "A11");
    if (0.5 * tau * e1.lambda(e1.lambda.size() - 1) > 300.0) return std::nullopt;
    const int n0 = blocks.n0(), n1 = blocks.n1(), n = blocks.size();
    MatrixXd t = MatrixXd::Zero(n, n), t_inv = MatrixXd::Zero(n, n);
    t.topLeftCorner(n0, n0) = e0.apply([tau](double l) { return std::sqrt(one_minus_exp(tau * l) / l); });
    t_inv.topLeftCorner(n0, n0) = e0.apply([tau](double l) { return std::sqrt(l / one_minus_exp(tau * l)); });
    t.bottomRightCorner(n1, n1) = e1.apply(
        [tau](double l) { return std::exp(0.5 * tau * l) * std::sqrt(one_minus_exp(tau * l) / l); });
    t_inv.bottomRightCorner(n1, n1) = e1.apply(
        [tau](double l) { return std::exp(-0.5 * tau * l) * std::sqrt(l / one_minus_exp(tau * l)); });
    return MatrixXd(t_inv * lie_propagator(blocks, tau) * t);
}

StabilityReport verify_stability(const BlockSystem& blocks, double tau) {
    const StabilityTransform tr = stability_transform(blocks, tau);
    const MatrixXd s_tilde = tr.L * strang_propagator(blocks, tau) * tr.L_inv;
    StabilityReport r;
    r.tau = tau;
    r.lsl_norm = spectral_norm(s_tilde);
    r.sym_lie_norm = r.lsl_norm;
    r.sym_defect = r.lsl_norm > 0.0 ? spectral_norm(s_tilde - s_tilde.transpose()) / r.lsl_norm : 0.0;
    r.l10_norm = tr.l10_norm;
    const Eig e0 = eig(blocks.a00), e1 = eig(blocks.a11);
    r.coupling_norm = spectral_norm(e0.apply([](double l) { return 1.0 / std::sqrt(l); }) * blocks.a01 *
                                    e1.apply([](double l) { return 1.0 / std::sqrt(l); }));
    r.pass = r.lsl_norm <= 1.0 + 1e-10 && r.l10_norm <= 1.0 + 1e-10;
    return r;
}

void write_stability_csv(std::ostream& os, const std::vector<StabilityRow>& rows) {
    os << "system,tau,l10_norm,sym_lie_norm,lsl_norm,sym_defect,coupling_norm,pass\n";
    const auto old = os.precision(17);
    for (const auto& row : rows) {
        const auto& r = row.report;
        os << row.system << ',' << r.tau << ',' << r.l10_norm << ',' << r.sym_lie_norm << ',' << r.lsl_norm << ','
           << r.sym_defect << ',' << r.coupling_norm << ',' << (r.pass ? 1 : 0) << '\n';
    }
    os.precision(old);
}

}  // namespace dynbc
