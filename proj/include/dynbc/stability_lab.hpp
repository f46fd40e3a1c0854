#pragma once

#include "dynbc/assembly.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace dynbc {

/// Dense limit for every computation in this module.
inline constexpr int kStabilityLabLimit = 600;

/// Â = M^{-1/2} A M^{-1/2} partitioned into interior (0) and boundary (1) blocks.
struct BlockSystem {
    Eigen::MatrixXd a00;
    Eigen::MatrixXd a11;
    Eigen::MatrixXd a01;

    Eigen::MatrixXd a10() const { return a01.transpose(); }
    int n0() const { return static_cast<int>(a00.rows()); }
    int n1() const { return static_cast<int>(a11.rows()); }
    int size() const { return n0() + n1(); }
    Eigen::MatrixXd full() const;
    /// Smallest eigenvalue of Â₀₀ - Â₀₁Â₁₁⁻¹Â₁₀.
    double schur_min_eigenvalue() const;
};

/// Blocks of a system with diagonal mass (PreconditionError otherwise);
/// UnsupportedSize above kStabilityLabLimit.
BlockSystem block_system(const AssembledSystem& system);

/// Â = GᵀG + εI with G standard normal, split into n0 + n1. Returns nothing
/// when the Schur complement is not positive definite.
std::optional<BlockSystem> random_block_system(int n0, int n1, std::mt19937_64& rng, double eps = 1e-3);

struct SubflowMatrices {
    Eigen::MatrixXd e0;
    Eigen::MatrixXd e1;
};

/// E₀(s) = [[e^{-sÂ₀₀}, -(I-e^{-sÂ₀₀})Â₀₀⁻¹Â₀₁], [0, I]],
/// E₁(s) = [[I, 0], [-(I-e^{-sÂ₁₁})Â₁₁⁻¹Â₁₀, e^{-sÂ₁₁}]].
SubflowMatrices subflow_matrices(const BlockSystem& blocks, double s);

/// E₁(τ/2) E₀(τ) E₁(τ/2)
Eigen::MatrixXd strang_propagator(const BlockSystem& blocks, double tau);
/// E₀(τ) E₁(τ)
Eigen::MatrixXd lie_propagator(const BlockSystem& blocks, double tau);

struct StabilityTransform {
    Eigen::MatrixXd L;      ///< block lower triangular
    Eigen::MatrixXd L_inv;  ///< block inverse of L
    /// (I-e^{-τÂ₁₁/2})^{1/2}(I+e^{-τÂ₁₁/2})^{-1/2} Â₁₁^{-1/2}Â₁₀Â₀₀^{-1/2};
    /// the lower-left block of L is L₁₀ Â₀₀^{1/2}.
    Eigen::MatrixXd L10;
    double l10_norm = 0.0;
};

/// Throws DegenerateStepsize when τ λ_min(Â_ii) < 1e-14 and PreconditionError
/// when Â₀₀ or Â₁₁ is not positive definite.
StabilityTransform stability_transform(const BlockSystem& blocks, double tau);

/// T = blockdiag((I-e^{-τÂ₀₀})^{1/2}Â₀₀^{-1/2}, e^{τÂ₁₁/2}(I-e^{-τÂ₁₁})^{1/2}Â₁₁^{-1/2});
/// returns T⁻¹ S_Lie T, or nothing when e^{τÂ₁₁/2} overflows.
std::optional<Eigen::MatrixXd> symmetrized_lie_direct(const BlockSystem& blocks, double tau);

struct StabilityReport {
    double tau = 0.0;
    double lsl_norm = 0.0;       ///< ‖L S_Strang L⁻¹‖₂
    double sym_lie_norm = 0.0;   ///< ‖S̃‖₂
    double sym_defect = 0.0;     ///< ‖S̃ - S̃ᵀ‖₂ / ‖S̃‖₂
    double l10_norm = 0.0;       ///< ‖L₁₀‖₂
    double coupling_norm = 0.0;  ///< ‖Â₀₀^{-1/2}Â₀₁Â₁₁^{-1/2}‖₂
    bool pass = false;           ///< lsl_norm ≤ 1 + 1e-10 and l10_norm ≤ 1 + 1e-10
};

/// S̃ is formed as L S_Strang L⁻¹, which equals T⁻¹ S_Lie T.
StabilityReport verify_stability(const BlockSystem& blocks, double tau);

struct StabilityRow {
    std::string system;
    StabilityReport report;
};

/// Header plus one row per (system, τ), 17 significant digits.
void write_stability_csv(std::ostream& os, const std::vector<StabilityRow>& rows);

}  // namespace dynbc
