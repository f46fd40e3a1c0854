#pragma once

#include "dynbc/config.hpp"
#include "dynbc/integrators.hpp"
#include "dynbc/ritz_error.hpp"
#include "dynbc/stability_lab.hpp"

#include <algorithm>
#include <functional>
#include <future>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dynbc {

/// Ladder meshes. Square: n subdivisions per side. Disk: 4n boundary
/// vertices; n = 4·2^j is built by refining the 16-gon disk j times so the
/// ladder is nested, other n use a fresh disk mesh.
Mesh make_mesh(DomainKind domain, int level);

/// Worker count: DYNBC_THREADS if set (≥ 1), else the hardware concurrency.
int thread_limit();

/// Runs fn(0..n-1) on at most `threads` threads; results come back in index
/// order. The first exception (by index) is rethrown.
template <class T>
std::vector<T> parallel_map(int n, int threads, const std::function<T(int)>& fn);

/// Drops sources, nonlinearity and exact solution; optionally zeroes u0.
ProblemSpec homogeneous(ProblemSpec problem, bool zero_initial);

enum class StepRule { HSquared, Proportional, Fixed };
StepRule parse_step_rule(const std::string& name);

/// Spatial ladder: errors against the exact solution at T on each level.
/// τ = factor·h² (HSquared), factor·h (Proportional) or integrator.tau
/// (Fixed), shrunk so that T/τ is an integer.
struct SpatialStudy {
    ProblemSpec problem;
    std::vector<int> levels;
    Lumping lumping = Lumping::Consistent;
    LoadMode load = LoadMode::Pde;
    IntegratorConfig integrator;
    StepRule rule = StepRule::HSquared;
    double tau_factor = 0.25;
};

ErrorTable spatial_study(const SpatialStudy& study, int threads = 1);

/// Temporal ladder on one mesh: errors against a fine-step reference run.
/// Without an explicit reference method, BDF runs are compared with BDF of
/// the same order and all other methods with BDF5.
struct TemporalStudy {
    ProblemSpec problem;
    int level = 32;
    Lumping lumping = Lumping::Consistent;
    LoadMode load = LoadMode::Pde;
    IntegratorConfig integrator;
    std::vector<double> taus;
    double reference_tau = 1.0 / 2560.0;
    std::optional<Method> reference_method;
    std::optional<int> reference_k;
};

IntegratorConfig reference_config(const TemporalStudy& study);
/// Final state of the reference run.
Vector temporal_reference(const TemporalStudy& study, const DiscreteModel& model);
/// With `reference` null the reference is computed first.
ErrorTable temporal_study(const TemporalStudy& study, const Vector* reference = nullptr, int threads = 1);

struct RitzStudyResult {
    ErrorTable table;
    double max_residual = 0.0;
};

/// Error of the Ritz projection of the exact solution at time t per level.
RitzStudyResult ritz_study(const ProblemSpec& problem, const std::vector<int>& levels, double t,
                           int threads = 1);

/// Force-splitting M-norm record for one (mesh, τ, method).
struct MNormRow {
    std::string system;
    Method method = Method::SplitForceStrang;
    double tau = 0.0;
    int steps = 0;
    /// max over steps of |uⁿ|_M / |uⁿ⁻¹|_M
    double max_ratio = 0.0;
    bool pass = false;
};

struct StabilitySweep {
    /// Coefficients of this problem are used on the sweep meshes.
    ProblemSpec problem;
    std::vector<int> levels{2, 4, 8};
    std::vector<double> taus{0.01, 0.1, 1.0, 10.0};
    int random_systems = 0;
    unsigned long long seed = 1;
    std::vector<int> mnorm_levels{2, 4, 8};
    int mnorm_steps = 10;
};

struct StabilitySweepResult {
    std::vector<StabilityRow> rows;
    std::vector<MNormRow> mnorm;
    bool pass = true;
};

/// Stability-bound check on every (mesh, τ) with full mass lumping, on random block
/// systems, and the force-splitting M-norm check with f = 0.
StabilitySweepResult stability_sweep(const StabilitySweep& sweep, int threads = 1);

/// |uⁿ|_M monitoring for force splitting without sources.
MNormRow force_mnorm_check(const ProblemSpec& problem, const Mesh& mesh, Method method, double tau, int steps,
                           const std::string& label);

void write_mnorm_csv(std::ostream& os, const std::vector<MNormRow>& rows);

// ---------------------------------------------------------------- config glue

ProblemSpec problem_from_config(const Config& cfg);
IntegratorConfig integrator_from_config(const Config& cfg, double T);

/// EOC gate read from [study]: min_eoc.<norm>, max_eoc.<norm>, and for BDF
/// temporal studies order_tolerance (|EOC - k| bound). The last `check_last`
/// rates of each gated column are tested.
struct EocGate {
    std::vector<std::pair<NormKind, double>> min_eoc;
    std::vector<std::pair<NormKind, double>> max_eoc;
    std::optional<double> order_tolerance;
    NormKind order_norm = NormKind::HCombined;
    int check_last = 1;
};

EocGate gate_from_config(const Config& cfg);
NormKind parse_norm(const std::string& name);

/// Failure messages (empty when the table passes). `order` is the expected
/// temporal order, used with order_tolerance.
std::vector<std::string> check_gate(const ErrorTable& table, const EocGate& gate, std::optional<int> order);

/// Outcome of a command: exit status 0 ok, 3 threshold failure.
struct CommandResult {
    int status = 0;
    std::vector<std::string> files;
    std::vector<std::string> failures;
};

/// Runs one (mesh, integrator) combination and writes `solution_<t>.vtk`
/// snapshots and `report.csv` into [output] dir.
CommandResult cmd_solve(const Config& cfg, std::ostream& log);
CommandResult cmd_convergence(const Config& cfg, std::ostream& log);
CommandResult cmd_stability(const Config& cfg, std::ostream& log);
void cmd_list_problems(std::ostream& os);

template <class T>
std::vector<T> parallel_map(int n, int threads, const std::function<T(int)>& fn) {
    std::vector<T> out;
    out.reserve(n);
    if (threads <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) out.push_back(fn(i));
        return out;
    }
    for (int start = 0; start < n; start += threads) {
        std::vector<std::future<T>> batch;
        for (int i = start; i < std::min(n, start + threads); ++i)
            batch.push_back(std::async(std::launch::async, fn, i));
        for (auto& f : batch) out.push_back(f.get());
    }
    return out;
}

}  // namespace dynbc
