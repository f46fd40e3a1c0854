#include "dynbc/integrators.hpp"

#include "dynbc/errors.hpp"
#include "dynbc/ritz_error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace dynbc {

std::string to_string(Method m) {
    switch (m) {
        case Method::BDF: return "bdf";
        case Method::ExpEuler: return "exp_euler";
        case Method::SplitForceLie: return "split_force_lie";
        case Method::SplitForceStrang: return "split_force_strang";
        case Method::SplitCompLie: return "split_comp_lie";
        case Method::SplitCompStrang: return "split_comp_strang";
    }
    return "?";
}

Method parse_method(const std::string& name) {
    for (Method m : {Method::BDF, Method::ExpEuler, Method::SplitForceLie, Method::SplitForceStrang,
                     Method::SplitCompLie, Method::SplitCompStrang})
        if (to_string(m) == name) return m;
    throw InvalidArgument("unknown method '" + name +
                          "' (bdf, exp_euler, split_force_lie, split_force_strang, split_comp_lie, split_comp_strang)");
}

std::string to_string(Startup s) { return s == Startup::ExactRitz ? "exact_ritz" : "bootstrap"; }

Startup parse_startup(const std::string& name) {
    if (name == "exact_ritz") return Startup::ExactRitz;
    if (name == "bootstrap") return Startup::Bootstrap;
    throw InvalidArgument("unknown startup '" + name + "' (exact_ritz, bootstrap)");
}

std::string to_string(LoadMode m) {
    switch (m) {
        case LoadMode::Pde: return "pde";
        case LoadMode::Ritz: return "ritz";
        case LoadMode::Interpolant: return "interpolant";
    }
    return "?";
}

LoadMode parse_load_mode(const std::string& name) {
    if (name == "pde") return LoadMode::Pde;
    if (name == "ritz") return LoadMode::Ritz;
    if (name == "interpolant") return LoadMode::Interpolant;
    throw InvalidArgument("unknown load mode '" + name + "' (pde, ritz, interpolant)");
}

std::vector<double> bdf_coefficients(int k) {
    if (k < 1 || k > 5) throw InvalidArgument("BDF order must be in 1..5, got " + std::to_string(k));
    // (1-ζ)^ℓ = Σ_j C(ℓ,j) (-1)^j ζ^j
    std::vector<double> delta(k + 1, 0.0);
    for (int l = 1; l <= k; ++l) {
        double binom = 1.0;
        for (int j = 0; j <= l; ++j) {
            delta[j] += (j % 2 == 0 ? 1.0 : -1.0) * binom / l;
            binom = binom * (l - j) / (j + 1);
        }
    }
    return delta;
}

std::vector<double> extrapolation_coefficients(int k) {
    if (k < 1 || k > 5) throw InvalidArgument("extrapolation order must be in 1..5");
    // 1 - (1-ζ)^k = Σ_{j=1}^k (-1)^{j+1} C(k,j) ζ^j
    std::vector<double> g(k);
    double binom = k;
    for (int j = 1; j <= k; ++j) {
        g[j - 1] = (j % 2 == 1 ? 1.0 : -1.0) * binom;
        binom = binom * (k - j) / (j + 1);
    }
    return g;
}

// ---------------------------------------------------------------- ExactFlow

ExactFlow::ExactFlow(Vector mass_diag, const SparseMatrix& a, double tol, MatrixFunctionMethod method)
    : mass_diag_(std::move(mass_diag)), a_hat_(sym_scale(mass_diag_, a)), tol_(tol), method_(method) {
    sqrt_m_.resize(mass_diag_.size());
    for (std::size_t i = 0; i < mass_diag_.size(); ++i) sqrt_m_[i] = std::sqrt(mass_diag_[i]);
    const bool dense = method == MatrixFunctionMethod::Dense ||
                       (method == MatrixFunctionMethod::Auto && size() <= kDenseSpectrumLimit);
    if (dense && size() > 0) spectrum_.emplace(a_hat_.to_dense());
}

Vector ExactFlow::advance(std::span<const double> u0, std::span<const double> c, double s) const {
    const int n = size();
    if (static_cast<int>(u0.size()) != n || static_cast<int>(c.size()) != n)
        throw InvalidArgument("ExactFlow: vector size mismatch");
    if (n == 0) return {};
    Vector y(n), c_hat(n);
    for (int i = 0; i < n; ++i) {
        y[i] = sqrt_m_[i] * u0[i];
        c_hat[i] = c[i] / sqrt_m_[i];
    }
    if (spectrum_) {
        Eigen::Map<const Eigen::VectorXd> ym(y.data(), n), cm(c_hat.data(), n);
        // In the eigenbasis each mode is y_k(s) = y_k e^{-sλ} + s φ(-sλ) c_k.
        const auto& q = spectrum_->eigenvectors();
        const auto& lam = spectrum_->eigenvalues();
        Eigen::VectorXd yc = q.transpose() * ym;
        const Eigen::VectorXd cc = q.transpose() * cm;
        // Roundoff-level eigenvalues are kernel modes; a spurious -1e-13 would grow them for large s.
        const double noise = 64.0 * std::numeric_limits<double>::epsilon() * lam.cwiseAbs().maxCoeff();
        for (int k = 0; k < n; ++k) {
            const double l = std::abs(lam(k)) <= noise ? 0.0 : lam(k);
            yc(k) = std::exp(-s * l) * yc(k) + s * phi1(-s * l) * cc(k);
        }
        const Eigen::VectorXd out = q * yc;
        Vector u(n);
        for (int i = 0; i < n; ++i) u[i] = out(i) / sqrt_m_[i];
        return u;
    }
    // Krylov: y(s) = y + s φ(-sÂ)(ĉ - Ây); split s when Lanczos does not converge.
    std::vector<double> pieces{s};
    for (int attempt = 0; attempt < 12; ++attempt) {
        try {
            Vector cur = y;
            for (double piece : pieces) {
                Vector r = a_hat_ * cur;
                for (int i = 0; i < n; ++i) r[i] = c_hat[i] - r[i];
                KrylovStats st;
                const Vector p = phi1_apply(a_hat_, r, piece, tol_, MatrixFunctionMethod::Krylov, &st);
                krylov_iterations_ += st.iterations;
                axpy(piece, p, cur);
            }
            Vector u(n);
            for (int i = 0; i < n; ++i) u[i] = cur[i] / sqrt_m_[i];
            return u;
        } catch (const SolverFailure&) {
            const std::size_t m = pieces.size() * 2;
            pieces.assign(m, s / static_cast<double>(m));
        }
    }
    throw SolverFailure("ExactFlow: Krylov phi-apply failed even after substepping", 0.0);
}

// ------------------------------------------------------------ DiscreteModel

DiscreteModel::DiscreteModel(ProblemSpec problem, const Mesh& mesh, Lumping lumping, LoadMode load)
    : problem_(std::move(problem)), mesh_(&mesh), lumping_(lumping), load_mode_(load) {
    if (problem_.domain != mesh.kind() && mesh.kind() != DomainKind::External)
        throw InvalidArgument("problem '" + problem_.name + "' expects a " + to_string(problem_.domain) + " mesh");
    if (load_mode_ != LoadMode::Pde) {
        if (!problem_.exact) throw PreconditionError("load mode " + to_string(load_mode_) + " needs an exact solution");
        if (!problem_.is_linear()) throw PreconditionError("load mode " + to_string(load_mode_) + " needs a linear problem");
        if (load_mode_ == LoadMode::Ritz && !problem_.coeffs.autonomous())
            throw PreconditionError("load mode ritz needs time-independent coefficients");
    }
    shift_ = default_ritz_shift(mesh, problem_.coeffs, 0.0);
}

const AssembledSystem& DiscreteModel::system(double t) const {
    if (cached_ && (problem_.coeffs.autonomous() || cached_->time == t)) return *cached_;
    if (lumping_ == Lumping::Consistent) {
        cached_ = consistent_system(t);
    } else {
        cached_ = lump(consistent_system(t), *mesh_, problem_.coeffs, lumping_);
    }
    cached_->time = t;
    return *cached_;
}

const AssembledSystem& DiscreteModel::consistent_system(double t) const {
    if (cached_consistent_ && (problem_.coeffs.autonomous() || cached_consistent_->time == t))
        return *cached_consistent_;
    cached_consistent_ = assemble(*mesh_, problem_.coeffs, t, Lumping::Consistent);
    cached_consistent_->time = t;
    return *cached_consistent_;
}

LoadVector DiscreteModel::load(double t) const {
    if (load_mode_ == LoadMode::Pde)
        return assemble_load_split(*mesh_, problem_.coeffs, problem_.f_bulk, problem_.f_surf, t, lumping_);
    const auto [w, wt] = representative(t);
    const auto& sys = system(t);
    LoadVector b;
    b.bulk = sys.mass_bulk * wt;
    const Vector ab = sys.stiffness_bulk * w;
    axpy(1.0, ab, b.bulk);
    b.surf = sys.mass_surf * wt;
    const Vector as = sys.stiffness_surf * w;
    axpy(1.0, as, b.surf);
    return b;
}

const RitzProjector& DiscreteModel::projector(double t) const {
    if (!projector_ || (!problem_.coeffs.autonomous() && projector_time_ != t)) {
        projector_ = std::make_unique<RitzProjector>(*mesh_, consistent_system(t), problem_.coeffs, shift_);
        projector_time_ = t;
    }
    return *projector_;
}

std::pair<Vector, Vector> DiscreteModel::representative(double t) const {
    const ExactSolution& ex = *problem_.exact;
    if (load_mode_ == LoadMode::Ritz) {
        const auto& proj = projector(t);
        return {proj(ex, t).values, proj(time_derivative(ex, problem_.domain), t).values};
    }
    return {interpolate(*mesh_, ex.u, t), interpolate(*mesh_, ex.u_t, t)};
}

Vector DiscreteModel::load_residual(double t, std::span<const double> u) const {
    const auto& sys = system(t);
    if (load_mode_ == LoadMode::Pde) {
        Vector b = load(t).total();
        axpy(-1.0, sys.stiffness * u, b);
        return b;
    }
    auto [w, wt] = representative(t);
    axpy(-1.0, u, w);
    Vector b = sys.mass * wt;
    axpy(1.0, sys.stiffness * w, b);
    return b;
}

Vector DiscreteModel::ritz(double t) const {
    if (!problem_.exact) throw PreconditionError("problem '" + problem_.name + "' has no exact solution");
    return projector(t)(*problem_.exact, t).values;
}

Vector DiscreteModel::exact_discrete(double t) const {
    if (!problem_.exact) throw PreconditionError("problem '" + problem_.name + "' has no exact solution");
    if (load_mode_ == LoadMode::Interpolant) return interpolate(*mesh_, problem_.exact->u, t);
    return ritz(t);
}

Vector DiscreteModel::initial_value() const {
    if (problem_.exact) return exact_discrete(0.0);
    if (!problem_.u0) throw PreconditionError("problem '" + problem_.name + "' has no initial value");
    return interpolate(*mesh_, problem_.u0, 0.0);
}

const ExactFlow& DiscreteModel::cached_flow(const std::string& key, const std::function<ExactFlow()>& build) const {
    auto it = flows_.find(key);
    if (it == flows_.end()) it = flows_.emplace(key, std::make_unique<ExactFlow>(build())).first;
    return *it->second;
}

// ------------------------------------------------------------------ helpers

namespace {

// Cached flows depend on the evaluation method and tolerance, not only on the block.
std::string flow_key(const std::string& block, const IntegratorConfig& c) {
    char buf[64];
    std::snprintf(buf, sizeof buf, ":%d:%.17g", static_cast<int>(c.phi_method), c.phi_tol);
    return block + buf;
}

int step_count(const IntegratorConfig& c) {
    if (!(c.tau > 0.0)) throw InvalidArgument("tau must be positive");
    if (c.T < c.tau * (1.0 - 1e-12)) throw InvalidArgument("T must be at least tau");
    const double ratio = c.T / c.tau;
    const long n = std::lround(ratio);
    if (std::abs(ratio - static_cast<double>(n)) > 1e-8 * ratio)
        throw DegenerateStepsize("T/tau = " + std::to_string(ratio) + " is not an integer");
    return static_cast<int>(n);
}

class Recorder {
public:
    Recorder(const IntegratorConfig& c, const StepObserver& obs) : config_(c), observer_(obs) {}

    void record(int n, double t, const Vector& u, RunReport& report) {
        if (observer_) observer_(n, t, u);
        for (double want : config_.output_times) {
            if (std::abs(t - want) <= 0.5 * config_.tau * (1.0 + 1e-12) &&
                (report.snapshots.empty() || report.snapshots.back().t != t))
                report.snapshots.push_back({t, u});
        }
    }

private:
    const IntegratorConfig& config_;
    const StepObserver& observer_;
};

Vector total_load(const DiscreteModel& model, double t) { return model.load(t).total(); }

std::string at_step(int n) { return " at step " + std::to_string(n); }

}  // namespace

// ---------------------------------------------------------------------- BDF

RunReport run_bdf(const DiscreteModel& model, const IntegratorConfig& config, const StepObserver& observer) {
    const int k = config.k;
    const auto delta_full = bdf_coefficients(k);
    const int steps = step_count(config);
    const double tau = config.tau;
    const int n = model.size();
    const ProblemSpec& problem = model.problem();
    const bool linear = problem.is_linear();
    const bool autonomous = problem.coeffs.autonomous();

    RunReport report;
    Recorder rec(config, observer);
    std::vector<Vector> history;  // history[j] = u^j

    history.push_back(model.initial_value());
    rec.record(0, 0.0, history[0], report);

    int start = 1;
    if (config.startup == Startup::ExactRitz && k > 1) {
        if (!problem.exact) throw PreconditionError("exact_ritz startup needs an exact solution");
        for (int j = 1; j < k && j <= steps; ++j) {
            history.push_back(model.exact_discrete(j * tau));
            rec.record(j, j * tau, history.back(), report);
        }
        start = std::min(k, steps + 1);
    }

    SparseFactorization factor;
    int factored_order = -1;

    for (int step = start; step <= steps; ++step) {
        const double t = step * tau;
        const int order = std::min(k, step);  // bootstrap uses lower orders first
        const auto delta = order == k ? delta_full : bdf_coefficients(order);
        const auto& sys = model.system(t);

        const SparseMatrix lhs = add_scaled(sys.stiffness, delta[0] / tau, sys.mass);
        Vector u;
        if (linear) {
            // Increment form w = u^n - u^{n-1}; since Σδ_j = 0 the history enters
            // through differences u^{n-j} - u^{n-1}, which are formed without cancellation:
            // (δ₀/τ M + A) w = b - A u^{n-1} - M (1/τ) Σ_{j≥2} δ_j (u^{n-j} - u^{n-1}).
            const Vector& prev = history[step - 1];
            Vector diff(n, 0.0), d(n);
            for (int j = 2; j <= order; ++j) {
                const Vector& old = history[step - j];
                for (int i = 0; i < n; ++i) d[i] = old[i] - prev[i];
                axpy(delta[j] / tau, d, diff);
            }
            Vector rhs = model.load_residual(t, prev);
            axpy(-1.0, sys.mass * diff, rhs);
            if (!autonomous || order != factored_order) {
                factor.factor(lhs);
                factored_order = order;
            }
            u = factor.solve(rhs);
            axpy(1.0, prev, u);
        } else {
            // h = (1/τ) Σ_{j≥1} δ_j u^{n-j}
            Vector hist(n, 0.0);
            for (int j = 1; j <= order; ++j) axpy(delta[j] / tau, history[step - j], hist);
            Vector rhs = total_load(model, t);
            axpy(-1.0, sys.mass * hist, rhs);
            const Nonlinearity& nl = *problem.nonlinearity;
            if (config.extrapolated) {
                const auto g = extrapolation_coefficients(order);
                Vector ustar(n, 0.0);
                for (int j = 0; j < order; ++j) axpy(g[j], history[step - 1 - j], ustar);
                const Vector f = evaluate_nonlinearity(model.mesh(), problem.coeffs, sys, ustar, nl.f_bulk, nl.f_surf);
                axpy(1.0, f, rhs);
                if (!autonomous || order != factored_order) {
                    factor.factor(lhs);
                    factored_order = order;
                }
                u = factor.solve(rhs);
            } else {
                // Newton on (δ₀/τ M + A) u - F(u) = rhs, started from the previous value.
                u = history[step - 1];
                bool converged = false;
                double res_norm = 0.0;
                for (int it = 0; it < config.newton_max_iter; ++it) {
                    const Vector f = evaluate_nonlinearity(model.mesh(), problem.coeffs, sys, u, nl.f_bulk, nl.f_surf);
                    Vector res = lhs * u;
                    for (int i = 0; i < n; ++i) res[i] = rhs[i] + f[i] - res[i];
                    res_norm = norm_inf(res);
                    const SparseMatrix jac = add_scaled(
                        lhs, -1.0,
                        nonlinearity_jacobian(model.mesh(), problem.coeffs, sys, u, nl.df_bulk, nl.df_surf));
                    factor.factor(jac);
                    const Vector du = factor.solve(res);
                    axpy(1.0, du, u);
                    ++report.newton_iterations;
                    if (norm_inf(du) <= config.newton_tol * (1.0 + norm_inf(u))) {
                        converged = true;
                        break;
                    }
                }
                factored_order = -1;
                if (!converged)
                    throw SolverFailure("Newton iteration did not converge" + at_step(step), res_norm);
            }
        }
        for (double v : u)
            if (!std::isfinite(v)) throw SolverFailure("non-finite BDF solution" + at_step(step), 0.0);
        history.push_back(std::move(u));
        rec.record(step, t, history.back(), report);
        // Only the last k values are needed.
        if (static_cast<int>(history.size()) > k + 1) history[history.size() - k - 2].clear();
    }

    report.final = history.back();
    report.t_final = steps * tau;
    report.steps = steps;
    return report;
}

// --------------------------------------------------------- exponential Euler

namespace {

void require_linear(const DiscreteModel& model, const char* who) {
    if (!model.problem().is_linear())
        throw PreconditionError(std::string(who) + " needs a linear problem");
}

}  // namespace

RunReport run_exp_euler(const DiscreteModel& model, const IntegratorConfig& config, const StepObserver& observer) {
    require_linear(model, "exponential Euler");
    const int steps = step_count(config);
    const double tau = config.tau;
    const bool autonomous = model.problem().coeffs.autonomous();

    RunReport report;
    Recorder rec(config, observer);
    Vector u = model.initial_value();
    rec.record(0, 0.0, u, report);

    for (int step = 0; step < steps; ++step) {
        const double t0 = step * tau;
        const auto& sys = model.system(t0);
        const Vector b = total_load(model, t0);
        if (autonomous) {
            const auto& flow = model.cached_flow(flow_key("full", config), [&] {
                return ExactFlow(sys.mass_diagonal(), sys.stiffness, config.phi_tol, config.phi_method);
            });
            const int before = flow.krylov_iterations();
            u = flow.advance(u, b, tau);
            report.krylov_iterations += flow.krylov_iterations() - before;
        } else {
            const ExactFlow flow(sys.mass_diagonal(), sys.stiffness, config.phi_tol,
                                 config.phi_method == MatrixFunctionMethod::Auto ? MatrixFunctionMethod::Krylov
                                                                                 : config.phi_method);
            u = flow.advance(u, b, tau);
            report.krylov_iterations += flow.krylov_iterations();
        }
        rec.record(step + 1, t0 + tau, u, report);
    }
    report.final = u;
    report.t_final = steps * tau;
    report.steps = steps;
    return report;
}

// ----------------------------------------------------------------- splitting

namespace {

Vector gather(std::span<const double> v, const std::vector<int>& idx) {
    Vector out(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) out[i] = v[idx[i]];
    return out;
}

void scatter(std::span<const double> v, const std::vector<int>& idx, Vector& into) {
    for (std::size_t i = 0; i < idx.size(); ++i) into[idx[i]] = v[i];
}

/// Flows for one macro step; cached on the model when coefficients are autonomous.
struct SplitFlows {
    const ExactFlow* first = nullptr;   // surface part (A_Γ on boundary DOFs, or A₁₁)
    const ExactFlow* second = nullptr;  // bulk part (A_Ω, or A₀₀)
    std::unique_ptr<ExactFlow> owned_first, owned_second;
    SparseMatrix a01, a10;              // component splitting couplings
};

SplitFlows make_flows(const DiscreteModel& model, const AssembledSystem& sys, bool force,
                      const IntegratorConfig& config) {
    const auto& part = sys.partition;
    const Vector m = sys.mass_diagonal();
    const Vector mb = gather(m, part.boundary), mi = gather(m, part.interior);
    const bool autonomous = model.problem().coeffs.autonomous();
    const MatrixFunctionMethod method = autonomous || config.phi_method != MatrixFunctionMethod::Auto
                                            ? config.phi_method
                                            : MatrixFunctionMethod::Krylov;

    SplitFlows f;
    std::function<ExactFlow()> build_first, build_second;
    if (force) {
        build_first = [&] {
            return ExactFlow(mb, sys.stiffness_surf.submatrix(part.boundary, part.boundary), config.phi_tol, method);
        };
        build_second = [&] { return ExactFlow(m, sys.stiffness_bulk, config.phi_tol, method); };
    } else {
        build_first = [&] {
            return ExactFlow(mb, sys.stiffness.submatrix(part.boundary, part.boundary), config.phi_tol, method);
        };
        build_second = [&] {
            return ExactFlow(mi, sys.stiffness.submatrix(part.interior, part.interior), config.phi_tol, method);
        };
    }
    const std::string tag = force ? "force_" : "comp_";
    if (autonomous) {
        f.first = &model.cached_flow(flow_key(tag + "surface", config), build_first);
        f.second = &model.cached_flow(flow_key(tag + "bulk", config), build_second);
    } else {
        f.owned_first = std::make_unique<ExactFlow>(build_first());
        f.owned_second = std::make_unique<ExactFlow>(build_second());
        f.first = f.owned_first.get();
        f.second = f.owned_second.get();
    }
    return f;
}

/// y = A_sub(rows, cols) * x for index lists.
Vector block_multiply(const SparseMatrix& a, const std::vector<int>& rows, const std::vector<int>& cols,
                      std::span<const double> x_cols, int n) {
    Vector full(n, 0.0);
    scatter(x_cols, cols, full);
    const Vector prod = a * full;
    return gather(prod, rows);
}

}  // namespace

RunReport run_splitting(const DiscreteModel& model, const IntegratorConfig& config, const StepObserver& observer) {
    require_linear(model, "splitting");
    const bool force = config.method == Method::SplitForceLie || config.method == Method::SplitForceStrang;
    const bool strang = config.method == Method::SplitForceStrang || config.method == Method::SplitCompStrang;
    if (!force && config.method != Method::SplitCompLie && config.method != Method::SplitCompStrang)
        throw InvalidArgument("run_splitting called with a non-splitting method");
    const int steps = step_count(config);
    const double tau = config.tau;
    const int n = model.size();

    RunReport report;
    Recorder rec(config, observer);
    Vector u = model.initial_value();
    rec.record(0, 0.0, u, report);

    for (int step = 0; step < steps; ++step) {
        const double t0 = step * tau, t1 = t0 + tau, th = t0 + 0.5 * tau;
        // Matrices are frozen at t0 for the whole macro step.
        const auto& sys = model.system(t0);
        const SplitFlows flows = make_flows(model, sys, force, config);
        const auto& bnd = sys.partition.boundary;
        const auto& inr = sys.partition.interior;
        const int krylov_before = flows.first->krylov_iterations() + flows.second->krylov_iterations();

        const auto middle_load = [&]() {
            if (!config.averaged_source) return model.load(th);
            LoadVector a = model.load(t0);
            const LoadVector b = model.load(t1);
            for (int i = 0; i < n; ++i) {
                a.bulk[i] = 0.5 * (a.bulk[i] + b.bulk[i]);
                a.surf[i] = 0.5 * (a.surf[i] + b.surf[i]);
            }
            return a;
        };

        if (force) {
            // Surface flow touches boundary DOFs only (A_Γ and b_Γ vanish elsewhere).
            const auto surface = [&](double s, double tb) {
                const Vector cb = gather(model.load(tb).surf, bnd);
                const Vector ub = flows.first->advance(gather(u, bnd), cb, s);
                scatter(ub, bnd, u);
            };
            if (strang) {
                surface(0.5 * tau, t0);
                u = flows.second->advance(u, middle_load().bulk, tau);
                surface(0.5 * tau, t1);
            } else {
                surface(tau, t0);
                u = flows.second->advance(u, model.load(t0).bulk, tau);
            }
        } else {
            const auto boundary = [&](double s, double tb) {
                const Vector b = model.load(tb).total();
                Vector c = gather(b, bnd);
                const Vector coupling = block_multiply(sys.stiffness, bnd, inr, gather(u, inr), n);
                axpy(-1.0, coupling, c);
                scatter(flows.first->advance(gather(u, bnd), c, s), bnd, u);
            };
            const auto interior = [&](const Vector& b) {
                Vector c = gather(b, inr);
                const Vector coupling = block_multiply(sys.stiffness, inr, bnd, gather(u, bnd), n);
                axpy(-1.0, coupling, c);
                scatter(flows.second->advance(gather(u, inr), c, tau), inr, u);
            };
            if (strang) {
                boundary(0.5 * tau, t0);
                interior(middle_load().total());
                boundary(0.5 * tau, t1);
            } else {
                boundary(tau, t0);
                interior(model.load(t0).total());
            }
        }
        report.krylov_iterations +=
            flows.first->krylov_iterations() + flows.second->krylov_iterations() - krylov_before;
        for (double v : u)
            if (!std::isfinite(v)) throw SolverFailure("non-finite splitting solution" + at_step(step + 1), 0.0);
        rec.record(step + 1, t1, u, report);
    }
    report.final = u;
    report.t_final = steps * tau;
    report.steps = steps;
    return report;
}

RunReport run(const DiscreteModel& model, const IntegratorConfig& config, const StepObserver& observer) {
    switch (config.method) {
        case Method::BDF: return run_bdf(model, config, observer);
        case Method::ExpEuler: return run_exp_euler(model, config, observer);
        default: return run_splitting(model, config, observer);
    }
}

}  // namespace dynbc
