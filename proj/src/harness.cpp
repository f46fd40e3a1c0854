#include "dynbc/harness.hpp"

#include "dynbc/errors.hpp"
#include "dynbc/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

namespace dynbc {

namespace fs = std::filesystem;

// ------------------------------------------------------------------ helpers

Mesh make_mesh(DomainKind domain, int level) {
    if (level < 1) throw InvalidArgument("mesh level must be positive, got " + std::to_string(level));
    switch (domain) {
    case DomainKind::Square:
        return generate_square_mesh(level);
    case DomainKind::Disk: {
        int j = 0, n = 4;
        while (n < level) {
            n *= 2;
            ++j;
        }
        if (n == level && level >= 4) return refine(generate_disk_mesh(16), j);
        if (level < 2) throw InvalidArgument("disk level must be at least 2");
        return generate_disk_mesh(4 * level);
    }
    case DomainKind::External:
        break;
    }
    throw InvalidArgument("make_mesh: no generator for domain " + to_string(domain));
}

int thread_limit() {
    if (const char* env = std::getenv("DYNBC_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

ProblemSpec homogeneous(ProblemSpec problem, bool zero_initial) {
    problem.f_bulk = nullptr;
    problem.f_surf = nullptr;
    problem.nonlinearity.reset();
    problem.potentials.reset();
    problem.exact.reset();
    if (zero_initial) problem.u0 = [](Point, double) { return 0.0; };
    return problem;
}

StepRule parse_step_rule(const std::string& name) {
    if (name == "h2" || name == "h_squared") return StepRule::HSquared;
    if (name == "h" || name == "proportional") return StepRule::Proportional;
    if (name == "fixed") return StepRule::Fixed;
    throw InvalidArgument("unknown step rule '" + name + "' (expected h2, h or fixed)");
}

namespace {

// τ ≤ target with T/τ an integer.
double fit_step(double T, double target) {
    const double n = std::ceil(T / target * (1.0 - 1e-12));
    return T / std::max(1.0, n);
}

double mass_norm(const AssembledSystem& system, const Vector& u) { return std::sqrt(system.mass.bilinear(u, u)); }

}  // namespace

// ------------------------------------------------------------------ studies

ErrorTable spatial_study(const SpatialStudy& study, int threads) {
    if (study.levels.empty()) throw ConfigError("spatial study needs at least one mesh level");
    if (!study.problem.exact) throw ConfigError("problem '" + study.problem.name + "' has no exact solution");
    const double T = study.integrator.T;
    const auto rows = parallel_map<ErrorRow>(static_cast<int>(study.levels.size()), threads, [&](int i) {
        const int level = study.levels[i];
        const Mesh mesh = make_mesh(study.problem.domain, level);
        const DiscreteModel model(study.problem, mesh, study.lumping, study.load);
        IntegratorConfig c = study.integrator;
        const double h = mesh.h();
        switch (study.rule) {
        case StepRule::HSquared: c.tau = fit_step(T, study.tau_factor * h * h); break;
        case StepRule::Proportional: c.tau = fit_step(T, study.tau_factor * h); break;
        case StepRule::Fixed: break;
        }
        c.output_times.clear();
        const RunReport r = run(model, c);
        const ErrorMeasure em(mesh);
        const auto& coeffs = study.problem.coeffs;
        return ErrorRow{h, level, mesh.num_vertices(), em(r.final, *study.problem.exact, coeffs, r.t_final)};
    });
    ErrorTable table("h");
    for (const auto& row : rows) table.add(row);
    return table;
}

IntegratorConfig reference_config(const TemporalStudy& study) {
    IntegratorConfig c = study.integrator;
    const bool bdf = c.method == Method::BDF;
    c.method = study.reference_method.value_or(Method::BDF);
    c.k = study.reference_k.value_or(bdf ? study.integrator.k : 5);
    c.tau = study.reference_tau;
    c.output_times.clear();
    return c;
}

Vector temporal_reference(const TemporalStudy& study, const DiscreteModel& model) {
    return run(model, reference_config(study)).final;
}

ErrorTable temporal_study(const TemporalStudy& study, const Vector* reference, int threads) {
    if (study.taus.empty()) throw ConfigError("temporal study needs at least one step size");
    const Mesh mesh = make_mesh(study.problem.domain, study.level);
    const DiscreteModel model(study.problem, mesh, study.lumping, study.load);
    const Vector ref = reference ? *reference : temporal_reference(study, model);
    const AssembledSystem consistent = model.consistent_system(study.integrator.T);
    const ErrorMeasure em(mesh);
    const auto rows = parallel_map<ErrorRow>(static_cast<int>(study.taus.size()), threads, [&](int i) {
        // The model caches are not thread-safe; parallel tasks build their own.
        std::optional<DiscreteModel> own;
        if (threads > 1) own.emplace(study.problem, mesh, study.lumping, study.load);
        const DiscreteModel& m = own ? *own : model;
        IntegratorConfig c = study.integrator;
        c.tau = study.taus[i];
        c.output_times.clear();
        Vector d = run(m, c).final;
        if (d.size() != ref.size()) throw InvalidArgument("reference has the wrong size");
        axpy(-1.0, ref, d);
        return ErrorRow{c.tau, study.level, mesh.num_vertices(), em.discrete(d, consistent)};
    });
    ErrorTable table("tau");
    for (const auto& row : rows) table.add(row);
    return table;
}

RitzStudyResult ritz_study(const ProblemSpec& problem, const std::vector<int>& levels, double t, int threads) {
    if (!problem.exact) throw ConfigError("problem '" + problem.name + "' has no exact solution");
    struct Item {
        ErrorRow row;
        double residual;
    };
    const auto items = parallel_map<Item>(static_cast<int>(levels.size()), threads, [&](int i) {
        const Mesh mesh = make_mesh(problem.domain, levels[i]);
        const AssembledSystem system = assemble(mesh, problem.coeffs, t);
        const double shift = default_ritz_shift(mesh, problem.coeffs, t);
        const RitzResult r = ritz_project(mesh, system, problem.coeffs, *problem.exact, t, shift);
        const ErrorMeasure em(mesh);
        return Item{{mesh.h(), levels[i], mesh.num_vertices(), em(r.values, *problem.exact, problem.coeffs, t)},
                    r.orthogonality_residual};
    });
    RitzStudyResult out;
    for (const auto& item : items) {
        out.table.add(item.row);
        out.max_residual = std::max(out.max_residual, item.residual);
    }
    return out;
}

MNormRow force_mnorm_check(const ProblemSpec& problem, const Mesh& mesh, Method method, double tau, int steps,
                           const std::string& label) {
    const DiscreteModel model(homogeneous(problem, false), mesh, Lumping::FullLumped);
    const AssembledSystem& system = model.system(0.0);
    IntegratorConfig c;
    c.method = method;
    c.tau = tau;
    c.T = tau * steps;
    MNormRow row{label, method, tau, steps, 0.0, true};
    double prev = -1.0;
    run(model, c, [&](int, double, const Vector& u) {
        const double m = mass_norm(system, u);
        if (prev > 0.0) row.max_ratio = std::max(row.max_ratio, m / prev);
        prev = m;
    });
    row.pass = row.max_ratio <= 1.0 + 1e-12;
    return row;
}

StabilitySweepResult stability_sweep(const StabilitySweep& sweep, int threads) {
    if (sweep.taus.empty()) throw ConfigError("stability sweep: empty tau grid");
    StabilitySweepResult out;
    const ProblemSpec& problem = sweep.problem;

    for (int level : sweep.levels) {
        const Mesh mesh = make_mesh(problem.domain, level);
        const BlockSystem blocks = block_system(assemble(mesh, problem.coeffs, 0.0, Lumping::FullLumped));
        const std::string label = problem.name + "_n" + std::to_string(level);
        const auto reports = parallel_map<StabilityReport>(static_cast<int>(sweep.taus.size()), threads,
                                                           [&](int i) { return verify_stability(blocks, sweep.taus[i]); });
        for (const auto& r : reports) out.rows.push_back({label, r});
    }

    // Sizes and partitions are drawn sequentially so the systems depend only on the seed.
    std::mt19937_64 rng(sweep.seed);
    std::uniform_int_distribution<int> size0(1, 24), size1(1, 16);
    std::vector<std::pair<std::string, BlockSystem>> randoms;
    for (int i = 0; i < sweep.random_systems; ++i) {
        for (;;) {
            const int n0 = size0(rng), n1 = size1(rng);
            if (auto b = random_block_system(n0, n1, rng)) {
                randoms.emplace_back("random_" + std::to_string(i) + "_" + std::to_string(n0) + "x" +
                                         std::to_string(n1),
                                     std::move(*b));
                break;
            }
        }
    }
    const auto random_reports = parallel_map<std::vector<StabilityReport>>(
        static_cast<int>(randoms.size()), threads, [&](int i) {
            std::vector<StabilityReport> rs;
            for (double tau : sweep.taus) rs.push_back(verify_stability(randoms[i].second, tau));
            return rs;
        });
    for (std::size_t i = 0; i < randoms.size(); ++i)
        for (const auto& r : random_reports[i]) out.rows.push_back({randoms[i].first, r});

    for (int level : sweep.mnorm_levels) {
        const Mesh mesh = make_mesh(problem.domain, level);
        const std::string label = problem.name + "_n" + std::to_string(level);
        for (Method m : {Method::SplitForceLie, Method::SplitForceStrang})
            for (double tau : sweep.taus)
                out.mnorm.push_back(force_mnorm_check(problem, mesh, m, tau, sweep.mnorm_steps, label));
    }

    for (const auto& r : out.rows) out.pass = out.pass && r.report.pass;
    for (const auto& r : out.mnorm) out.pass = out.pass && r.pass;
    return out;
}

void write_mnorm_csv(std::ostream& os, const std::vector<MNormRow>& rows) {
    os << "system,method,tau,steps,max_ratio,pass\n";
    const auto old = os.precision(17);
    for (const auto& r : rows)
        os << r.system << ',' << to_string(r.method) << ',' << r.tau << ',' << r.steps << ',' << r.max_ratio << ','
           << (r.pass ? 1 : 0) << '\n';
    os.precision(old);
}

// ---------------------------------------------------------------- config glue

namespace {

// Parses a config value with `parse`, reporting failures as ConfigError on the key's line.
template <class F>
auto parse_key(const Config& cfg, const std::string& section, const std::string& key, const std::string& fallback,
               F&& parse) {
    const std::string value = cfg.get_string(section, key, fallback);
    try {
        return parse(value);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what(), cfg.line_of(section, key));
    }
}

template <class F>
auto phase(const std::string& label, F&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        throw ConfigError(label + ": " + e.what());
    } catch (const Error& e) {
        throw Error(label + ": " + e.what());
    }
}

fs::path output_dir(const Config& cfg) {
    fs::path dir = cfg.get_string("output", "dir", ".");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory '" + dir.string() + "': " + ec.message());
    return dir;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream os(path);
    if (!os) throw Error("cannot write '" + path.string() + "'");
    return os;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Lumping lumping_from_config(const Config& cfg) {
    return parse_key(cfg, "mesh", "lumping", "consistent", parse_lumping);
}

LoadMode load_from_config(const Config& cfg) {
    return parse_key(cfg, "integrator", "load", "pde", parse_load_mode);
}

std::vector<int> levels_from_config(const Config& cfg, const std::vector<int>& fallback) {
    auto levels = cfg.get_ints("mesh", "levels", fallback);
    if (levels.empty()) throw ConfigError("[mesh] levels is empty", cfg.line_of("mesh", "levels"));
    return levels;
}

}  // namespace

ProblemSpec problem_from_config(const Config& cfg) {
    ProblemSpec p = phase("problem", [&] { return builtin(cfg.get_string("problem", "name")); });
    const auto mu = cfg.get_optional_double("problem", "mu");
    const auto kappa = cfg.get_optional_double("problem", "kappa");
    const auto beta = cfg.get_optional_double("problem", "beta");
    if (mu || kappa || beta) p = with_constant_coefficients(std::move(p), mu, kappa, beta);
    p.T = cfg.get_double("problem", "T", p.T);
    const std::string source = cfg.get_string("problem", "source", "problem");
    const std::string initial = cfg.get_string("problem", "initial", "problem");
    if (source != "problem" && source != "zero")
        throw ConfigError("source must be 'problem' or 'zero'", cfg.line_of("problem", "source"));
    if (initial != "problem" && initial != "zero")
        throw ConfigError("initial must be 'problem' or 'zero'", cfg.line_of("problem", "initial"));
    if (source == "zero") p = homogeneous(std::move(p), initial == "zero");
    else if (initial == "zero") {
        p.u0 = [](Point, double) { return 0.0; };
        p.exact.reset();
    }
    return p;
}

IntegratorConfig integrator_from_config(const Config& cfg, double T) {
    IntegratorConfig c;
    c.method = parse_key(cfg, "integrator", "method", "bdf", parse_method);
    c.k = cfg.get_int("integrator", "k", 2);
    if (c.k < 1 || c.k > 5) throw ConfigError("k must be between 1 and 5", cfg.line_of("integrator", "k"));
    c.T = cfg.get_double("integrator", "T", T);
    c.tau = cfg.get_double("integrator", "tau", c.T / 100.0);
    if (!(c.tau > 0.0)) throw ConfigError("tau must be positive", cfg.line_of("integrator", "tau"));
    c.startup = parse_key(cfg, "integrator", "startup", "exact_ritz", parse_startup);
    c.newton_tol = cfg.get_double("integrator", "newton_tol", c.newton_tol);
    c.newton_max_iter = cfg.get_int("integrator", "newton_max_iter", c.newton_max_iter);
    c.extrapolated = cfg.get_bool("integrator", "extrapolated", false);
    c.averaged_source = cfg.get_bool("integrator", "averaged_source", false);
    c.phi_tol = cfg.get_double("integrator", "phi_tol", c.phi_tol);
    c.phi_method = parse_key(cfg, "integrator", "phi_method", "auto", [](const std::string& s) {
        if (s == "auto") return MatrixFunctionMethod::Auto;
        if (s == "krylov") return MatrixFunctionMethod::Krylov;
        if (s == "dense") return MatrixFunctionMethod::Dense;
        throw InvalidArgument("unknown phi_method '" + s + "' (expected auto, krylov or dense)");
    });
    return c;
}

NormKind parse_norm(const std::string& name) {
    for (NormKind k : {NormKind::L2Bulk, NormKind::L2Surf, NormKind::Energy, NormKind::HCombined,
                       NormKind::HMinusHalf})
        if (to_string(k) == name) return k;
    throw InvalidArgument("unknown norm '" + name + "' (expected l2_bulk, l2_surf, energy, h_combined or hminus_half_surf)");
}

EocGate gate_from_config(const Config& cfg) {
    EocGate g;
    for (const auto& key : cfg.keys("study")) {
        for (const char* prefix : {"min_eoc.", "max_eoc."}) {
            const std::string p = prefix;
            if (key.rfind(p, 0) != 0) continue;
            const NormKind norm = parse_key(cfg, "study", key, "", [&](const std::string&) {
                return parse_norm(key.substr(p.size()));
            });
            auto& list = p == "min_eoc." ? g.min_eoc : g.max_eoc;
            list.emplace_back(norm, cfg.get_double("study", key));
        }
    }
    g.order_tolerance = cfg.get_optional_double("study", "order_tolerance");
    g.order_norm = parse_key(cfg, "study", "order_norm", "h_combined", parse_norm);
    g.check_last = cfg.get_int("study", "check_last", 1);
    if (g.check_last < 1) throw ConfigError("check_last must be at least 1", cfg.line_of("study", "check_last"));
    return g;
}

std::vector<std::string> check_gate(const ErrorTable& table, const EocGate& gate, std::optional<int> order) {
    std::vector<std::string> failures;
    const auto check = [&](NormKind norm, const std::string& what, const std::function<bool(double)>& ok) {
        const auto rates = table.rates(norm);
        const int n = static_cast<int>(rates.size());
        for (int i = std::max(0, n - gate.check_last); i < n; ++i) {
            if (!rates[i]) continue;  // single row or zero error
            if (!ok(*rates[i])) {
                std::ostringstream ss;
                ss << to_string(norm) << " EOC " << *rates[i] << " at row " << i + 1 << " violates " << what;
                failures.push_back(ss.str());
            }
        }
    };
    for (const auto& [norm, v] : gate.min_eoc)
        check(norm, ">= " + format_double(v), [v = v](double r) { return r >= v; });
    for (const auto& [norm, v] : gate.max_eoc)
        check(norm, "<= " + format_double(v), [v = v](double r) { return r <= v; });
    if (gate.order_tolerance && order) {
        const double tol = *gate.order_tolerance;
        const int k = *order;
        check(gate.order_norm, "|EOC - " + std::to_string(k) + "| <= " + format_double(tol),
              [=](double r) { return std::abs(r - k) <= tol; });
    }
    return failures;
}

// ------------------------------------------------------------------ commands

CommandResult cmd_solve(const Config& cfg, std::ostream& log) {
    const ProblemSpec problem = problem_from_config(cfg);
    IntegratorConfig ic = integrator_from_config(cfg, problem.T);
    ic.output_times = cfg.get_doubles("output", "times", {ic.T});
    const int level = cfg.get_int("mesh", "level", 8);
    const Lumping lumping = lumping_from_config(cfg);
    const LoadMode load = load_from_config(cfg);
    const bool vtk = cfg.get_bool("output", "vtk", true);
    const fs::path dir = output_dir(cfg);
    const std::string hash = cfg.hash();

    auto t0 = std::chrono::steady_clock::now();
    const Mesh mesh = phase("mesh", [&] { return make_mesh(problem.domain, level); });
    const DiscreteModel model = phase("assembly", [&] { return DiscreteModel(problem, mesh, lumping, load); });
    phase("assembly", [&] { return model.system(0.0).size(); });
    const double t_assembly = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    RunReport report = phase("integration", [&] { return run(model, ic); });
    if (report.snapshots.empty() || report.snapshots.back().t != report.t_final)
        report.snapshots.push_back({report.t_final, report.final});
    const double t_integration = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    CommandResult result;
    const auto path = dir / "report.csv";
    auto os = open_output(path);
    os << csv_header(hash) << '\n';
    os << "problem,level,h,tau,dofs,t,steps,newton_iterations,krylov_iterations,m_norm";
    std::optional<ErrorMeasure> em;
    if (problem.exact) {
        em.emplace(mesh);
        os << ",l2_bulk,l2_surf,energy,h_combined,hminus_half";
    }
    os << '\n';
    os.precision(17);
    for (const auto& snap : report.snapshots) {
        const AssembledSystem& sys = model.system(snap.t);
        os << problem.name << ',' << level << ',' << mesh.h() << ',' << ic.tau << ',' << mesh.num_vertices() << ','
           << snap.t << ',' << report.steps << ',' << report.newton_iterations << ',' << report.krylov_iterations
           << ',' << mass_norm(sys, snap.u);
        if (em) {
            const ErrorNorms e = phase("error", [&] { return (*em)(snap.u, *problem.exact, problem.coeffs, snap.t); });
            os << ',' << e.l2_bulk << ',' << e.l2_surf << ',' << e.energy << ',' << e.h_combined << ','
               << e.hminus_half_surf;
        }
        os << '\n';
        if (vtk) {
            const auto vpath = dir / snapshot_filename(snap.t);
            auto vs = open_output(vpath);
            std::vector<NodalField> fields{{"u", snap.u}};
            Vector exact_values;
            if (problem.exact) {
                exact_values = interpolate(mesh, problem.exact->u, snap.t);
                fields.push_back({"u_exact", exact_values});
            }
            write_vtk(vs, mesh, fields, problem.name + " t=" + format_double(snap.t));
            result.files.push_back(vpath.string());
        }
    }
    result.files.push_back(path.string());
    log << "solve " << problem.name << " level " << level << " dofs " << mesh.num_vertices() << " steps "
        << report.steps << " | assembly " << t_assembly << " s, integration " << t_integration << " s, output "
        << seconds_since(t0) << " s\n";
    return result;
}

CommandResult cmd_convergence(const Config& cfg, std::ostream& log) {
    const ProblemSpec problem = problem_from_config(cfg);
    const IntegratorConfig base = integrator_from_config(cfg, problem.T);
    const std::string type = cfg.get_string("study", "type", "spatial");
    const Lumping lumping = lumping_from_config(cfg);
    const LoadMode load = load_from_config(cfg);
    const EocGate gate = gate_from_config(cfg);
    const fs::path dir = output_dir(cfg);
    const std::string prefix = cfg.get_string("output", "prefix", type);
    const std::string hash = cfg.hash();
    const int threads = thread_limit();
    CommandResult result;

    const auto emit = [&](const std::string& name, const ErrorTable& table, std::optional<int> order) {
        const auto path = dir / (name + ".csv");
        auto os = open_output(path);
        os << csv_header(hash) << '\n';
        table.write_csv(os);
        result.files.push_back(path.string());
        log << name << ":";
        for (NormKind k : {NormKind::L2Bulk, NormKind::HCombined, NormKind::Energy}) {
            const auto rates = table.rates(k);
            if (!rates.empty() && rates.back()) log << ' ' << to_string(k) << " eoc " << *rates.back();
        }
        log << '\n';
        for (auto& f : check_gate(table, gate, order)) result.failures.push_back(name + ": " + f);
    };

    const auto t0 = std::chrono::steady_clock::now();
    if (type == "spatial" || type == "coupled") {
        SpatialStudy s;
        s.problem = problem;
        s.levels = levels_from_config(cfg, {4, 8, 16, 32});
        s.lumping = lumping;
        s.load = load;
        s.integrator = base;
        s.rule = parse_key(cfg, "study", "step_rule", type == "spatial" ? "h2" : "h", parse_step_rule);
        s.tau_factor = cfg.get_double("study", "tau_factor", s.rule == StepRule::HSquared ? 0.25 : 0.5);
        emit(prefix, phase("spatial study", [&] { return spatial_study(s, threads); }), std::nullopt);
    } else if (type == "temporal") {
        TemporalStudy s;
        s.problem = problem;
        s.level = cfg.get_int("mesh", "level", 32);
        s.lumping = lumping;
        s.load = load;
        s.integrator = base;
        s.taus = cfg.get_doubles("study", "taus", {1.0 / 10, 1.0 / 20, 1.0 / 40, 1.0 / 80, 1.0 / 160});
        if (s.taus.empty()) throw ConfigError("[study] taus is empty", cfg.line_of("study", "taus"));
        s.reference_tau = cfg.get_double("study", "reference_tau", s.reference_tau);
        if (cfg.has("study", "reference_method"))
            s.reference_method = parse_key(cfg, "study", "reference_method", "", parse_method);
        if (cfg.has("study", "reference_k")) s.reference_k = cfg.get_int("study", "reference_k", 5);
        const auto methods = cfg.get_strings("study", "methods", {to_string(base.method)});
        const auto orders = cfg.get_ints("study", "orders", {base.k});
        const Mesh mesh = make_mesh(problem.domain, s.level);
        const DiscreteModel model(problem, mesh, lumping, load);
        std::map<std::pair<Method, int>, Vector> references;
        for (const auto& mname : methods) {
            const Method m = parse_key(cfg, "study", "methods", "", [&](const std::string&) { return parse_method(mname); });
            const std::vector<int> ks = m == Method::BDF ? orders : std::vector<int>{base.k};
            for (int k : ks) {
                if (k < 1 || k > 5) throw ConfigError("orders must lie in 1..5", cfg.line_of("study", "orders"));
                s.integrator.method = m;
                s.integrator.k = k;
                const IntegratorConfig rc = reference_config(s);
                auto& ref = references[{rc.method, rc.k}];
                if (ref.empty()) ref = phase("reference run", [&] { return temporal_reference(s, model); });
                const std::string name = prefix + "_" + mname + (m == Method::BDF ? std::to_string(k) : "");
                const ErrorTable table = phase("temporal study", [&] { return temporal_study(s, &ref, threads); });
                emit(name, table, m == Method::BDF ? std::optional<int>(k) : std::nullopt);
            }
        }
    } else if (type == "ritz") {
        const double t = cfg.get_double("study", "time", 0.0);
        const auto levels = levels_from_config(cfg, {4, 8, 16, 32});
        const RitzStudyResult r = phase("ritz study", [&] { return ritz_study(problem, levels, t, threads); });
        emit(prefix, r.table, std::nullopt);
        const double max_res = cfg.get_double("study", "max_residual", 1e-10);
        log << "max orthogonality residual " << r.max_residual << '\n';
        if (!(r.max_residual <= max_res))
            result.failures.push_back("orthogonality residual " + format_double(r.max_residual) + " exceeds " +
                                      format_double(max_res));
    } else {
        throw ConfigError("unknown study type '" + type + "' (expected spatial, coupled, temporal or ritz)",
                          cfg.line_of("study", "type"));
    }
    log << "convergence study finished in " << seconds_since(t0) << " s\n";
    for (const auto& f : result.failures) log << "FAIL " << f << '\n';
    result.status = result.failures.empty() ? 0 : 3;
    return result;
}

CommandResult cmd_stability(const Config& cfg, std::ostream& log) {
    StabilitySweep s;
    s.problem = phase("problem", [&] { return builtin(cfg.get_string("problem", "name", "coupled_square")); });
    const auto mu = cfg.get_optional_double("problem", "mu");
    const auto kappa = cfg.get_optional_double("problem", "kappa");
    const auto beta = cfg.get_optional_double("problem", "beta");
    if (mu || kappa || beta) s.problem = with_constant_coefficients(std::move(s.problem), mu, kappa, beta);
    s.levels = levels_from_config(cfg, s.levels);
    s.taus = cfg.get_doubles("study", "taus", s.taus);
    if (s.taus.empty()) throw ConfigError("[study] taus is empty", cfg.line_of("study", "taus"));
    for (double tau : s.taus)
        if (!(tau > 0.0)) throw ConfigError("taus must be positive", cfg.line_of("study", "taus"));
    s.random_systems = cfg.get_int("study", "random_systems", 0);
    s.seed = static_cast<unsigned long long>(cfg.get_int("study", "seed", 1));
    s.mnorm_levels = cfg.get_ints("study", "mnorm_levels", s.levels);
    s.mnorm_steps = cfg.get_int("study", "mnorm_steps", s.mnorm_steps);
    const fs::path dir = output_dir(cfg);
    const std::string hash = cfg.hash();

    const StabilitySweepResult r = phase("stability sweep", [&] { return stability_sweep(s, thread_limit()); });
    CommandResult result;
    {
        const auto path = dir / "stability.csv";
        auto os = open_output(path);
        os << csv_header(hash) << '\n';
        write_stability_csv(os, r.rows);
        result.files.push_back(path.string());
    }
    {
        const auto path = dir / "force_mnorm.csv";
        auto os = open_output(path);
        os << csv_header(hash) << '\n';
        write_mnorm_csv(os, r.mnorm);
        result.files.push_back(path.string());
    }
    double worst_lsl = 0.0, worst_l10 = 0.0, worst_ratio = 0.0;
    for (const auto& row : r.rows) {
        worst_lsl = std::max(worst_lsl, row.report.lsl_norm);
        worst_l10 = std::max(worst_l10, row.report.l10_norm);
        if (!row.report.pass)
            result.failures.push_back(row.system + " tau " + format_double(row.report.tau) + ": stability bound violated");
    }
    for (const auto& row : r.mnorm) {
        worst_ratio = std::max(worst_ratio, row.max_ratio);
        if (!row.pass)
            result.failures.push_back(row.system + " " + to_string(row.method) + " tau " + format_double(row.tau) +
                                      ": M-norm increased");
    }
    log << "stability: " << r.rows.size() << " stability checks, max |L S L^-1| " << worst_lsl << ", max |L10| "
        << worst_l10 << "; " << r.mnorm.size() << " M-norm runs, max ratio " << worst_ratio << '\n';
    for (const auto& f : result.failures) log << "FAIL " << f << '\n';
    result.status = result.failures.empty() ? 0 : 3;
    return result;
}

void cmd_list_problems(std::ostream& os) {
    for (const auto& name : builtin_names()) {
        const ProblemSpec p = builtin(name);
        os << name << " (" << to_string(p.domain) << (p.is_linear() ? ", linear" : ", semi-linear")
           << (p.exact ? ", exact solution" : "") << "): " << p.description << '\n';
    }
}

}  // namespace dynbc
