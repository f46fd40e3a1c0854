#include "dynbc/errors.hpp"
#include "dynbc/integrators.hpp"
#include "dynbc/problems.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace dynbc;

namespace {

constexpr double kPi = std::numbers::pi;

CoefficientSet constants(double mu, double kappa, double beta) {
    return {Coefficient::constant(mu), Coefficient::constant(kappa), Coefficient::constant(beta)};
}

// Exact bundle given only by u; derivative closures are deliberately absent.
ExactSolution from_u(ScalarField u) {
    ExactSolution e;
    e.u = u;
    e.trace = u;
    return e;
}

// Finite-difference derivatives of u, independent of the closures.
struct Fd {
    ScalarField u;
    double h = 1e-4;
    double dt(Point p, double t) const { return (u(p, t + h) - u(p, t - h)) / (2 * h); }
    Point grad(Point p, double t) const {
        return {(u({p.x + h, p.y}, t) - u({p.x - h, p.y}, t)) / (2 * h),
                (u({p.x, p.y + h}, t) - u({p.x, p.y - h}, t)) / (2 * h)};
    }
    double laplacian(Point p, double t) const {
        return (u({p.x + h, p.y}, t) + u({p.x - h, p.y}, t) + u({p.x, p.y + h}, t) + u({p.x, p.y - h}, t) -
                4 * u(p, t)) /
               (h * h);
    }
    // Second derivative along the boundary arclength.
    double surface_laplacian(DomainKind d, Point p, double t) const {
        if (d == DomainKind::Disk) {
            const double th = std::atan2(p.y, p.x);
            const auto at = [&](double a) { return u({std::cos(a), std::sin(a)}, t); };
            return (at(th + h) - 2 * at(th) + at(th - h)) / (h * h);
        }
        const Point n = boundary_normal(d, p), tau{-n.y, n.x};
        return (u({p.x + h * tau.x, p.y + h * tau.y}, t) - 2 * u(p, t) + u({p.x - h * tau.x, p.y - h * tau.y}, t)) /
               (h * h);
    }
};

Point random_boundary_point(DomainKind d, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    if (d == DomainKind::Disk) {
        const double a = 2 * kPi * U(rng);
        return {std::cos(a), std::sin(a)};
    }
    // Away from the corners, where the square's surface operators are undefined.
    const double s = 0.05 + 0.9 * U(rng);
    switch (static_cast<int>(4 * U(rng))) {
        case 0: return {s, 0.0};
        case 1: return {1.0, s};
        case 2: return {s, 1.0};
        default: return {0.0, s};
    }
}

Point random_interior_point(DomainKind d, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    if (d == DomainKind::Disk) {
        const double r = 0.95 * std::sqrt(U(rng)), a = 2 * kPi * U(rng);
        return {r * std::cos(a), r * std::sin(a)};
    }
    return {0.05 + 0.9 * U(rng), 0.05 + 0.9 * U(rng)};
}

// Strong-form residuals of the PDE and the dynamic boundary condition,
// with all derivatives of u taken by finite differences.
void expect_strong_residual(const ProblemSpec& p, double tol) {
    ASSERT_TRUE(p.exact.has_value());
    const Fd fd{p.exact->u};
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> T(0.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        const double t = T(rng);
        const Point x = random_interior_point(p.domain, rng);
        const double u = p.exact->u(x, t);
        double nl = 0.0;
        if (p.nonlinearity && p.nonlinearity->f_bulk) nl = p.nonlinearity->f_bulk(u);
        const double fb = p.f_bulk ? p.f_bulk(x, t) : 0.0;
        EXPECT_NEAR(fd.dt(x, t) - fd.laplacian(x, t), fb + nl, tol) << p.name << " bulk at " << x.x << "," << x.y;

        const Point y = random_boundary_point(p.domain, rng);
        const double uy = p.exact->u(y, t);
        const Point n = boundary_normal(p.domain, y);
        const Point g = fd.grad(y, t);
        const double mu = p.coeffs.mu(y, t), kappa = p.coeffs.kappa(y, t), beta = p.coeffs.beta(y, t);
        double nls = 0.0;
        if (p.nonlinearity && p.nonlinearity->f_surf) nls = p.nonlinearity->f_surf(uy);
        const double fs = p.f_surf ? p.f_surf(y, t) : 0.0;
        // μ ∂_t u - β Δ_Γ u + κ u + ∂_ν u = μ (f_Γ + nonlinearity)
        const double lhs = mu * fd.dt(y, t) - beta * fd.surface_laplacian(p.domain, y, t) + kappa * uy + dot(g, n);
        EXPECT_NEAR(lhs, mu * (fs + nls), tol) << p.name << " surface at " << y.x << "," << y.y;
    }
}

}  // namespace

TEST(Mms, ZeroSolutionHasZeroSources) {
    const auto s = mms_sources(linear_solution(0, 0, 0, DomainKind::Square), constants(2, 3, 1));
    for (Point p : {Point{0.3, 0.4}, Point{0.0, 0.5}})
        for (double t : {0.0, 0.7}) {
            EXPECT_EQ(s.f_bulk(p, t), 0.0);
            EXPECT_EQ(s.f_surf(p, t), 0.0);
        }
}

TEST(Mms, SpatiallyConstantSolution) {
    ExactSolution e = linear_solution(0, 0, 0, DomainKind::Square);
    e.u = e.trace = [](Point, double t) { return std::exp(-t); };
    e.u_t = e.trace_t = [](Point, double t) { return -std::exp(-t); };
    const double mu = 2.0, kappa = 3.0;
    const auto s = mms_sources(e, constants(mu, kappa, 1));
    const double t = 0.4;
    EXPECT_NEAR(s.f_bulk({0.5, 0.5}, t), -std::exp(-t), 1e-15);
    EXPECT_NEAR(s.f_surf({0.5, 0.0}, t), -std::exp(-t) + kappa * std::exp(-t) / mu, 1e-15);
}

TEST(Mms, CosineSolutionFormulas) {
    const auto e = cosine_square_solution();
    const double mu = 2.0, kappa = 0.5, beta = 3.0;
    const auto s = mms_sources(e, constants(mu, kappa, beta));
    const Point x{0.3, 0.7};
    const double t = 0.2;
    const double u = std::exp(-t) * std::cos(kPi * x.x) * std::cos(kPi * x.y);
    EXPECT_NEAR(s.f_bulk(x, t), (2 * kPi * kPi - 1) * u, 1e-12);
    // Bottom side: ∂_ν u = -∂_y u = 0, Δ_Γ u = ∂_xx u = -π² u.
    const Point b{0.3, 0.0};
    const double ub = std::exp(-t) * std::cos(kPi * b.x);
    EXPECT_NEAR(s.f_surf(b, t), -ub + (kappa * ub + beta * kPi * kPi * ub) / mu, 1e-12);
}

TEST(Mms, MissingClosureIsReported) {
    try {
        mms_sources(from_u([](Point, double) { return 0.0; }), constants(1, 0, 1));
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("u_t"), std::string::npos);
    }
}

TEST(Mms, VaryingBetaRejected) {
    CoefficientSet c = constants(1, 0, 1);
    c.beta = Coefficient::varying([](Point p, double) { return 1 + p.x; }, true, false);
    EXPECT_THROW(mms_sources(cosine_square_solution(), c), ConfigError);
}

TEST(ExactClosures, MatchFiniteDifferences) {
    struct Case {
        ExactSolution e;
        DomainKind d;
    };
    for (const Case& c : {Case{cosine_square_solution(), DomainKind::Square},
                          Case{harmonic_disk_solution(), DomainKind::Disk},
                          Case{plateau_square_solution(), DomainKind::Square},
                          Case{linear_solution(1, 2, -3, DomainKind::Disk), DomainKind::Disk}}) {
        const Fd fd{c.e.u};
        std::mt19937_64 rng(5);
        for (int k = 0; k < 30; ++k) {
            const double t = 0.1 * k / 3.0;
            const Point x = random_interior_point(c.d, rng);
            EXPECT_NEAR(c.e.u_t(x, t), fd.dt(x, t), 1e-7);
            EXPECT_NEAR(c.e.grad(x, t).x, fd.grad(x, t).x, 1e-7);
            EXPECT_NEAR(c.e.grad(x, t).y, fd.grad(x, t).y, 1e-7);
            EXPECT_NEAR(c.e.laplacian(x, t), fd.laplacian(x, t), 1e-5);
            const Fd fdt{c.e.u_t};
            EXPECT_NEAR(c.e.grad_t(x, t).x, fdt.grad(x, t).x, 1e-7);

            const Point y = random_boundary_point(c.d, rng);
            const Point n = boundary_normal(c.d, y), tau{-n.y, n.x};
            EXPECT_NEAR(c.e.trace(y, t), c.e.u(y, t), 1e-14);
            EXPECT_NEAR(c.e.trace_t(y, t), fd.dt(y, t), 1e-7);
            EXPECT_NEAR(c.e.normal_derivative(y, t), dot(fd.grad(y, t), n), 1e-7);
            EXPECT_NEAR(dot(c.e.surface_grad(y, t), tau), dot(fd.grad(y, t), tau), 1e-7);
            EXPECT_NEAR(dot(c.e.surface_grad(y, t), n), 0.0, 1e-14);
            EXPECT_NEAR(c.e.surface_laplacian(y, t), fd.surface_laplacian(c.d, y, t), 1e-5);
        }
    }
}

TEST(Builtins, StrongResidualVanishes) {
    for (const auto& name : builtin_names()) {
        const ProblemSpec p = builtin(name);
        if (!p.exact) continue;
        expect_strong_residual(p, 1e-4);
    }
}

TEST(Builtins, CoefficientOverrideRegeneratesSources) {
    expect_strong_residual(with_constant_coefficients(builtin("coupled_square"), 2.5, 1.5, 0.25), 1e-4);
    expect_strong_residual(with_constant_coefficients(builtin("coupled_disk"), std::nullopt, std::nullopt, 0.0), 1e-4);
    expect_strong_residual(with_constant_coefficients(builtin("allen_cahn_mms_square"), 3.0, std::nullopt, std::nullopt),
                           1e-4);
}

TEST(Builtins, Facts) {
    const auto w = builtin("wentzell_square");
    EXPECT_TRUE(w.coeffs.beta.identically_zero);
    EXPECT_EQ(w.coeffs.mu({0.5, 0}, 0), 1.0);
    EXPECT_EQ(w.coeffs.kappa({0.5, 0}, 0), 1.0);
    EXPECT_TRUE(w.is_linear());

    const auto d = builtin("coupled_disk");
    EXPECT_EQ(d.domain, DomainKind::Disk);
    EXPECT_NEAR(d.exact->u({1, 0}, 0), 1.0, 1e-15);

    const auto s = builtin("splitting_square");
    EXPECT_EQ(s.exact->trace({0.3, 0.0}, 0.5), 1.0);

    const auto na = builtin("nonauto_square");
    EXPECT_FALSE(na.coeffs.autonomous());
    std::mt19937_64 rng(1);
    for (int k = 0; k < 200; ++k) {
        const Point y = random_boundary_point(DomainKind::Square, rng);
        const double t = 10.0 * k / 200.0;
        EXPECT_GE(na.coeffs.mu(y, t), 1.0);
        EXPECT_GT(na.coeffs.beta(y, t), 0.0);
    }

    const auto ac = builtin("allen_cahn_square");
    EXPECT_FALSE(ac.is_linear());
    EXPECT_TRUE(ac.potentials.has_value());
    EXPECT_FALSE(ac.exact.has_value());
    EXPECT_EQ(ac.nonlinearity->f_bulk(1.0), 0.0);
    EXPECT_EQ(ac.nonlinearity->f_surf(-1.0), 0.0);
}

TEST(Builtins, DerivativeMapsMatchNonlinearity) {
    for (const auto& name : builtin_names()) {
        const ProblemSpec p = builtin(name);
        if (!p.nonlinearity) continue;
        for (double u : {-2.0, -0.3, 0.0, 0.7, 1.5}) {
            const double h = 1e-6;
            if (p.nonlinearity->f_bulk) {
                EXPECT_NEAR(p.nonlinearity->df_bulk(u),
                            (p.nonlinearity->f_bulk(u + h) - p.nonlinearity->f_bulk(u - h)) / (2 * h), 1e-6);
            }
            if (p.nonlinearity->f_surf) {
                EXPECT_NEAR(p.nonlinearity->df_surf(u),
                            (p.nonlinearity->f_surf(u + h) - p.nonlinearity->f_surf(u - h)) / (2 * h), 1e-6);
            }
        }
    }
}

TEST(Builtins, AllenCahnConstantStateIsStationary) {
    ProblemSpec p = builtin("allen_cahn_square");
    p.u0 = [](Point, double) { return 1.0; };
    const Mesh m = generate_square_mesh(4);
    const DiscreteModel model(p, m, Lumping::Consistent);
    IntegratorConfig c;
    c.k = 1;
    c.tau = 0.05;
    c.T = 0.5;
    for (double v : run(model, c).final) EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(Builtins, AllAssembleAndStep) {
    for (const auto& name : builtin_names()) {
        const ProblemSpec p = builtin(name);
        const Mesh m = p.domain == DomainKind::Disk ? generate_disk_mesh(16) : generate_square_mesh(4);
        const DiscreteModel model(p, m, Lumping::Consistent);
        IntegratorConfig c;
        c.k = 1;
        c.tau = 0.01;
        c.T = 0.01;
        const auto rep = run(model, c);
        EXPECT_EQ(rep.steps, 1) << name;
        for (double v : rep.final) EXPECT_TRUE(std::isfinite(v)) << name;
        EXPECT_FALSE(p.description.empty());
    }
}

TEST(Builtins, UnknownNameListsBuiltins) {
    try {
        builtin("no_such_problem");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        for (const auto& n : builtin_names()) EXPECT_NE(msg.find(n), std::string::npos) << n;
    }
}

TEST(BoundaryNormal, Examples) {
    EXPECT_EQ(boundary_normal(DomainKind::Square, {0.5, 0.0}).y, -1.0);
    EXPECT_EQ(boundary_normal(DomainKind::Square, {1.0, 0.3}).x, 1.0);
    const Point n = boundary_normal(DomainKind::Disk, {0.0, 0.98});
    EXPECT_NEAR(n.y, 1.0, 1e-15);
}
