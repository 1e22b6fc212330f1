#include <doctest.h>

#include <agepde/carleman.hpp>
#include <agepde/error.hpp>
#include <agepde/weight.hpp>

#include "helpers.hpp"

using namespace agepde;
using namespace testing;

namespace {

// Displayed formulas, evaluated term by term.
struct DirichletOracle {
    double C2, K, ell_lhs, bound;
};

DirichletOracle dirichlet_oracle(double c, double M, double k, double m0, double mu0, double eta0, double alpha,
                                 double LF) {
    DirichletOracle o;
    o.C2 = (2.0 / c) * (k / (8.0 * m0) + (mu0 + eta0) / 2.0 + (mu0 + eta0) * (mu0 + eta0) / 2.0);
    o.K = k / (4.0 * m0) + o.C2 * (0.5 + k * M / (4.0 * m0));
    o.ell_lhs = 2.0 * ((mu0 + eta0) * M / 2.0 + k * M / (8.0 * m0));
    o.bound = 1.0 / (4.0 * alpha * LF * LF);
    return o;
}

struct RobinOracle {
    double K3, K4, C4, K, bound;
};

RobinOracle robin_oracle(const RobinParams& p) {
    RobinOracle o;
    const double s0 = p.mu0 + p.eta0;
    o.K3 = 4.0 * p.m0 / p.k - p.eta0 * p.eta0 / 4.0 - 2.0 * p.m_bar * s0 * s0 * p.C0;
    o.K4 = 0.5 + (2.0 * p.m0 / p.k) * s0;
    const double r = o.K4 / o.K3;
    o.C4 = (2.0 / p.c_lower) * std::max(r + s0 * s0 / 2.0, 16.0 * r * p.C0);
    o.K = 1.0 / o.K3 + o.C4;
    o.bound = std::min({1.0 / (p.alpha * p.L_F * p.L_F), 1.0 / (p.C0 * p.beta * p.L_S * p.L_S),
                        1.0 / (p.beta * p.L_S * p.L_S)}) / 8.0;
    return o;
}

RobinParams stated_robin() {
    RobinParams p;
    p.c_lower = 1.0;
    p.M_bar = 0.0;
    p.m_bar = 0.5;
    p.C0 = 2.0;
    p.k = 1.0;
    p.m0 = 16.0;
    p.mu0 = 0.1;
    p.eta0 = 0.05;
    p.alpha = 1.0;
    p.L_F = 1.0;
    p.beta = 0.5;
    p.L_S = 0.1;
    return p;
}

Field bump_in_P(const Grid& g, const CutoffSpec& c, double phase) {
    TAArray kap = make_cutoff(c, CutoffKind::Kappa, g);
    Field f = make_field(g, [&](double t, double a, const Point& x) {
        return std::sin(pi * t / g.T) * std::sin(pi * a / g.a_dagger) * std::sin(pi * x[0]) *
               (1.0 + 0.5 * std::cos(phase + 3.0 * x[0]));
    });
    Field v = multiply(kap, f);
    v.set_flags({true, true, true});
    return v;
}

}  // namespace

TEST_CASE("weight examples") {
    Grid g = grid1(1.0, 1.0, 0.25, 2);
    WeightSpec w{3.0, 1.5, 0.05};
    auto wa = weight_field(w, g);
    CHECK(abs_lambda(g, 1.0, 1.0, 0.05) == doctest::Approx(0.05));
    CHECK(abs_lambda(g, 0.0, 0.0, 0.05) == doctest::Approx(2.05));
    CHECK(wa.w(g.Nt, g.Na) == doctest::Approx(std::pow(0.05, -2.0)));
    for (int i = 0; i < g.Nt; ++i)
        for (int j = 0; j < g.Na; ++j) {
            CHECK(wa.w(i + 1, j) > wa.w(i, j));
            CHECK(wa.w(i, j + 1) > wa.w(i, j));
        }
}

TEST_CASE("property: weight bounds") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        WeightSpec w{1.0 + 30.0 * u(rng), 0.5 + 3.0 * u(rng), 0.01 + 0.2 * u(rng)};
        Grid g = grid1(0.5, 1.0, 0.125, 2);
        auto wa = weight_field(w, g);
        const double p = w.exponent();
        for (double v : wa.w.values()) {
            CHECK(v > 0.0);
            CHECK(v <= std::pow(w.eta, -p) * (1 + 1e-12));
            CHECK(v >= std::pow(g.T + g.a_dagger + w.eta, -p) * (1 - 1e-12));
        }
    }
}

TEST_CASE("cutoff values") {
    Grid g = grid1(1.0, 1.0, 0.125, 2);
    CutoffSpec c{0.25, 0.5, 0.25, 0.5, std::nullopt, std::nullopt, 2};
    TAArray k = make_cutoff(c, CutoffKind::Kappa, g);
    TAArray kb = make_cutoff(c, CutoffKind::KappaBar, g);
    CHECK(k.values() == kb.values());
    for (int i = 0; i <= g.Nt; ++i)
        for (int j = 0; j <= g.Na; ++j) {
            if (g.t(i) >= 0.5 && g.a(j) >= 0.5) CHECK(k(i, j) == 1.0);
            if (g.t(i) <= 0.25 || g.a(j) <= 0.25) CHECK(k(i, j) == 0.0);
        }
    CutoffSpec mid{0.125, 0.375, 0.125, 0.375, std::nullopt, std::nullopt, 2};
    CHECK(make_cutoff(mid, CutoffKind::Kappa, g)(2, 2) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(smoothstep(0.5, 2) == doctest::Approx(0.5).epsilon(1e-15));

    TAArray chi = make_cutoff(c, CutoffKind::TerminalChi, g);
    for (int j = 0; j <= g.Na; ++j) CHECK(chi(g.Nt, j) == 0.0);
    for (int i = 0; i <= g.Nt; ++i) CHECK(chi(i, g.Na) == 0.0);

    CutoffSpec off{0.3, 0.5, 0.25, 0.5, std::nullopt, std::nullopt, 2};
    try {
        make_cutoff(off, CutoffKind::Kappa, g);
        FAIL("expected BreakpointOffGrid");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::BreakpointOffGrid);
    }
}

TEST_CASE("property: smoothstep odd symmetry") {
    for (int p = 2; p <= 4; ++p)
        for (int s = 0; s <= 100; ++s) {
            double x = s / 100.0;
            CHECK(smoothstep(x, p) + smoothstep(1.0 - x, p) == doctest::Approx(1.0).epsilon(1e-12));
        }
}

TEST_CASE("Dirichlet constants for the stated set") {
    DirichletParams p;
    auto c = compute_constants_dirichlet(p);
    auto o = dirichlet_oracle(1.0, 0.0, 1.0, 8.0, 0.2, 0.05, 1.0, 1.0);
    CHECK(c.C2 == 0.34375);
    CHECK(c.K == 0.203125);
    CHECK(c.C2 == o.C2);
    CHECK(c.K == o.K);
    CHECK(c.ellipticity.ok);
    CHECK(c.ellipticity.slack == 1.0);
    CHECK(c.source_bound.ok);
    CHECK(c.source_bound.slack == o.bound - o.K);
}

TEST_CASE("property: Dirichlet constants match the displayed formulas bitwise") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int s = 0; s < 200; ++s) {
        DirichletParams p;
        p.c_lower = 0.1 + u(rng);
        p.M_bar = s % 3 == 0 ? 0.0 : u(rng);
        p.k = 0.5 + 2.0 * u(rng);
        p.m0 = 1.0 + 40.0 * u(rng);
        p.mu0 = 0.01 + u(rng);
        p.eta0 = 0.01 + 0.2 * u(rng);
        p.alpha = 0.05 + 0.95 * u(rng);
        p.L_F = 0.1 + 2.0 * u(rng);
        auto c = compute_constants_dirichlet(p);
        auto o = dirichlet_oracle(p.c_lower, p.M_bar, p.k, p.m0, p.mu0, p.eta0, p.alpha, p.L_F);
        CHECK(c.C2 == o.C2);
        CHECK(c.K == o.K);
        CHECK(c.ellipticity.ok == (o.ell_lhs <= p.c_lower));
        CHECK(c.source_bound.ok == (o.K <= o.bound));
        if (p.M_bar == 0.0) CHECK(c.ellipticity.ok);
    }
}

TEST_CASE("mu0_prime") {
    // Long-double evaluation of 0.05^(8/9) 2^(1/18) - 0.05.
    long double ref = std::pow(0.05L, 8.0L / 9.0L) * std::pow(2.0L, 1.0L / 18.0L) - 0.05L;
    CHECK(mu0_prime(0.5, 8.0, 1.0, 0.05) == doctest::Approx(double(ref)).epsilon(1e-14));
    CHECK(double(ref) == doctest::Approx(0.0226).epsilon(0.01));
}

TEST_CASE("Robin constants for the stated set") {
    RobinParams p = stated_robin();
    auto c = compute_constants_robin(p);
    auto o = robin_oracle(p);
    CHECK(c.K3 == doctest::Approx(63.954375).epsilon(1e-15));
    CHECK(c.K4 == doctest::Approx(5.3).epsilon(1e-15));
    CHECK(c.K3 == o.K3);
    CHECK(c.K4 == o.K4);
    REQUIRE(c.C4.has_value());
    CHECK(*c.C4 == o.C4);
    CHECK(*c.K == o.K);
    CHECK(*c.C4 == doctest::Approx(5.3038).epsilon(1e-4));
    CHECK(*c.K == doctest::Approx(5.3194).epsilon(1e-4));
    CHECK(o.bound == doctest::Approx(0.125));
    CHECK_FALSE(c.k_bound.ok);
}

TEST_CASE("Robin constants with a small horizon") {
    RobinParams p = stated_robin();
    p.mu0 = 0.005;
    p.eta0 = 0.005;
    p.L_F = 0.5;
    auto c = compute_constants_robin(p);
    auto o = robin_oracle(p);
    auto big = compute_constants_robin(stated_robin());
    REQUIRE(c.C4.has_value());
    CHECK(*c.C4 == o.C4);
    CHECK(*c.C4 < *big.C4);
    // The 1/2 in K4 keeps C4 near 2 (1/2) 16 C0 / (4 m0) = 0.5 + 16 C0 (mu0 + eta0).
    CHECK(*c.C4 == doctest::Approx(0.5 + 16.0 * p.C0 * (p.mu0 + p.eta0)).epsilon(1e-3));
    CHECK(c.k_bound.ok == (o.K <= o.bound));
}

TEST_CASE("K4/K3 decreases in m0") {
    for (double m0 : {4.0, 8.0, 16.0, 32.0}) {
        RobinParams p = stated_robin();
        p.m0 = m0;
        auto a = compute_constants_robin(p);
        p.m0 = 2.0 * m0;
        auto b = compute_constants_robin(p);
        CHECK(b.K4 / b.K3 < a.K4 / a.K3);
    }
}

TEST_CASE("nonpositive K1 leaves K absent") {
    RobinParams p = stated_robin();
    p.m0 = 0.001;
    p.m_bar = 100.0;
    auto c = compute_constants_robin(p);
    CHECK_FALSE(c.k1_positive.ok);
    CHECK_FALSE(c.K.has_value());
    CHECK_FALSE(c.k_bound.ok);
}

TEST_CASE("Dirichlet estimates") {
    Grid g = grid1(0.1, 0.1, 0.1 / 40, 64);
    CutoffSpec cut{0.02, 0.05, 0.02, 0.05, std::nullopt, std::nullopt, 2};
    DirichletParams dp;

    Field zero(g);
    zero.set_flags({true, true, true});
    for (const auto& r : verify_dirichlet_estimates(zero, DiffusionSpec::identity(), {8, 1, 0.05}, dp)) {
        CHECK(r.margin == 0.0);
        CHECK(r.pass);
    }

    Field v = bump_in_P(g, cut, 0.3);
    for (const auto& r : verify_dirichlet_estimates(v, DiffusionSpec::identity(), {8, 1, 0.05}, dp)) CHECK(r.margin >= 0.0);

    DiffusionSpec d = DiffusionSpec::sinusoidal(0.1);
    dp.c_lower = d.c_lower;
    dp.M_bar = d.M_bar;
    double prev = -std::numeric_limits<double>::infinity();
    for (double m : {8.0, 16.0, 32.0}) {
        auto reps = verify_dirichlet_estimates(v, d, {m, 1, 0.05}, dp);
        for (const auto& r : reps) CHECK(r.pass);
        CHECK(reps[0].id == "dirichlet.weighted_lower");
        CHECK(reps[0].margin > prev);
        prev = reps[0].margin;
    }

    CHECK_THROWS_AS(verify_dirichlet_estimates(v, d, {4, 1, 0.05}, dp), Error);
    Field noflags = multiply(make_cutoff(cut, CutoffKind::Kappa, g), Field(g, 1.0));
    CHECK_THROWS_AS(verify_dirichlet_estimates(noflags, d, {8, 1, 0.05}, dp), Error);
}

TEST_CASE("Robin estimates of the zero field") {
    Grid g = grid1(0.03, 0.03, 0.03 / 24, 16);
    CutoffSpec cut{0.00625, 0.0125, 0.00625, 0.0125, std::nullopt, std::nullopt, 2};
    RobinParams rp{1.0, 0.0, 0.5, 2.0, 1.0, 16.0, 0.06, 0.02, 1.0, 1.0, 1.0, 1.0, {}, {}, {}};
    Field w(g);
    w.set_flags({true, true, false});
    BoundaryField gz(g);
    auto reps = verify_robin_estimates(w, gz, DiffusionSpec::identity(), SurfaceSpec::linear(0.5), {16, 1, 0.02}, rp, cut);
    REQUIRE(reps.size() == 4);
    for (const auto& r : reps) CHECK(r.pass);

    BoundaryField bad(g, 1.0);
    try {
        verify_robin_estimates(w, bad, DiffusionSpec::identity(), SurfaceSpec::linear(0.5), {16, 1, 0.02}, rp, cut);
        FAIL("expected FluxMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::FluxMismatch);
    }
}

TEST_CASE("corner decay of trivial fields") {
    Grid g = grid1(0.1, 0.1, 0.1 / 40, 8);
    CutoffSpec cut{0.025, 0.05, 0.025, 0.05, 0.075, 0.075, 2};
    auto zero = corner_decay(Field(g), cut, DiffusionSpec::identity(), 0.203125, 1.0, 1.0, 0.05, {8, 12, 16});
    for (const auto& r : zero.rows) {
        CHECK(r.corner_norm == 0.0);
        CHECK(r.pass);
    }
    CHECK(zero.expected_slope ==
          doctest::Approx(-2.0 * std::log((0.25 - 0.1) / (0.25 - 0.15))).epsilon(1e-14));

    Field early(g);
    for (int i = 0; i <= g.Nt; ++i)
        for (int j = 0; j <= g.Na; ++j)
            if (g.t(i) < 0.025 && g.a(j) < 0.025)
                for (int c = 0; c < g.ncell(); ++c) early(i, j, c) = 1.0 + c;
    auto sup = corner_decay(early, cut, DiffusionSpec::identity(), 0.203125, 1.0, 1.0, 0.05, {8, 12, 16});
    for (const auto& r : sup.rows) {
        CHECK(r.corner_norm == 0.0);
        CHECK(r.bound > 0.0);
        CHECK(r.pass);
    }
    CHECK_THROWS_AS(corner_decay(Field(g), cut, DiffusionSpec::identity(), 0.2, 1.0, 1.0, 0.05, {16, 8}), Error);
}

TEST_CASE("elementary inequality") {
    auto e = check_elementary_inequality(10000, 3);
    CHECK(e.violations == 0);
    CHECK(e.report.pass);
    CHECK(e.tangency_error <= 1e-14);
    // X = 4, gamma = 1, alpha0 = 1/2: 2 <= 2.5.
    double X = 4, gam = 1, a0 = 0.5;
    CHECK(std::pow(X, a0) == 2.0);
    CHECK(a0 * std::pow(gam, a0 - 1) * X + (1 - a0) * std::pow(gam, a0) == 2.5);
}

TEST_CASE("trace constant bounds") {
    Grid g1 = grid1(1.0, 1.0, 1.0, 16);
    auto c1 = estimate_trace_constant(g1);
    CHECK(c1.C0 >= 2.0);
    Grid g2 = grid2(1.0, 1.0, 1.0, 8);
    auto c2 = estimate_trace_constant(g2);
    CHECK(c2.C0 >= 4.0);
    Grid g3 = grid2(1.0, 1.0, 1.0, 16);
    CHECK(estimate_trace_constant(g3).C0 >= c2.C0 * (1 - 1e-6));
    CHECK_THROWS_AS(estimate_trace_constant(g3, 1e-300, 2), Error);
}

TEST_CASE("weight-product identity") {
    CHECK(check_weight_product_identity(0.5, 8, 1, 0.05).pass);
    CHECK(check_weight_product_identity(0.5, 1, 1, 1.0).pass);
    auto r = check_weight_product_identity(0.3, 5, 2, 0.1);
    auto s = check_weight_product_identity(0.3, 6, 2, 0.1);
    CHECK(r.lhs == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(s.lhs == doctest::Approx(2.0).epsilon(1e-10));
}
