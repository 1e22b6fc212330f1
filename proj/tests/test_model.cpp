#include <doctest.h>

#include <agepde/error.hpp>
#include <agepde/model.hpp>

#include "helpers.hpp"

using namespace agepde;
using namespace testing;

TEST_CASE("eval_diffusion examples") {
    Point x{0.3, 0.7};
    Tensor id = eval_diffusion(DiffusionSpec::identity(), 0.2, 0.4, x);
    CHECK(id[0] == 1.0);
    CHECK(id[1] == 0.0);
    CHECK(id[3] == 1.0);
    Tensor dg = eval_diffusion(DiffusionSpec::diagonal(2.0, 1.0), 0.2, 0.4, x);
    CHECK(dg[0] == 2.0);
    CHECK(dg[3] == 1.0);
    Tensor s = eval_diffusion(DiffusionSpec::sinusoidal(0.1), pi / 4, pi / 4, x);
    CHECK(s[0] == doctest::Approx(1.1).epsilon(1e-15));
}

TEST_CASE("eval_source examples") {
    Point x{0.5, 0.5};
    CHECK(eval_source(SourceSpec::logistic(1.0, 1.0), 0, 0, x, 1.0) == 0.0);
    CHECK(eval_source(SourceSpec::holder_power(1.0, 0.5), 0, 0, x, 4.0) == doctest::Approx(-2.0));
    CHECK(eval_source(SourceSpec::holder_power(1.0, 0.5), 0, 0, x, -4.0) == doctest::Approx(2.0));

    Grid g = grid1(1.0, 1.0, 0.25, 4);
    Field ctx(g, 1.0);
    CHECK(eval_source(SourceSpec::lotka_von_foerster(), 0.5, 0.5, x, 1.0, &ctx) == doctest::Approx(-1.0));
    try {
        eval_source(SourceSpec::lotka_von_foerster(), 0.5, 0.5, x, 1.0);
        FAIL("expected MissingContext");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingContext);
    }
    CHECK(SourceSpec::lotka_von_foerster().needs_context());
    CHECK_FALSE(SourceSpec::logistic(1, 1).needs_context());
}

TEST_CASE("source kind names round-trip") {
    for (auto k : {SourceKind::Zero, SourceKind::LinearDeath, SourceKind::Logistic, SourceKind::VonBertalanffy,
                   SourceKind::Arrhenius, SourceKind::HolderPower, SourceKind::LotkaVonFoerster})
        CHECK(source_kind_from_string(to_string(k)) == k);
    CHECK_FALSE(source_kind_from_string("gompertz").has_value());
}

TEST_CASE("eval_surface examples") {
    CHECK(eval_surface(SurfaceSpec::linear(2.0), 3.0) == 6.0);
    CHECK(eval_surface(SurfaceSpec::power(1.0, 0.5), 4.0) == doctest::Approx(2.0));
    CHECK(eval_surface(SurfaceSpec::zero(), 17.0) == 0.0);
    CHECK(SurfaceSpec::linear(0.5).monotone);
}

TEST_CASE("audit: identity diffusion") {
    Grid g = grid1(1.0, 1.0, 0.25, 8);
    ModelSpec m{DiffusionSpec::identity(), SourceSpec::zero(), std::nullopt};
    auto a = audit_assumptions(m, g, 500, 7);
    CHECK(a.all_pass());
    CHECK(a.find("A1.lower")->extremum == 1.0);
    CHECK(a.find("A1.upper")->extremum == 1.0);
    CHECK(a.find("A2")->extremum == 0.0);
}

TEST_CASE("audit: Hoelder source") {
    // Scalar sweep oracle: |sqrt(u1) - sqrt(u2)| <= |u1 - u2|^(1/2) on a grid of pairs.
    double worst = 0.0;
    for (int i = 0; i <= 200; ++i)
        for (int j = 0; j < i; ++j) {
            double u1 = 0.01 * i, u2 = 0.01 * j;
            worst = std::max(worst, std::abs(std::sqrt(u1) - std::sqrt(u2)) / std::sqrt(u1 - u2));
        }
    CHECK(worst <= 1.0 + 1e-12);

    Grid g = grid1(1.0, 1.0, 0.25, 8);
    ModelSpec m{DiffusionSpec::identity(), SourceSpec::holder_power(1.0, 0.5), std::nullopt};
    auto a = audit_assumptions(m, g, 2000, 11);
    CHECK(a.find("A3")->pass);
    CHECK(a.find("A3")->extremum <= 1.0 + 1e-12);
}

TEST_CASE("audit: non-monotone surface fails A5 with a witness") {
    Grid g = grid1(1.0, 1.0, 0.25, 8);
    ModelSpec m{DiffusionSpec::identity(), SourceSpec::zero(), SurfaceSpec::linear(-1.0, true)};
    auto a = audit_assumptions(m, g, 200, 5);
    const AuditEntry* e = a.find("A5");
    REQUIRE(e != nullptr);
    CHECK_FALSE(e->pass);
    CHECK(e->extremum < 0.0);
    CHECK_FALSE(a.all_pass());
}

TEST_CASE("property: audit determinism and exact invariants") {
    for (std::uint64_t seed : {1u, 2u, 3u, 99u}) {
        Grid g = seed % 2 ? grid1(1.0, 1.0, 0.25, 8) : grid2(0.5, 0.5, 0.125, 4);
        double sigma = 0.25 * double(seed % 5 + 1);
        ModelSpec m{DiffusionSpec::diagonal(2.0, 1.0), SourceSpec::logistic(1.0, 2.0), SurfaceSpec::linear(sigma)};
        auto a = audit_assumptions(m, g, 300, seed);
        auto b = audit_assumptions(m, g, 300, seed);
        REQUIRE(a.entries.size() == b.entries.size());
        for (std::size_t k = 0; k < a.entries.size(); ++k) {
            CHECK(a.entries[k].id == b.entries[k].id);
            CHECK(a.entries[k].extremum == b.entries[k].extremum);
            CHECK(a.entries[k].where == b.entries[k].where);
        }
        CHECK(a.find("A6")->extremum == sigma);
        CHECK(a.find("A2")->extremum <= 1e-10);
    }
}
