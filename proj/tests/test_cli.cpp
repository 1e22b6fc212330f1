#include <doctest.h>

#include <agepde/error.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "config.hpp"
#include "dispatch.hpp"

using namespace agepde;
using namespace agepde::cli;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"(
[grid]
T = 0.5
a_dagger = 0.5
steps = 16

[model]
diffusion = "identity"

[experiment]
id = "mms"
)";

fs::path write_config(const std::string& name, const std::string& text) {
    fs::path dir = fs::temp_directory_path() / "agepde_cli_test";
    fs::create_directories(dir);
    fs::path p = dir / name;
    std::ofstream(p) << text;
    return p;
}

ErrorCode parse_error(const std::string& text, std::string* what = nullptr) {
    try {
        parse_config_text(text);
    } catch (const Error& e) {
        if (what) *what = e.what();
        return e.code();
    }
    FAIL("expected a parse error");
    return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("minimal config gets documented defaults") {
    RunConfig c = parse_config_text(kMinimal);
    CHECK(c.real("grid.T") == 0.5);
    CHECK(c.integer("grid.dim") == 1);
    CHECK(c.real("weights.k") == 1.0);
    CHECK(c.real("weights.eta0") == 0.05);
    CHECK(c.integer("cutoff.p") == 2);
    CHECK(c.str("model.boundary") == "dirichlet");
    CHECK(c.str("output.dir") == "out");
    CHECK_FALSE(c.has("cutoff.t1"));
}

TEST_CASE("every schema key documents itself") {
    for (const auto& k : schema()) {
        CHECK_FALSE(k.doc.empty());
        CHECK_FALSE(k.expect.empty());
    }
}

TEST_CASE("config errors name the key") {
    std::string what;
    std::string no_t = kMinimal;
    no_t.replace(no_t.find("T = 0.5"), 7, "");
    CHECK(parse_error(no_t, &what) == ErrorCode::MissingKey);
    CHECK(what.find("grid.T") != std::string::npos);

    CHECK(parse_error(std::string(kMinimal) + "[cutoff]\nq = 3\n", &what) == ErrorCode::UnknownKey);
    CHECK(what.find("cutoff.q") != std::string::npos);
    CHECK(parse_error(std::string(kMinimal) + "[plots]\nx = 1\n", &what) == ErrorCode::UnknownKey);

    std::string half = kMinimal;
    half.replace(half.find("diffusion = \"identity\""), 22, "alpha = \"half\"");
    CHECK(parse_error(half, &what) == ErrorCode::TypeError);
    CHECK(what.find("model.alpha expects real in (0,1]") != std::string::npos);

    std::string big = kMinimal;
    big.replace(big.find("diffusion = \"identity\""), 22, "alpha = 1.5");
    CHECK(parse_error(big) == ErrorCode::TypeError);

    CHECK(parse_error("[grid\nT = 1") == ErrorCode::InvalidArgument);
    CHECK_THROWS_AS(parse_config("/nonexistent/agepde.toml"), Error);
}

TEST_CASE("overrides equal file edits") {
    std::string edited = kMinimal;
    edited.replace(edited.find("steps = 16"), 10, "steps = 32");
    edited += "[weights]\nm_sweep = [8, 16]\n[output]\ndir = \"elsewhere\"\n";
    RunConfig a = parse_config_text(edited);
    RunConfig b = parse_config_text(kMinimal, {"grid.steps=32", "weights.m_sweep=[8, 16]", "output.dir=elsewhere"});
    CHECK(a == b);
    RunConfig c = parse_config_text(kMinimal, {"output.dir=\"elsewhere\"", "grid.steps=32", "weights.m_sweep=[8,16]"});
    CHECK(a == c);
    CHECK_THROWS_AS(parse_config_text(kMinimal, {"grid.bogus=1"}), Error);
    CHECK_THROWS_AS(parse_config_text(kMinimal, {"no_equals_sign"}), Error);
}

TEST_CASE("dispatch exit codes") {
    std::ostringstream out, err;
    fs::path outdir = fs::temp_directory_path() / "agepde_cli_test" / "out";

    CHECK(dispatch("frobnicate", "x.toml", {}, out, err) == kUsage);

    fs::path trace = write_config("trace.toml", "[grid]\nT = 1\na_dagger = 1\nsteps = 1\n[experiment]\n"
                                                "id = \"trace_constant\"\nnx_levels = [8, 16, 32]\n[output]\ndir = \"" +
                                                    outdir.string() + "\"\n");
    CHECK(dispatch("trace", trace.string(), {}, out, err) == kSuccess);
    CHECK(fs::exists(outdir / "trace.csv"));
    CHECK(dispatch("mms", trace.string(), {}, out, err) == kUsage);
    CHECK(dispatch("trace", trace.string(), {"experiment.nx_levels=[2, 4]"}, out, err) == kCheckFailed);

    std::string solve = std::string(kMinimal) + "[output]\ndir = \"" + outdir.string() + "\"\n";
    fs::path sp = write_config("solve.toml", solve);
    CHECK(dispatch("solve", sp.string(), {}, out, err) == kSuccess);
    CHECK(fs::exists(outdir / "solution.csv"));
    err.str("");
    CHECK(dispatch("solve", sp.string(), {"model.source=\"linear_death\"", "model.death=1000"}, out, err) ==
          kNumerical);
    CHECK(err.str().find("StiffSourceStep") != std::string::npos);
    CHECK(dispatch("solve", sp.string(), {"model.source=\"holder_power\"", "model.c=2", "model.alpha=0.5",
                                           "model.L_F=0.5"},
                   out, err) == kCheckFailed);
    CHECK(dispatch("solve", sp.string(), {"model.sigma=-1"}, out, err) == kUsage);

    fs::path carl = write_config("carleman.toml", "[grid]\nT = 0.1\na_dagger = 0.1\nsteps = 40\nnx = 32\n"
                                                  "[cutoff]\nt1 = 0.02\nt2 = 0.05\na1 = 0.02\na2 = 0.05\n"
                                                  "[experiment]\nid = \"carleman_suite\"\ncorpus_size = 2\n"
                                                  "sigmas = [0.5]\n[output]\ndir = \"" +
                                                      outdir.string() + "\"\n");
    out.str("");
    CHECK(dispatch("carleman", carl.string(), {}, out, err) == kSuccess);
    CHECK(out.str().find("0 violations") != std::string::npos);
    CHECK(dispatch("carleman", carl.string(), {"experiment.corrupt=true"}, out, err) == kCheckFailed);

    CHECK(dispatch("constants", sp.string(), {"weights.m0=8", "weights.mu0=0.2"}, out, err) == kSuccess);
    CHECK(fs::exists(outdir / "constants.json"));
    CHECK(dispatch("constants", sp.string(), {"weights.mu0=5"}, out, err) == kCheckFailed);
    fs::remove_all(fs::temp_directory_path() / "agepde_cli_test");
}

TEST_CASE("builders carry config values") {
    RunConfig c = parse_config_text(kMinimal, {"model.diffusion=\"sinusoidal\"", "model.d_amp=0.2",
                                               "model.source=\"holder_power\"", "model.c=2", "model.alpha=0.5"});
    ModelSpec m = build_model(c);
    CHECK(m.d.M_bar == doctest::Approx(0.4));
    CHECK(m.F.kind == SourceKind::HolderPower);
    CHECK(m.F.alpha == 0.5);
    CHECK_FALSE(m.S.has_value());

    SuiteConfig s = build_suite(c);
    CHECK(s.d_amp == 0.2);
    RunConfig nr = parse_config_text(kMinimal, {"experiment.robin=false"});
    CHECK(build_suite(nr).robin_sigmas.empty());
    RunConfig diag = parse_config_text(kMinimal, {"model.diffusion=\"diagonal\""});
    CHECK_THROWS_AS(build_suite(diag), Error);

    RunConfig dc = parse_config_text(kMinimal, {"experiment.delta_from=0.05", "cutoff.t1=0.01", "cutoff.t2=0.02",
                                                "cutoff.a1=0.01", "cutoff.a2=0.02"});
    DecayConfig d = build_decay(dc);
    CHECK(d.a_from == 0.05);
    CHECK(d.cutoff.t3 == 0.075);
}
