// Acceptance suite: one pass/fail line per criterion, nonzero exit if any fails.

#include <agepde/carleman.hpp>
#include <agepde/experiments.hpp>
#include <agepde/operators.hpp>
#include <agepde/solver.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <string>

using namespace agepde;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool pass;
    std::string detail;
};

std::string f(const char* fmt, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    return buf;
}

Grid unit1(double T, double ds, int nx) {
    std::vector<double> ext{1.0};
    std::vector<int> cells{nx};
    return build_grid(T, T, ds, ext, cells);
}

Field refinement_field(const Grid& g) {
    Field z = make_field(g, [](double t, double a, const Point& x) {
        return std::pow(std::sin(kPi * t), 2) * std::pow(std::sin(kPi * a), 2) * std::sin(kPi * x[0]) *
               (1.0 + 0.3 * std::cos(2.0 * t - a));
    });
    z.set_flags({true, true, true});
    return z;
}

Outcome elementary() {
    auto e = check_elementary_inequality(100000, 20240611);
    return {e.violations == 0 && e.tangency_error <= 1e-14,
            f("%d violations in 1e5 samples, worst slack %.3g, tangency error %.3g", e.violations, e.worst_slack,
              e.tangency_error)};
}

Outcome green() {
    std::vector<double> res;
    double const_worst = 0.0;
    for (int N : {8, 16, 32, 64}) {
        Field z = refinement_field(unit1(1.0, 1.0 / N, N));
        res.push_back(check_green_identity(z, DiffusionSpec::sinusoidal(0.1)));
        const_worst = std::max(const_worst, check_green_identity(z, DiffusionSpec::identity()));
    }
    double order = INFINITY;
    for (std::size_t k = 1; k < res.size(); ++k) order = std::min(order, std::log2(res[k - 1] / res[k]));
    return {const_worst <= 1e-10 && order >= 0.9,
            f("constant d residual %.3g, variable d min order %.3f (finest residual %.3g)", const_worst, order,
              res.back())};
}

Outcome transport() {
    std::vector<double> res;
    for (int N : {8, 16, 32, 64}) res.push_back(check_transport_identity(refinement_field(unit1(1.0, 1.0 / N, N)), {1, 1, 0.1}));
    double order = INFINITY;
    for (std::size_t k = 1; k < res.size(); ++k) order = std::min(order, std::log2(res[k - 1] / res[k]));

    Grid g = unit1(1.0, 1.0 / 16, 2);
    Field lam = make_field(g, [&](double t, double a, const Point&) { return lambda_value(g, t, a, 0.1); });
    Field tl = apply_transport(lam);
    double dev = 0.0;
    for (int i = 0; i < g.Nt; ++i)
        for (int j = 0; j < g.Na; ++j) dev = std::max(dev, std::abs(tl(i, j, 0) - 2.0));
    return {order >= 0.9 && dev <= 1e-12, f("min order %.3f, |(d_t + d_a) lambda - 2| <= %.2g", order, dev)};
}

Outcome constants() {
    DirichletParams dp;
    auto dc = compute_constants_dirichlet(dp);
    auto dc2 = compute_constants_dirichlet(dp);
    // Independent evaluation of the displayed formulas.
    const double s = dp.mu0 + dp.eta0;
    const double C2 = (2.0 / dp.c_lower) * (dp.k / (8.0 * dp.m0) + s / 2.0 + s * s / 2.0);
    const double K = dp.k / (4.0 * dp.m0) + C2 * (0.5 + dp.k * dp.M_bar / (4.0 * dp.m0));

    RobinParams rp{1.0, 0.0, 0.5, 2.0, 1.0, 16.0, 0.1, 0.05, 1.0, 1.0, 0.5, 0.1, {}, {}, {}};
    auto rc = compute_constants_robin(rp);
    const double s0 = rp.mu0 + rp.eta0;
    const double K3 = 4.0 * rp.m0 / rp.k - rp.eta0 * rp.eta0 / 4.0 - 2.0 * rp.m_bar * s0 * s0 * rp.C0;
    const double K4 = 0.5 + (2.0 * rp.m0 / rp.k) * s0;

    bool ok = dc.C2 == 0.34375 && dc.K == 0.203125 && dc.C2 == C2 && dc.K == K && dc2.K == dc.K &&
              dc.source_bound.ok && std::abs(rc.K3 - 63.954375) <= 1e-12 && std::abs(rc.K4 - 5.3) <= 1e-12 &&
              rc.K3 == K3 && rc.K4 == K4;
    return {ok, f("C2 %.10g, K %.10g, K3 %.10g, K4 %.10g, source_bound %s", dc.C2, dc.K, rc.K3, rc.K4,
                  dc.source_bound.ok ? "true" : "false")};
}

struct SuiteRun {
    SuiteResult r;
    double seconds;
};

const SuiteRun& suite() {
    static SuiteRun run = [] {
        auto t0 = std::chrono::steady_clock::now();
        SuiteRun s{run_carleman_suite({}), 0.0};
        s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return s;
    }();
    return run;
}

double param(const VerificationReport& r, const std::string& name) {
    for (const auto& [k, v] : r.params)
        if (k == name) return v;
    return NAN;
}

Outcome dirichlet_lemma() {
    const auto& s = suite();
    int n = 0, bad = 0;
    bool ell = false;
    for (const auto& r : s.r.reports) {
        if (r.id == "constants.dirichlet.ellipticity") ell = r.pass;
        if (r.id.rfind("dirichlet.", 0) == 0) {
            ++n;
            bad += !r.pass;
        }
    }
    return {ell && n == 20 * 3 * 2 && bad == 0,
            f("%d reports over 20 fields x m in {8,16,32}, %d violations, ellipticity %s", n, bad,
              ell ? "true" : "false")};
}

Outcome weight_product() {
    int n = 0, bad = 0;
    for (const auto& r : suite().r.reports)
        if (r.id == "weight_product") {
            ++n;
            bad += !r.pass;
        }
    return {n == 100 && bad == 0, f("%d tuples, %d off by more than 1e-10", n, bad)};
}

Outcome corner() {
    auto r = run_uniqueness_decay({});
    double inf_bound = INFINITY, corner = 0.0;
    for (const auto& row : r.table.rows) {
        inf_bound = std::min(inf_bound, row.bound);
        corner = std::max(corner, row.corner_norm);
    }
    double rel = std::abs(r.table.slope / r.table.expected_slope - 1.0);
    return {rel <= 0.05 && corner <= inf_bound,
            f("slope %.5f vs %.5f (%.2g%%), corner norm %.3g <= inf bound %.3g", r.table.slope,
              r.table.expected_slope, 100.0 * rel, corner, inf_bound)};
}

Outcome robin_lemma() {
    const auto& s = suite();
    int n = 0, bad = 0, nonmono = 0;
    std::map<std::pair<double, double>, std::vector<std::pair<double, double>>> margins;
    for (const auto& r : s.r.reports) {
        if (r.id.rfind("robin.", 0) != 0) continue;
        ++n;
        bad += !r.pass;
        if (r.id == "robin.weighted_lower") margins[{param(r, "sigma"), param(r, "field")}].push_back({param(r, "m"), r.margin});
    }
    for (auto& [key, v] : margins) {
        std::sort(v.begin(), v.end());
        for (std::size_t k = 1; k < v.size(); ++k) nonmono += v[k].second < v[k - 1].second;
    }
    return {n > 0 && bad == 0 && nonmono == 0 && margins.size() == 60,
            f("%d reports over sigma in {0,0.5,2}, %d violations, %d decreasing margin steps", n, bad, nonmono)};
}

Outcome mms() {
    auto t = run_mms({});
    bool ok = t.spatial_order >= 1.9 && t.spatial_order <= 2.1 && t.characteristic_order >= 0.9 &&
              t.characteristic_order <= 1.1;
    return {ok, f("spatial order %.4f, characteristic order %.4f", t.spatial_order, t.characteristic_order)};
}

Outcome heat() {
    auto h = run_heat_mode(64, 64);
    return {h.pass && h.max_error <= h.bound, f("max error %.4g <= bound %.4g", h.max_error, h.bound)};
}

Outcome backward() {
    auto t = run_backward_amplification({});
    bool ok = !t.rows.empty();
    double last = 0.0;
    std::string d;
    for (const auto& r : t.rows) {
        d += f("j=%d %.4g/%.4g ", r.j, r.measured, r.predicted);
        if (r.j == 0) {
            ok = ok && r.measured <= 1.01;
            continue;
        }
        ok = ok && r.measured >= r.predicted / 2 && r.measured <= r.predicted * 2 && r.measured > last;
        last = r.measured;
    }
    return {ok, d + "(measured/predicted)"};
}

Outcome uniqueness() {
    Scenario s;
    s.grid = unit1(0.5, 0.5 / 32, 32);
    s.model = {DiffusionSpec::sinusoidal(0.1), SourceSpec::holder_power(1.0, 0.5), SurfaceSpec::linear(0.5)};
    s.initial = [](double a, const Point& x) { return (1 + a) * std::sin(kPi * x[0]); };
    s.boundary = [](double t, const Point& x) { return (1 + 0.5 * t) * std::cos(kPi * x[0]); };
    auto [u1, r1] = solve_forward(s);
    auto [u2, r2] = solve_forward(s);
    bool bitwise = u1.values() == u2.values();

    DecayConfig d;
    d.delta = 0.0;
    auto dr = run_uniqueness_decay(d);
    bool zero = dr.identical;
    for (const auto& row : dr.table.rows) zero = zero && row.corner_norm == 0.0;
    return {bitwise && zero, f("repeat solve bitwise %s; identical inflows identical %s, corner norms zero %s",
                               bitwise ? "yes" : "no", dr.identical ? "yes" : "no", zero ? "yes" : "no")};
}

Outcome trace_study() {
    bool ok = true;
    std::string d;
    for (int n : {1, 2}) {
        TraceConfig c;
        c.n = n;
        auto t = run_trace_constant(c);
        bool above = true;
        for (const auto& r : t.rows) above = above && r.C0 >= t.lower_bound;
        ok = ok && above && t.relative_change <= 0.02;
        d += f("%dD C0 %.5f (>= %g), change %.3g%%; ", n, t.rows.back().C0, t.lower_bound, 100 * t.relative_change);
    }
    d.resize(d.size() - 2);
    return {ok, d};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"elementary inequality", elementary},
        {"discrete Green identity", green},
        {"weighted transport identity", transport},
        {"Dirichlet weighted estimates", dirichlet_lemma},
        {"constants", constants},
        {"weight-product identity", weight_product},
        {"corner decay", corner},
        {"Robin weighted estimates", robin_lemma},
        {"manufactured solutions", mms},
        {"heat-mode oracle", heat},
        {"backward amplification", backward},
        {"discrete uniqueness", uniqueness},
        {"trace constant", trace_study},
    };
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += !o.pass;
        std::printf("%s criterion %2zu  %-30s %s [%.2fs]\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                    o.detail.c_str(), sec);
        std::fflush(stdout);
    }
    std::printf("%s: %d of %zu criteria failed\n", failed ? "FAIL" : "PASS", failed, criteria.size());
    return failed ? 1 : 0;
}
