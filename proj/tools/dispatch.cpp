#include "dispatch.hpp"

#include <agepde/carleman.hpp>
#include <agepde/error.hpp>
#include <agepde/model.hpp>
#include <agepde/solver.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace agepde::cli {

namespace {

constexpr double kPi = std::numbers::pi;

Grid build_grid_from(const RunConfig& c) {
    const int n = int(c.integer("grid.dim"));
    std::vector<double> ext(static_cast<std::size_t>(n), c.real("grid.L"));
    std::vector<int> cells(static_cast<std::size_t>(n), int(c.integer("grid.nx")));
    double T = c.real("grid.T");
    return build_grid(T, c.real("grid.a_dagger"), T / double(c.integer("grid.steps")), ext, cells);
}

std::vector<int> ints(const std::vector<double>& v) {
    std::vector<int> out;
    for (double x : v) out.push_back(int(x));
    return out;
}

std::optional<CutoffSpec> cutoff_from(const RunConfig& c, bool with_corner) {
    for (const char* k : {"cutoff.t1", "cutoff.t2", "cutoff.a1", "cutoff.a2"})
        if (!c.has(k)) return std::nullopt;
    CutoffSpec s;
    s.t1 = c.real("cutoff.t1");
    s.t2 = c.real("cutoff.t2");
    s.a1 = c.real("cutoff.a1");
    s.a2 = c.real("cutoff.a2");
    s.p = int(c.integer("cutoff.p"));
    if (with_corner) {
        if (!c.has("cutoff.t3") || !c.has("cutoff.a3")) return std::nullopt;
        s.t3 = c.real("cutoff.t3");
        s.a3 = c.real("cutoff.a3");
    }
    return s;
}

std::string fmt(double v, int prec = 6) {
    std::ostringstream os;
    os << std::setprecision(prec) << v;
    return os.str();
}

void write_json(const nlohmann::ordered_json& j, const std::string& dir, const std::string& name) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir + ": " + ec.message());
    std::string path = (std::filesystem::path(dir) / name).string();
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path);
    out << j.dump(2) << '\n';
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

nlohmann::ordered_json condition_json(const Condition& c) {
    return {{"name", c.name}, {"ok", c.ok}, {"slack", std::isfinite(c.slack) ? nlohmann::ordered_json(c.slack)
                                                                             : nlohmann::ordered_json("-inf")}};
}

int run_solve(const RunConfig& c, const std::string& dir, std::ostream& out) {
    Scenario s = build_scenario(c);
    AuditOptions opts;
    opts.rho_max = SuiteConfig{}.audit_rho_max;
    auto audit = audit_assumptions(s.model, s.grid, 1000, std::uint64_t(c.integer("experiment.seed")), opts);
    if (!audit.all_pass()) {
        for (const auto& e : audit.entries)
            if (!e.pass)
                out << "solve: assumption " << e.id << " fails (extremum " << fmt(e.extremum) << ", bound "
                    << fmt(e.bound) << ")\n";
        return kCheckFailed;
    }
    auto [u, rep] = solve_forward(s);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir + ": " + ec.message());
    if (c.flag("output.field_csv")) write_field_csv(u, (std::filesystem::path(dir) / "solution.csv").string());
    nlohmann::ordered_json j{{"nodes", s.grid.nodes()},
                             {"cells", s.grid.ncell()},
                             {"max_iterations", rep.max_iterations},
                             {"max_residual", rep.max_residual},
                             {"wall_seconds", rep.wall_seconds}};
    write_json(j, dir, "solve.json");
    out << "solve: " << s.grid.nodes() << " nodes x " << s.grid.ncell() << " cells, max CG iterations "
        << rep.max_iterations << ", max residual " << fmt(rep.max_residual, 3) << ", " << fmt(rep.wall_seconds, 3)
        << " s\n";
    return kSuccess;
}

int run_mms_cmd(const RunConfig& c, const std::string& dir, std::ostream& out) {
    MmsConfig m = build_mms(c);
    auto tab = run_mms(m);
    write_convergence_csv(tab, dir);
    bool ok = true;
    switch (m.solution) {
        case MmsSolution::Product:
            ok = tab.spatial_order >= 1.9 && tab.spatial_order <= 2.1 && tab.characteristic_order >= 0.9 &&
                 tab.characteristic_order <= 1.1;
            break;
        case MmsSolution::XIndependent:
            ok = tab.characteristic_order >= 0.9 && tab.characteristic_order <= 1.1;
            break;
        case MmsSolution::Zero:
            ok = std::all_of(tab.rows.begin(), tab.rows.end(), [](const ConvergenceRow& r) { return r.error == 0.0; });
            break;
    }
    out << "mms: spatial order " << fmt(tab.spatial_order, 4) << ", characteristic order "
        << fmt(tab.characteristic_order, 4) << (ok ? " [pass]" : " [FAIL]") << "\n";
    return ok ? kSuccess : kCheckFailed;
}

int run_uniqueness_cmd(const RunConfig& c, const std::string& dir, std::ostream& out) {
    auto r = run_uniqueness_decay(build_decay(c));
    write_decay_csv(r.table, dir);
    bool rows_ok = std::all_of(r.table.rows.begin(), r.table.rows.end(), [](const DecayRow& x) { return x.pass; });
    bool slope_ok = std::abs(r.table.slope / r.table.expected_slope - 1.0) <= 0.05;
    bool ok = rows_ok && slope_ok;
    out << "uniqueness: slope " << fmt(r.table.slope, 5) << " (expected " << fmt(r.table.expected_slope, 5)
        << "), corner norm " << fmt(r.table.rows.empty() ? 0.0 : r.table.rows.front().corner_norm, 3)
        << ", realized Hoelder ratio " << fmt(r.realized_holder, 3) << (ok ? " [pass]" : " [FAIL]") << "\n";
    return ok ? kSuccess : kCheckFailed;
}

int run_backward_cmd(const RunConfig& c, const std::string& dir, std::ostream& out) {
    auto tab = run_backward_amplification(build_backward(c));
    write_amplification_csv(tab, dir);
    bool ok = true;
    double last = 0.0;
    for (const auto& r : tab.rows) {
        if (r.j == 0) {
            ok = ok && r.measured <= 1.01;
            continue;
        }
        ok = ok && r.measured >= r.predicted / 2.0 && r.measured <= r.predicted * 2.0 && r.measured > last;
        last = r.measured;
    }
    out << "backward: " << tab.rows.size() << " rows";
    for (const auto& r : tab.rows) out << ", j=" << r.j << " x" << fmt(r.measured, 4);
    out << (tab.truncated ? " (truncated)" : "") << (ok ? " [pass]" : " [FAIL]") << "\n";
    return ok ? kSuccess : kCheckFailed;
}

int run_carleman_cmd(const RunConfig& c, const std::string& dir, std::ostream& out) {
    auto r = run_carleman_suite(build_suite(c));
    write_suite(r.reports, dir);
    out << "carleman: " << r.reports.size() << " reports, " << r.violations << " violations";
    if (!r.failed_ids.empty()) {
        out << " (";
        const std::size_t shown = std::min<std::size_t>(r.failed_ids.size(), 3);
        for (std::size_t i = 0; i < shown; ++i) out << (i ? ", " : "") << r.failed_ids[i];
        if (shown < r.failed_ids.size()) out << ", ...";
        out << ")";
    }
    out << (r.pass() ? " [pass]" : " [FAIL]") << "\n";
    return r.pass() ? kSuccess : kCheckFailed;
}

int run_epidemic_cmd(const RunConfig& c, const std::string& dir, std::ostream& out) {
    auto r = run_epidemic_demo(build_epidemic(c));
    write_epidemic(r, dir);
    bool ok = r.min_value >= -1e-12;
    const auto& last = r.mass.back();
    out << "epidemic: final susceptible " << fmt(last[1], 5) << ", infected " << fmt(last[2], 5) << ", min value "
        << fmt(r.min_value, 3) << (ok ? " [pass]" : " [FAIL]") << "\n";
    return ok ? kSuccess : kCheckFailed;
}

int run_trace_cmd(const RunConfig& c, const std::string& dir, std::ostream& out) {
    auto t = run_trace_constant(build_trace(c));
    write_trace_csv(t, dir);
    bool ok = !t.rows.empty() && t.relative_change <= 0.02;
    for (const auto& r : t.rows) ok = ok && r.C0 >= t.lower_bound;
    out << "trace: C0 " << fmt(t.rows.empty() ? 0.0 : t.rows.back().C0, 6) << " (lower bound " << fmt(t.lower_bound)
        << "), change " << fmt(100.0 * t.relative_change, 3) << "%" << (ok ? " [pass]" : " [FAIL]") << "\n";
    return ok ? kSuccess : kCheckFailed;
}

int run_constants_cmd(const RunConfig& c, const std::string& dir, std::ostream& out) {
    ModelSpec m = build_model(c);
    DirichletParams dp;
    dp.c_lower = m.d.c_lower;
    dp.M_bar = m.d.M_bar;
    dp.k = c.real("weights.k");
    dp.m0 = c.real("weights.m0");
    dp.mu0 = c.real("weights.mu0");
    dp.eta0 = c.real("weights.eta0");
    dp.alpha = m.F.alpha;
    dp.L_F = m.F.L_F;
    auto dc = compute_constants_dirichlet(dp);

    RobinParams rp;
    rp.c_lower = dp.c_lower;
    rp.M_bar = dp.M_bar;
    rp.k = dp.k;
    rp.m0 = dp.m0;
    rp.mu0 = dp.mu0;
    rp.eta0 = dp.eta0;
    rp.alpha = dp.alpha;
    rp.L_F = dp.L_F;
    rp.C0 = c.real("weights.C0");
    SurfaceSpec S = m.S.value_or(SurfaceSpec::zero());
    rp.m_bar = S.m_bar;
    rp.beta = S.beta;
    rp.L_S = S.L_S;
    auto rc = compute_constants_robin(rp);

    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(); };
    nlohmann::ordered_json j;
    j["dirichlet"] = {{"C1", dc.C1},
                      {"C2", dc.C2},
                      {"K", dc.K},
                      {"mu0_prime", dc.mu0_prime},
                      {"ellipticity", condition_json(dc.ellipticity)},
                      {"source_bound", condition_json(dc.source_bound)}};
    j["robin"] = {{"K1", rc.K1},
                  {"K2", rc.K2},
                  {"K3", rc.K3},
                  {"K4", rc.K4},
                  {"C3", opt(rc.C3)},
                  {"C4", opt(rc.C4)},
                  {"K", opt(rc.K)},
                  {"mu0_prime", rc.mu0_prime},
                  {"k1_positive", condition_json(rc.k1_positive)},
                  {"ellipticity", condition_json(rc.ellipticity)},
                  {"gradient_half", condition_json(rc.gradient_half)},
                  {"k_bound", condition_json(rc.k_bound)}};
    write_json(j, dir, "constants.json");
    bool ok = dc.ellipticity.ok && dc.source_bound.ok;
    if (m.S) ok = ok && rc.all_ok() && rc.k_bound.ok;
    out << std::setprecision(17) << "constants: C2 " << dc.C2 << ", K " << dc.K << ", K3 " << rc.K3 << ", K4 "
        << rc.K4 << (ok ? " [pass]" : " [FAIL]") << "\n";
    return ok ? kSuccess : kCheckFailed;
}

}  // namespace

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> s{"solve", "mms", "carleman", "uniqueness", "backward", "epidemic", "trace",
                                            "constants"};
    return s;
}

std::string experiment_for(const std::string& sub) {
    if (sub == "mms") return "mms";
    if (sub == "carleman") return "carleman_suite";
    if (sub == "uniqueness") return "uniqueness_decay";
    if (sub == "backward") return "backward_amp";
    if (sub == "epidemic") return "epidemic_demo";
    if (sub == "trace") return "trace_constant";
    return "";
}

ModelSpec build_model(const RunConfig& c) {
    ModelSpec m;
    const std::string& d = c.str("model.diffusion");
    if (d == "identity")
        m.d = DiffusionSpec::identity();
    else if (d == "diagonal")
        m.d = DiffusionSpec::diagonal(c.real("model.d0"), c.real("model.d1"));
    else
        m.d = DiffusionSpec::sinusoidal(c.real("model.d_amp"));

    auto kind = *source_kind_from_string(c.str("model.source"));
    switch (kind) {
        case SourceKind::Zero: m.F = SourceSpec::zero(); break;
        case SourceKind::LinearDeath: m.F = SourceSpec::linear_death(c.real("model.death")); break;
        case SourceKind::Logistic: m.F = SourceSpec::logistic(c.real("model.r"), c.real("model.cap")); break;
        case SourceKind::VonBertalanffy: m.F = SourceSpec::von_bertalanffy(c.real("model.r"), c.real("model.theta")); break;
        case SourceKind::Arrhenius: m.F = SourceSpec::arrhenius(c.real("model.A0"), c.real("model.E")); break;
        case SourceKind::HolderPower: m.F = SourceSpec::holder_power(c.real("model.c"), c.real("model.alpha")); break;
        case SourceKind::LotkaVonFoerster: m.F = SourceSpec::lotka_von_foerster(); break;
    }
    if (auto L = c.maybe_real("model.L_F")) m.F.L_F = *L;

    if (c.str("model.boundary") == "robin") {
        const std::string& s = c.str("model.surface");
        SurfaceSpec S = s == "zero"     ? SurfaceSpec::zero()
                        : s == "linear" ? SurfaceSpec::linear(c.real("model.sigma"))
                                        : SurfaceSpec::power(c.real("model.sigma"), c.real("model.beta"));
        if (auto v = c.maybe_real("model.L_S")) S.L_S = *v;
        if (auto v = c.maybe_real("model.m_bar")) S.m_bar = *v;
        m.S = S;
    }
    return m;
}

Scenario build_scenario(const RunConfig& c) {
    Scenario s;
    s.grid = build_grid_from(c);
    s.model = build_model(c);
    s.tol = c.real("experiment.cg_tol");
    s.max_iter = int(c.integer("experiment.cg_max_iter"));
    const double amp = c.real("model.inflow_amplitude");
    const Grid g = s.grid;
    if (c.str("model.inflow") == "sine") {
        s.initial = [amp, g](double, const Point& x) {
            double v = amp * std::sin(kPi * x[0] / g.L[0]);
            return g.n == 2 ? v * std::sin(kPi * x[1] / g.L[1]) : v;
        };
    } else {
        s.initial = [amp](double, const Point&) { return amp; };
    }
    s.boundary = s.initial;
    return s;
}

MmsConfig build_mms(const RunConfig& c) {
    MmsConfig m;
    m.n = int(c.integer("grid.dim"));
    m.T = c.real("grid.T");
    m.a_dagger = c.real("grid.a_dagger");
    const std::string& s = c.str("experiment.solution");
    m.solution = s == "product" ? MmsSolution::Product : s == "zero" ? MmsSolution::Zero : MmsSolution::XIndependent;
    m.nx_levels = ints(c.reals("experiment.nx_levels"));
    m.nt_levels = ints(c.reals("experiment.nt_levels"));
    m.nt_fixed = int(c.integer("experiment.nt_fixed"));
    m.nx_fixed = int(c.integer("experiment.nx_fixed"));
    return m;
}

DecayConfig build_decay(const RunConfig& c) {
    DecayConfig d;
    d.T = c.real("grid.T");
    d.a_dagger = c.real("grid.a_dagger");
    d.nt = int(c.integer("grid.steps"));
    d.nx = int(c.integer("grid.nx"));
    if (auto cut = cutoff_from(c, true)) d.cutoff = *cut;
    d.c = c.real("model.c");
    d.alpha = c.real("model.alpha");
    d.eta = c.real("weights.eta");
    d.k = c.real("weights.k");
    d.m0 = c.real("weights.m0");
    d.mu0 = c.real("weights.mu0");
    d.eta0 = c.real("weights.eta0");
    if (c.has("weights.m_sweep")) d.m_sweep = c.reals("weights.m_sweep");
    d.delta = c.real("experiment.delta");
    if (auto v = c.maybe_real("experiment.delta_from")) d.a_from = *v;
    return d;
}

BackwardConfig build_backward(const RunConfig& c) {
    BackwardConfig b;
    b.n = int(c.integer("grid.dim"));
    b.T = c.real("grid.T");
    b.a_dagger = c.real("grid.a_dagger");
    b.nt = int(c.integer("grid.steps"));
    b.nx = int(c.integer("grid.nx"));
    b.d = c.real("model.d0");
    b.tau = c.real("experiment.tau");
    b.epsilon = c.real("experiment.epsilon");
    b.frequencies = ints(c.reals("experiment.frequencies"));
    return b;
}

SuiteConfig build_suite(const RunConfig& c) {
    SuiteConfig s;
    const std::string& d = c.str("model.diffusion");
    if (d == "diagonal") throw Error(ErrorCode::InvalidArgument, "carleman suite takes diffusion identity or sinusoidal");
    s.seed = std::uint64_t(c.integer("experiment.seed"));
    s.corpus_size = int(c.integer("experiment.corpus_size"));
    s.n = int(c.integer("grid.dim"));
    s.T = c.real("grid.T");
    s.a_dagger = c.real("grid.a_dagger");
    s.nt = int(c.integer("grid.steps"));
    s.nx = int(c.integer("grid.nx"));
    if (auto cut = cutoff_from(c, false)) s.cutoff = *cut;
    if (c.has("weights.m_sweep")) s.m_sweep = c.reals("weights.m_sweep");
    s.k = c.real("weights.k");
    s.eta = c.real("weights.eta");
    s.dirichlet.m0 = c.real("weights.m0");
    s.dirichlet.mu0 = c.real("weights.mu0");
    s.dirichlet.eta0 = c.real("weights.eta0");
    ModelSpec m = build_model(c);
    s.dirichlet.alpha = m.F.alpha;
    s.dirichlet.L_F = m.F.L_F;
    s.robin.alpha = m.F.alpha;
    s.robin.L_F = m.F.L_F;
    s.d_amp = d == "sinusoidal" ? c.real("model.d_amp") : 0.0;
    if (c.flag("experiment.robin")) {
        s.robin_sigmas = c.reals("experiment.sigmas");
        s.robin_m_sweep = c.reals("experiment.robin_m_sweep");
    } else {
        s.robin_sigmas.clear();
    }
    s.elementary_samples = int(c.integer("experiment.elementary_samples"));
    s.c_tol = c.real("experiment.c_tol");
    s.corrupt = c.flag("experiment.corrupt");
    return s;
}

EpidemicConfig build_epidemic(const RunConfig& c) {
    EpidemicConfig e;
    e.n = int(c.integer("grid.dim"));
    e.T = c.real("grid.T");
    e.a_dagger = c.real("grid.a_dagger");
    e.nt = int(c.integer("grid.steps"));
    e.nx = int(c.integer("grid.nx"));
    e.death_s = c.real("experiment.death_s");
    e.death_i = c.real("experiment.death_i");
    e.chi0 = c.real("experiment.chi");
    e.a_lo = 0.2 * e.a_dagger;
    e.a_hi = 0.8 * e.a_dagger;
    e.contact = c.real("experiment.contact");
    e.d_s = c.real("model.d0");
    e.d_i = c.real("model.d1");
    e.neumann = c.str("model.boundary") == "robin";
    return e;
}

TraceConfig build_trace(const RunConfig& c) {
    TraceConfig t;
    t.n = int(c.integer("grid.dim"));
    t.nx_levels = ints(c.reals("experiment.nx_levels"));
    return t;
}

int dispatch(const std::string& sub, const std::string& path, const std::vector<std::string>& overrides,
             std::ostream& out, std::ostream& err) {
    const auto& subs = subcommands();
    if (std::find(subs.begin(), subs.end(), sub) == subs.end()) {
        err << "unknown subcommand '" << sub << "'\n";
        return kUsage;
    }
    try {
        RunConfig c = parse_config(path, overrides);
        std::string want = experiment_for(sub);
        if (!want.empty() && c.str("experiment.id") != want)
            throw Error(ErrorCode::InvalidArgument, "experiment.id is '" + c.str("experiment.id") + "' but '" + sub +
                                                        "' runs '" + want + "'");
        const std::string dir = c.str("output.dir");
        if (sub == "solve") return run_solve(c, dir, out);
        if (sub == "mms") return run_mms_cmd(c, dir, out);
        if (sub == "carleman") return run_carleman_cmd(c, dir, out);
        if (sub == "uniqueness") return run_uniqueness_cmd(c, dir, out);
        if (sub == "backward") return run_backward_cmd(c, dir, out);
        if (sub == "epidemic") return run_epidemic_cmd(c, dir, out);
        if (sub == "trace") return run_trace_cmd(c, dir, out);
        return run_constants_cmd(c, dir, out);
    } catch (const Error& e) {
        err << e.what() << "\n";
        return e.is_numerical() ? kNumerical : kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
}

}  // namespace agepde::cli
