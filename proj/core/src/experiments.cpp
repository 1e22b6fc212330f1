#include "agepde/experiments.hpp"
#include "agepde/operators.hpp"
#include "agepde/reduce.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include "json.hpp"

namespace agepde {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Grid unit_grid(int n, double T, double a_dagger, int nt, int nx) {
    std::vector<double> ext(static_cast<std::size_t>(n), 1.0);
    std::vector<int> cells(static_cast<std::size_t>(n), nx);
    return build_grid(T, a_dagger, T / nt, ext, cells);
}

double sine_mode(const Grid& g, const Point& x, int j = 1) {
    double v = std::sin(j * kPi * x[0] / g.L[0]);
    if (g.n == 2) v *= std::sin(kPi * x[1] / g.L[1]);
    return v;
}

/// ||coarse - fine||_Q at coarse points; fine is refined by sx in space and st in (t,a).
double nested_difference(const Field& coarse, const Field& fine, int sx, int st) {
    const Grid& gc = coarse.grid();
    const Grid& gf = fine.grid();
    Field diff(gc);
    const int off = sx / 2;
    for (int i = 0; i <= gc.Nt; ++i)
        for (int j = 0; j <= gc.Na; ++j)
            for (int c1 = 0; c1 < gc.Nx[1]; ++c1)
                for (int c0 = 0; c0 < gc.Nx[0]; ++c0) {
                    int f0 = sx * c0 + off;
                    int f1 = gc.n == 2 ? sx * c1 + off : 0;
                    diff(i, j, gc.cell(c0, c1)) = coarse(i, j, gc.cell(c0, c1)) - fine(st * i, st * j, gf.cell(f0, f1));
                }
    return std::sqrt(norm_Q(diff));
}

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

nlohmann::json json_number(double v) {
    if (std::isfinite(v)) return v;
    return fmt(v);
}

std::ofstream open_out(const std::string& dir, const std::string& name, std::vector<std::string>& paths) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir + ": " + ec.message());
    std::string path = (std::filesystem::path(dir) / name).string();
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path);
    paths.push_back(path);
    return out;
}

void finish(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

}  // namespace

std::string to_string(ExperimentId id) {
    switch (id) {
        case ExperimentId::Mms: return "mms";
        case ExperimentId::UniquenessDecay: return "uniqueness_decay";
        case ExperimentId::BackwardAmp: return "backward_amp";
        case ExperimentId::CarlemanSuite: return "carleman_suite";
        case ExperimentId::EpidemicDemo: return "epidemic_demo";
        case ExperimentId::TraceConstant: return "trace_constant";
    }
    return "unknown";
}

std::optional<ExperimentId> experiment_from_string(const std::string& s) {
    for (auto id : {ExperimentId::Mms, ExperimentId::UniquenessDecay, ExperimentId::BackwardAmp,
                    ExperimentId::CarlemanSuite, ExperimentId::EpidemicDemo, ExperimentId::TraceConstant})
        if (to_string(id) == s) return id;
    return std::nullopt;
}

// ---------------------------------------------------------------------------

namespace {

Scenario mms_scenario(const MmsConfig& cfg, int nt, int nx) {
    Scenario s;
    s.grid = unit_grid(cfg.n, cfg.T, cfg.a_dagger, nt, nx);
    s.model.d = DiffusionSpec::identity();
    s.model.F = SourceSpec::zero();
    const int n = cfg.n;
    switch (cfg.solution) {
        case MmsSolution::Product:
            s.model.F.forcing = [n](double t, double a, const Point& x) {
                double v = std::exp(-t - a) * std::sin(kPi * x[0]);
                if (n == 2) v *= std::sin(kPi * x[1]);
                return (n * kPi * kPi - 2.0) * v;
            };
            s.initial = [n](double a, const Point& x) {
                return std::exp(-a) * std::sin(kPi * x[0]) * (n == 2 ? std::sin(kPi * x[1]) : 1.0);
            };
            break;
        case MmsSolution::XIndependent:
            s.model.S = SurfaceSpec::zero();
            s.model.F.forcing = [](double t, double a, const Point&) { return -2.0 * std::exp(-t - a); };
            s.initial = [](double a, const Point&) { return std::exp(-a); };
            break;
        case MmsSolution::Zero:
            s.initial = [](double, const Point&) { return 0.0; };
            break;
    }
    s.boundary = s.initial;
    return s;
}

double mms_exact(const MmsConfig& cfg, double t, double a, const Point& x) {
    switch (cfg.solution) {
        case MmsSolution::Product: {
            double v = std::exp(-t - a) * std::sin(kPi * x[0]);
            return cfg.n == 2 ? v * std::sin(kPi * x[1]) : v;
        }
        case MmsSolution::XIndependent: return std::exp(-t - a);
        case MmsSolution::Zero: return 0.0;
    }
    return 0.0;
}

double order_of(double d_coarse, double d_fine, double factor) {
    if (!(d_coarse > 0.0) || !(d_fine > 0.0)) return kNaN;
    return std::log(d_coarse / d_fine) / std::log(factor);
}

}  // namespace

ConvergenceTable run_mms(const MmsConfig& cfg) {
    if (cfg.nx_levels.empty() || cfg.nt_levels.empty())
        throw Error(ErrorCode::InvalidArgument, "MMS needs at least one level per study");
    for (std::size_t l = 1; l < cfg.nx_levels.size(); ++l)
        if (cfg.nx_levels[l] != 3 * cfg.nx_levels[l - 1])
            throw Error(ErrorCode::InvalidArgument, "spatial levels must refine by 3");
    for (std::size_t l = 1; l < cfg.nt_levels.size(); ++l)
        if (cfg.nt_levels[l] != 2 * cfg.nt_levels[l - 1])
            throw Error(ErrorCode::InvalidArgument, "characteristic levels must refine by 2");

    ConvergenceTable tab;
    auto solve_level = [&](int nt, int nx) {
        Scenario s = mms_scenario(cfg, nt, nx);
        Field u = solve_forward(s).first;
        Field ex = make_field(s.grid, [&](double t, double a, const Point& x) { return mms_exact(cfg, t, a, x); });
        return std::pair{std::move(u), std::sqrt(norm_Q(u - ex))};
    };

    int level = 0;
    std::vector<Field> sols;
    std::vector<double> diffs;
    for (std::size_t l = 0; l < cfg.nx_levels.size(); ++l) {
        auto [u, err] = solve_level(cfg.nt_fixed, cfg.nx_levels[l]);
        ConvergenceRow row{level++, u.grid().dx(), u.grid().ds, err, kNaN, kNaN};
        if (l >= 1) diffs.push_back(nested_difference(sols.back(), u, 3, 1));
        if (l >= 2) {
            row.order_x = order_of(diffs[l - 2], diffs[l - 1], 3.0);
            tab.spatial_order = row.order_x;
        }
        sols.push_back(std::move(u));
        tab.rows.push_back(row);
    }
    if (cfg.nx_levels.size() < 3) tab.spatial_order = kNaN;

    sols.clear();
    diffs.clear();
    for (std::size_t l = 0; l < cfg.nt_levels.size(); ++l) {
        auto [u, err] = solve_level(cfg.nt_levels[l], cfg.nx_fixed);
        ConvergenceRow row{level++, u.grid().dx(), u.grid().ds, err, kNaN, kNaN};
        if (l >= 1) diffs.push_back(nested_difference(sols.back(), u, 1, 2));
        if (l >= 2) {
            row.order_s = order_of(diffs[l - 2], diffs[l - 1], 2.0);
            tab.characteristic_order = row.order_s;
        }
        sols.push_back(std::move(u));
        tab.rows.push_back(row);
    }
    if (cfg.nt_levels.size() < 3) tab.characteristic_order = kNaN;
    return tab;
}

HeatModeResult run_heat_mode(int nt, int nx) {
    Scenario s;
    s.grid = unit_grid(1, 1.0, 1.0, nt, nx);
    s.model.d = DiffusionSpec::identity();
    s.model.F = SourceSpec::zero();
    s.initial = [](double, const Point& x) { return std::sin(kPi * x[0]); };
    s.boundary = s.initial;
    Field u = solve_forward(s).first;
    const Grid& g = s.grid;
    HeatModeResult r;
    for (int i = 0; i <= g.Nt; ++i)
        for (int j = 0; j <= g.Na; ++j)
            for (int c = 0; c < g.ncell(); ++c) {
                double ex = std::exp(-kPi * kPi * std::min(g.t(i), g.a(j))) * std::sin(kPi * g.x(c)[0]);
                r.max_error = std::max(r.max_error, std::abs(u(i, j, c) - ex));
            }
    r.bound = 2.0 * (g.ds + g.dx() * g.dx()) * kPi * kPi;
    r.pass = r.max_error <= r.bound;
    return r;
}

// ---------------------------------------------------------------------------

DecayResult run_uniqueness_decay(const DecayConfig& cfg) {
    Scenario s1;
    s1.grid = unit_grid(1, cfg.T, cfg.a_dagger, cfg.nt, cfg.nx);
    s1.model.d = DiffusionSpec::identity();
    s1.model.F = SourceSpec::holder_power(cfg.c, cfg.alpha);
    s1.initial = [](double a, const Point& x) { return (1.0 + a) * std::sin(kPi * x[0]); };
    s1.boundary = [](double t, const Point& x) { return (1.0 + 0.5 * t) * std::sin(kPi * x[0]); };

    Scenario s2 = s1;
    const double delta = cfg.delta;
    const auto a_from = cfg.a_from;
    auto pert = [](double s, const Point& x) { return (1.0 + std::cos(3.0 * s)) * std::sin(2.0 * kPi * x[0]) + std::sin(kPi * x[0]); };
    s2.initial = [=](double a, const Point& x) {
        double base = (1.0 + a) * std::sin(kPi * x[0]);
        if (a_from && a < *a_from) return base;
        return base + delta * pert(a, x);
    };
    if (!a_from)
        s2.boundary = [=](double t, const Point& x) { return (1.0 + 0.5 * t) * std::sin(kPi * x[0]) + delta * pert(t, x); };

    Field u1 = solve_forward(s1).first;
    Field u2 = solve_forward(s2).first;
    const Grid& g = s1.grid;

    DecayResult res;
    res.identical = u1.values() == u2.values();
    Field w = u1 - u2;

    // Realized Hoelder quotient: backward difference at (i,j) against w at the departure node.
    {
        Field Aw = apply_A(w, s1.model.d, BoundaryCondition::dirichlet());
        double wmax = 0.0;
        for (double v : w.values()) wmax = std::max(wmax, std::abs(v));
        for (int i = 1; i <= g.Nt; ++i)
            for (int j = 1; j <= g.Na; ++j)
                for (int c = 0; c < g.ncell(); ++c) {
                    double w0 = w(i - 1, j - 1, c);
                    if (!(std::abs(w0) > 1e-6 * wmax)) continue;
                    double r = Aw(i, j, c) - (w(i, j, c) - w0) / g.ds;
                    res.realized_holder = std::max(res.realized_holder, std::abs(r) / std::pow(std::abs(w0), cfg.alpha));
                }
    }

    if (cfg.K) {
        res.K = *cfg.K;
    } else {
        DirichletParams p;
        p.k = cfg.k;
        p.m0 = cfg.m0;
        p.mu0 = cfg.mu0;
        p.eta0 = cfg.eta0;
        p.alpha = cfg.alpha;
        p.L_F = s1.model.F.L_F;
        res.K = compute_constants_dirichlet(p).K;
    }
    Field wc = multiply(make_cutoff(cfg.cutoff, CutoffKind::TerminalChi, g), w);
    res.table = corner_decay(wc, cfg.cutoff, s1.model.d, res.K, s1.model.F.L_F, cfg.k, cfg.eta, cfg.m_sweep);
    return res;
}

// ---------------------------------------------------------------------------

AmplificationTable run_backward_amplification(const BackwardConfig& cfg) {
    Scenario s;
    s.grid = unit_grid(cfg.n, cfg.T, cfg.a_dagger, cfg.nt, cfg.nx);
    s.model.d = cfg.n == 1 ? DiffusionSpec::diagonal(cfg.d, cfg.d) : DiffusionSpec::constant({cfg.d, 0.0, 0.0, cfg.d});
    s.model.F = SourceSpec::zero();
    const Grid g = s.grid;
    s.initial = [g](double, const Point& x) { return sine_mode(g, x); };
    s.boundary = s.initial;
    Field fwd = solve_forward(s).first;

    AmplificationTable tab;
    auto take = [&](const BackwardPerturbation& p) {
        BackwardResult r = solve_backward_naive(s, fwd, p);
        tab.truncated = tab.truncated || r.truncated;
        if (r.rows.empty()) throw Error(ErrorCode::Overflow, "backward march produced no rows");
        tab.rows.push_back(r.rows.back());
    };
    if (cfg.include_unperturbed) take({0.0, 1, cfg.tau});
    for (int j : cfg.frequencies) take({cfg.epsilon, j, cfg.tau});
    return tab;
}

// ---------------------------------------------------------------------------

Field corpus_field(const Grid& g, const CutoffSpec& c, std::uint64_t seed, bool dirichlet) {
    SplitRng rng(seed);
    struct Bump {
        double amp, tc, wt, ac, wa;
        int k0, k1;
        double phase;
    };
    const int nb = rng.integer(3, 6);
    std::vector<Bump> bumps;
    for (int b = 0; b < nb; ++b) {
        Bump u;
        u.amp = rng.uniform(0.5, 1.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
        u.tc = rng.uniform(0.0, g.T);
        u.wt = rng.uniform(0.25, 0.6) * g.T;
        u.ac = rng.uniform(0.0, g.a_dagger);
        u.wa = rng.uniform(0.25, 0.6) * g.a_dagger;
        u.k0 = rng.integer(dirichlet ? 1 : 0, 3);
        u.k1 = rng.integer(dirichlet ? 1 : 0, 2);
        u.phase = rng.uniform(0.0, 1.0);
        bumps.push_back(u);
    }
    TAArray kappa = make_cutoff(c, CutoffKind::Kappa, g);
    TAArray chi = make_cutoff(c, CutoffKind::TerminalChi, g);
    Field f = make_field(g, [&](double t, double a, const Point& x) {
        double v = 0.0;
        for (const auto& b : bumps) {
            double ta = std::exp(-0.5 * std::pow((t - b.tc) / b.wt, 2) - 0.5 * std::pow((a - b.ac) / b.wa, 2));
            double sx;
            if (dirichlet) {
                sx = std::sin(b.k0 * kPi * x[0] / g.L[0]);
                if (g.n == 2) sx *= std::sin(b.k1 * kPi * x[1] / g.L[1]);
            } else {
                sx = b.phase + std::cos(b.k0 * kPi * x[0] / g.L[0]);
                if (g.n == 2) sx *= std::cos(b.k1 * kPi * x[1] / g.L[1]);
            }
            v += b.amp * ta * sx;
        }
        return v;
    });
    for (int i = 0; i <= g.Nt; ++i)
        for (int j = 0; j <= g.Na; ++j) {
            double m = kappa(i, j) * chi(i, j);
            for (double& v : f.slice(i, j)) v *= m;
        }
    TraceFlags fl;
    fl.zero_t_ends = fl.zero_a_ends = true;
    fl.zero_spatial_boundary = dirichlet;
    f.set_flags(fl);
    return f;
}

namespace {

VerificationReport condition_report(const std::string& id, const Condition& c) {
    VerificationReport r;
    r.id = id;
    r.lhs = c.slack;
    r.rhs = 0.0;
    r.margin = c.slack;
    r.pass = c.ok;
    return r;
}

void add_audit(std::vector<VerificationReport>& out, const AssumptionAudit& audit, const std::string& prefix) {
    for (const auto& e : audit.entries) {
        VerificationReport r;
        r.id = prefix + e.id;
        bool lower = e.id == "A1.lower" || e.id == "A5";
        r.lhs = lower ? e.extremum : e.bound;
        r.rhs = lower ? e.bound : e.extremum;
        r.margin = r.lhs - r.rhs;
        r.pass = e.pass;
        r.params = {{"where0", e.where[0]}, {"where1", e.where[1]}, {"where2", e.where[2]}, {"where3", e.where[3]}};
        out.push_back(r);
    }
}

bool is_inequality(const std::string& id) { return id.rfind("dirichlet.", 0) == 0 || id.rfind("robin.", 0) == 0; }

std::uint64_t mix(std::uint64_t seed, std::uint64_t k) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (k + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

SuiteResult run_carleman_suite(const SuiteConfig& cfg) {
    SuiteResult res;
    auto& out = res.reports;

    // Elementary inequality and weight-product identity.
    if (cfg.elementary_samples > 0) {
        auto el = check_elementary_inequality(cfg.elementary_samples, mix(cfg.seed, 1));
        out.push_back(el.report);
    }
    {
        SplitRng rng(mix(cfg.seed, 2));
        for (int s = 0; s < cfg.product_samples; ++s) {
            double q = rng.uniform(0.1, 1.0);
            double m = rng.uniform(1.0, 64.0);
            double k = rng.uniform(0.5, 4.0);
            double eta0 = rng.log_uniform(1e-3, 0.5);
            out.push_back(check_weight_product_identity(q, m, k, eta0));
        }
    }

    // Dirichlet family.
    Grid g = unit_grid(cfg.n, cfg.T, cfg.a_dagger, cfg.nt, cfg.nx);
    DiffusionSpec d = cfg.d_amp > 0.0 ? DiffusionSpec::sinusoidal(cfg.d_amp) : DiffusionSpec::identity();
    DirichletParams dp = cfg.dirichlet;
    dp.c_lower = d.c_lower;
    dp.M_bar = d.M_bar;
    dp.k = cfg.k;
    auto dc = compute_constants_dirichlet(dp);
    out.push_back(condition_report("constants.dirichlet.ellipticity", dc.ellipticity));
    out.push_back(condition_report("constants.dirichlet.source_bound", dc.source_bound));
    ModelSpec dm{d, SourceSpec::holder_power(dp.L_F, dp.alpha), std::nullopt};
    add_audit(out, audit_assumptions(dm, g, cfg.audit_samples, mix(cfg.seed, 3)), "audit.dirichlet.");

    std::vector<Field> corpus;
    for (int f = 0; f < cfg.corpus_size; ++f) corpus.push_back(corpus_field(g, cfg.cutoff, mix(cfg.seed, 100 + f), true));

    if (!corpus.empty()) {
        double green = check_green_identity(corpus.front(), DiffusionSpec::identity());
        VerificationReport r;
        r.id = "identity.green";
        r.lhs = 1e-10;
        r.rhs = green;
        r.margin = r.lhs - r.rhs;
        r.pass = green <= 1e-10;
        out.push_back(r);
    }

    for (int f = 0; f < int(corpus.size()); ++f)
        for (double m : cfg.m_sweep) {
            WeightSpec w{m, cfg.k, cfg.eta};
            for (auto r : verify_dirichlet_estimates(corpus[f], d, w, dp, cfg.c_tol)) {
                r.params.emplace_back("field", f);
                out.push_back(std::move(r));
            }
        }

    // Robin family.
    if (!cfg.robin_sigmas.empty()) {
        Grid gr = unit_grid(cfg.n, cfg.robin_T, cfg.robin_a_dagger, cfg.robin_nt, cfg.robin_nx);
        RobinParams rp = cfg.robin;
        rp.c_lower = d.c_lower;
        rp.M_bar = d.M_bar;
        rp.k = cfg.k;
        if (cfg.estimate_C0) rp.C0 = estimate_trace_constant(gr).C0;
        std::vector<Field> rcorpus;
        for (int f = 0; f < cfg.corpus_size; ++f)
            rcorpus.push_back(corpus_field(gr, cfg.robin_cutoff, mix(cfg.seed, 1000 + f), false));
        for (double sigma : cfg.robin_sigmas) {
            SurfaceSpec S = SurfaceSpec::linear(sigma);
            S.beta = 1.0;
            S.L_S = sigma;
            S.m_bar = std::max(sigma, 0.5);
            RobinParams p = rp;
            p.m_bar = S.m_bar;
            p.beta = S.beta;
            p.L_S = S.L_S;
            ModelSpec rm{d, SourceSpec::holder_power(p.L_F, p.alpha), S};
            AuditOptions ao;
            ao.rho_max = cfg.audit_rho_max;
            add_audit(out, audit_assumptions(rm, gr, cfg.audit_samples, mix(cfg.seed, 4), ao),
                      "audit.robin.sigma" + fmt(sigma) + ".");
            for (int f = 0; f < int(rcorpus.size()); ++f) {
                BoundaryField gflux = trace(rcorpus[f]);
                for (double& v : gflux.values()) v *= sigma;
                for (double m : cfg.robin_m_sweep) {
                    WeightSpec w{m, cfg.k, cfg.robin_eta};
                    for (auto r : verify_robin_estimates(rcorpus[f], gflux, d, S, w, p, cfg.robin_cutoff, cfg.c_tol)) {
                        r.params.emplace_back("field", f);
                        r.params.emplace_back("sigma", sigma);
                        out.push_back(std::move(r));
                    }
                }
            }
        }
    }

    if (cfg.corrupt)
        for (auto& r : out)
            if (is_inequality(r.id)) {
                r.lhs = -r.lhs;
                r.margin = r.lhs - r.rhs;
                r.pass = r.margin >= -r.tol;
            }

    for (const auto& r : out)
        if (!r.pass) {
            ++res.violations;
            if (std::find(res.failed_ids.begin(), res.failed_ids.end(), r.id) == res.failed_ids.end())
                res.failed_ids.push_back(r.id);
        }
    return res;
}

// ---------------------------------------------------------------------------

EpidemicResult run_epidemic_demo(const EpidemicConfig& cfg) {
    CoupledScenario s;
    s.grid = unit_grid(cfg.n, cfg.T, cfg.a_dagger, cfg.nt, cfg.nx);
    s.d1 = cfg.n == 1 ? DiffusionSpec::diagonal(cfg.d_s, cfg.d_s) : DiffusionSpec::constant({cfg.d_s, 0, 0, cfg.d_s});
    s.d2 = cfg.n == 1 ? DiffusionSpec::diagonal(cfg.d_i, cfg.d_i) : DiffusionSpec::constant({cfg.d_i, 0, 0, cfg.d_i});
    s.death1 = [d = cfg.death_s](double) { return d; };
    s.death2 = [d = cfg.death_i](double) { return d; };
    s.chi = [c = cfg.chi0, lo = cfg.a_lo, hi = cfg.a_hi](double a) { return a >= lo && a <= hi ? c : 0.0; };
    s.contact = [c = cfg.contact](double, const Point&) { return c; };
    if (cfg.neumann) s.S = SurfaceSpec::zero();
    const Grid g = s.grid;
    s.initial1 = [g](double a, const Point& x) {
        double v = std::exp(-a) * (1.0 + 0.5 * std::cos(kPi * x[0] / g.L[0]));
        return g.n == 2 ? v * (1.0 + 0.5 * std::cos(kPi * x[1] / g.L[1])) : v;
    };
    s.boundary1 = [g](double, const Point& x) {
        double v = 1.0 + 0.5 * std::cos(kPi * x[0] / g.L[0]);
        return g.n == 2 ? v * (1.0 + 0.5 * std::cos(kPi * x[1] / g.L[1])) : v;
    };
    s.initial2 = [](double a, const Point&) { return 0.1 * std::exp(-a); };
    s.boundary2 = [](double, const Point&) { return 0.0; };
    auto [u, v] = solve_coupled(s);

    EpidemicResult r;
    const int steps = std::min(g.Nt, g.Na);
    for (int n = 0; n <= steps; ++n)
        r.mass.push_back({g.t(n), tree_sum(u.slice(n, n)) * g.cell_volume(), tree_sum(v.slice(n, n)) * g.cell_volume()});
    r.min_value = std::numeric_limits<double>::infinity();
    for (double x : u.values()) r.min_value = std::min(r.min_value, x);
    for (double x : v.values()) r.min_value = std::min(r.min_value, x);
    r.u = std::move(u);
    r.v = std::move(v);
    return r;
}

// ---------------------------------------------------------------------------

TraceTable run_trace_constant(const TraceConfig& cfg) {
    TraceTable tab;
    tab.lower_bound = cfg.n == 1 ? 2.0 : 4.0;
    for (int nx : cfg.nx_levels) {
        Grid g = unit_grid(cfg.n, 1.0, 1.0, 1, nx);
        auto tc = estimate_trace_constant(g, cfg.rel_tol);
        tab.rows.push_back({nx, tc.C0, tc.iterations});
    }
    if (tab.rows.size() >= 2) {
        double a = tab.rows.back().C0, b = tab.rows[tab.rows.size() - 2].C0;
        tab.relative_change = std::abs(a - b) / a;
    }
    return tab;
}

// ---------------------------------------------------------------------------

std::vector<std::string> write_convergence_csv(const ConvergenceTable& t, const std::string& dir) {
    std::vector<std::string> paths;
    auto out = open_out(dir, "convergence.csv", paths);
    out << "level,h_x,h_s,error,order_x,order_s\n";
    for (const auto& r : t.rows)
        out << r.level << ',' << fmt(r.h_x) << ',' << fmt(r.h_s) << ',' << fmt(r.error) << ',' << fmt(r.order_x) << ','
            << fmt(r.order_s) << '\n';
    finish(out, paths.back());
    return paths;
}

std::vector<std::string> write_decay_csv(const DecayTable& t, const std::string& dir) {
    std::vector<std::string> paths;
    auto out = open_out(dir, "decay.csv", paths);
    out << "m,bound,corner_norm,pass\n";
    for (const auto& r : t.rows)
        out << fmt(r.m) << ',' << fmt(r.bound) << ',' << fmt(r.corner_norm) << ',' << (r.pass ? "true" : "false") << '\n';
    finish(out, paths.back());
    return paths;
}

std::vector<std::string> write_amplification_csv(const AmplificationTable& t, const std::string& dir) {
    std::vector<std::string> paths;
    auto out = open_out(dir, "amplification.csv", paths);
    out << "j,tau,predicted,measured\n";
    for (const auto& r : t.rows)
        out << r.j << ',' << fmt(r.tau) << ',' << fmt(r.predicted) << ',' << fmt(r.measured) << '\n';
    finish(out, paths.back());
    return paths;
}

std::vector<std::string> write_suite(const std::vector<VerificationReport>& reports, const std::string& dir) {
    std::vector<std::string> paths;
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : reports) {
        nlohmann::ordered_json j;
        j["id"] = r.id;
        j["lhs"] = json_number(r.lhs);
        j["rhs"] = json_number(r.rhs);
        j["margin"] = json_number(r.margin);
        j["tol"] = json_number(r.tol);
        j["pass"] = r.pass;
        nlohmann::ordered_json p = nlohmann::ordered_json::object();
        for (const auto& [k, v] : r.params) p[k] = json_number(v);
        j["params"] = p;
        arr.push_back(j);
    }
    {
        auto out = open_out(dir, "suite.json", paths);
        out << arr.dump(2) << '\n';
        finish(out, paths.back());
    }
    {
        auto out = open_out(dir, "suite.csv", paths);
        out << "id,lhs,rhs,margin,tol,pass\n";
        for (const auto& r : reports)
            out << r.id << ',' << fmt(r.lhs) << ',' << fmt(r.rhs) << ',' << fmt(r.margin) << ',' << fmt(r.tol) << ','
                << (r.pass ? "true" : "false") << '\n';
        finish(out, paths.back());
    }
    return paths;
}

std::vector<std::string> write_trace_csv(const TraceTable& t, const std::string& dir) {
    std::vector<std::string> paths;
    auto out = open_out(dir, "trace.csv", paths);
    out << "nx,C0,iterations\n";
    for (const auto& r : t.rows) out << r.nx << ',' << fmt(r.C0) << ',' << r.iterations << '\n';
    finish(out, paths.back());
    return paths;
}

std::vector<std::string> write_epidemic(const EpidemicResult& r, const std::string& dir) {
    std::vector<std::string> paths;
    {
        auto out = open_out(dir, "epidemic_mass.csv", paths);
        out << "s,mass_u,mass_v,mass_sum\n";
        for (const auto& m : r.mass) out << fmt(m[0]) << ',' << fmt(m[1]) << ',' << fmt(m[2]) << ',' << fmt(m[1] + m[2]) << '\n';
        finish(out, paths.back());
    }
    for (const auto& [name, f] : {std::pair{"epidemic_u.csv", &r.u}, std::pair{"epidemic_v.csv", &r.v}}) {
        std::vector<std::string> tmp;
        open_out(dir, name, tmp).close();
        write_field_csv(*f, tmp.back());
        paths.push_back(tmp.back());
    }
    return paths;
}

}  // namespace agepde
