#include "agepde/model.hpp"
#include "agepde/reduce.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace agepde {

namespace {

double signed_pow(double u, double q) { return std::copysign(std::pow(std::abs(u), q), u); }

std::array<double, 2> sym_eigs(const Tensor& d) {
    double m = 0.5 * (d[0] + d[3]);
    double r = std::hypot(0.5 * (d[0] - d[3]), d[1]);
    return {m - r, m + r};
}

double spectral_norm(const Tensor& d, int n) {
    if (n == 1) return std::abs(d[0]);
    auto e = sym_eigs(d);
    return std::max(std::abs(e[0]), std::abs(e[1]));
}

}  // namespace

DiffusionSpec DiffusionSpec::identity() {
    DiffusionSpec s;
    s.eval = [](double, double, const Point&) { return Tensor{1.0, 0.0, 0.0, 1.0}; };
    s.transport_derivative = [](double, double, const Point&) { return Tensor{0.0, 0.0, 0.0, 0.0}; };
    return s;
}

DiffusionSpec DiffusionSpec::diagonal(double d0, double d1) {
    DiffusionSpec s = constant(Tensor{d0, 0.0, 0.0, d1});
    s.name = "diagonal";
    return s;
}

DiffusionSpec DiffusionSpec::constant(const Tensor& d) {
    DiffusionSpec s;
    s.eval = [d](double, double, const Point&) { return d; };
    s.transport_derivative = [](double, double, const Point&) { return Tensor{0.0, 0.0, 0.0, 0.0}; };
    auto e = sym_eigs(d);
    s.c_lower = e[0];
    s.c_upper = e[1];
    s.M_bar = 0.0;
    s.name = "constant";
    return s;
}

DiffusionSpec DiffusionSpec::sinusoidal(double amp) {
    DiffusionSpec s;
    s.eval = [amp](double t, double a, const Point&) { return Tensor{1.0 + amp * std::sin(t + a), 0.0, 0.0, 1.0}; };
    s.transport_derivative = [amp](double t, double a, const Point&) {
        return Tensor{2.0 * amp * std::cos(t + a), 0.0, 0.0, 0.0};
    };
    s.c_lower = 1.0 - std::abs(amp);
    s.c_upper = 1.0 + std::abs(amp);
    s.M_bar = 2.0 * std::abs(amp);
    s.constant_in_ta = false;
    s.name = "sinusoidal";
    return s;
}

DiffusionSpec DiffusionSpec::age_dependent(std::function<double(double)> d, double lower, double upper,
                                           double m_bar) {
    DiffusionSpec s;
    s.eval = [d](double, double a, const Point&) {
        double v = d(a);
        return Tensor{v, 0.0, 0.0, v};
    };
    s.c_lower = lower;
    s.c_upper = upper;
    s.M_bar = m_bar;
    s.constant_in_ta = false;
    s.name = "age_dependent";
    return s;
}

Tensor eval_diffusion(const DiffusionSpec& spec, double t, double a, const Point& x) { return spec.eval(t, a, x); }

Tensor eval_diffusion_transport(const DiffusionSpec& spec, double t, double a, const Point& x) {
    if (spec.transport_derivative) return spec.transport_derivative(t, a, x);
    constexpr double h = 1e-5;
    Tensor p = spec.eval(t + h, a + h, x);
    Tensor m = spec.eval(t - h, a - h, x);
    Tensor out;
    for (int k = 0; k < 4; ++k) out[k] = (p[k] - m[k]) / (2.0 * h);
    return out;
}

SourceSpec SourceSpec::zero() { return {}; }

SourceSpec SourceSpec::linear_death(double d0) {
    SourceSpec s;
    s.kind = SourceKind::LinearDeath;
    s.p1 = d0;
    s.L_F = std::max(std::abs(d0), 1e-300);
    return s;
}

SourceSpec SourceSpec::logistic(double r, double cap) {
    SourceSpec s;
    s.kind = SourceKind::Logistic;
    s.p1 = r;
    s.p2 = cap;
    s.L_F = std::abs(r) * (1.0 + 4.0 / std::abs(cap));
    return s;
}

SourceSpec SourceSpec::von_bertalanffy(double r, double theta) {
    SourceSpec s;
    s.kind = SourceKind::VonBertalanffy;
    s.p1 = r;
    s.p2 = theta;
    s.L_F = std::max(std::abs(r), 1e-300);
    return s;
}

SourceSpec SourceSpec::arrhenius(double A0, double E) {
    SourceSpec s;
    s.kind = SourceKind::Arrhenius;
    s.p1 = A0;
    s.p2 = E;
    s.L_F = std::max(std::abs(A0), 1e-300);
    return s;
}

SourceSpec SourceSpec::holder_power(double c, double q) {
    SourceSpec s;
    s.kind = SourceKind::HolderPower;
    s.p1 = c;
    s.p2 = q;
    s.alpha = q;
    s.L_F = std::max(std::abs(c), 1e-300);
    return s;
}

SourceSpec SourceSpec::lotka_von_foerster(double L_F) {
    SourceSpec s;
    s.kind = SourceKind::LotkaVonFoerster;
    s.L_F = L_F;
    return s;
}

std::string to_string(SourceKind k) {
    switch (k) {
        case SourceKind::Zero: return "zero";
        case SourceKind::LinearDeath: return "linear_death";
        case SourceKind::Logistic: return "logistic";
        case SourceKind::VonBertalanffy: return "von_bertalanffy";
        case SourceKind::Arrhenius: return "arrhenius";
        case SourceKind::HolderPower: return "holder_power";
        case SourceKind::LotkaVonFoerster: return "lotka_von_foerster";
    }
    return "zero";
}

std::optional<SourceKind> source_kind_from_string(const std::string& s) {
    for (auto k : {SourceKind::Zero, SourceKind::LinearDeath, SourceKind::Logistic, SourceKind::VonBertalanffy,
                   SourceKind::Arrhenius, SourceKind::HolderPower, SourceKind::LotkaVonFoerster})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

double total_population(const Field& u, int i) {
    const Grid& g = u.grid();
    std::vector<double> terms(std::size_t(g.Na + 1));
    for (int j = 0; j <= g.Na; ++j) terms[j] = trapezoid_weight(j, 0, g.Na, g.ds) * tree_sum(u.slice(i, j));
    return tree_sum(terms) * g.cell_volume();
}

double source_value(const SourceSpec& s, double t, double a, const Point& x, double u, double total) {
    double f = 0.0;
    switch (s.kind) {
        case SourceKind::Zero: break;
        case SourceKind::LinearDeath: f = -s.p1 * u; break;
        case SourceKind::Logistic: f = s.p1 * u * (1.0 - u / s.p2); break;
        case SourceKind::VonBertalanffy: f = s.p1 * (s.p2 - u); break;
        case SourceKind::Arrhenius: f = -s.p1 * std::exp(-s.p2 / (1.0 + a)) * u; break;
        case SourceKind::HolderPower: f = -s.p1 * signed_pow(u, s.p2); break;
        case SourceKind::LotkaVonFoerster: f = -u * total; break;
    }
    if (s.forcing) f += s.forcing(t, a, x);
    return f;
}

double eval_source(const SourceSpec& s, double t, double a, const Point& x, double u, const Field* context) {
    double total = 0.0;
    if (s.needs_context()) {
        if (!context) throw Error(ErrorCode::MissingContext, "lotka_von_foerster source needs a field context");
        const Grid& g = context->grid();
        total = total_population(*context, g.snap_index(t, g.Nt, ErrorCode::MissingContext));
    }
    return source_value(s, t, a, x, u, total);
}

double source_lipschitz_estimate(const SourceSpec& s, double umax, double a_dagger, double omega_measure) {
    switch (s.kind) {
        case SourceKind::Zero: return 0.0;
        case SourceKind::LinearDeath: return std::abs(s.p1);
        case SourceKind::Logistic: return std::abs(s.p1) * (1.0 + 2.0 * umax / std::abs(s.p2));
        case SourceKind::VonBertalanffy: return std::abs(s.p1);
        case SourceKind::Arrhenius: return std::abs(s.p1);
        // Hoelder increments are bounded by L_F|du|^alpha; the unit-density slope is used.
        case SourceKind::HolderPower: return std::abs(s.p1) * (s.p2 >= 1.0 ? s.p2 * std::pow(std::max(umax, 1.0), s.p2 - 1.0) : 1.0);
        case SourceKind::LotkaVonFoerster: return 2.0 * umax * a_dagger * omega_measure;
    }
    return 0.0;
}

SurfaceSpec SurfaceSpec::zero() { return {}; }

SurfaceSpec SurfaceSpec::linear(double sigma, bool monotone) {
    SurfaceSpec s;
    s.kind = SurfaceKind::Linear;
    s.sigma = sigma;
    s.exponent = 1.0;
    s.beta = 1.0;
    s.L_S = std::max(std::abs(sigma), 1e-300);
    s.m_bar = std::max(std::abs(sigma), 0.5);
    s.monotone = sigma >= 0.0 ? true : monotone;
    return s;
}

SurfaceSpec SurfaceSpec::power(double sigma, double beta) {
    SurfaceSpec s;
    s.kind = SurfaceKind::Power;
    s.sigma = sigma;
    s.exponent = beta;
    s.beta = beta;
    s.L_S = std::max(std::abs(sigma) * std::pow(2.0, 1.0 - beta), 1e-300);
    s.monotone = sigma >= 0.0;
    return s;
}

std::string to_string(SurfaceKind k) {
    switch (k) {
        case SurfaceKind::Zero: return "zero";
        case SurfaceKind::Linear: return "linear";
        case SurfaceKind::Power: return "power";
    }
    return "zero";
}

double eval_surface(const SurfaceSpec& s, double u) {
    switch (s.kind) {
        case SurfaceKind::Zero: return 0.0;
        case SurfaceKind::Linear: return s.sigma * u;
        case SurfaceKind::Power: return s.sigma * signed_pow(u, s.exponent);
    }
    return 0.0;
}

double SplitRng::log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }

bool AssumptionAudit::all_pass() const {
    return std::all_of(entries.begin(), entries.end(), [](const AuditEntry& e) { return e.pass; });
}

const AuditEntry* AssumptionAudit::find(const std::string& id) const {
    for (const auto& e : entries)
        if (e.id == id) return &e;
    return nullptr;
}

namespace {

bool within(double value, double bound) { return value <= bound * (1.0 + 1e-9) + 1e-12; }

/// Rounds down to a multiple of 2^-24, so differences of samples are exact.
double on_lattice(double u) { return std::ldexp(std::floor(std::ldexp(u, 24)), -24); }

struct Sample {
    double t, a;
    Point x;
};

Sample draw_point(SplitRng& rng, const Grid& g) {
    Sample s;
    s.t = rng.uniform(0.0, g.T);
    s.a = rng.uniform(0.0, g.a_dagger);
    s.x = {rng.uniform(0.0, g.L[0]), g.n == 2 ? rng.uniform(0.0, g.L[1]) : 0.5};
    return s;
}

}  // namespace

AssumptionAudit audit_assumptions(const ModelSpec& model, const Grid& g, int n_samples, std::uint64_t seed,
                                  const AuditOptions& opts) {
    AssumptionAudit audit;
    SplitRng rng(seed);
    const int n = std::max(1, n_samples);

    // A1: Rayleigh quotients and symmetry.
    {
        AuditEntry lo{"A1.lower", std::numeric_limits<double>::infinity(), model.d.c_lower, true, {}};
        AuditEntry hi{"A1.upper", -std::numeric_limits<double>::infinity(), model.d.c_upper, true, {}};
        AuditEntry sym{"A1.symmetry", 0.0, 1e-14, true, {}};
        for (int k = 0; k < n; ++k) {
            Sample p = draw_point(rng, g);
            Tensor d = model.d.eval(p.t, p.a, p.x);
            double q;
            if (g.n == 1) {
                q = d[0];
            } else {
                double th = rng.uniform(0.0, 2.0 * M_PI);
                double c = std::cos(th), s = std::sin(th);
                q = c * c * d[0] + c * s * (d[1] + d[2]) + s * s * d[3];
                double asym = std::abs(d[1] - d[2]);
                if (asym > sym.extremum) sym = {"A1.symmetry", asym, 1e-14, true, {p.t, p.a, p.x[0], p.x[1]}};
            }
            if (q < lo.extremum) lo.extremum = q, lo.where = {p.t, p.a, p.x[0], p.x[1]};
            if (q > hi.extremum) hi.extremum = q, hi.where = {p.t, p.a, p.x[0], p.x[1]};
        }
        lo.pass = lo.extremum >= lo.bound * (1.0 - 1e-9) - 1e-12;
        hi.pass = within(hi.extremum, hi.bound);
        sym.pass = sym.extremum <= sym.bound;
        audit.entries.push_back(lo);
        audit.entries.push_back(hi);
        audit.entries.push_back(sym);
    }

    // A2: |d_t| + |d_a| by central differences.
    {
        AuditEntry e{"A2", 0.0, model.d.M_bar, true, {}};
        constexpr double h = 1e-4;
        for (int k = 0; k < n; ++k) {
            Sample p = draw_point(rng, g);
            Tensor tp = model.d.eval(p.t + h, p.a, p.x), tm = model.d.eval(p.t - h, p.a, p.x);
            Tensor ap = model.d.eval(p.t, p.a + h, p.x), am = model.d.eval(p.t, p.a - h, p.x);
            Tensor dt, da;
            for (int c = 0; c < 4; ++c) {
                dt[c] = (tp[c] - tm[c]) / (2 * h);
                da[c] = (ap[c] - am[c]) / (2 * h);
            }
            double v = spectral_norm(dt, g.n) + spectral_norm(da, g.n);
            if (v > e.extremum) e.extremum = v, e.where = {p.t, p.a, p.x[0], p.x[1]};
        }
        e.pass = e.extremum <= e.bound + 1e-6;
        audit.entries.push_back(e);
    }

    // A3: Hoelder ratio of F on nonnegative densities.
    if (model.F.kind == SourceKind::LotkaVonFoerster) {
        // Only boundedness on bounded contexts is audited for the nonlocal kind.
        double U = opts.u_range;
        double total = U * g.a_dagger * g.omega_measure();
        AuditEntry e{"A3.bounded", 0.0, U * total, true, {}};
        for (int k = 0; k < n; ++k) {
            Sample p = draw_point(rng, g);
            double u = rng.uniform(0.0, U);
            double v = std::abs(source_value(model.F, p.t, p.a, p.x, u, total) -
                                (model.F.forcing ? model.F.forcing(p.t, p.a, p.x) : 0.0));
            if (v > e.extremum) e.extremum = v, e.where = {p.t, p.a, u, 0.0};
        }
        e.pass = within(e.extremum, e.bound);
        audit.entries.push_back(e);
    } else {
        AuditEntry e{"A3", 0.0, model.F.L_F, true, {}};
        for (int k = 0; k < n; ++k) {
            Sample p = draw_point(rng, g);
            double u1 = on_lattice(rng.uniform(0.0, opts.u_range)), u2 = on_lattice(rng.uniform(0.0, opts.u_range));
            if (u1 == u2) continue;
            double df = source_value(model.F, p.t, p.a, p.x, u1, 0.0) - source_value(model.F, p.t, p.a, p.x, u2, 0.0);
            double v = std::abs(df) / std::pow(std::abs(u1 - u2), model.F.alpha);
            if (v > e.extremum) e.extremum = v, e.where = {p.t, p.a, u1, u2};
        }
        e.pass = within(e.extremum, e.bound);
        audit.entries.push_back(e);
    }

    if (!model.S) return audit;
    const SurfaceSpec& S = *model.S;

    // A4: <(d_t + d_a)(S(u1) - S(u2)), u1 - u2> <= m_bar |u1 - u2|^2 on smooth trajectories.
    {
        AuditEntry e{"A4", -std::numeric_limits<double>::infinity(), S.m_bar, true, {}};
        constexpr double h = 1e-5;
        for (int k = 0; k < n; ++k) {
            double b = rng.uniform(0.5, 1.5), c = rng.uniform(0.0, 0.25) * b, om = rng.uniform(0.5, 3.0);
            double ph = rng.uniform(0.0, 2.0 * M_PI), d0 = rng.uniform(0.01, 0.2) * b;
            double rho = rng.uniform(-opts.rho_max, opts.rho_max);
            double t = rng.uniform(0.0, g.T), a = rng.uniform(0.0, g.a_dagger);
            auto u1 = [&](double tt, double aa) { return b + c * std::sin(om * tt + 0.7 * om * aa + ph); };
            auto u2 = [&](double tt, double aa) { return u1(tt, aa) + d0 * std::exp(rho * (tt + aa)); };
            auto ds = [&](double tt, double aa) { return eval_surface(S, u1(tt, aa)) - eval_surface(S, u2(tt, aa)); };
            double deriv = (ds(t + h, a + h) - ds(t - h, a - h)) / (2 * h);
            double w = u1(t, a) - u2(t, a);
            double v = deriv * w / (w * w);
            if (v > e.extremum) e.extremum = v, e.where = {t, a, u1(t, a), u2(t, a)};
        }
        e.pass = within(e.extremum, e.bound);
        audit.entries.push_back(e);
    }

    // A5: monotonicity of S.
    {
        AuditEntry e{"A5", std::numeric_limits<double>::infinity(), 0.0, true, {}};
        for (int k = 0; k < n; ++k) {
            double u1 = rng.uniform(-opts.u_range, opts.u_range), u2 = rng.uniform(-opts.u_range, opts.u_range);
            if (u1 == u2) continue;
            double v = (eval_surface(S, u1) - eval_surface(S, u2)) / (u1 - u2);
            if (v < e.extremum) e.extremum = v, e.where = {u1, u2, 0.0, 0.0};
        }
        e.pass = !S.monotone || e.extremum >= -1e-12;
        audit.entries.push_back(e);
    }

    // A6: Hoelder ratio of S.
    {
        AuditEntry e{"A6", 0.0, S.L_S, true, {}};
        for (int k = 0; k < n; ++k) {
            double u1 = on_lattice(rng.uniform(0.0, opts.u_range)), u2 = on_lattice(rng.uniform(0.0, opts.u_range));
            if (u1 == u2) continue;
            double v = std::abs(eval_surface(S, u1) - eval_surface(S, u2)) / std::pow(std::abs(u1 - u2), S.beta);
            if (v > e.extremum) e.extremum = v, e.where = {u1, u2, 0.0, 0.0};
        }
        e.pass = within(e.extremum, e.bound);
        audit.entries.push_back(e);
    }
    return audit;
}

}  // namespace agepde
