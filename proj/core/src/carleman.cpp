#include "agepde/carleman.hpp"
#include "agepde/cg.hpp"
#include "agepde/reduce.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace agepde {

namespace {

double binom(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

void check_on_grid(double v, int nmax, const Grid& g) { g.snap_index(v, nmax, ErrorCode::BreakpointOffGrid); }

VerificationReport make_report(std::string id, double lhs, double rhs, double tol,
                               std::vector<std::pair<std::string, double>> params) {
    VerificationReport r;
    r.id = std::move(id);
    r.lhs = lhs;
    r.rhs = rhs;
    r.margin = lhs - rhs;
    r.tol = tol;
    r.pass = r.margin >= -tol;
    r.params = std::move(params);
    return r;
}

double tolerance(const Grid& g, double c_tol, double scale) {
    return c_tol * (g.ds + g.dx() * g.dx()) * std::abs(scale);
}

}  // namespace

double smoothstep(double x, int p) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double s = 0.0;
    for (int n = 0; n <= p; ++n) s += binom(p + n, n) * binom(2 * p + 1, p - n) * std::pow(-x, n);
    return std::pow(x, p + 1) * s;
}

TAArray make_cutoff(const CutoffSpec& c, CutoffKind kind, const Grid& g) {
    if (c.p < 1) throw Error(ErrorCode::InvalidArgument, "smoothstep order must be >= 1");
    if (!(c.t2 < g.T && c.a2 < g.a_dagger)) throw Error(ErrorCode::BreakpointOffGrid, "need t2 < T and a2 < a_dagger");
    check_on_grid(c.t2, g.Nt, g);
    check_on_grid(c.a2, g.Na, g);
    if (kind != CutoffKind::TerminalChi) {
        if (!(0.0 <= c.t1 && c.t1 < c.t2 && 0.0 <= c.a1 && c.a1 < c.a2))
            throw Error(ErrorCode::BreakpointOffGrid, "need t1 < t2 and a1 < a2");
        check_on_grid(c.t1, g.Nt, g);
        check_on_grid(c.a1, g.Na, g);
    }
    TAArray out(g);
    for (int i = 0; i <= g.Nt; ++i)
        for (int j = 0; j <= g.Na; ++j) {
            double t = g.t(i), a = g.a(j);
            if (kind == CutoffKind::TerminalChi)
                out(i, j) = smoothstep((g.T - t) / (g.T - c.t2), c.p) * smoothstep((g.a_dagger - a) / (g.a_dagger - c.a2), c.p);
            else
                out(i, j) = smoothstep((t - c.t1) / (c.t2 - c.t1), c.p) * smoothstep((a - c.a1) / (c.a2 - c.a1), c.p);
        }
    return out;
}

double mu0_prime(double q, double m, double k, double eta0) {
    double eta = std::min(1.0, eta0);
    double e = m * (1.0 / q - 1.0);
    return std::pow(eta, e / (e + k)) * std::pow(2.0, k / (2.0 * e + 2.0 * k)) - eta;
}

DirichletConstants compute_constants_dirichlet(const DirichletParams& p) {
    DirichletConstants c;
    const double m = p.m.value_or(p.m0);
    const double mu = p.mu.value_or(p.mu0);
    const double eta = p.eta.value_or(p.eta0);
    c.C1 = (2.0 / p.c_lower) * (p.k / (8.0 * m) + (mu + eta) / 2.0 + (mu + eta) * (mu + eta) / 2.0);
    c.C2 = (2.0 / p.c_lower) * (p.k / (8.0 * p.m0) + (p.mu0 + p.eta0) / 2.0 + (p.mu0 + p.eta0) * (p.mu0 + p.eta0) / 2.0);
    c.K = p.k / (4.0 * p.m0) + c.C2 * (0.5 + p.k * p.M_bar / (4.0 * p.m0));
    double ell = 2.0 * ((p.mu0 + p.eta0) * p.M_bar / 2.0 + p.k * p.M_bar / (8.0 * p.m0));
    c.ellipticity = {"ellipticity", ell <= p.c_lower, p.c_lower - ell};
    double bound = 1.0 / (4.0 * p.alpha * p.L_F * p.L_F);
    c.source_bound = {"source_bound", c.K <= bound, bound - c.K};
    c.mu0_prime = mu0_prime(p.alpha, m, p.k, p.eta0);
    return c;
}

RobinConstants compute_constants_robin(const RobinParams& p) {
    RobinConstants c;
    const double m = p.m.value_or(p.m0);
    const double mu = p.mu.value_or(p.mu0);
    const double eta = p.eta.value_or(p.eta0);
    const double s = mu + eta, s0 = p.mu0 + p.eta0;
    c.K1 = 4.0 * m / p.k - 2.0 * p.m_bar * p.C0 * s * s - eta * eta / 4.0;
    c.K2 = 0.5 + (2.0 * m / p.k) * s;
    c.K3 = 4.0 * p.m0 / p.k - p.eta0 * p.eta0 / 4.0 - 2.0 * p.m_bar * s0 * s0 * p.C0;
    c.K4 = 0.5 + (2.0 * p.m0 / p.k) * s0;
    const double G = p.M_bar + 2.0 * p.C0 * p.m_bar + 0.25;
    c.k1_positive = {"k1_positive", c.K1 > 0.0, c.K1};
    if (c.K1 > 0.0) {
        double r = c.K2 / c.K1;
        c.C3 = (2.0 / p.c_lower) * std::max(r + s * s / 2.0, 16.0 * r * p.C0);
        double ell = 2.0 * r * G;
        c.ellipticity = {"ellipticity", ell <= p.c_lower, p.c_lower - ell};
        double half = G / c.K1;
        c.gradient_half = {"gradient_half", half <= 0.5, 0.5 - half};
    } else {
        c.ellipticity = {"ellipticity", false, -std::numeric_limits<double>::infinity()};
        c.gradient_half = {"gradient_half", false, -std::numeric_limits<double>::infinity()};
    }
    if (c.K3 > 0.0) {
        double r = c.K4 / c.K3;
        c.C4 = (2.0 / p.c_lower) * std::max(r + s0 * s0 / 2.0, 16.0 * r * p.C0);
        c.K = 1.0 / c.K3 + *c.C4;
        double bound = std::min({1.0 / (p.alpha * p.L_F * p.L_F), 1.0 / (p.C0 * p.beta * p.L_S * p.L_S),
                                 1.0 / (p.beta * p.L_S * p.L_S)}) / 8.0;
        c.k_bound = {"k_bound", *c.K <= bound, bound - *c.K};
    } else {
        c.k_bound = {"k_bound", false, -std::numeric_limits<double>::infinity()};
    }
    c.mu0_prime = mu0_prime(p.alpha >= p.beta ? p.beta : p.alpha, m, p.k, p.eta0);
    return c;
}

std::vector<VerificationReport> verify_dirichlet_estimates(const Field& v, const DiffusionSpec& d,
                                                           const WeightSpec& w, const DirichletParams& params,
                                                           double c_tol) {
    if (!v.flags().all()) throw Error(ErrorCode::TraceFlagMissing, "field is not in discrete P");
    const Grid& g = v.grid();
    auto consts = compute_constants_dirichlet(params);
    if (!consts.ellipticity.ok)
        throw Error(ErrorCode::PreconditionViolated, "ellipticity condition fails (slack " +
                                                         std::to_string(consts.ellipticity.slack) + ")");
    if (w.m < params.m0) throw Error(ErrorCode::PreconditionViolated, "m < m0");
    if (g.T + g.a_dagger > params.mu0 * (1.0 + 1e-12)) throw Error(ErrorCode::PreconditionViolated, "T + a_dagger > mu0");
    if (w.eta > params.eta0 * (1.0 + 1e-12)) throw Error(ErrorCode::PreconditionViolated, "eta > eta0");

    auto wa = weight_field(w, g);
    Field R = apply_A(v, d, BoundaryCondition::dirichlet()) - apply_transport(v, TransportStencil::Centered);
    const NodeRange all = g.full();
    double lhs = norm_Q(R, all, &wa.w);
    double n1 = norm_Q(v, all, &wa.w1);
    double grad = grad_norm_Q(v, all, &wa.w, BcKind::Dirichlet);
    double c = 4.0 * w.m / w.k;

    std::vector<std::pair<std::string, double>> prm{
        {"m", w.m}, {"k", w.k}, {"eta", w.eta}, {"M_bar", params.M_bar}, {"K", consts.K}, {"ds", g.ds}, {"dx", g.dx()}};
    std::vector<VerificationReport> out;
    out.push_back(make_report("dirichlet.weighted_lower", lhs, c * n1 - params.M_bar * grad, tolerance(g, c_tol, lhs), prm));
    out.push_back(make_report("dirichlet.energy_bound", consts.K * lhs, n1 + 0.5 * grad,
                              tolerance(g, c_tol, consts.K * lhs), prm));
    return out;
}

double log_weight_norm2(const Grid& g, const WeightSpec& w, double t1, double t2, double a1, double a2) {
    const double C = g.T + g.a_dagger + w.eta;
    const double q = 2.0 * w.m / w.k;
    const double s[4] = {C - t2 - a2, C - t1 - a2, C - t2 - a1, C - t1 - a1};
    const double sign[4] = {1.0, -1.0, -1.0, 1.0};
    if (q > 2.5) {
        double lg[4], mx = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < 4; ++i) {
            lg[i] = (2.0 - q) * std::log(s[i]) - std::log((q - 1.0) * (q - 2.0));
            mx = std::max(mx, lg[i]);
        }
        double acc = 0.0;
        for (int i = 0; i < 4; ++i) acc += sign[i] * std::exp(lg[i] - mx);
        return mx + std::log(acc);
    }
    auto G = [q](double x) {
        if (q == 1.0) return x * std::log(x) - x;
        if (q == 2.0) return -std::log(x);
        return std::pow(x, 2.0 - q) / ((1.0 - q) * (2.0 - q));
    };
    double acc = 0.0;
    for (int i = 0; i < 4; ++i) acc += sign[i] * G(s[i]);
    return std::log(acc);
}

double surface_remainder(const Grid& g, const WeightSpec& w, const CutoffSpec& c, double beta, double L_S,
                         double boundary_norm) {
    if (L_S == 0.0) return 0.0;
    const double b = beta >= 1.0 ? 1.0 - 1e-6 : beta;
    const double q = 2.0 * w.m / w.k;
    const double lnN2 = log_weight_norm2(g, w, c.t1, c.t2, c.a1, c.a2);
    const double ln_area = std::log((c.t2 - c.t1) * (c.a2 - c.a1));
    const double ln_eta = std::log(w.eta);
    double first = 0.0;
    if (boundary_norm > 0.0) {
        double l1 = std::log(b * L_S * L_S) + (q * (1.0 - 1.0 / b) + 2.0) * ln_eta + ((b - 1.0) / b) * lnN2 -
                    (1.0 - 1.0 / b) * ln_area + std::log(boundary_norm);
        first = std::exp(l1);
    }
    double l2 = (2.0 / (1.0 - b)) * (std::log(w.m / w.k) - (b + 1.0) * ln_eta) + std::log(1.0 - b) +
                std::log(g.boundary_measure()) + 2.0 * std::log(L_S) + std::log(g.T * g.a_dagger) + lnN2 - ln_area;
    return first + std::exp(l2);
}

std::vector<VerificationReport> verify_robin_estimates(const Field& w, const BoundaryField& gflux, const DiffusionSpec& d,
                                                       const SurfaceSpec& S, const WeightSpec& wt,
                                                       const RobinParams& params, const CutoffSpec& cut,
                                                       double c_tol) {
    if (!w.flags().zero_t_ends || !w.flags().zero_a_ends)
        throw Error(ErrorCode::TraceFlagMissing, "field is not in discrete P-tilde");
    const Grid& g = w.grid();
    BoundaryField tr = trace(w);
    if (S.kind != SurfaceKind::Power) {
        double sigma = S.kind == SurfaceKind::Linear ? S.sigma : 0.0;
        double worst = 0.0, scale = 0.0;
        for (std::size_t k = 0; k < tr.values().size(); ++k) {
            double expect = sigma * tr.values()[k];
            worst = std::max(worst, std::abs(gflux.values()[k] - expect));
            scale = std::max({scale, std::abs(expect), std::abs(gflux.values()[k])});
        }
        if (worst > 1e-12 * scale + 1e-300)
            throw Error(ErrorCode::FluxMismatch, "boundary flux differs from S(trace w) by " + std::to_string(worst));
    }
    RobinParams rp = params;
    rp.m = wt.m;
    rp.mu = g.T + g.a_dagger;
    rp.eta = wt.eta;
    auto consts = compute_constants_robin(rp);
    if (!consts.all_ok() || !consts.K) {
        std::string which = !consts.k1_positive.ok ? "k1_positive" : !consts.ellipticity.ok ? "ellipticity" : "gradient_half";
        throw Error(ErrorCode::PreconditionViolated, which + " condition fails");
    }
    if (wt.m < params.m0) throw Error(ErrorCode::PreconditionViolated, "m < m0");
    if (g.T + g.a_dagger > params.mu0 * (1.0 + 1e-12)) throw Error(ErrorCode::PreconditionViolated, "T + a_dagger > mu0");
    if (wt.eta > params.eta0 * (1.0 + 1e-12)) throw Error(ErrorCode::PreconditionViolated, "eta > eta0");

    auto wa = weight_field(wt, g);
    Field R = apply_A(w, d, BoundaryCondition::robin_flux(gflux)) - apply_transport(w, TransportStencil::Centered);
    const NodeRange all = g.full();
    double lhs = norm_Q(R, all, &wa.w);
    double n1 = norm_Q(w, all, &wa.w1);
    double grad = grad_norm_Q(w, all, &wa.w, BcKind::Robin);
    double b0 = norm_boundary(tr, all, &wa.w);
    double b1 = norm_boundary(tr, all, &wa.w1);
    double A = surface_remainder(g, wt, cut, S.beta, S.L_S, b0);
    double A_lip = (wt.m / (wt.k * wt.eta)) * (wt.m / (wt.k * wt.eta)) * S.L_S * S.L_S * b0;
    double K = *consts.K;
    double base = 4.0 * wt.m / wt.k * n1 - params.M_bar * grad - 2.0 * params.m_bar * b0 -
                  wt.eta * wt.eta / (4.0 * params.C0) * b1;
    double tol = tolerance(g, c_tol, lhs);

    std::vector<std::pair<std::string, double>> prm{{"m", wt.m},       {"k", wt.k},   {"eta", wt.eta},
                                                    {"beta", S.beta},  {"L_S", S.L_S}, {"m_bar", params.m_bar},
                                                    {"C0", params.C0}, {"K", K},       {"A", A},
                                                    {"ds", g.ds},      {"dx", g.dx()}};
    std::vector<VerificationReport> out;
    out.push_back(make_report("robin.weighted_lower", lhs, base - 16.0 * params.C0 * A, tol, prm));
    out.push_back(make_report("robin.energy_bound", K * (lhs + A), n1 + 0.5 * grad, K * tol, prm));
    out.push_back(make_report("robin.weighted_lower_lipschitz", lhs, base - 16.0 * params.C0 * A_lip, tol, prm));
    out.push_back(make_report("robin.energy_bound_lipschitz", K * (lhs + A_lip), n1 + 0.5 * grad, K * tol, prm));
    return out;
}

double fit_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i)
        if (std::isfinite(y[i]) && y[i] > 0.0) {
            xs.push_back(x[i]);
            ys.push_back(std::log(y[i]));
        }
    if (xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    double n = double(xs.size());
    double mx = tree_sum(xs) / n, my = tree_sum(ys) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    return sxy / sxx;
}

DecayTable corner_decay(const Field& w, const CutoffSpec& c, const DiffusionSpec& d, double K, double L_F, double k,
                        double eta, const std::vector<double>& m_sweep) {
    const Grid& g = w.grid();
    if (!c.t3 || !c.a3) throw Error(ErrorCode::PreconditionViolated, "corner decay needs t3 and a3");
    const double t3 = *c.t3, a3 = *c.a3;
    if (!(c.t2 < t3 && t3 < g.T && c.a2 < a3 && a3 < g.a_dagger))
        throw Error(ErrorCode::PreconditionViolated, "need t2 < t3 < T and a2 < a3 < a_dagger");
    for (std::size_t i = 1; i < m_sweep.size(); ++i)
        if (!(m_sweep[i] > m_sweep[i - 1])) throw Error(ErrorCode::PreconditionViolated, "m sweep must increase");
    for (int i = 0; i <= g.Nt; ++i)
        for (int c0 = 0; c0 < g.ncell(); ++c0)
            if (w(i, g.Na, c0) != 0.0) throw Error(ErrorCode::PreconditionViolated, "w is nonzero at a = a_dagger");
    for (int j = 0; j <= g.Na; ++j)
        for (int c0 = 0; c0 < g.ncell(); ++c0)
            if (w(g.Nt, j, c0) != 0.0) throw Error(ErrorCode::PreconditionViolated, "w is nonzero at t = T");

    DecayTable tab;
    TAArray kappa = make_cutoff(c, CutoffKind::Kappa, g);
    Field v = multiply(kappa, w);
    Field R = apply_A(v, d, BoundaryCondition::dirichlet()) - apply_transport(v, TransportStencil::Centered);
    tab.transition_norm = norm_Q(R, Rect{c.t1, c.t2, c.a1, c.a2});
    const double C = g.T + g.a_dagger + eta;
    const double X2 = C - c.t2 - c.a2, X3 = C - t3 - a3;
    tab.ratio = X2 / X3;
    const double corner = norm_Q(w, Rect{t3, g.T, a3, g.a_dagger});
    const double source = g.T * g.a_dagger * g.omega_measure() * L_F * L_F;
    std::vector<double> bounds;
    for (double m : m_sweep) {
        DecayRow row;
        row.m = m;
        row.bound = 2.0 * K * std::exp(-(2.0 * m / k) * std::log(tab.ratio)) * X3 * X3 * (tab.transition_norm + source);
        row.corner_norm = corner;
        row.pass = corner <= row.bound;
        bounds.push_back(row.bound);
        tab.rows.push_back(row);
    }
    tab.slope = fit_log_slope(m_sweep, bounds);
    tab.expected_slope = -(2.0 / k) * std::log(tab.ratio);
    return tab;
}

ElementaryCheck check_elementary_inequality(int n_samples, std::uint64_t seed, double rel_tol) {
    ElementaryCheck out;
    SplitRng rng(seed);
    double worst = std::numeric_limits<double>::infinity();
    for (int s = 0; s < n_samples; ++s) {
        double X = (s % 100 == 99) ? 0.0 : rng.log_uniform(1e-8, 1e8);
        double gam = rng.log_uniform(1e-8, 1e8);
        double a0 = 1.0 - rng.uniform();
        double lhs = std::pow(X, a0);
        double rhs = a0 * std::pow(gam, a0 - 1.0) * X + (1.0 - a0) * std::pow(gam, a0);
        double slack = (rhs - lhs) / rhs;
        if (slack < -rel_tol) ++out.violations;
        worst = std::min(worst, slack);

        double lt = std::pow(gam, a0);
        double rt = a0 * std::pow(gam, a0 - 1.0) * gam + (1.0 - a0) * std::pow(gam, a0);
        out.tangency_error = std::max(out.tangency_error, std::abs(rt - lt) / rt);
    }
    out.worst_slack = n_samples > 0 ? worst : 0.0;
    out.report = make_report("elementary", out.worst_slack, 0.0, rel_tol,
                             {{"n_samples", double(n_samples)}, {"violations", double(out.violations)}});
    return out;
}

TraceConstant estimate_trace_constant(const Grid& g, double rel_tol, int max_iter) {
    const int nc = g.ncell();
    const double V = g.cell_volume();
    auto ws = OperatorWorkspace::build_identity(g, BcKind::Robin);
    std::vector<double> bdiag(std::size_t(nc), 0.0);
    for (const auto& f : g.boundary_faces()) bdiag[f.cell] += f.area;
    std::vector<double> tmp(static_cast<std::size_t>(nc));
    auto applyH = [&](std::span<const double> x, std::span<double> y) {
        apply_A_slice(ws, x, tmp);
        for (int c = 0; c < nc; ++c) y[c] = V * (x[c] - tmp[c]);
    };
    const auto n = static_cast<std::size_t>(nc);
    std::vector<double> x(n, 1.0), bx(n), hx(n), y(n, 0.0);
    TraceConstant out;
    double rho_old = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        for (int c = 0; c < nc; ++c) bx[c] = bdiag[c] * x[c];
        applyH(x, hx);
        double rho = tree_dot(x, bx) / tree_dot(x, hx);
        out.C0 = rho;
        out.iterations = it;
        if (it > 1 && std::abs(rho - rho_old) <= 1e-3 * rel_tol * rho) return out;
        rho_old = rho;
        y = x;
        auto r = cg_solve(applyH, bx, y, 1e-13, 10 * nc + 100);
        if (!r.converged && r.residual > 1e-10) break;
        double nrm = std::sqrt(tree_dot(y, y));
        for (int c = 0; c < nc; ++c) x[c] = y[c] / nrm;
    }
    throw Error(ErrorCode::PowerIterationStalled, "trace constant did not converge in " + std::to_string(max_iter) +
                                                      " iterations");
}

VerificationReport check_weight_product_identity(double q, double m, double k, double eta0, double rel_tol) {
    if (!(q > 0.0 && q < 1.0)) throw Error(ErrorCode::InvalidArgument, "exponent must lie in (0,1)");
    const long double eta = std::min(1.0, eta0);
    const long double mp = mu0_prime(q, m, k, eta0);
    const long double e = 2.0L * m / k;
    long double lg = (e * (1.0L / q - 1.0L) + 2.0L) * std::log(mp + eta) + e * (1.0L - 1.0L / q) * std::log(eta);
    double value = double(std::exp(lg));
    auto r = make_report("weight_product", value, 2.0, rel_tol * 2.0, {{"q", q}, {"m", m}, {"k", k}, {"eta0", eta0}});
    r.pass = std::abs(r.margin) <= r.tol;
    return r;
}

}  // namespace agepde
