#include "agepde/solver.hpp"
#include "agepde/cg.hpp"
#include "agepde/operators.hpp"
#include "agepde/reduce.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>

namespace agepde {

namespace {

struct Stepper {
    const Grid& g;
    const DiffusionSpec& d;
    const SurfaceSpec* S;
    double tol;
    int max_iter;

    /// Implicit step into node (i,j) from `old` with explicit rate `rate`.
    CgResult step(int i, int j, std::span<const double> old, std::span<const double> rate, std::span<double> out) const {
        const int nc = g.ncell();
        const BcKind kind = S ? BcKind::Robin : BcKind::Dirichlet;
        auto ws = OperatorWorkspace::build(g, d, g.t(i), g.a(j), kind);
        std::vector<double> rhs(old.begin(), old.end());
        for (int c = 0; c < nc; ++c) rhs[c] += g.ds * rate[c];
        if (S) {
            auto faces = g.boundary_faces();
            const auto n = static_cast<std::size_t>(nc);
            std::vector<double> flux(faces.size()), zero(n, 0.0), b(n);
            for (std::size_t f = 0; f < faces.size(); ++f) flux[f] = eval_surface(*S, old[faces[f].cell]);
            apply_A_slice(ws, zero, b, flux);
            for (int c = 0; c < nc; ++c) rhs[c] += g.ds * b[c];
        }
        std::vector<double> tmp(static_cast<std::size_t>(nc));
        auto apply = [&](std::span<const double> x, std::span<double> y) {
            apply_A_slice(ws, x, tmp);
            for (int c = 0; c < nc; ++c) y[c] = x[c] - g.ds * tmp[c];
        };
        std::copy(old.begin(), old.end(), out.begin());
        return cg_solve(apply, rhs, out, tol, max_iter);
    }
};

void fill_inflow(Field& u, const InflowFn& initial, const InflowFn& boundary) {
    const Grid& g = u.grid();
    if (!initial || !boundary) throw Error(ErrorCode::InvalidArgument, "scenario needs both inflow functions");
    for (int j = 0; j <= g.Na; ++j)
        for (int c = 0; c < g.ncell(); ++c) u(0, j, c) = initial(g.a(j), g.x(c));
    for (int i = 1; i <= g.Nt; ++i)
        for (int c = 0; c < g.ncell(); ++c) u(i, 0, c) = boundary(g.t(i), g.x(c));
    if (!u.finite()) throw Error(ErrorCode::InvalidArgument, "inflow data must be finite");
}

double inflow_max(const Field& u) {
    const Grid& g = u.grid();
    double m = 0.0;
    for (int j = 0; j <= g.Na; ++j)
        for (double v : u.slice(0, j)) m = std::max(m, std::abs(v));
    for (int i = 0; i <= g.Nt; ++i)
        for (double v : u.slice(i, 0)) m = std::max(m, std::abs(v));
    return m;
}

void check_solve(const CgResult& r, int i, int j) {
    if (!r.converged)
        throw Error(ErrorCode::LinearSolveDiverged, "CG stopped at residual " + std::to_string(r.residual) +
                                                        " after " + std::to_string(r.iterations) +
                                                        " iterations at node (" + std::to_string(i) + "," +
                                                        std::to_string(j) + ")");
}

double slice_norm(const Grid& g, std::span<const double> v) { return std::sqrt(tree_dot(v, v) * g.cell_volume()); }

}  // namespace

std::pair<Field, SolveReport> solve_forward(const Scenario& s) {
    auto start = std::chrono::steady_clock::now();
    const Grid& g = s.grid;
    if (!(s.tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "linear-solve tolerance must be positive");
    Field u(g);
    fill_inflow(u, s.initial, s.boundary);
    const double umax = inflow_max(u);
    const double lip = source_lipschitz_estimate(s.model.F, umax, g.a_dagger, g.omega_measure());
    if (g.ds * lip > 1.0)
        throw Error(ErrorCode::StiffSourceStep, "ds * Lipschitz(F) = " + std::to_string(g.ds * lip) + " > 1");

    const SurfaceSpec* S = s.model.S ? &*s.model.S : nullptr;
    Stepper st{g, s.model.d, S, s.tol, s.max_iter};
    SolveReport rep;
    rep.iterations.assign(std::size_t(g.Nt) * g.Na, 0);
    rep.residuals.assign(std::size_t(g.Nt) * g.Na, 0.0);
    const int nc = g.ncell();
    for (int i = 1; i <= g.Nt; ++i) {
        const double total = s.model.F.needs_context() ? total_population(u, i - 1) : 0.0;
        parallel_for(std::size_t(g.Na), [&](std::size_t jj) {
            const int j = int(jj) + 1;
            auto old = u.slice(i - 1, j - 1);
            std::vector<double> rate(static_cast<std::size_t>(nc));
            for (int c = 0; c < nc; ++c)
                rate[c] = source_value(s.model.F, g.t(i - 1), g.a(j - 1), g.x(c), old[c], total);
            auto r = st.step(i, j, old, rate, u.slice(i, j));
            check_solve(r, i, j);
            std::size_t k = std::size_t(i - 1) * g.Na + std::size_t(j - 1);
            rep.iterations[k] = r.iterations;
            rep.residuals[k] = r.residual;
        });
    }
    if (!u.finite()) throw Error(ErrorCode::Overflow, "forward solution is not finite");
    rep.mass = TAArray(g);
    for (int i = 0; i <= g.Nt; ++i)
        for (int j = 0; j <= g.Na; ++j) rep.mass(i, j) = tree_sum(u.slice(i, j)) * g.cell_volume();
    for (std::size_t k = 0; k < rep.iterations.size(); ++k) {
        rep.max_iterations = std::max(rep.max_iterations, rep.iterations[k]);
        rep.max_residual = std::max(rep.max_residual, rep.residuals[k]);
    }
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {std::move(u), std::move(rep)};
}

Field terminal_data(const Field& u) {
    const Grid& g = u.grid();
    Field out(g);
    for (int i = 0; i <= g.Nt; ++i)
        for (int j = 0; j <= g.Na; ++j)
            if (i == g.Nt || j == g.Na) {
                auto src = u.slice(i, j);
                std::copy(src.begin(), src.end(), out.slice(i, j).begin());
            }
    return out;
}

BackwardResult solve_backward_naive(const Scenario& s, const Field& forward, const BackwardPerturbation& p) {
    const Grid& g = s.grid;
    if (forward.grid().size() != g.size()) throw Error(ErrorCode::InvalidArgument, "forward field does not match grid");
    double d0 = 0.0;
    if (s.model.F.kind == SourceKind::LinearDeath)
        d0 = s.model.F.p1;
    else if (s.model.F.kind != SourceKind::Zero)
        throw Error(ErrorCode::InvalidArgument, "backward demo needs a zero or linear source");
    if (s.model.F.forcing) throw Error(ErrorCode::InvalidArgument, "backward demo does not take a forcing term");
    if (s.model.S && s.model.S->kind != SurfaceKind::Zero)
        throw Error(ErrorCode::InvalidArgument, "backward demo needs Dirichlet or zero-flux faces");
    const BcKind kind = s.model.S ? BcKind::Robin : BcKind::Dirichlet;
    const int nc = g.ncell();
    const int nsteps = std::min({int(std::lround(p.tau / g.ds)), g.Nt, g.Na});

    std::vector<double> mode(static_cast<std::size_t>(nc));
    for (int c = 0; c < nc; ++c) {
        auto x = g.x(c);
        mode[c] = std::sin(p.frequency * std::numbers::pi * x[0] / g.L[0]);
        if (g.n == 2) mode[c] *= std::sin(std::numbers::pi * x[1] / g.L[1]);
    }

    std::vector<double> tmp(static_cast<std::size_t>(nc));
    auto back = [&](int i, int j, std::vector<double>& v) {
        auto ws = OperatorWorkspace::build(g, s.model.d, g.t(i), g.a(j), kind);
        apply_A_slice(ws, v, tmp);
        for (int c = 0; c < nc; ++c) v[c] = (v[c] - g.ds * tmp[c]) / (1.0 - g.ds * d0);
    };
    auto finite_bounded = [](const std::vector<double>& v) {
        for (double x : v)
            if (!std::isfinite(x) || std::abs(x) > 1e308) return false;
        return true;
    };

    BackwardResult res;
    res.field = Field(g);
    for (int ie = 0; ie <= g.Nt; ++ie)
        for (int je = 0; je <= g.Na; ++je) {
            if (ie != g.Nt && je != g.Na) continue;
            std::vector<double> v(forward.slice(ie, je).begin(), forward.slice(ie, je).end());
            for (int c = 0; c < nc; ++c) v[c] += p.epsilon * mode[c];
            std::copy(v.begin(), v.end(), res.field.slice(ie, je).begin());
            for (int n = 1; n <= nsteps && ie - n >= 0 && je - n >= 0; ++n) {
                back(ie - n + 1, je - n + 1, v);
                if (!finite_bounded(v)) {
                    res.truncated = true;
                    break;
                }
                std::copy(v.begin(), v.end(), res.field.slice(ie - n, je - n).begin());
            }
        }

    // Rows follow the frequency-j component: the slice is projected onto the mode after every step.
    const double dval = s.model.d.eval(g.T, g.a_dagger, g.x(0))[0];
    double wave2 = std::pow(p.frequency * std::numbers::pi / g.L[0], 2);
    if (g.n == 2) wave2 += std::pow(std::numbers::pi / g.L[1], 2);
    const double mm = tree_dot(mode, mode);
    auto project = [&](std::vector<double>& v) {
        double coef = tree_dot(v, mode) / mm;
        for (int c = 0; c < nc; ++c) v[c] = coef * mode[c];
    };
    std::vector<double> D(static_cast<std::size_t>(nc));
    if (p.epsilon == 0.0) {
        D.assign(forward.slice(g.Nt, g.Na).begin(), forward.slice(g.Nt, g.Na).end());
    } else {
        for (int c = 0; c < nc; ++c) D[c] = p.epsilon * mode[c];
    }
    project(D);
    const double d0norm = slice_norm(g, D);
    for (int n = 1; n <= nsteps; ++n) {
        back(g.Nt - n + 1, g.Na - n + 1, D);
        project(D);
        if (!finite_bounded(D)) {
            res.truncated = true;
            break;
        }
        AmplificationRow row;
        row.tau = n * g.ds;
        if (p.epsilon == 0.0) {
            row.j = 0;
            row.predicted = 1.0;
            std::vector<double> ref(forward.slice(g.Nt - n, g.Na - n).begin(), forward.slice(g.Nt - n, g.Na - n).end());
            project(ref);
            double rn = slice_norm(g, ref);
            row.measured = rn > 0.0 ? slice_norm(g, D) / rn : 1.0;
        } else {
            row.j = p.frequency;
            row.predicted = std::exp(dval * wave2 * row.tau);
            row.measured = d0norm > 0.0 ? slice_norm(g, D) / d0norm : 0.0;
        }
        res.rows.push_back(row);
    }
    return res;
}

std::pair<Field, Field> solve_coupled(const CoupledScenario& s) {
    const Grid& g = s.grid;
    Field u(g), v(g);
    fill_inflow(u, s.initial1, s.boundary1);
    fill_inflow(v, s.initial2, s.boundary2);
    double rate_max = 0.0;
    for (int i = 0; i <= g.Nt; ++i)
        for (int j = 0; j <= g.Na; ++j)
            for (int c = 0; c < g.ncell(); ++c) {
                double r1 = std::abs(s.death1(g.a(j))) + std::abs(s.chi(g.a(j)) * s.contact(g.t(i), g.x(c)));
                rate_max = std::max({rate_max, r1, std::abs(s.death2(g.a(j)))});
            }
    if (g.ds * rate_max > 1.0)
        throw Error(ErrorCode::StiffSourceStep, "ds * coupling rate = " + std::to_string(g.ds * rate_max) + " > 1");
    const SurfaceSpec* S = s.S ? &*s.S : nullptr;
    Stepper st1{g, s.d1, S, s.tol, s.max_iter};
    Stepper st2{g, s.d2, S, s.tol, s.max_iter};
    const int nc = g.ncell();
    for (int i = 1; i <= g.Nt; ++i) {
        parallel_for(std::size_t(g.Na), [&](std::size_t jj) {
            const int j = int(jj) + 1;
            const double t0 = g.t(i - 1), a0 = g.a(j - 1);
            auto uo = u.slice(i - 1, j - 1);
            auto vo = v.slice(i - 1, j - 1);
            std::vector<double> r1(static_cast<std::size_t>(nc)), r2(static_cast<std::size_t>(nc));
            for (int c = 0; c < nc; ++c) {
                double coupling = uo[c] * s.chi(a0) * s.contact(t0, g.x(c));
                r1[c] = -s.death1(a0) * uo[c] - coupling;
                r2[c] = -s.death2(a0) * vo[c] + coupling;
            }
            check_solve(st1.step(i, j, uo, r1, u.slice(i, j)), i, j);
            check_solve(st2.step(i, j, vo, r2, v.slice(i, j)), i, j);
        });
    }
    return {std::move(u), std::move(v)};
}

void write_field_csv(const Field& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path);
    const Grid& g = f.grid();
    out << (g.n == 1 ? "t,a,x0,u\n" : "t,a,x0,x1,u\n");
    out << std::setprecision(17);
    for (int i = 0; i <= g.Nt; ++i)
        for (int j = 0; j <= g.Na; ++j)
            for (int c = 0; c < g.ncell(); ++c) {
                auto x = g.x(c);
                out << g.t(i) << ',' << g.a(j) << ',' << x[0];
                if (g.n == 2) out << ',' << x[1];
                out << ',' << f(i, j, c) << '\n';
            }
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

}  // namespace agepde
