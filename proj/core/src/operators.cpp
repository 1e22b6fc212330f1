#include "agepde/operators.hpp"
#include "agepde/reduce.hpp"

#include <cmath>

namespace agepde {

TAArray lambda_field(const Grid& g, double eta) {
    TAArray out(g);
    for (int i = 0; i <= g.Nt; ++i)
        for (int j = 0; j <= g.Na; ++j) out(i, j) = lambda_value(g, g.t(i), g.a(j), eta);
    return out;
}

WeightArrays weight_field(const WeightSpec& w, const Grid& g) {
    WeightArrays out{TAArray(g), TAArray(g)};
    const double p = w.exponent();
    for (int i = 0; i <= g.Nt; ++i)
        for (int j = 0; j <= g.Na; ++j) {
            double l = abs_lambda(g, g.t(i), g.a(j), w.eta);
            out.w(i, j) = std::pow(l, -p);
            out.w1(i, j) = std::pow(l, -p - 1.0);
        }
    return out;
}

namespace {

template <class TensorFn>
OperatorWorkspace build_from(const Grid& g, TensorFn&& d, BcKind bc) {
    OperatorWorkspace ws;
    ws.grid = g;
    ws.dirichlet = bc == BcKind::Dirichlet;
    const int N0 = g.Nx[0], N1 = g.Nx[1];
    const double h0 = g.h[0], h1 = g.h[1];

    ws.kx.assign(std::size_t(N0 + 1) * N1, 0.0);
    for (int q = 0; q < N1; ++q)
        for (int p = 0; p <= N0; ++p) {
            bool boundary = p == 0 || p == N0;
            if (boundary && !ws.dirichlet) continue;
            Point x{p * h0, g.n == 1 ? 0.5 : (q + 0.5) * h1};
            double dist = boundary ? 0.5 * h0 : h0;
            ws.kx[p + (N0 + 1) * q] = d(x)[0] * g.face_area(0) / dist;
        }
    if (g.n == 2) {
        ws.ky.assign(std::size_t(N0) * (N1 + 1), 0.0);
        for (int q = 0; q <= N1; ++q)
            for (int p = 0; p < N0; ++p) {
                bool boundary = q == 0 || q == N1;
                if (boundary && !ws.dirichlet) continue;
                Point x{(p + 0.5) * h0, q * h1};
                double dist = boundary ? 0.5 * h1 : h1;
                ws.ky[p + N0 * q] = d(x)[3] * g.face_area(1) / dist;
            }
        ws.kxy.assign(std::size_t(N0 - 1) * (N1 - 1), 0.0);
        for (int q = 0; q + 1 < N1; ++q)
            for (int p = 0; p + 1 < N0; ++p) {
                Point x{(p + 1) * h0, (q + 1) * h1};
                ws.kxy[p + (N0 - 1) * q] = 0.5 * d(x)[1];
            }
    }
    return ws;
}

}  // namespace

OperatorWorkspace OperatorWorkspace::build(const Grid& g, const DiffusionSpec& d, double t, double a, BcKind bc) {
    return build_from(g, [&](const Point& x) { return d.eval(t, a, x); }, bc);
}

OperatorWorkspace OperatorWorkspace::build_transport_derivative(const Grid& g, const DiffusionSpec& d, double t,
                                                                double a, BcKind bc) {
    return build_from(g, [&](const Point& x) { return eval_diffusion_transport(d, t, a, x); }, bc);
}

OperatorWorkspace OperatorWorkspace::build_identity(const Grid& g, BcKind bc) {
    return build_from(g, [](const Point&) { return Tensor{1.0, 0.0, 0.0, 1.0}; }, bc);
}

void apply_A_slice(const OperatorWorkspace& ws, std::span<const double> f, std::span<double> out,
                   std::span<const double> boundary_flux) {
    const Grid& g = ws.grid;
    const int N0 = g.Nx[0], N1 = g.Nx[1];
    const double inv_v = 1.0 / g.cell_volume();
    std::fill(out.begin(), out.end(), 0.0);

    for (int q = 0; q < N1; ++q) {
        const double* k = ws.kx.data() + (N0 + 1) * q;
        const double* fr = f.data() + N0 * q;
        double* o = out.data() + N0 * q;
        for (int p = 1; p < N0; ++p) {
            double flux = k[p] * (fr[p] - fr[p - 1]);
            o[p - 1] += flux;
            o[p] -= flux;
        }
        if (ws.dirichlet) {
            o[0] -= k[0] * fr[0];
            o[N0 - 1] -= k[N0] * fr[N0 - 1];
        }
    }
    if (g.n == 2) {
        for (int q = 1; q < N1; ++q)
            for (int p = 0; p < N0; ++p) {
                int lo = g.cell(p, q - 1), hi = g.cell(p, q);
                double flux = ws.ky[p + N0 * q] * (f[hi] - f[lo]);
                out[lo] += flux;
                out[hi] -= flux;
            }
        if (ws.dirichlet) {
            for (int p = 0; p < N0; ++p) {
                out[g.cell(p, 0)] -= ws.ky[p] * f[g.cell(p, 0)];
                out[g.cell(p, N1 - 1)] -= ws.ky[p + N0 * N1] * f[g.cell(p, N1 - 1)];
            }
        }
        for (int q = 0; q + 1 < N1; ++q)
            for (int p = 0; p + 1 < N0; ++p) {
                double kv = ws.kxy[p + (N0 - 1) * q];
                if (kv == 0.0) continue;
                int c00 = g.cell(p, q), c10 = g.cell(p + 1, q), c01 = g.cell(p, q + 1), c11 = g.cell(p + 1, q + 1);
                double A = f[c11] - f[c00], B = f[c10] - f[c01];
                out[c11] -= kv * A;
                out[c00] += kv * A;
                out[c10] += kv * B;
                out[c01] -= kv * B;
            }
    }
    if (!ws.dirichlet && !boundary_flux.empty()) {
        auto faces = g.boundary_faces();
        for (std::size_t b = 0; b < faces.size(); ++b) out[faces[b].cell] -= faces[b].area * boundary_flux[b];
    }
    for (auto& v : out) v *= inv_v;
}

double energy_slice(const OperatorWorkspace& ws, std::span<const double> f, std::span<const double> h) {
    const Grid& g = ws.grid;
    const int N0 = g.Nx[0], N1 = g.Nx[1];
    std::vector<double> terms;
    terms.reserve(ws.kx.size() + ws.ky.size() + ws.kxy.size());
    for (int q = 0; q < N1; ++q) {
        for (int p = 0; p <= N0; ++p) {
            double k = ws.kx[p + (N0 + 1) * q];
            if (p == 0 || p == N0) {
                if (!ws.dirichlet) continue;
                int c = g.cell(p == 0 ? 0 : N0 - 1, q);
                terms.push_back(k * f[c] * h[c]);
            } else {
                int l = g.cell(p - 1, q), r = g.cell(p, q);
                terms.push_back(k * (f[r] - f[l]) * (h[r] - h[l]));
            }
        }
    }
    if (g.n == 2) {
        for (int q = 0; q <= N1; ++q)
            for (int p = 0; p < N0; ++p) {
                double k = ws.ky[p + N0 * q];
                if (q == 0 || q == N1) {
                    if (!ws.dirichlet) continue;
                    int c = g.cell(p, q == 0 ? 0 : N1 - 1);
                    terms.push_back(k * f[c] * h[c]);
                } else {
                    int lo = g.cell(p, q - 1), hi = g.cell(p, q);
                    terms.push_back(k * (f[hi] - f[lo]) * (h[hi] - h[lo]));
                }
            }
        for (int q = 0; q + 1 < N1; ++q)
            for (int p = 0; p + 1 < N0; ++p) {
                int c00 = g.cell(p, q), c10 = g.cell(p + 1, q), c01 = g.cell(p, q + 1), c11 = g.cell(p + 1, q + 1);
                double Af = f[c11] - f[c00], Bf = f[c10] - f[c01];
                double Ah = h[c11] - h[c00], Bh = h[c10] - h[c01];
                terms.push_back(ws.kxy[p + (N0 - 1) * q] * (Af * Ah - Bf * Bh));
            }
    }
    return tree_sum(terms);
}

std::vector<double> robin_flux_slice(const BoundaryCondition& bc, const Grid& g, int i, int j) {
    if (bc.kind != BcKind::Robin) return {};
    if (bc.flux) {
        auto s = bc.flux->slice(i, j);
        return {s.begin(), s.end()};
    }
    auto faces = g.boundary_faces();
    std::vector<double> out(faces.size(), 0.0);
    if (bc.S && bc.u_ref) {
        for (std::size_t b = 0; b < faces.size(); ++b) out[b] = eval_surface(*bc.S, (*bc.u_ref)(i, j, faces[b].cell));
    }
    return out;
}

Field apply_A(const Field& f, const DiffusionSpec& d, const BoundaryCondition& bc) {
    const Grid& g = f.grid();
    Field out(g);
    parallel_for(g.nodes(), [&](std::size_t node) {
        int i = int(node / (g.Na + 1)), j = int(node % (g.Na + 1));
        auto ws = OperatorWorkspace::build(g, d, g.t(i), g.a(j), bc.kind);
        auto flux = robin_flux_slice(bc, g, i, j);
        apply_A_slice(ws, f.slice(i, j), out.slice(i, j), flux);
    });
    return out;
}

Field apply_transport(const Field& f, TransportStencil stencil) {
    const Grid& g = f.grid();
    Field out(g);
    const int nc = g.ncell();
    const double inv = 1.0 / g.ds;
    for (int i = 0; i <= g.Nt; ++i)
        for (int j = 0; j <= g.Na; ++j) {
            auto o = out.slice(i, j);
            bool fwd = i < g.Nt && j < g.Na;
            bool bwd = i > 0 && j > 0;
            if (stencil == TransportStencil::Centered && fwd && bwd) {
                auto p = f.slice(i + 1, j + 1), m = f.slice(i - 1, j - 1);
                for (int c = 0; c < nc; ++c) o[c] = (p[c] - m[c]) * (0.5 * inv);
            } else if (fwd) {
                auto p = f.slice(i + 1, j + 1), m = f.slice(i, j);
                for (int c = 0; c < nc; ++c) o[c] = (p[c] - m[c]) * inv;
            } else if (bwd) {
                auto p = f.slice(i, j), m = f.slice(i - 1, j - 1);
                for (int c = 0; c < nc; ++c) o[c] = (p[c] - m[c]) * inv;
            }
        }
    return out;
}

std::vector<std::array<double, 2>> gradient(const Field& f, int i, int j, BcKind bc) {
    const Grid& g = f.grid();
    const int N0 = g.Nx[0], N1 = g.Nx[1];
    auto s = f.slice(i, j);
    std::vector<std::array<double, 2>> out(std::size_t(g.ncell()), {0.0, 0.0});
    // Face difference quotient normal to axis `ax` between cell c and its neighbour
    // (or the boundary face at half distance under the ghost convention).
    auto face = [&](int p, int q, int ax, int side) {
        int c = g.cell(p, q);
        int pp = p + (ax == 0 ? side : 0), qq = q + (ax == 1 ? side : 0);
        int n_ax = ax == 0 ? N0 : N1;
        int idx = ax == 0 ? pp : qq;
        if (idx < 0 || idx >= n_ax) {
            if (bc == BcKind::Robin) return 0.0;
            return side * (0.0 - s[c]) / (0.5 * g.h[ax]);
        }
        return side * (s[g.cell(pp, qq)] - s[c]) / g.h[ax];
    };
    for (int q = 0; q < N1; ++q)
        for (int p = 0; p < N0; ++p) {
            auto& o = out[g.cell(p, q)];
            o[0] = 0.5 * (face(p, q, 0, -1) + face(p, q, 0, +1));
            if (g.n == 2) o[1] = 0.5 * (face(p, q, 1, -1) + face(p, q, 1, +1));
        }
    return out;
}

double grad_norm_Q(const Field& f, const NodeRange& r, const TAArray* weight, BcKind bc) {
    const Grid& g = f.grid();
    auto ws = OperatorWorkspace::build_identity(g, bc);
    std::vector<double> terms;
    for (int i = r.i0; i <= r.i1; ++i)
        for (int j = r.j0; j <= r.j1; ++j) {
            double w = weight ? (*weight)(i, j) : 1.0;
            double q = trapezoid_weight(i, r.i0, r.i1, g.ds) * trapezoid_weight(j, r.j0, r.j1, g.ds);
            if (q == 0.0) continue;
            terms.push_back(q * w * w * energy_slice(ws, f.slice(i, j), f.slice(i, j)));
        }
    return tree_sum(terms);
}

double check_green_identity(const Field& z, const DiffusionSpec& d) {
    if (!z.flags().all()) throw Error(ErrorCode::TraceFlagMissing, "green identity needs z in discrete P");
    const Grid& g = z.grid();
    Field Az = apply_A(z, d, BoundaryCondition::dirichlet());
    Field Dz = apply_transport(z, TransportStencil::Centered);
    double lhs = -2.0 * inner_Q(Dz, Az, g.full());
    std::vector<double> terms;
    for (int i = 0; i <= g.Nt; ++i)
        for (int j = 0; j <= g.Na; ++j) {
            double q = trapezoid_weight(i, 0, g.Nt, g.ds) * trapezoid_weight(j, 0, g.Na, g.ds);
            auto ws = OperatorWorkspace::build_transport_derivative(g, d, g.t(i), g.a(j), BcKind::Dirichlet);
            terms.push_back(q * energy_slice(ws, z.slice(i, j), z.slice(i, j)));
        }
    double rhs = -tree_sum(terms);
    double scale = 2.0 * std::sqrt(norm_Q(Dz) * norm_Q(Az));
    double denom = std::abs(lhs) + std::abs(rhs) + scale;
    return denom > 0.0 ? std::abs(lhs - rhs) / denom : 0.0;
}

double check_transport_identity(const Field& z, const WeightSpec& w) {
    if (!z.flags().zero_t_ends || !z.flags().zero_a_ends)
        throw Error(ErrorCode::TraceFlagMissing, "transport identity needs zero t and a traces");
    const Grid& g = z.grid();
    TAArray lam = lambda_field(g, w.eta);
    TAArray inv(g);
    for (std::size_t k = 0; k < inv.values().size(); ++k) inv.values()[k] = 1.0 / lam.values()[k];
    Field Dz = apply_transport(z, TransportStencil::Centered);
    double c = 4.0 * w.m / w.k;
    double lhs = c * inner_Q(z, Dz, g.full(), &inv);
    double rhs = c * norm_Q(z, g.full(), &inv);
    double denom = std::abs(lhs) + std::abs(rhs);
    return denom > 0.0 ? std::abs(lhs - rhs) / denom : 0.0;
}

}  // namespace agepde
