#include "agepde/grid.hpp"
#include "agepde/reduce.hpp"

#include <cmath>
#include <string>

namespace agepde {

namespace {

int integer_ratio(double length, double ds, const char* name) {
    double r = length / ds;
    double n = std::round(r);
    if (n < 1.0 || std::abs(r - n) > 1e-9 * std::max(1.0, r)) {
        throw Error(ErrorCode::NonIntegerStepRatio,
                    std::string(name) + " = " + std::to_string(length) + " is not an integer multiple of ds = " +
                        std::to_string(ds));
    }
    return int(n);
}

}  // namespace

std::array<double, 2> Grid::x(int c) const {
    int c0 = c % Nx[0];
    int c1 = c / Nx[0];
    return {(c0 + 0.5) * h[0], n == 1 ? 0.5 : (c1 + 0.5) * h[1]};
}

std::vector<BoundaryFace> Grid::boundary_faces() const {
    std::vector<BoundaryFace> out;
    out.reserve(std::size_t(nfaces()));
    if (n == 1) {
        out.push_back({0, 0, -1, 1.0});
        out.push_back({Nx[0] - 1, 0, +1, 1.0});
        return out;
    }
    for (int c1 = 0; c1 < Nx[1]; ++c1) out.push_back({cell(0, c1), 0, -1, h[1]});
    for (int c1 = 0; c1 < Nx[1]; ++c1) out.push_back({cell(Nx[0] - 1, c1), 0, +1, h[1]});
    for (int c0 = 0; c0 < Nx[0]; ++c0) out.push_back({cell(c0, 0), 1, -1, h[0]});
    for (int c0 = 0; c0 < Nx[0]; ++c0) out.push_back({cell(c0, Nx[1] - 1), 1, +1, h[0]});
    return out;
}

int Grid::snap_index(double v, int nmax, ErrorCode code) const {
    double r = v / ds;
    double k = std::round(r);
    if (std::abs(r - k) > 1e-9 * std::max(1.0, std::abs(r)) || k < 0 || k > nmax) {
        throw Error(code, "value " + std::to_string(v) + " is not a grid node (ds = " + std::to_string(ds) + ")");
    }
    return int(k);
}

NodeRange Grid::snap(const Rect& r) const {
    NodeRange nr{snap_index(r.t0, Nt), snap_index(r.t1, Nt), snap_index(r.a0, Na), snap_index(r.a1, Na)};
    if (nr.i0 > nr.i1 || nr.j0 > nr.j1) throw Error(ErrorCode::RectOffGrid, "rectangle endpoints out of order");
    return nr;
}

Grid build_grid(double T, double a_dagger, double ds, std::span<const double> extents, std::span<const int> nx) {
    if (extents.size() != nx.size() || extents.empty() || extents.size() > 2) {
        throw Error(ErrorCode::InvalidDimension,
                    "spatial dimension must be 1 or 2 (got " + std::to_string(extents.size()) + ")");
    }
    if (!(T > 0) || !(a_dagger > 0) || !(ds > 0)) {
        throw Error(ErrorCode::InvalidArgument, "T, a_dagger and ds must be positive");
    }
    Grid g;
    g.T = T;
    g.a_dagger = a_dagger;
    g.ds = ds;
    g.Nt = integer_ratio(T, ds, "T");
    g.Na = integer_ratio(a_dagger, ds, "a_dagger");
    g.n = int(extents.size());
    for (int d = 0; d < g.n; ++d) {
        if (!(extents[d] > 0) || nx[d] < 2) {
            throw Error(ErrorCode::InvalidArgument, "extents must be positive and cell counts at least 2");
        }
        g.L[d] = extents[d];
        g.Nx[d] = nx[d];
        g.h[d] = extents[d] / nx[d];
    }
    return g;
}

double trapezoid_weight(int i, int i0, int i1, double ds) {
    if (i < i0 || i > i1 || i0 == i1) return 0.0;
    return (i == i0 || i == i1) ? 0.5 * ds : ds;
}

TAArray make_ta(const Grid& g, const std::function<double(double, double)>& fn) {
    TAArray out(g);
    for (int i = 0; i <= g.Nt; ++i)
        for (int j = 0; j <= g.Na; ++j) out(i, j) = fn(g.t(i), g.a(j));
    return out;
}

void Field::set_flags(const TraceFlags& f) {
    flags_ = f;
    const int nc = grid_.ncell();
    if (f.zero_t_ends) {
        for (int j = 0; j <= grid_.Na; ++j)
            for (int c = 0; c < nc; ++c) {
                (*this)(0, j, c) = 0.0;
                (*this)(grid_.Nt, j, c) = 0.0;
            }
    }
    if (f.zero_a_ends) {
        for (int i = 0; i <= grid_.Nt; ++i)
            for (int c = 0; c < nc; ++c) {
                (*this)(i, 0, c) = 0.0;
                (*this)(i, grid_.Na, c) = 0.0;
            }
    }
}

bool Field::finite() const {
    for (double v : v_)
        if (!std::isfinite(v)) return false;
    return true;
}

Field make_field(const Grid& g, const std::function<double(double, double, const std::array<double, 2>&)>& fn) {
    Field f(g);
    for (int i = 0; i <= g.Nt; ++i)
        for (int j = 0; j <= g.Na; ++j)
            for (int c = 0; c < g.ncell(); ++c) f(i, j, c) = fn(g.t(i), g.a(j), g.x(c));
    return f;
}

Field multiply(const TAArray& w, const Field& f) {
    const Grid& g = f.grid();
    Field out(g);
    for (int i = 0; i <= g.Nt; ++i)
        for (int j = 0; j <= g.Na; ++j) {
            auto src = f.slice(i, j);
            auto dst = out.slice(i, j);
            for (std::size_t c = 0; c < src.size(); ++c) dst[c] = w(i, j) * src[c];
        }
    return out;
}

Field operator+(const Field& a, const Field& b) {
    Field out(a.grid());
    for (std::size_t k = 0; k < out.values().size(); ++k) out.values()[k] = a.values()[k] + b.values()[k];
    return out;
}

Field operator-(const Field& a, const Field& b) {
    Field out(a.grid());
    for (std::size_t k = 0; k < out.values().size(); ++k) out.values()[k] = a.values()[k] - b.values()[k];
    return out;
}

Field operator*(double s, const Field& f) {
    Field out(f.grid());
    for (std::size_t k = 0; k < out.values().size(); ++k) out.values()[k] = s * f.values()[k];
    return out;
}

BoundaryField::BoundaryField(const Grid& g, double fill) : grid_(g), faces_(g.boundary_faces()) {
    v_.assign(g.nodes() * faces_.size(), fill);
}

BoundaryField trace(const Field& f) {
    const Grid& g = f.grid();
    BoundaryField out(g);
    const auto& faces = out.faces();
    for (int i = 0; i <= g.Nt; ++i)
        for (int j = 0; j <= g.Na; ++j)
            for (int b = 0; b < out.nfaces(); ++b) out(i, j, b) = f(i, j, faces[b].cell);
    return out;
}

double norm_Q(const Field& f, const NodeRange& r, const TAArray* weight) {
    const Grid& g = f.grid();
    std::vector<double> per_node;
    per_node.reserve(std::size_t(r.i1 - r.i0 + 1) * (r.j1 - r.j0 + 1));
    std::vector<double> sq(std::size_t(g.ncell()));
    for (int i = r.i0; i <= r.i1; ++i) {
        double wt = trapezoid_weight(i, r.i0, r.i1, g.ds);
        for (int j = r.j0; j <= r.j1; ++j) {
            double wa = trapezoid_weight(j, r.j0, r.j1, g.ds);
            double w = weight ? (*weight)(i, j) : 1.0;
            auto s = f.slice(i, j);
            double inner = tree_dot(s, s);
            per_node.push_back(wt * wa * w * w * inner);
        }
    }
    return tree_sum(per_node) * g.cell_volume();
}

double norm_Q(const Field& f, const std::optional<Rect>& rect, const TAArray* weight) {
    NodeRange r = rect ? f.grid().snap(*rect) : f.grid().full();
    return norm_Q(f, r, weight);
}

double inner_Q(const Field& f, const Field& h, const NodeRange& r, const TAArray* weight) {
    const Grid& g = f.grid();
    std::vector<double> per_node;
    per_node.reserve(std::size_t(r.i1 - r.i0 + 1) * (r.j1 - r.j0 + 1));
    for (int i = r.i0; i <= r.i1; ++i) {
        double wt = trapezoid_weight(i, r.i0, r.i1, g.ds);
        for (int j = r.j0; j <= r.j1; ++j) {
            double wa = trapezoid_weight(j, r.j0, r.j1, g.ds);
            double w = weight ? (*weight)(i, j) : 1.0;
            per_node.push_back(wt * wa * w * tree_dot(f.slice(i, j), h.slice(i, j)));
        }
    }
    return tree_sum(per_node) * g.cell_volume();
}

double norm_boundary(const BoundaryField& b, const NodeRange& r, const TAArray* weight) {
    const Grid& g = b.grid();
    std::vector<double> area(b.faces().size());
    for (std::size_t k = 0; k < area.size(); ++k) area[k] = b.faces()[k].area;
    std::vector<double> sq(area.size());
    std::vector<double> per_node;
    for (int i = r.i0; i <= r.i1; ++i) {
        double wt = trapezoid_weight(i, r.i0, r.i1, g.ds);
        for (int j = r.j0; j <= r.j1; ++j) {
            double wa = trapezoid_weight(j, r.j0, r.j1, g.ds);
            double w = weight ? (*weight)(i, j) : 1.0;
            auto s = b.slice(i, j);
            for (std::size_t k = 0; k < s.size(); ++k) sq[k] = s[k] * s[k];
            per_node.push_back(wt * wa * w * w * tree_dot(sq, area));
        }
    }
    return tree_sum(per_node);
}

double norm_boundary(const BoundaryField& b, const std::optional<Rect>& rect, const TAArray* weight) {
    NodeRange r = rect ? b.grid().snap(*rect) : b.grid().full();
    return norm_boundary(b, r, weight);
}

double integrate_ta(const Grid& g, const TAArray& f, const NodeRange& r) {
    std::vector<double> terms;
    for (int i = r.i0; i <= r.i1; ++i)
        for (int j = r.j0; j <= r.j1; ++j)
            terms.push_back(trapezoid_weight(i, r.i0, r.i1, g.ds) * trapezoid_weight(j, r.j0, r.j1, g.ds) * f(i, j));
    return tree_sum(terms);
}

Field restrict(const Field& f, const Rect& rect) {
    const Grid& g = f.grid();
    NodeRange r = g.snap(rect);
    Field out(g);
    for (int i = r.i0; i <= r.i1; ++i)
        for (int j = r.j0; j <= r.j1; ++j) {
            auto src = f.slice(i, j);
            auto dst = out.slice(i, j);
            std::copy(src.begin(), src.end(), dst.begin());
        }
    return out;
}

}  // namespace agepde
