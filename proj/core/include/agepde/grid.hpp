#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "agepde/error.hpp"

namespace agepde {

/// Closed (t,a) rectangle [t0,t1]x[a0,a1] in physical units.
struct Rect {
    double t0, t1, a0, a1;
};

/// Inclusive node-index range of a snapped Rect.
struct NodeRange {
    int i0, i1, j0, j1;
};

/// A face of the spatial mesh lying on the boundary of the box.
struct BoundaryFace {
    int cell;     ///< adjacent cell
    int axis;     ///< normal axis
    int side;     ///< -1 at x_axis = 0, +1 at x_axis = L
    double area;  ///< face measure (1 in 1D)
};

/// Tensor-product grid of Q = (0,T) x (0,a_dagger) x Omega with a shared (t,a) step.
///
/// (t,a) data live on nodes t_i = i*ds, a_j = j*ds; spatial data are cell centred.
/// For n = 1 the second axis is a dummy of one cell with unit width, so cell
/// volumes and face areas follow the same formulas in both dimensions.
struct Grid {
    double T = 1.0;
    double a_dagger = 1.0;
    double ds = 1.0;
    int Nt = 1;
    int Na = 1;
    int n = 1;
    std::array<double, 2> L{1.0, 1.0};
    std::array<int, 2> Nx{1, 1};
    std::array<double, 2> h{1.0, 1.0};

    int nt_nodes() const { return Nt + 1; }
    int na_nodes() const { return Na + 1; }
    int ncell() const { return Nx[0] * Nx[1]; }
    std::size_t nodes() const { return std::size_t(Nt + 1) * std::size_t(Na + 1); }
    std::size_t size() const { return nodes() * std::size_t(ncell()); }
    std::size_t node(int i, int j) const { return std::size_t(i) * std::size_t(Na + 1) + std::size_t(j); }

    double t(int i) const { return i * ds; }
    double a(int j) const { return j * ds; }
    int cell(int c0, int c1) const { return c0 + Nx[0] * c1; }
    std::array<double, 2> x(int c) const;

    double cell_volume() const { return h[0] * h[1]; }
    double omega_measure() const { return n == 1 ? L[0] : L[0] * L[1]; }
    double boundary_measure() const { return n == 1 ? 2.0 : 2.0 * (L[0] + L[1]); }
    /// Largest spatial step.
    double dx() const { return n == 1 ? h[0] : std::max(h[0], h[1]); }
    /// Face measure for a face normal to `axis`.
    double face_area(int axis) const { return axis == 0 ? h[1] : h[0]; }

    std::vector<BoundaryFace> boundary_faces() const;
    int nfaces() const { return n == 1 ? 2 : 2 * (Nx[0] + Nx[1]); }

    NodeRange full() const { return {0, Nt, 0, Na}; }
    /// Node range of an on-grid rectangle; throws RectOffGrid otherwise.
    NodeRange snap(const Rect& r) const;
    /// Index of an on-grid t (or a) value; throws `code` when it is off the lattice.
    int snap_index(double v, int nmax, ErrorCode code = ErrorCode::RectOffGrid) const;
};

/// Builds a grid with shared step ds. Throws NonIntegerStepRatio or InvalidDimension.
Grid build_grid(double T, double a_dagger, double ds, std::span<const double> extents,
                std::span<const int> nx);

/// Trapezoid weight of node i within [i0, i1] (zero outside, zero for a degenerate range).
double trapezoid_weight(int i, int i0, int i1, double ds);

/// Scalar array over (t,a) nodes, used for weights and cutoffs.
class TAArray {
public:
    TAArray() = default;
    TAArray(const Grid& g, double fill = 0.0)
        : nt_(g.nt_nodes()), na_(g.na_nodes()), v_(std::size_t(nt_) * na_, fill) {}

    double& operator()(int i, int j) { return v_[std::size_t(i) * na_ + j]; }
    double operator()(int i, int j) const { return v_[std::size_t(i) * na_ + j]; }
    int nt() const { return nt_; }
    int na() const { return na_; }
    std::vector<double>& values() { return v_; }
    const std::vector<double>& values() const { return v_; }

private:
    int nt_ = 0, na_ = 0;
    std::vector<double> v_;
};

TAArray make_ta(const Grid& g, const std::function<double(double t, double a)>& fn);

struct TraceFlags {
    bool zero_t_ends = false;
    bool zero_a_ends = false;
    /// Zero trace on the boundary of Omega. The trace is the face value of the
    /// Dirichlet ghost construction, so no stored cell value changes.
    bool zero_spatial_boundary = false;

    bool all() const { return zero_t_ends && zero_a_ends && zero_spatial_boundary; }
};

/// Grid function u(t_i, a_j, x_c).
class Field {
public:
    Field() = default;
    explicit Field(const Grid& g, double fill = 0.0) : grid_(g), v_(g.size(), fill) {}

    const Grid& grid() const { return grid_; }
    double& operator()(int i, int j, int c) { return v_[index(i, j, c)]; }
    double operator()(int i, int j, int c) const { return v_[index(i, j, c)]; }
    std::size_t index(int i, int j, int c) const {
        return grid_.node(i, j) * std::size_t(grid_.ncell()) + std::size_t(c);
    }
    std::span<double> slice(int i, int j) {
        return {v_.data() + grid_.node(i, j) * grid_.ncell(), std::size_t(grid_.ncell())};
    }
    std::span<const double> slice(int i, int j) const {
        return {v_.data() + grid_.node(i, j) * grid_.ncell(), std::size_t(grid_.ncell())};
    }
    std::vector<double>& values() { return v_; }
    const std::vector<double>& values() const { return v_; }

    const TraceFlags& flags() const { return flags_; }
    /// Sets trace flags and zeroes the stored values they cover.
    void set_flags(const TraceFlags& f);

    bool finite() const;

private:
    Grid grid_;
    std::vector<double> v_;
    TraceFlags flags_;
};

Field make_field(const Grid& g, const std::function<double(double t, double a, const std::array<double, 2>& x)>& fn);

/// Pointwise (t,a)-multiplier times a field. Flags are cleared.
Field multiply(const TAArray& w, const Field& f);
Field operator+(const Field& a, const Field& b);
Field operator-(const Field& a, const Field& b);
Field operator*(double s, const Field& f);

/// Values on boundary faces over all (t,a) nodes.
class BoundaryField {
public:
    BoundaryField() = default;
    explicit BoundaryField(const Grid& g, double fill = 0.0);

    const Grid& grid() const { return grid_; }
    const std::vector<BoundaryFace>& faces() const { return faces_; }
    int nfaces() const { return int(faces_.size()); }
    double& operator()(int i, int j, int b) { return v_[index(i, j, b)]; }
    double operator()(int i, int j, int b) const { return v_[index(i, j, b)]; }
    std::size_t index(int i, int j, int b) const { return grid_.node(i, j) * faces_.size() + std::size_t(b); }
    std::span<const double> slice(int i, int j) const {
        return {v_.data() + grid_.node(i, j) * faces_.size(), faces_.size()};
    }
    std::vector<double>& values() { return v_; }
    const std::vector<double>& values() const { return v_; }

private:
    Grid grid_;
    std::vector<BoundaryFace> faces_;
    std::vector<double> v_;
};

/// Boundary trace of a cell field: the value of the adjacent cell.
BoundaryField trace(const Field& f);

/// Squared weighted norm: sum over nodes and cells of w(t,a)^2 f^2 dV, trapezoid in
/// (t,a), midpoint in x, fixed-order reduction. Throws RectOffGrid.
double norm_Q(const Field& f, const std::optional<Rect>& rect = std::nullopt, const TAArray* weight = nullptr);
double norm_Q(const Field& f, const NodeRange& range, const TAArray* weight);

/// Weighted inner product sum w(t,a) f g dV over a node range (w enters linearly).
double inner_Q(const Field& f, const Field& g, const NodeRange& range, const TAArray* weight = nullptr);

/// Squared weighted boundary norm with face-area quadrature.
double norm_boundary(const BoundaryField& g, const std::optional<Rect>& rect = std::nullopt,
                     const TAArray* weight = nullptr);
double norm_boundary(const BoundaryField& g, const NodeRange& range, const TAArray* weight);

/// Trapezoid integral of a (t,a) array over a node range.
double integrate_ta(const Grid& g, const TAArray& f, const NodeRange& range);

/// Copy of f with values outside the closed rectangle set to zero. Throws RectOffGrid.
Field restrict(const Field& f, const Rect& rect);

}  // namespace agepde
