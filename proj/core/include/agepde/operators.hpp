#pragma once

#include <array>
#include <span>
#include <vector>

#include "agepde/grid.hpp"
#include "agepde/model.hpp"
#include "agepde/weight.hpp"

namespace agepde {

enum class BcKind { Dirichlet, Robin };

/// Boundary treatment for the discrete operator.
///
/// Dirichlet: ghost value = -interior, i.e. zero face value.
/// Robin: the face flux -d grad u . n is imposed, either as given values or as
/// S evaluated on the boundary trace of `u_ref`.
struct BoundaryCondition {
    BcKind kind = BcKind::Dirichlet;
    const SurfaceSpec* S = nullptr;
    const Field* u_ref = nullptr;
    const BoundaryField* flux = nullptr;

    static BoundaryCondition dirichlet() { return {}; }
    /// Zero flux.
    static BoundaryCondition neumann() { return {BcKind::Robin, nullptr, nullptr, nullptr}; }
    static BoundaryCondition robin(const SurfaceSpec& S, const Field& u_ref) { return {BcKind::Robin, &S, &u_ref, nullptr}; }
    static BoundaryCondition robin_flux(const BoundaryField& g) { return {BcKind::Robin, nullptr, nullptr, &g}; }
};

/// Face transmissibilities of the flux-form operator at one (t,a) node.
///
/// The discrete Dirichlet form is
///   E(f,g) = sum_faces k_f (df)(dg) + sum_interior_vertices k_v (A_f A_g - B_f B_g),
/// with df the jump across a face (or the cell value on a Dirichlet boundary face),
/// A = f(p+1,q+1) - f(p,q) and B = f(p+1,q) - f(p,q+1) around a vertex. The operator
/// is (A f)_c = -(1/|cell|) dE/dg_c, so <A f, g> = -E(f,g) holds exactly.
struct OperatorWorkspace {
    Grid grid;
    bool dirichlet = true;
    std::vector<double> kx;   ///< (Nx0+1) x Nx1 faces normal to axis 0
    std::vector<double> ky;   ///< Nx0 x (Nx1+1) faces normal to axis 1
    std::vector<double> kxy;  ///< (Nx0-1) x (Nx1-1) interior vertices, d01/2

    /// Coefficients from d(t,a,.) evaluated at face centres and vertices.
    static OperatorWorkspace build(const Grid& g, const DiffusionSpec& d, double t, double a, BcKind bc);
    /// Same stencil with d replaced by (d_t + d_a).
    static OperatorWorkspace build_transport_derivative(const Grid& g, const DiffusionSpec& d, double t, double a,
                                                        BcKind bc);
    /// Identity tensor (discrete |grad f|^2).
    static OperatorWorkspace build_identity(const Grid& g, BcKind bc);
};

/// out = A f on one slice. `boundary_flux` (per boundary face, Robin only) may be empty.
void apply_A_slice(const OperatorWorkspace& ws, std::span<const double> f, std::span<double> out,
                   std::span<const double> boundary_flux = {});

/// Discrete form E(f,g) on one slice, i.e. <d grad f, grad g>_Omega.
double energy_slice(const OperatorWorkspace& ws, std::span<const double> f, std::span<const double> g);

/// Boundary flux values at node (i,j) implied by a Robin condition (empty for Dirichlet).
std::vector<double> robin_flux_slice(const BoundaryCondition& bc, const Grid& g, int i, int j);

/// Discrete A on every (t,a) node.
Field apply_A(const Field& f, const DiffusionSpec& d, const BoundaryCondition& bc);

enum class TransportStencil { Forward, Centered };

/// Diagonal difference along characteristics.
///
/// Forward: (f(i+1,j+1) - f(i,j))/ds; at the last row/column the backward
/// difference is used. Centered: (f(i+1,j+1) - f(i-1,j-1))/(2 ds) where both
/// neighbours exist, one-sided otherwise. Nodes with no diagonal neighbour
/// ((T,0) and (0,a_dagger)) get 0.
Field apply_transport(const Field& f, TransportStencil stencil = TransportStencil::Forward);

/// Cell-averaged face-difference gradient at node (i,j).
std::vector<std::array<double, 2>> gradient(const Field& f, int i, int j, BcKind bc = BcKind::Dirichlet);

/// Weighted squared gradient norm: sum over nodes of trapezoid * w^2 * E_I(f,f).
double grad_norm_Q(const Field& f, const NodeRange& range, const TAArray* weight, BcKind bc);

/// Relative residual of -2<z_t + z_a, A z>_Q = -int grad z . (d_t + d_a) d grad z.
///
/// Normalised by |LHS| + |RHS| + 2 ||z_t + z_a|| ||A z||. Requires all trace flags.
double check_green_identity(const Field& z, const DiffusionSpec& d);

/// Relative residual of (4m/k)<lambda^{-1} z, z_t + z_a>_Q = (4m/k)||lambda^{-1} z||_Q^2,
/// with lambda^{-1} signed. Requires zero t and a traces.
double check_transport_identity(const Field& z, const WeightSpec& w);

}  // namespace agepde
