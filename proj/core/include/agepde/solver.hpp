#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "agepde/grid.hpp"
#include "agepde/model.hpp"

namespace agepde {

/// Inflow data as a function of the running variable (a for u(0,a,x), t for u(t,0,x)).
using InflowFn = std::function<double(double s, const Point& x)>;

struct Scenario {
    Grid grid;
    ModelSpec model;
    InflowFn initial;   ///< u(0,a,x)
    InflowFn boundary;  ///< u(t,0,x)
    double tol = 1e-12;
    int max_iter = 5000;
};

struct SolveReport {
    /// CG iterations and final relative residual per step, indexed by node (i,j), i,j >= 1.
    std::vector<int> iterations;
    std::vector<double> residuals;
    double wall_seconds = 0.0;
    /// int_Omega u dx at every (t,a) node; read along a diagonal it traces one characteristic.
    TAArray mass;
    int max_iterations = 0;
    double max_residual = 0.0;
};

/// Marches every characteristic forward from the inflow data:
///   (I - ds A(t_i,a_j)) u(i,j) = u(i-1,j-1) + ds F(t_{i-1},a_{j-1},x; u(i-1,j-1)),
/// with the Robin flux S evaluated on the previous state. Throws StiffSourceStep,
/// LinearSolveDiverged, MissingContext.
std::pair<Field, SolveReport> solve_forward(const Scenario& s);

/// Terminal slices u(T,.,.) and u(.,a_dagger,.) as a field that is zero elsewhere.
Field terminal_data(const Field& u);

struct BackwardPerturbation {
    double epsilon = 0.0;
    /// Spatial frequency along axis 0: sin(j pi x / L).
    int frequency = 1;
    double tau = 0.05;
};

struct AmplificationRow {
    int j = 0;
    double tau = 0.0;
    double predicted = 0.0;
    double measured = 0.0;
};

struct BackwardResult {
    /// Backward-marched perturbed data on nodes within tau of the terminal set.
    Field field;
    /// One row per step on the characteristic ending at (T, a_dagger).
    std::vector<AmplificationRow> rows;
    /// True when values exceeded 1e308 and the march stopped early.
    bool truncated = false;
};

/// Reverses the implicit step explicitly, u_old = (u_new - ds A u_new)/(1 - ds d0),
/// from the terminal slices of `forward` plus epsilon sin(j pi x/L); `field` holds this
/// raw march. Rows measure the growth of the mode itself: the perturbation is marched
/// with a projection onto sin(j pi x/L) after each step, and with epsilon = 0 the
/// projected reconstruction is compared with the forward solution. F must be zero or
/// linear death, diffusion isotropic constant for the prediction d (j pi/L)^2 tau.
BackwardResult solve_backward_naive(const Scenario& s, const Field& forward, const BackwardPerturbation& p);

/// Two-field host model: susceptible u loses and infected v gains u chi(a) m(t,x).
struct CoupledScenario {
    Grid grid;
    DiffusionSpec d1 = DiffusionSpec::identity();
    DiffusionSpec d2 = DiffusionSpec::identity();
    std::function<double(double a)> death1 = [](double) { return 0.0; };
    std::function<double(double a)> death2 = [](double) { return 0.0; };
    std::function<double(double a)> chi = [](double) { return 0.0; };
    std::function<double(double t, const Point& x)> contact = [](double, const Point&) { return 0.0; };
    /// Robin surface reaction for both fields; empty means Dirichlet.
    std::optional<SurfaceSpec> S;
    InflowFn initial1, boundary1, initial2, boundary2;
    double tol = 1e-12;
    int max_iter = 5000;
};

/// Each field advanced by the forward step with the coupling lagged. Throws as solve_forward.
std::pair<Field, Field> solve_coupled(const CoupledScenario& s);

/// Writes columns t,a,x0[,x1],u. Throws IoError.
void write_field_csv(const Field& f, const std::string& path);

}  // namespace agepde
