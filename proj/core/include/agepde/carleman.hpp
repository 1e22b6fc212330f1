#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "agepde/grid.hpp"
#include "agepde/model.hpp"
#include "agepde/operators.hpp"
#include "agepde/weight.hpp"

namespace agepde {

/// Breakpoints of the (t,a) cutoffs. t3/a3 are only used by the corner decay.
struct CutoffSpec {
    double t1 = 0.0, t2 = 0.0, a1 = 0.0, a2 = 0.0;
    std::optional<double> t3, a3;
    int p = 2;
};

enum class CutoffKind { Kappa, KappaBar, TerminalChi };

/// C^p smoothstep: 0 for x <= 0, 1 for x >= 1, odd-symmetric about x = 1/2.
/// p = 2 gives 10x^3 - 15x^4 + 6x^5.
double smoothstep(double x, int p);

/// kappa = s((t-t1)/(t2-t1)) s((a-a1)/(a2-a1)); kappa_bar is the same function;
/// terminal_chi = s((T-t)/(T-t2)) s((a_dagger-a)/(a_dagger-a2)). Throws BreakpointOffGrid.
TAArray make_cutoff(const CutoffSpec& c, CutoffKind kind, const Grid& g);

struct Condition {
    std::string name;
    bool ok = false;
    /// Signed distance to the threshold, positive when satisfied.
    double slack = 0.0;
};

struct DirichletParams {
    double c_lower = 1.0;
    double M_bar = 0.0;
    double k = 1.0;
    double m0 = 8.0;
    double mu0 = 0.2;
    double eta0 = 0.05;
    double alpha = 1.0;
    double L_F = 1.0;
    /// m used in C1; defaults to m0. mu (>= T + a_dagger) and eta default to mu0, eta0.
    std::optional<double> m, mu, eta;
};

struct DirichletConstants {
    double C1 = 0.0;
    double C2 = 0.0;
    double K = 0.0;
    double mu0_prime = 0.0;
    /// 2((mu0+eta0) M_bar/2 + k M_bar/(8 m0)) <= c_lower
    Condition ellipticity;
    /// K <= 1/(4 alpha L_F^2)
    Condition source_bound;
};

DirichletConstants compute_constants_dirichlet(const DirichletParams& p);

struct RobinParams {
    double c_lower = 1.0;
    double M_bar = 0.0;
    double m_bar = 0.5;
    double C0 = 2.0;
    double k = 1.0;
    double m0 = 16.0;
    double mu0 = 0.1;
    double eta0 = 0.05;
    double alpha = 1.0;
    double L_F = 1.0;
    double beta = 0.5;
    double L_S = 1.0;
    /// Actual m, T + a_dagger and eta for K1, K2; default to m0, mu0, eta0.
    std::optional<double> m, mu, eta;
};

struct RobinConstants {
    double K1 = 0.0, K2 = 0.0, K3 = 0.0, K4 = 0.0;
    /// Absent when K1 or K3 is not positive.
    std::optional<double> C3, C4, K;
    double mu0_prime = 0.0;
    Condition k1_positive;
    /// 2 K2/K1 (M_bar + 2 C0 m_bar + 1/4) <= c_lower
    Condition ellipticity;
    /// (M_bar + 2 C0 m_bar + 1/4)/K1 <= 1/2
    Condition gradient_half;
    /// K <= min{1/(alpha L_F^2), 1/(C0 beta L_S^2), 1/(beta L_S^2)}/8
    Condition k_bound;

    bool all_ok() const { return k1_positive.ok && ellipticity.ok && gradient_half.ok; }
};

RobinConstants compute_constants_robin(const RobinParams& p);

/// eta^{e/(e+k)} 2^{k/(2e+2k)} - eta with e = m(1/q - 1), eta = min(1, eta0).
double mu0_prime(double q, double m, double k, double eta0);

struct VerificationReport {
    std::string id;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;
    double tol = 0.0;
    bool pass = true;
    std::vector<std::pair<std::string, double>> params;
};

/// Weighted inequalities for v in discrete P.
///
/// weighted_lower: ||w(Av - Dv)||^2 >= (4m/k)||w1 v||^2 - M_bar ||w grad v||^2,
/// energy_bound:  K ||w(Av - Dv)||^2 >= ||w1 v||^2 + ||w grad v||^2/2,
/// with w = |lambda|^{-m/k}, w1 = |lambda|^{-m/k-1} and D the centred transport.
/// Throws TraceFlagMissing, or PreconditionViolated when the constants do not
/// admit the energy bound (ellipticity condition, m < m0, T + a_dagger > mu0).
std::vector<VerificationReport> verify_dirichlet_estimates(const Field& v, const DiffusionSpec& d,
                                                           const WeightSpec& w, const DirichletParams& params,
                                                           double c_tol = 10.0);

/// ln of int int |lambda|^{-2m/k} over (t1,t2)x(a1,a2), in closed form.
double log_weight_norm2(const Grid& g, const WeightSpec& w, double t1, double t2, double a1, double a2);

/// The surface-reaction remainder of the Robin estimate, assembled in log space.
/// beta >= 1 is evaluated at 1 - 1e-6. May be +inf.
double surface_remainder(const Grid& g, const WeightSpec& w, const CutoffSpec& c, double beta, double L_S,
                         double boundary_norm);

/// Robin-type weighted inequalities for w in discrete P-tilde with boundary flux g.
///
/// Reports weighted_lower and energy_bound with the surface remainder, plus
/// weighted_lower_lipschitz where the remainder is replaced by the Lipschitz
/// bound (m/(k eta))^2 L_S^2 ||w_lambda w||^2 on the boundary. Throws
/// FluxMismatch when g differs from S applied to the trace of w (linear and
/// zero kinds), TraceFlagMissing, PreconditionViolated.
std::vector<VerificationReport> verify_robin_estimates(const Field& w, const BoundaryField& g, const DiffusionSpec& d,
                                                       const SurfaceSpec& S, const WeightSpec& wt,
                                                       const RobinParams& params, const CutoffSpec& cut,
                                                       double c_tol = 10.0);

struct DecayRow {
    double m = 0.0;
    double bound = 0.0;
    double corner_norm = 0.0;
    bool pass = true;
};

struct DecayTable {
    std::vector<DecayRow> rows;
    double slope = 0.0;
    double expected_slope = 0.0;
    double ratio = 0.0;
    /// ||A v - D v||^2 over the transition rectangle, v = kappa w.
    double transition_norm = 0.0;
};

/// Corner decay bound 2K ratio^{-2m/k} X3^2 (||Av - Dv||^2_{transition} + T a_dagger |Omega| L_F^2)
/// against ||w||^2 on (t3,T)x(a3,a_dagger). Throws PreconditionViolated.
DecayTable corner_decay(const Field& w, const CutoffSpec& c, const DiffusionSpec& d, double K, double L_F, double k,
                        double eta, const std::vector<double>& m_sweep);

/// Least-squares slope of ln(y) against x over entries with finite positive y.
double fit_log_slope(const std::vector<double>& x, const std::vector<double>& y);

struct ElementaryCheck {
    VerificationReport report;
    int violations = 0;
    double worst_slack = 0.0;
    /// max |RHS - LHS|/RHS at X = gamma.
    double tangency_error = 0.0;
};

/// X^a <= a g^{a-1} X + (1-a) g^a over log-uniform samples of X and g.
ElementaryCheck check_elementary_inequality(int n_samples, std::uint64_t seed, double rel_tol = 1e-12);

struct TraceConstant {
    double C0 = 0.0;
    int iterations = 0;
};

/// Largest ||u||^2_boundary / (||u||^2 + ||grad u||^2) over cell functions, by power
/// iteration on the generalized eigenproblem. Throws PowerIterationStalled.
TraceConstant estimate_trace_constant(const Grid& g, double rel_tol = 1e-6, int max_iter = 10000);

/// (mu0'+eta)^{(2m/k)(1/q-1)+2} eta^{(2m/k)(1-1/q)} = 2.
VerificationReport check_weight_product_identity(double q, double m, double k, double eta0, double rel_tol = 1e-10);

}  // namespace agepde
