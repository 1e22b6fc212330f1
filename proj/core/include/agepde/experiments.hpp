#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "agepde/carleman.hpp"
#include "agepde/grid.hpp"
#include "agepde/model.hpp"
#include "agepde/solver.hpp"

namespace agepde {

enum class ExperimentId { Mms, UniquenessDecay, BackwardAmp, CarlemanSuite, EpidemicDemo, TraceConstant };

std::string to_string(ExperimentId id);
std::optional<ExperimentId> experiment_from_string(const std::string& s);

// ---------------------------------------------------------------------------
// Manufactured solutions

enum class MmsSolution {
    /// e^{-t-a} sin(pi x1) (sin(pi x2)), Dirichlet.
    Product,
    /// e^{-t-a}, zero-flux faces.
    XIndependent,
    /// u = 0.
    Zero,
};

struct MmsConfig {
    int n = 1;
    double T = 0.5;
    double a_dagger = 0.5;
    MmsSolution solution = MmsSolution::Product;
    /// Spatial study: cells per axis (each a 3x refinement of the last) at nt_fixed steps.
    std::vector<int> nx_levels{6, 18, 54};
    int nt_fixed = 32;
    /// Characteristic study: (t,a) steps (each a 2x refinement) at nx_fixed cells per axis.
    std::vector<int> nt_levels{16, 32, 64};
    int nx_fixed = 18;
};

struct ConvergenceRow {
    int level = 0;
    double h_x = 0.0;
    double h_s = 0.0;
    /// ||u - u*||_Q.
    double error = 0.0;
    /// Richardson order from this level and the two before it; NaN where undefined.
    double order_x = 0.0;
    double order_s = 0.0;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    double spatial_order = 0.0;
    double characteristic_order = 0.0;
};

/// Spatial rows come first, then characteristic rows. Orders are fitted from
/// differences of successive solutions at shared points, so the error of the
/// frozen variable cancels. Throws as solve_forward.
ConvergenceTable run_mms(const MmsConfig& cfg);

struct HeatModeResult {
    double max_error = 0.0;
    double bound = 0.0;
    bool pass = false;
};

/// u = e^{-pi^2 min(t,a)} sin(pi x) on (0,1)^2 x (0,1), d = 1, F = 0.
HeatModeResult run_heat_mode(int nt = 64, int nx = 64);

// ---------------------------------------------------------------------------
// Uniqueness and corner decay

struct DecayConfig {
    double T = 0.1;
    double a_dagger = 0.1;
    int nt = 40;
    int nx = 32;
    CutoffSpec cutoff{0.025, 0.05, 0.025, 0.05, 0.075, 0.075, 2};
    /// Source F = -c sign(u)|u|^alpha.
    double c = 1.0;
    double alpha = 0.5;
    double eta = 0.05;
    double k = 1.0;
    /// Dirichlet constant K; computed from (m0, mu0, eta0) when absent.
    std::optional<double> K;
    double m0 = 8.0;
    double mu0 = 0.2;
    double eta0 = 0.05;
    std::vector<double> m_sweep{8, 12, 16, 20};
    /// Second inflow = first + delta * profile; delta = 0 gives identical scenarios.
    double delta = 1e-5;
    /// Restrict the inflow difference to a >= a_from (u(0,a,x) only).
    std::optional<double> a_from;
};

struct DecayResult {
    DecayTable table;
    /// sup |A w - D w| / |w|^alpha over nodes with w != 0, w = u1 - u2.
    double realized_holder = 0.0;
    double K = 0.0;
    /// u1 and u2 equal bit for bit.
    bool identical = false;
};

DecayResult run_uniqueness_decay(const DecayConfig& cfg);

// ---------------------------------------------------------------------------
// Backward amplification

struct BackwardConfig {
    int n = 1;
    double T = 0.05;
    double a_dagger = 0.05;
    int nt = 64;
    int nx = 64;
    double d = 1.0;
    double tau = 0.05;
    double epsilon = 1e-6;
    std::vector<int> frequencies{1, 2, 4};
    /// Adds the epsilon = 0 reconstruction row (j = 0).
    bool include_unperturbed = true;
};

struct AmplificationTable {
    std::vector<AmplificationRow> rows;
    bool truncated = false;
};

/// One row per frequency, read at tau. Throws as solve_forward.
AmplificationTable run_backward_amplification(const BackwardConfig& cfg);

// ---------------------------------------------------------------------------
// Carleman suite

struct SuiteConfig {
    std::uint64_t seed = 20240611;
    int corpus_size = 20;
    /// Dirichlet family.
    double T = 0.1;
    double a_dagger = 0.1;
    int nt = 40;
    int nx = 64;
    int n = 1;
    CutoffSpec cutoff{0.02, 0.05, 0.02, 0.05, std::nullopt, std::nullopt, 2};
    std::vector<double> m_sweep{8, 16, 32};
    double k = 1.0;
    double eta = 0.05;
    DirichletParams dirichlet{};
    /// Diffusion d00 = 1 + amp sin(t+a); 0 gives d = I.
    double d_amp = 0.0;
    /// Robin family; disabled when robin_sigmas is empty.
    double robin_T = 0.03;
    double robin_a_dagger = 0.03;
    int robin_nt = 48;
    int robin_nx = 64;
    CutoffSpec robin_cutoff{0.00625, 0.0125, 0.00625, 0.0125, std::nullopt, std::nullopt, 2};
    std::vector<double> robin_sigmas{0.0, 0.5, 2.0};
    std::vector<double> robin_m_sweep{16, 32, 64};
    double robin_eta = 0.02;
    RobinParams robin{1.0, 0.0, 0.5, 2.0, 1.0, 16.0, 0.06, 0.02, 1.0, 1.0, 1.0, 1.0, {}, {}, {}};
    /// Estimate C0 on the Robin grid instead of using robin.C0.
    bool estimate_C0 = true;
    int elementary_samples = 100000;
    int product_samples = 100;
    int audit_samples = 2000;
    /// Growth-rate range of the A4 trajectories; the linear surface gives sup = 2 sigma rho.
    double audit_rho_max = 0.5;
    double c_tol = 10.0;
    /// Fault injection: negate every inequality LHS.
    bool corrupt = false;
};

struct SuiteResult {
    std::vector<VerificationReport> reports;
    int violations = 0;
    std::vector<std::string> failed_ids;

    bool pass() const { return violations == 0; }
};

/// Seeded corpus field: kappa * chi * (sum of 3-6 separable bumps) on the
/// given grid. Dirichlet fields vanish on the spatial boundary.
Field corpus_field(const Grid& g, const CutoffSpec& c, std::uint64_t seed, bool dirichlet);

SuiteResult run_carleman_suite(const SuiteConfig& cfg);

// ---------------------------------------------------------------------------
// Epidemic demo

struct EpidemicConfig {
    int n = 1;
    double T = 1.0;
    double a_dagger = 1.0;
    int nt = 32;
    int nx = 32;
    double death_s = 0.1;
    double death_i = 0.3;
    /// chi(a) = chi0 for a in [a_lo, a_hi], 0 outside.
    double chi0 = 1.0;
    double a_lo = 0.2;
    double a_hi = 0.8;
    double contact = 1.0;
    double d_s = 0.01;
    double d_i = 0.01;
    bool neumann = true;
};

struct EpidemicResult {
    Field u, v;
    /// Along the characteristic from (0,0): s, int u, int v.
    std::vector<std::array<double, 3>> mass;
    double min_value = 0.0;
};

EpidemicResult run_epidemic_demo(const EpidemicConfig& cfg);

// ---------------------------------------------------------------------------
// Trace constant

struct TraceConfig {
    int n = 1;
    std::vector<int> nx_levels{16, 32, 64};
    double rel_tol = 1e-8;
};

struct TraceRow {
    int nx = 0;
    double C0 = 0.0;
    int iterations = 0;
};

struct TraceTable {
    std::vector<TraceRow> rows;
    /// 2 in 1D, 4 on the unit square: the quotient of a constant function.
    double lower_bound = 0.0;
    /// |C0(finest) - C0(next)| / C0(finest).
    double relative_change = 0.0;
};

TraceTable run_trace_constant(const TraceConfig& cfg);

// ---------------------------------------------------------------------------
// Report writers; each returns the paths written and throws IoError.

std::vector<std::string> write_convergence_csv(const ConvergenceTable& t, const std::string& dir);
std::vector<std::string> write_decay_csv(const DecayTable& t, const std::string& dir);
std::vector<std::string> write_amplification_csv(const AmplificationTable& t, const std::string& dir);
std::vector<std::string> write_suite(const std::vector<VerificationReport>& reports, const std::string& dir);
std::vector<std::string> write_trace_csv(const TraceTable& t, const std::string& dir);
std::vector<std::string> write_epidemic(const EpidemicResult& r, const std::string& dir);

}  // namespace agepde
