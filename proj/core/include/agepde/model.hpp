#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "agepde/grid.hpp"

namespace agepde {

/// Symmetric 2x2 tensor stored row-major; for n = 1 only entry [0] is used.
using Tensor = std::array<double, 4>;
using Point = std::array<double, 2>;

/// Diffusion tensor d(t,a,x) with its declared bounds.
struct DiffusionSpec {
    std::function<Tensor(double t, double a, const Point& x)> eval;
    /// Optional exact (d_t + d_a); central differences are used when empty.
    std::function<Tensor(double t, double a, const Point& x)> transport_derivative;
    double c_lower = 1.0;
    double c_upper = 1.0;
    double M_bar = 0.0;
    bool constant_in_ta = true;
    std::string name = "identity";

    static DiffusionSpec identity();
    static DiffusionSpec diagonal(double d0, double d1);
    /// Constant symmetric tensor; bounds are its eigenvalues.
    static DiffusionSpec constant(const Tensor& d);
    /// d00 = 1 + amp*sin(t+a), d11 = 1, d01 = 0. Declares M_bar = 2*amp.
    static DiffusionSpec sinusoidal(double amp);
    /// Isotropic coefficient depending on age only.
    static DiffusionSpec age_dependent(std::function<double(double)> d, double lower, double upper, double m_bar);
};

Tensor eval_diffusion(const DiffusionSpec& spec, double t, double a, const Point& x);
/// (d_t + d_a)(t,a,x), exact when provided, else central differences.
Tensor eval_diffusion_transport(const DiffusionSpec& spec, double t, double a, const Point& x);

enum class SourceKind { Zero, LinearDeath, Logistic, VonBertalanffy, Arrhenius, HolderPower, LotkaVonFoerster };

/// Reaction term F(t,a,x;u) with declared Hoelder data (alpha, L_F).
///
/// Kinds and parameters (p1, p2):
///   linear_death(d0):       F = -d0 u
///   logistic(r, cap):       F = r u (1 - u/cap)
///   von_bertalanffy(r, th): F = r (th - u)
///   arrhenius(A0, E):       F = -A0 exp(-E/(1+a)) u
///   holder_power(c, q):     F = -c sign(u)|u|^q
///   lotka_von_foerster:     F = -u * int int u(t,a',x) dx da'
/// An optional additive forcing g(t,a,x) is used for manufactured solutions.
struct SourceSpec {
    SourceKind kind = SourceKind::Zero;
    double p1 = 0.0;
    double p2 = 0.0;
    double alpha = 1.0;
    double L_F = 1.0;
    std::function<double(double t, double a, const Point& x)> forcing;

    bool needs_context() const { return kind == SourceKind::LotkaVonFoerster; }

    static SourceSpec zero();
    static SourceSpec linear_death(double d0);
    static SourceSpec logistic(double r, double cap);
    static SourceSpec von_bertalanffy(double r, double theta);
    static SourceSpec arrhenius(double A0, double E);
    static SourceSpec holder_power(double c, double q);
    static SourceSpec lotka_von_foerster(double L_F = 1.0);
};

std::string to_string(SourceKind k);
std::optional<SourceKind> source_kind_from_string(const std::string& s);

/// Integral of u over age and space at time node i (trapezoid in a, midpoint in x).
double total_population(const Field& u, int i);

/// F with the nonlocal total supplied by the caller.
double source_value(const SourceSpec& spec, double t, double a, const Point& x, double u, double total);

/// F at a point; the nonlocal kind reads the time slice of `context` at t. Throws MissingContext.
double eval_source(const SourceSpec& spec, double t, double a, const Point& x, double u,
                   const Field* context = nullptr);

/// Local Lipschitz estimate of u -> F on |u| <= umax, used for the explicit step bound.
double source_lipschitz_estimate(const SourceSpec& spec, double umax, double a_dagger, double omega_measure);

enum class SurfaceKind { Zero, Linear, Power };

/// Surface reaction S(u) in -d grad u . n = S(u), with declared A4-A6 data.
struct SurfaceSpec {
    SurfaceKind kind = SurfaceKind::Zero;
    double sigma = 0.0;
    double exponent = 1.0;
    double beta = 1.0;
    double L_S = 1.0;
    double m_bar = 1.0;
    bool monotone = true;

    static SurfaceSpec zero();
    /// sigma >= 0 implies monotone.
    static SurfaceSpec linear(double sigma, bool monotone = true);
    static SurfaceSpec power(double sigma, double beta);
};

std::string to_string(SurfaceKind k);
double eval_surface(const SurfaceSpec& spec, double u);

/// Diffusion, source and boundary choice. No surface spec means homogeneous Dirichlet.
struct ModelSpec {
    DiffusionSpec d;
    SourceSpec F;
    std::optional<SurfaceSpec> S;
};

struct AuditEntry {
    std::string id;
    double extremum = 0.0;
    double bound = 0.0;
    bool pass = true;
    std::array<double, 4> where{};
};

struct AssumptionAudit {
    std::vector<AuditEntry> entries;

    bool all_pass() const;
    const AuditEntry* find(const std::string& id) const;
};

struct AuditOptions {
    /// Densities are sampled in [0, u_range] on a 2^-24 lattice for the Hoelder checks (A3, A6).
    double u_range = 2.0;
    /// Growth-rate range of the synthetic A4 trajectories.
    double rho_max = 1.0;
};

/// Samples A1-A6 on the grid's domain. Deterministic given the seed.
AssumptionAudit audit_assumptions(const ModelSpec& model, const Grid& grid, int n_samples, std::uint64_t seed,
                                  const AuditOptions& opts = {});

/// Uniform doubles from mt19937_64 without the standard distributions, whose
/// output is implementation defined.
class SplitRng {
public:
    explicit SplitRng(std::uint64_t seed) : eng_(seed) {}
    double uniform() { return double(eng_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double log_uniform(double lo, double hi);
    int integer(int lo, int hi) { return lo + int(eng_() % std::uint64_t(hi - lo + 1)); }

private:
    std::mt19937_64 eng_;
};

}  // namespace agepde
