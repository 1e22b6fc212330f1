#pragma once

#include "agepde/grid.hpp"

namespace agepde {

/// Carleman weight data: lambda(t,a) = t - T + a - a_dagger - eta < 0.
struct WeightSpec {
    double m = 1.0;
    double k = 1.0;
    double eta = 0.05;

    double exponent() const { return m / k; }
};

/// Signed lambda at (t,a).
inline double lambda_value(const Grid& g, double t, double a, double eta) { return t - g.T + a - g.a_dagger - eta; }

/// |lambda| = T + a_dagger + eta - t - a.
inline double abs_lambda(const Grid& g, double t, double a, double eta) { return g.T + g.a_dagger + eta - t - a; }

/// Signed lambda on the (t,a) nodes.
TAArray lambda_field(const Grid& g, double eta);

/// |lambda|^{-m/k} and |lambda|^{-m/k-1} on the (t,a) nodes.
struct WeightArrays {
    TAArray w;
    TAArray w1;
};

WeightArrays weight_field(const WeightSpec& w, const Grid& g);

}  // namespace agepde
