#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <agepde/grid.hpp>

namespace testing {

inline constexpr double pi = std::numbers::pi;

inline agepde::Grid grid1(double T, double ad, double ds, int nx, double L = 1.0) {
    std::vector<double> ext{L};
    std::vector<int> cells{nx};
    return agepde::build_grid(T, ad, ds, ext, cells);
}

inline agepde::Grid grid2(double T, double ad, double ds, int nx, int ny = -1) {
    std::vector<double> ext{1.0, 1.0};
    std::vector<int> cells{nx, ny < 0 ? nx : ny};
    return agepde::build_grid(T, ad, ds, ext, cells);
}

inline agepde::Field random_field(const agepde::Grid& g, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    agepde::Field f(g);
    for (double& v : f.values()) v = u(rng);
    return f;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace testing
