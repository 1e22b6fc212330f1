#pragma once

#include <functional>
#include <span>

namespace agepde {

struct CgResult {
    int iterations = 0;
    /// Final ||r|| / ||b|| (0 when b = 0).
    double residual = 0.0;
    bool converged = false;
};

/// Unpreconditioned conjugate gradients for an SPD operator. `x` holds the
/// initial guess on entry. Dot products use the fixed-order tree reduction.
CgResult cg_solve(const std::function<void(std::span<const double>, std::span<double>)>& apply,
                  std::span<const double> b, std::span<double> x, double tol, int max_iter);

}  // namespace agepde
