#include "agepde/cg.hpp"
#include "agepde/reduce.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace agepde {

CgResult cg_solve(const std::function<void(std::span<const double>, std::span<double>)>& apply,
                  std::span<const double> b, std::span<double> x, double tol, int max_iter) {
    const std::size_t n = b.size();
    CgResult res;
    double bnorm = std::sqrt(tree_dot(b, b));
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        res.converged = true;
        return res;
    }
    std::vector<double> r(n), p(n), Ap(n);
    apply(x, Ap);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - Ap[i];
    p = r;
    double rr = tree_dot(r, r);
    res.residual = std::sqrt(rr) / bnorm;
    while (res.residual > tol && res.iterations < max_iter) {
        apply(p, Ap);
        double pAp = tree_dot(p, Ap);
        if (!(pAp > 0.0)) break;
        double alpha = rr / pAp;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        }
        double rr_new = tree_dot(r, r);
        double beta = rr_new / rr;
        rr = rr_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
        ++res.iterations;
        res.residual = std::sqrt(rr) / bnorm;
    }
    res.converged = res.residual <= tol;
    return res;
}

}  // namespace agepde
