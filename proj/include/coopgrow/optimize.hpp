#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace coopgrow {

struct BoxOptions {
    std::size_t max_iterations = 200;
    double gradient_tolerance = 1e-8;  ///< on the projected gradient, inf-norm
    double relative_tolerance = 1e-12; ///< on successive objective decrease
    double objective_floor = 1e-20;    ///< treat anything below as an exact fit
    double fd_step = 1e-6;             ///< central-difference step per coordinate
};

struct BoxResult {
    std::vector<double> x;
    double value = 0.0;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    bool converged = false;
};

/// Projected BFGS with Armijo backtracking along the projection arc, using
/// central finite-difference gradients. The objective may return +inf (or
/// throw) for points it cannot evaluate; such points are rejected by the
/// line search. Every accepted step lowers the objective, so the returned
/// value never exceeds the value at x0.
BoxResult minimize_box(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                       const std::vector<double>& lower, const std::vector<double>& upper,
                       const BoxOptions& options = {});

}  // namespace coopgrow
