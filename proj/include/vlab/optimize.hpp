#pragma once

#include <functional>
#include <span>
#include <vector>

namespace vlab::opt {

using Objective = std::function<double(std::span<const double>)>;

struct NelderMeadOptions {
    int max_iterations = 2000;
    /// Stop once every vertex lies within this (infinity-norm) distance of the best one.
    double xtol = 1e-8;
    double initial_step = 0.1;
};

struct MinimizeResult {
    std::vector<double> x;
    double fx = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
};

/// Derivative-free downhill simplex (standard coefficients 1, 2, 1/2, 1/2).
/// Non-finite objective values are treated as +inf, so infeasible points
/// are simply rejected.
[[nodiscard]] MinimizeResult nelder_mead(const Objective& f, std::vector<double> x0,
                                         const NelderMeadOptions& options = {});

/// Golden-section minimum of a 1-D function on [lo, hi].
[[nodiscard]] double golden_section(const std::function<double(double)>& f, double lo, double hi,
                                    double tol = 1e-10, int max_iterations = 200);

/// Cyclic coordinate-wise golden-section search around `x`, each coordinate
/// within +-radius. Moves are only accepted when they lower f.
[[nodiscard]] MinimizeResult coordinate_polish(const Objective& f, std::vector<double> x, double radius = 1e-3,
                                               int sweeps = 20);

}  // namespace vlab::opt
