#pragma once

#include <functional>
#include <vector>

#include "fredholm/discrete.hpp"

namespace fredholm {

/// Values on the uniform grid x_k = start + k * step.
struct UniformSamples {
    double start = 0.0;
    double step = 0.0;
    std::vector<double> values;

    double at(std::size_t k) const { return start + static_cast<double>(k) * step; }
};

/// f at `points` equispaced points including both ends of [0, T].
UniformSamples sample_function(const std::function<double(double)>& f, double horizon, int points);

/// Cell midpoints and values of a discrete solution.
UniformSamples samples_of(const SolutionGrid& solution);

/// Minimum of the scaled forward difference of one order over all admissible
/// windows x > T/2, x + k h < T.
struct OrderResult {
    int order = 0;
    double min_scaled = 0.0;
    double x_at_min = 0.0;
    double h_at_min = 0.0;
    long windows = 0;
    double threshold = 0.0;
    bool passed = false;
};

/// Differences of order k with step h are scaled by (h / T)^k, so every field
/// is in the units of phi and compares directly against `tol`.
struct MonotonicityReport {
    double tol = 0.0;
    int max_order = 0;
    double symmetry_err = 0.0;
    double min_value = 0.0;
    /// Most negative centered second difference over interior points.
    double convexity_defect = 0.0;
    std::vector<OrderResult> diff_orders;

    bool symmetric = false;
    bool nonnegative = false;
    bool convex = false;
    /// Symmetric, nonnegative and every order passed.
    bool totally_monotone = false;
};

/// Requires a grid symmetric about T/2 with at least 8 * max_order points,
/// max_order >= 2 and tol >= 0. Order k passes iff its scaled minimum is at
/// least -tol * 2^k.
///
/// Admissible steps satisfy (h / T)^k >= min(1e-8, (4k)^{-k}), independent
/// of tol, so verdicts are monotone in tol and covariant under scaling phi.
MonotonicityReport analyze(const UniformSamples& samples, double horizon, int max_order, double tol);

struct SampledSolution {
    UniformSamples samples;
    double sigma = 0.0;
};

struct Comparison {
    double max_abs = 0.0;
    /// sqrt(step * sum of squared differences)
    double l2 = 0.0;
    double sigma_rel_diff = 0.0;
};

/// InvalidArgument unless both grids coincide.
Comparison compare(const SampledSolution& a, const SampledSolution& b);

}  // namespace fredholm
