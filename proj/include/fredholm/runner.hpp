#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>

#include "json.hpp"

#include "fredholm/config.hpp"
#include "fredholm/diagnostics.hpp"

namespace fredholm {

/// A solved configuration, independent of the method that produced it.
struct Solved {
    Method method = Method::Discrete;
    double horizon = 0.0;
    double gamma = 0.0;
    /// phi on [0, T]; closed forms evaluate exactly, discrete solutions
    /// interpolate through cell midpoints.
    std::function<double(double)> phi;
    /// Output grid: cell midpoints for discrete, `samples` endpoints otherwise.
    UniformSamples samples;
    double sigma = 0.0;
    double energy = 0.0;
    double residual_max = 0.0;
    double mass = 0.0;
    double symmetry_err = 0.0;
    MonotonicityReport report;
};

Solved solve_config(const RunConfig& config);

/// Summary object; `ok` is true iff every requested check passed.
nlohmann::json summarize(const RunConfig& config, const Solved& solved);

/// Two-column CSV (t, phi) with a '#' metadata header, 17 significant digits.
void write_csv(std::ostream& out, const RunConfig& config, const Solved& solved);

/// Resamples both configs at `grid_points` cell midpoints of the common horizon.
nlohmann::json compare_configs(const RunConfig& a, const RunConfig& b, int grid_points);

nlohmann::json sweep_config(const RunConfig& config);

nlohmann::json verify_config(const RunConfig& config);

/// Command line entry point. Exit status: 0 when every requested check
/// passes, 1 when a check fails, 2 on invalid input or a solver error (the
/// error is written to `err` as {"error": ..., "detail": {...}}).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fredholm
