#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "fredholm/kernel.hpp"

namespace fredholm {

enum class Method { Discrete, ExpClosedForm, CappedLinear, Trig, Auto };

struct DiagnosticsConfig {
    int max_order = 6;
    /// Absolute tolerance; when unset a method dependent default is used.
    std::optional<double> tol;
};

struct OutputConfig {
    std::string path;
    std::string format = "csv";
};

/// One run as described by a JSON config object:
///
///   {
///     "kernel": {"type": "exponential_sum", "a": [1], "b": [1]},
///     "gamma": 1, "horizon": 1,
///     "method": "auto",                  // discrete | exp_closed_form | capped_linear | trig | auto
///     "cells": 1024,                     // discrete resolution
///     "samples": 1001,                   // closed-form output points
///     "diagnostics": {"max_order": 6, "tol": 1e-7},
///     "output": {"path": "out.csv", "format": "csv"},
///     "gammas": [1, 0.1, 0.01],          // sweep only
///     "checks": ["constraint", "symmetry", "sigma_energy", "residual"]
///   }
///
/// Kernel objects by type: exponential_sum {a, b}; capped_linear {cap};
/// power_capped {rho, p}; trigonometric {rho}; power_law {alpha, scale};
/// tabulated {t, g}.
struct RunConfig {
    nlohmann::json kernel_spec;
    Kernel kernel = Kernel::capped_linear(1.0);
    double gamma = 0.0;
    double horizon = 0.0;
    Method method = Method::Auto;
    int cells = 1024;
    int samples = 1001;
    DiagnosticsConfig diagnostics;
    OutputConfig output;
    std::vector<double> gammas;
    std::vector<std::string> checks;
};

/// Checks a config may request; the first four are the default set.
const std::vector<std::string>& known_checks();

std::string method_name(Method method);

Kernel parse_kernel(const nlohmann::json& spec);

/// Throws InvalidArgument on unknown keys, missing fields, wrong types and
/// method/kernel mismatches.
RunConfig parse_config(const nlohmann::json& config);

/// The method actually used: `auto` becomes the closed form matching the
/// kernel when there is one, otherwise discrete.
Method resolve_method(const RunConfig& config);

}  // namespace fredholm
