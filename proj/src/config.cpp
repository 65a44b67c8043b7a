#include "fredholm/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "fredholm/errors.hpp"

namespace fredholm {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& item : obj.items())
        if (!allowed.count(item.key())) throw InvalidArgument(where + ": unknown key '" + item.key() + "'");
}

const json& field(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) throw InvalidArgument(where + ": missing '" + key + "'");
    return obj.at(key);
}

double number(const json& value, const std::string& what) {
    if (!value.is_number()) throw InvalidArgument(what + " must be a number");
    return value.get<double>();
}

int integer(const json& value, const std::string& what) {
    if (!value.is_number_integer()) throw InvalidArgument(what + " must be an integer");
    return value.get<int>();
}

std::vector<double> numbers(const json& value, const std::string& what) {
    if (!value.is_array()) throw InvalidArgument(what + " must be an array of numbers");
    std::vector<double> out;
    for (const json& v : value) out.push_back(number(v, what));
    return out;
}

Method parse_method(const std::string& name) {
    if (name == "discrete") return Method::Discrete;
    if (name == "exp_closed_form") return Method::ExpClosedForm;
    if (name == "capped_linear") return Method::CappedLinear;
    if (name == "trig") return Method::Trig;
    if (name == "auto") return Method::Auto;
    throw InvalidArgument("unknown method '" + name + "'");
}

bool integer_horizon(double horizon) { return horizon == std::round(horizon) && horizon >= 1.0 && horizon <= 1e6; }

bool unit_cap(const Kernel& kernel) {
    const auto* c = std::get_if<CappedLinear>(&kernel.family());
    return c && c->cap == 1.0;
}

}  // namespace

const std::vector<std::string>& known_checks() {
    static const std::vector<std::string> names{"constraint", "symmetry", "sigma_energy", "residual",
                                                "nonnegative", "convex", "stm"};
    return names;
}

std::string method_name(Method method) {
    switch (method) {
        case Method::Discrete: return "discrete";
        case Method::ExpClosedForm: return "exp_closed_form";
        case Method::CappedLinear: return "capped_linear";
        case Method::Trig: return "trig";
        case Method::Auto: return "auto";
    }
    return "auto";
}

Kernel parse_kernel(const json& spec) {
    if (!spec.is_object()) throw InvalidArgument("kernel must be an object");
    const std::string type = field(spec, "type", "kernel").get<std::string>();
    if (type == "exponential_sum") {
        reject_unknown(spec, {"type", "a", "b"}, "kernel");
        return Kernel::exponential_sum(numbers(field(spec, "a", "kernel"), "kernel.a"),
                                       numbers(field(spec, "b", "kernel"), "kernel.b"));
    }
    if (type == "capped_linear") {
        reject_unknown(spec, {"type", "cap"}, "kernel");
        return Kernel::capped_linear(spec.contains("cap") ? number(spec["cap"], "kernel.cap") : 1.0);
    }
    if (type == "power_capped") {
        reject_unknown(spec, {"type", "rho", "p"}, "kernel");
        return Kernel::power_capped(number(field(spec, "rho", "kernel"), "kernel.rho"),
                                    integer(field(spec, "p", "kernel"), "kernel.p"));
    }
    if (type == "trigonometric") {
        reject_unknown(spec, {"type", "rho"}, "kernel");
        return Kernel::trigonometric(number(field(spec, "rho", "kernel"), "kernel.rho"));
    }
    if (type == "power_law") {
        reject_unknown(spec, {"type", "alpha", "scale"}, "kernel");
        return Kernel::power_law(number(field(spec, "alpha", "kernel"), "kernel.alpha"),
                                 spec.contains("scale") ? number(spec["scale"], "kernel.scale") : 1.0);
    }
    if (type == "tabulated") {
        reject_unknown(spec, {"type", "t", "g"}, "kernel");
        return Kernel::tabulated(numbers(field(spec, "t", "kernel"), "kernel.t"),
                                 numbers(field(spec, "g", "kernel"), "kernel.g"));
    }
    throw InvalidArgument("unknown kernel type '" + type + "'");
}

RunConfig parse_config(const json& config) {
    if (!config.is_object()) throw InvalidArgument("config must be a JSON object");
    reject_unknown(config,
                   {"kernel", "gamma", "horizon", "method", "cells", "samples", "diagnostics", "output", "gammas", "checks"},
                   "config");
    RunConfig rc;
    rc.kernel_spec = field(config, "kernel", "config");
    rc.kernel = parse_kernel(rc.kernel_spec);
    rc.gamma = number(field(config, "gamma", "config"), "gamma");
    rc.horizon = number(field(config, "horizon", "config"), "horizon");
    if (!(std::isfinite(rc.gamma) && rc.gamma > 0.0)) throw InvalidArgument("gamma must be positive", {{"gamma", rc.gamma}});
    if (!(std::isfinite(rc.horizon) && rc.horizon > 0.0))
        throw InvalidArgument("horizon must be positive", {{"horizon", rc.horizon}});
    if (config.contains("method")) {
        if (!config["method"].is_string()) throw InvalidArgument("method must be a string");
        rc.method = parse_method(config["method"].get<std::string>());
    }
    if (config.contains("cells")) rc.cells = integer(config["cells"], "cells");
    if (rc.cells < 2) throw InvalidArgument("cells must be at least 2", {{"cells", double(rc.cells)}});
    if (config.contains("samples")) rc.samples = integer(config["samples"], "samples");
    if (config.contains("diagnostics")) {
        const json& d = config["diagnostics"];
        if (!d.is_object()) throw InvalidArgument("diagnostics must be an object");
        reject_unknown(d, {"max_order", "tol"}, "diagnostics");
        if (d.contains("max_order")) rc.diagnostics.max_order = integer(d["max_order"], "diagnostics.max_order");
        if (d.contains("tol")) rc.diagnostics.tol = number(d["tol"], "diagnostics.tol");
    }
    if (rc.diagnostics.max_order < 2)
        throw InvalidArgument("diagnostics.max_order must be at least 2", {{"max_order", double(rc.diagnostics.max_order)}});
    if (rc.diagnostics.tol && !(*rc.diagnostics.tol >= 0.0)) throw InvalidArgument("diagnostics.tol must be nonnegative");
    if (rc.samples < 8 * rc.diagnostics.max_order)
        throw InvalidArgument("samples too few for diagnostics.max_order",
                              {{"samples", double(rc.samples)}, {"minimum", 8.0 * rc.diagnostics.max_order}});
    if (config.contains("output")) {
        const json& o = config["output"];
        if (!o.is_object()) throw InvalidArgument("output must be an object");
        reject_unknown(o, {"path", "format"}, "output");
        if (o.contains("path")) rc.output.path = o["path"].get<std::string>();
        if (o.contains("format")) rc.output.format = o["format"].get<std::string>();
    }
    if (rc.output.format != "csv" && rc.output.format != "json")
        throw InvalidArgument("output.format must be csv or json");
    if (config.contains("gammas")) rc.gammas = numbers(config["gammas"], "gammas");
    if (config.contains("checks")) {
        const json& c = config["checks"];
        if (!c.is_array()) throw InvalidArgument("checks must be an array of names");
        for (const json& name : c) {
            const std::string s = name.get<std::string>();
            const auto& known = known_checks();
            if (std::find(known.begin(), known.end(), s) == known.end()) throw InvalidArgument("unknown check '" + s + "'");
            rc.checks.push_back(s);
        }
    } else {
        rc.checks.assign(known_checks().begin(), known_checks().begin() + 4);
    }

    const auto& family = rc.kernel.family();
    switch (rc.method) {
        case Method::ExpClosedForm:
            if (!std::holds_alternative<ExponentialSum>(family))
                throw InvalidArgument("method exp_closed_form requires an exponential_sum kernel");
            break;
        case Method::CappedLinear:
            if (!unit_cap(rc.kernel)) throw InvalidArgument("method capped_linear requires a capped_linear kernel with cap 1");
            if (!integer_horizon(rc.horizon))
                throw InvalidArgument("method capped_linear requires an integer horizon", {{"horizon", rc.horizon}});
            break;
        case Method::Trig:
            if (!std::holds_alternative<Trigonometric>(family))
                throw InvalidArgument("method trig requires a trigonometric kernel");
            break;
        default: break;
    }
    return rc;
}

Method resolve_method(const RunConfig& config) {
    if (config.method != Method::Auto) return config.method;
    const auto& family = config.kernel.family();
    if (std::holds_alternative<ExponentialSum>(family)) return Method::ExpClosedForm;
    if (unit_cap(config.kernel) && integer_horizon(config.horizon)) return Method::CappedLinear;
    if (std::holds_alternative<Trigonometric>(family)) return Method::Trig;
    return Method::Discrete;
}

}  // namespace fredholm
