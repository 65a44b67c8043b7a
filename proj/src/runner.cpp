#include "fredholm/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "fredholm/discrete.hpp"
#include "fredholm/errors.hpp"
#include "fredholm/expo_closed_form.hpp"
#include "fredholm/quadrature.hpp"
#include "fredholm/special_closed_forms.hpp"

namespace fredholm {

using nlohmann::json;

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Composite Gauss-Legendre with panels graded geometrically into boundary
// layers of width ~ 1 / rate at both ends.
double integrate_profile(const std::function<double(double)>& f, double T, double rate, std::vector<double> breaks) {
    rate = std::max(rate, 1.0 / T);
    const double layer = std::min(0.5 * T, 40.0 / rate);
    for (double x = layer; x > 1e-3 / rate; x *= 0.5) {
        breaks.push_back(x);
        breaks.push_back(T - x);
    }
    return quad::piecewise_gauss(f, 0.0, T, breaks, std::max(T / 16.0, layer), 30);
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

json report_json(const MonotonicityReport& r) {
    json orders = json::array();
    for (const OrderResult& o : r.diff_orders)
        orders.push_back({{"order", o.order},
                          {"min_scaled", o.min_scaled},
                          {"x", o.x_at_min},
                          {"h", o.h_at_min},
                          {"windows", o.windows},
                          {"threshold", o.threshold},
                          {"passed", o.passed}});
    return {{"tol", r.tol},
            {"max_order", r.max_order},
            {"symmetry_err", r.symmetry_err},
            {"min_value", r.min_value},
            {"convexity_defect", r.convexity_defect},
            {"diff_orders", orders},
            {"verdicts",
             {{"symmetric", r.symmetric},
              {"nonnegative", r.nonnegative},
              {"convex", r.convex},
              {"totally_monotone", r.totally_monotone}}}};
}

json check(double value, double threshold, bool passed) {
    return {{"value", value}, {"threshold", threshold}, {"passed", passed}};
}

json error_json(const std::string& message, const json& detail) { return {{"error", message}, {"detail", detail}}; }

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open config file '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InvalidArgument("config file '" + path + "' is not valid JSON: " + e.what());
    }
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write output file '" + path + "'");
    out << text;
    if (!out) throw InvalidArgument("failed writing output file '" + path + "'");
}

struct Overrides {
    std::string out;
    std::string format;
    int cells = 0;
    int max_order = 0;
};

json apply_overrides(json config, const Overrides& o) {
    if (!config.is_object()) throw InvalidArgument("config must be a JSON object");
    if (o.cells > 0) config["cells"] = o.cells;
    if (o.max_order > 0) config["diagnostics"]["max_order"] = o.max_order;
    if (!o.out.empty()) config["output"]["path"] = o.out;
    if (!o.format.empty()) config["output"]["format"] = o.format;
    return config;
}

// Runs one solve and writes its artifacts; returns the summary.
json solve_and_write(const RunConfig& config) {
    const Solved solved = solve_config(config);
    json summary = summarize(config, solved);
    if (!config.output.path.empty()) {
        if (config.output.format == "csv") {
            std::ostringstream csv;
            write_csv(csv, config, solved);
            write_text(config.output.path, csv.str());
            std::filesystem::path side(config.output.path);
            side.replace_extension(".summary.json");
            write_text(side.string(), summary.dump(2) + "\n");
        } else {
            json doc = summary;
            json t = json::array(), phi = json::array();
            for (std::size_t k = 0; k < solved.samples.values.size(); ++k) {
                t.push_back(solved.samples.at(k));
                phi.push_back(solved.samples.values[k]);
            }
            doc["t"] = t;
            doc["phi"] = phi;
            write_text(config.output.path, doc.dump(2) + "\n");
        }
    }
    return summary;
}

}  // namespace

Solved solve_config(const RunConfig& config) {
    Solved s;
    s.method = resolve_method(config);
    s.horizon = config.horizon;
    s.gamma = config.gamma;
    const double T = config.horizon;
    double tol_default = 0.0;

    switch (s.method) {
        case Method::Discrete: {
            auto sol = std::make_shared<SolutionGrid>(solve({config.gamma, T, config.kernel}, config.cells));
            s.phi = [sol](double t) { return sol->sample(t); };
            s.samples = samples_of(*sol);
            s.sigma = sol->sigma;
            s.energy = sol->energy;
            s.residual_max = sol->residual_max;
            s.mass = sol->mass();
            s.symmetry_err = sol->symmetry_error();
            tol_default = 10.0 * sol->residual_max / config.gamma;
            break;
        }
        case Method::ExpClosedForm: {
            auto cf = std::make_shared<ExpClosedForm>(build_closed_form(config.kernel, config.gamma, T));
            s.phi = [cf](double t) { return eval_closed_form(*cf, t); };
            s.sigma = cf->sigma;
            s.energy = closed_form_energy(*cf);
            s.residual_max = closed_form_residual(*cf, 200);
            s.mass = integrate_profile(s.phi, T, *std::max_element(cf->sqrt_c.begin(), cf->sqrt_c.end()), {});
            break;
        }
        case Method::CappedLinear: {
            auto sol = std::make_shared<CappedLinearSolution>(capped_linear_solve_horizon(T, config.gamma));
            s.phi = [sol](double t) { return eval_capped_linear(*sol, t); };
            s.sigma = sol->sigma;
            s.energy = capped_linear_energy(*sol);
            s.residual_max = capped_linear_residual(*sol, 500);
            std::vector<double> joints;
            for (int k = 1; k < sol->n; ++k) joints.push_back(k);
            s.mass = integrate_profile(s.phi, T, *std::max_element(sol->b_vec.begin(), sol->b_vec.end()), joints);
            break;
        }
        case Method::Trig: {
            auto sol = std::make_shared<TrigSolution>(trig_solve(std::get<Trigonometric>(config.kernel.family()).rho,
                                                                 config.gamma, T));
            s.phi = [sol](double t) { return eval_trig(*sol, t); };
            s.sigma = sol->sigma;
            s.energy = trig_energy(*sol);
            s.residual_max = trig_residual(*sol, 500);
            s.mass = integrate_profile(s.phi, T, sol->rho, {});
            break;
        }
        case Method::Auto: throw InvalidArgument("method could not be resolved");
    }

    if (s.method != Method::Discrete) {
        s.samples = sample_function(s.phi, T, config.samples);
        tol_default = 1e-7 * max_abs(s.samples.values);
    }
    const double tol = config.diagnostics.tol.value_or(tol_default);
    s.report = analyze(s.samples, T, config.diagnostics.max_order, tol);
    if (s.method != Method::Discrete) s.symmetry_err = s.report.symmetry_err;
    return s;
}

json summarize(const RunConfig& config, const Solved& s) {
    const bool discrete = s.method == Method::Discrete;
    const double tol = s.report.tol;
    json checks = json::object();
    for (const std::string& name : config.checks) {
        if (name == "constraint") {
            const double v = std::abs(s.mass - 1.0);
            checks[name] = check(v, 1e-12, v <= 1e-12);
        } else if (name == "symmetry") {
            const double limit = discrete ? 1e-7 : 1e-9;
            checks[name] = check(s.symmetry_err, limit, s.symmetry_err <= limit);
        } else if (name == "sigma_energy") {
            const double v = std::abs(s.sigma - 2.0 * s.energy) / std::abs(s.sigma);
            checks[name] = check(v, 1e-9, s.sigma > 0.0 && v <= 1e-9);
        } else if (name == "residual") {
            const double limit = (discrete ? 1e-3 : 1e-7) * s.sigma;
            checks[name] = check(s.residual_max, limit, s.residual_max <= limit);
        } else if (name == "nonnegative") {
            checks[name] = check(s.report.min_value, -tol, s.report.nonnegative);
        } else if (name == "convex") {
            checks[name] = check(s.report.convexity_defect, -tol, s.report.convex);
        } else if (name == "stm") {
            double worst = std::numeric_limits<double>::infinity();
            for (const OrderResult& o : s.report.diff_orders) worst = std::min(worst, o.min_scaled / std::pow(2.0, o.order));
            checks[name] = check(worst, -tol, s.report.totally_monotone);
        }
    }
    bool ok = true;
    for (const auto& item : checks.items()) ok = ok && item.value()["passed"].get<bool>();
    json out = {{"method", method_name(s.method)},
                {"kernel", config.kernel_spec},
                {"gamma", config.gamma},
                {"horizon", config.horizon},
                {"sigma", s.sigma},
                {"energy", s.energy},
                {"residual_max", s.residual_max},
                {"mass", s.mass},
                {"symmetry_err", s.symmetry_err},
                {"monotonicity", report_json(s.report)},
                {"checks", checks},
                {"ok", ok}};
    if (discrete) out["cells"] = config.cells;
    return out;
}

void write_csv(std::ostream& out, const RunConfig& config, const Solved& s) {
    out << "# kernel: " << config.kernel_spec.dump() << "\n";
    out << "# method: " << method_name(s.method) << "\n";
    out << "# gamma: " << fmt(config.gamma) << "\n";
    out << "# horizon: " << fmt(config.horizon) << "\n";
    out << "# sigma: " << fmt(s.sigma) << "\n";
    out << "# energy: " << fmt(s.energy) << "\n";
    out << "t,phi\n";
    for (std::size_t k = 0; k < s.samples.values.size(); ++k)
        out << fmt(s.samples.at(k)) << "," << fmt(s.samples.values[k]) << "\n";
}

json compare_configs(const RunConfig& a, const RunConfig& b, int grid_points) {
    if (grid_points < 2) throw InvalidArgument("grid points must be at least 2", {{"grid_points", double(grid_points)}});
    if (a.horizon != b.horizon)
        throw InvalidArgument("compare needs equal horizons", {{"horizon_a", a.horizon}, {"horizon_b", b.horizon}});
    const Solved sa = solve_config(a);
    const Solved sb = solve_config(b);
    const double T = a.horizon;
    auto resample = [&](const Solved& s) {
        SampledSolution out{{0.5 * T / grid_points, T / grid_points, {}}, s.sigma};
        for (int k = 0; k < grid_points; ++k) out.samples.values.push_back(s.phi(out.samples.at(k)));
        return out;
    };
    const Comparison c = compare(resample(sa), resample(sb));
    return {{"method_a", method_name(sa.method)},
            {"method_b", method_name(sb.method)},
            {"grid_points", grid_points},
            {"max_abs", c.max_abs},
            {"l2", c.l2},
            {"sigma_rel_diff", c.sigma_rel_diff}};
}

json sweep_config(const RunConfig& config) {
    if (config.gammas.empty()) throw InvalidArgument("sweep needs a nonempty 'gammas' list");
    if (config.method != Method::Auto && config.method != Method::Discrete)
        throw InvalidArgument("sweep runs the discrete solver; method must be discrete or auto");
    const auto grids = gamma_sweep({config.gamma, config.horizon, config.kernel}, config.cells, config.gammas);
    json entries = json::array();
    bool ok = true;
    bool growing = true;
    for (std::size_t i = 0; i < grids.size(); ++i) {
        const SolutionGrid& g = grids[i];
        const double rel = std::abs(g.sigma - 2.0 * g.energy) / std::abs(g.sigma);
        const bool entry_ok = g.sigma > 0.0 && rel <= 1e-9 && std::abs(g.mass() - 1.0) <= 1e-12;
        ok = ok && entry_ok;
        if (i > 0 && endpoint_mass(g) < endpoint_mass(grids[i - 1])) growing = false;
        entries.push_back({{"gamma", g.gamma},
                           {"sigma", g.sigma},
                           {"energy", g.energy},
                           {"residual_max", g.residual_max},
                           {"endpoint_mass", endpoint_mass(g)},
                           {"sigma_energy_rel", rel},
                           {"ok", entry_ok}});
    }
    return {{"kernel", config.kernel_spec},
            {"horizon", config.horizon},
            {"cells", config.cells},
            {"entries", entries},
            {"endpoint_mass_nondecreasing", growing},
            {"ok", ok}};
}

json verify_config(const RunConfig& config) {
    const StepReport report = verify_step_identities(config.kernel, config.gamma, config.horizon);
    json certs = json::array();
    for (const Certificate& c : report.certificates)
        certs.push_back({{"name", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"passed", c.passed}});
    return {{"kernel", config.kernel_spec}, {"certificates", certs}, {"ok", report.all_passed()}};
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Constrained minimizers of quadratic energies with displacement kernels"};
    app.require_subcommand(1);
    Overrides ov;
    std::vector<std::string> configs;
    int grid_points = 1024;

    auto common = [&](CLI::App* sub, bool many) {
        auto* opt = sub->add_option("--config", configs, "JSON config file")->required();
        if (!many) opt->expected(1);
        sub->add_option("--out", ov.out, "output path");
        sub->add_option("--format", ov.format, "output format")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--cells", ov.cells, "discrete resolution")->check(CLI::Range(2, 1 << 20));
        sub->add_option("--max-order", ov.max_order, "highest difference order")->check(CLI::Range(2, 64));
    };
    auto* solve_cmd = app.add_subcommand("solve", "solve one config or a batch (JSON array)");
    common(solve_cmd, false);
    auto* compare_cmd = app.add_subcommand("compare", "compare two configs on a common grid");
    common(compare_cmd, true);
    compare_cmd->add_option("--grid-points", grid_points, "common grid size")->check(CLI::Range(2, 1 << 22));
    auto* sweep_cmd = app.add_subcommand("sweep", "discrete solves over a decreasing gamma list");
    common(sweep_cmd, false);
    auto* verify_cmd = app.add_subcommand("verify", "certify the closed-form matrix identities");
    common(verify_cmd, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << error_json(e.what(), {{"code", "usage"}}).dump() << "\n";
        return 2;
    }

    try {
        json result;
        if (*compare_cmd) {
            if (configs.size() != 2) throw InvalidArgument("compare needs exactly two --config files");
            const RunConfig a = parse_config(apply_overrides(read_json_file(configs[0]), ov));
            const RunConfig b = parse_config(apply_overrides(read_json_file(configs[1]), ov));
            result = compare_configs(a, b, grid_points);
            if (!ov.out.empty()) write_text(ov.out, result.dump(2) + "\n");
            out << result.dump(2) << "\n";
            return 0;
        }
        const json doc = read_json_file(configs.front());
        if (*solve_cmd && doc.is_array()) {
            if (!ov.out.empty()) throw InvalidArgument("--out cannot be combined with a batch config");
            json results = json::array();
            bool ok = true;
            for (const json& entry : doc) {
                const json summary = solve_and_write(parse_config(apply_overrides(entry, ov)));
                ok = ok && summary["ok"].get<bool>();
                results.push_back(summary);
            }
            result = {{"results", results}, {"ok", ok}};
            out << result.dump(2) << "\n";
            return ok ? 0 : 1;
        }
        if (*solve_cmd) {
            result = solve_and_write(parse_config(apply_overrides(doc, ov)));
        } else {
            Overrides local = ov;
            local.out.clear();
            const RunConfig config = parse_config(apply_overrides(doc, local));
            result = *sweep_cmd ? sweep_config(config) : verify_config(config);
            if (!ov.out.empty()) write_text(ov.out, result.dump(2) + "\n");
        }
        out << result.dump(2) << "\n";
        return result["ok"].get<bool>() ? 0 : 1;
    } catch (const Error& e) {
        json detail = json::object();
        detail["code"] = e.code();
        for (const auto& [k, v] : e.detail()) detail[k] = v;
        err << error_json(e.what(), detail).dump() << "\n";
    } catch (const json::exception& e) {
        err << error_json(std::string("malformed config: ") + e.what(), {{"code", "invalid_argument"}}).dump() << "\n";
    } catch (const std::exception& e) {
        err << error_json(e.what(), {{"code", "internal"}}).dump() << "\n";
    }
    return 2;
}

}  // namespace fredholm
