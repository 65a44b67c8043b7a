#include "fredholm/special_closed_forms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fredholm/errors.hpp"
#include "fredholm/quadrature.hpp"

namespace fredholm {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void require_positive(double value, const char* what) {
    if (!(std::isfinite(value) && value > 0.0))
        throw InvalidArgument(std::string(what) + " must be positive", {{what, value}});
}

double jsign(int i) { return i % 2 == 0 ? 1.0 : -1.0; }  // 0-based (-1)^{i+1}

// Panel width that keeps exp(b s) well resolved by a 20 point rule.
double capped_panel(const CappedLinearSolution& sol) {
    const double fastest = *std::max_element(sol.b_vec.begin(), sol.b_vec.end());
    return std::min(1.0, 8.0 / fastest);
}

double trig_shape_denominator(const TrigSolution& s) {
    return s.rho * (2.0 * s.gamma + s.horizon) + std::sin(s.rho * s.horizon);
}

}  // namespace

CappedLinearSolution capped_linear_solve(int n, double gamma) {
    if (n < 1) throw InvalidArgument("capped linear closed form needs n >= 1", {{"n", double(n)}});
    require_positive(gamma, "gamma");
    CappedLinearSolution sol;
    sol.n = n;
    sol.gamma = gamma;
    sol.lambda_vec.resize(n);
    sol.b_vec.resize(n);
    for (int i = 0; i < n; ++i) {
        sol.lambda_vec[i] = 2.0 * (1.0 - std::cos((i + 1) * std::numbers::pi / (n + 1)));
        sol.b_vec[i] = std::sqrt(sol.lambda_vec[i] / gamma);
    }
    sol.q.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) sol.q(i, j) = std::sin((i + 1) * (j + 1) * std::numbers::pi / (n + 1));

    // K = I + (delta_{j, n-i}) in 1-based indices.
    MatrixXd K = MatrixXd::Identity(n, n);
    for (int i = 1; i < n; ++i) K(i - 1, n - i - 1) += 1.0;

    // S E(1)^{-1} with S = gamma Q (E(1) + J) + K Q ((E(1) - I)(J - I) + B (E(1) - J)) B^{-2}.
    VectorXd first(n), second(n);
    for (int i = 0; i < n; ++i) {
        const double b = sol.b_vec[i];
        const double em = std::exp(-b);
        const double j = jsign(i);
        first(i) = 1.0 + j * em;
        second(i) = ((1.0 - em) * (j - 1.0) + b * (1.0 - j * em)) / (b * b);
    }
    const MatrixXd system = gamma * sol.q * first.asDiagonal() + K * sol.q * second.asDiagonal();
    Eigen::PartialPivLU<MatrixXd> lu(system);
    const double rcond = lu.rcond();
    if (!(rcond >= 1e-14)) throw IllConditioned("capped linear system ill-conditioned", rcond);
    VectorXd scaled = lu.solve(VectorXd::Ones(n));

    // int_0^n phi = 1' Q diag((1 - e^{-b}) / b) (I + J) E(1) a.
    double mass = 0.0;
    for (int i = 0; i < n; ++i) {
        const double b = sol.b_vec[i];
        mass += sol.q.col(i).sum() * (-std::expm1(-b) / b) * (1.0 + jsign(i)) * scaled(i);
    }
    if (!(mass > 0.0)) throw IllConditioned("capped linear solution has nonpositive mass", mass);
    scaled /= mass;
    sol.sigma = 1.0 / mass;
    sol.scaled_a.assign(scaled.data(), scaled.data() + n);
    sol.a_vec.resize(n);
    for (int i = 0; i < n; ++i) sol.a_vec[i] = scaled(i) * std::exp(-sol.b_vec[i]);
    return sol;
}

CappedLinearSolution capped_linear_solve_horizon(double horizon, double gamma) {
    require_positive(horizon, "horizon");
    if (horizon != std::round(horizon) || horizon > 1e6)
        throw InvalidArgument("capped linear closed form needs an integer horizon", {{"horizon", horizon}});
    return capped_linear_solve(static_cast<int>(horizon), gamma);
}

double eval_capped_linear(const CappedLinearSolution& sol, double t) {
    if (!(t >= 0.0 && t <= sol.n)) throw DomainError("capped linear solution evaluated outside [0, n]", {{"t", t}});
    const int seg = std::min(static_cast<int>(std::floor(t)), sol.n - 1);
    const double s = t - seg;
    double sum = 0.0;
    for (int j = 0; j < sol.n; ++j) {
        const double b = sol.b_vec[j];
        sum += sol.q(seg, j) * (std::exp(b * (s - 1.0)) + jsign(j) * std::exp(-b * s)) * sol.scaled_a[j];
    }
    return sum;
}

double capped_linear_convolution(const CappedLinearSolution& sol, double t) {
    if (!(t >= 0.0 && t <= sol.n)) throw DomainError("capped linear solution evaluated outside [0, n]", {{"t", t}});
    const double lo = std::max(0.0, t - 1.0);
    const double hi = std::min<double>(sol.n, t + 1.0);
    std::vector<double> breaks{t};
    for (int k = static_cast<int>(std::ceil(lo)); k <= static_cast<int>(std::floor(hi)); ++k) breaks.push_back(k);
    auto integrand = [&](double s) { return (1.0 - std::abs(t - s)) * eval_capped_linear(sol, s); };
    return quad::piecewise_gauss(integrand, lo, hi, breaks, capped_panel(sol), 20);
}

double capped_linear_residual(const CappedLinearSolution& sol, int samples) {
    if (samples < 2) throw InvalidArgument("residual needs at least two samples");
    double worst = 0.0;
    for (int k = 0; k < samples; ++k) {
        const double t = static_cast<double>(sol.n) * k / (samples - 1);
        const double r = sol.gamma * eval_capped_linear(sol, t) + capped_linear_convolution(sol, t) - sol.sigma;
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

double capped_linear_energy(const CappedLinearSolution& sol) {
    std::vector<double> breaks;
    for (int k = 1; k < sol.n; ++k) breaks.push_back(k);
    auto integrand = [&](double t) {
        const double phi = eval_capped_linear(sol, t);
        return 0.5 * sol.gamma * phi * phi + 0.5 * phi * capped_linear_convolution(sol, t);
    };
    return quad::piecewise_gauss(integrand, 0.0, sol.n, breaks, capped_panel(sol), 20);
}

TrigSolution trig_solve(double rho, double gamma, double horizon) {
    require_positive(rho, "rho");
    require_positive(gamma, "gamma");
    require_positive(horizon, "horizon");
    const double half = 0.5 * rho * horizon;
    const double k = std::round(half / std::numbers::pi - 0.5);
    const double pole = (k + 0.5) * std::numbers::pi;
    if (std::abs(half - pole) <= 1e-8 * std::max(1.0, half))
        throw Error("trig_pole", "trig solution singular at rho T / 2 = pi / 2 + k pi",
                    {{"rho_T_half", half}, {"pole", pole}});
    TrigSolution sol{rho, gamma, horizon, 0.0};
    // int phi = (sigma / gamma) (T - 4 tan(rho T / 2) sin(rho T) / (rho D)).
    const double D = trig_shape_denominator(sol);
    const double shape_mass = horizon - 4.0 * std::tan(half) * std::sin(rho * horizon) / (rho * D);
    if (!(shape_mass > 0.0)) throw Error("trig_mass", "trig solution has nonpositive mass", {{"mass", shape_mass}});
    sol.sigma = gamma / shape_mass;
    return sol;
}

double eval_trig(const TrigSolution& sol, double t) {
    if (!(t >= 0.0 && t <= sol.horizon)) throw DomainError("trig solution evaluated outside [0, T]", {{"t", t}});
    const double r = sol.rho;
    const double bump = std::cos(r * t) + std::cos(r * (sol.horizon - t));
    return sol.sigma / sol.gamma *
           (1.0 - 2.0 * std::tan(0.5 * r * sol.horizon) * bump / trig_shape_denominator(sol));
}

double trig_convolution(const TrigSolution& sol, double t) {
    if (!(t >= 0.0 && t <= sol.horizon)) throw DomainError("trig solution evaluated outside [0, T]", {{"t", t}});
    const double r = sol.rho;
    const double T = sol.horizon;
    // int_0^T cos(r (t - s)) ds and int_0^T cos(r (t - s)) cos(r s) ds.
    auto flat = [&](double x) { return (std::sin(r * x) + std::sin(r * (T - x))) / r; };
    auto echo = [&](double x) {
        return 0.5 * (T * std::cos(r * x) + (std::sin(r * x) + std::sin(r * (2.0 * T - x))) / (2.0 * r));
    };
    const double c = 2.0 * std::tan(0.5 * r * T) / trig_shape_denominator(sol);
    return sol.sigma / sol.gamma * (flat(t) - c * (echo(t) + echo(T - t)));
}

double trig_residual(const TrigSolution& sol, int samples) {
    if (samples < 2) throw InvalidArgument("residual needs at least two samples");
    double worst = 0.0;
    for (int k = 0; k < samples; ++k) {
        const double t = sol.horizon * k / (samples - 1);
        const double r = sol.gamma * eval_trig(sol, t) + trig_convolution(sol, t) - sol.sigma;
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

double trig_energy(const TrigSolution& sol) {
    auto integrand = [&](double t) {
        const double phi = eval_trig(sol, t);
        return 0.5 * sol.gamma * phi * phi + 0.5 * phi * trig_convolution(sol, t);
    };
    const double panel = std::min(sol.horizon, 1.0 / sol.rho);
    return quad::piecewise_gauss(integrand, 0.0, sol.horizon, {}, panel, 20);
}

}  // namespace fredholm
