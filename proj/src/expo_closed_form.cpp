#include "fredholm/expo_closed_form.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fredholm/errors.hpp"
#include "fredholm/quadrature.hpp"

namespace fredholm {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// (exp(-x) - exp(-y)) / (y - x) for x, y >= 0, stable as y -> x.
double exp_divided_difference(double x, double y) {
    const double lo = std::min(x, y);
    const double gap = std::abs(y - x);
    if (gap == 0.0) return std::exp(-lo);
    return std::exp(-lo) * (-std::expm1(-gap)) / gap;
}

// (exp(k t) + exp(k (T - t))) / (exp(k T) - 1) without overflow.
double basis(double k, double T, double t) {
    const double near = std::min(t, T - t);
    return std::exp(-k * near) * (1.0 + std::exp(-k * std::abs(T - 2.0 * t))) / (-std::expm1(-k * T));
}

// int_0^T exp(-beta |t - s|) exp(kappa (s - T)) ds.
double conv_rising(double beta, double kappa, double T, double t) {
    const double left = (std::exp(-kappa * (T - t)) - std::exp(-beta * t - kappa * T)) / (beta + kappa);
    const double right = (T - t) * exp_divided_difference(beta * (T - t), kappa * (T - t));
    return left + right;
}

// int_0^T exp(-beta |t - s|) ds.
double conv_constant(double beta, double T, double t) {
    return (-std::expm1(-beta * t) - std::expm1(-beta * (T - t))) / beta;
}

const ExponentialSum& require_exponential(const Kernel& kernel) {
    const auto* exp = std::get_if<ExponentialSum>(&kernel.family());
    if (!exp) throw InvalidArgument("closed form requires an exponential-sum kernel");
    return *exp;
}

void require_positive(double value, const char* what) {
    if (!(std::isfinite(value) && value > 0.0)) throw InvalidArgument(std::string(what) + " must be positive", {{what, value}});
}

struct Assembled {
    SecularSpectrum spectrum;
    CauchyFactors cauchy;
    MatrixXd ntilde;
    VectorXd sqrt_c;
    VectorXd coth;  // diagonal of E(T)
};

Assembled assemble(const Kernel& kernel, double gamma, double horizon) {
    const ExponentialSum& exp = require_exponential(kernel);
    require_positive(gamma, "gamma");
    require_positive(horizon, "horizon");
    Assembled out;
    out.spectrum = secular_roots(exp.weights, exp.rates_sq, 1.0 / gamma);
    out.cauchy = cauchy_factors(out.spectrum);
    const std::size_t n = out.spectrum.size();
    out.sqrt_c.resize(n);
    out.coth.resize(n);
    VectorXd sqrt_b(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.sqrt_c(i) = std::sqrt(out.spectrum.c[i]);
        sqrt_b(i) = std::sqrt(out.spectrum.b[i]);
        out.coth(i) = 1.0 / std::tanh(0.5 * out.sqrt_c(i) * horizon);
    }
    // Ntilde = A^{-1} (Q C^{1/2} + B^{1/2} Q E(T)) with Q = A B^{1/2} Qtilde.
    out.ntilde = sqrt_b.asDiagonal() * out.cauchy.qtilde * out.sqrt_c.asDiagonal();
    out.ntilde += sqrt_b.cwiseAbs2().asDiagonal() * out.cauchy.qtilde * out.coth.asDiagonal();
    return out;
}

}  // namespace

bool StepReport::all_passed() const {
    return std::all_of(certificates.begin(), certificates.end(), [](const Certificate& c) { return c.passed; });
}

SecularSpectrum secular_roots(std::span<const double> a, std::span<const double> b, double lambda) {
    if (a.empty() || a.size() != b.size()) throw InvalidArgument("secular_roots: a and b must be nonempty and equal length");
    require_positive(lambda, "lambda");
    for (std::size_t k = 0; k < a.size(); ++k) {
        require_positive(a[k], "a");
        require_positive(b[k], "b");
        if (k > 0 && !(b[k] > b[k - 1])) throw InvalidArgument("secular_roots: b must be strictly increasing");
    }
    const std::size_t n = a.size();
    SecularSpectrum s;
    s.a.assign(a.begin(), a.end());
    s.b.assign(b.begin(), b.end());
    s.lambda = lambda;
    s.c.resize(n);
    s.offset.resize(n);

    std::vector<double> weight(n);
    for (std::size_t k = 0; k < n; ++k) weight[k] = 2.0 * lambda * a[k] * std::sqrt(b[k]);
    const double total = std::accumulate(weight.begin(), weight.end(), 0.0);

    for (std::size_t k = 0; k < n; ++k) {
        // f and f' in the shifted variable delta = x - b_k.
        auto f = [&](double delta) {
            double sum = 0.0;
            for (std::size_t l = 0; l < n; ++l) sum += weight[l] / (delta + (b[k] - b[l]));
            return 1.0 - sum;
        };
        auto df = [&](double delta) {
            double sum = 0.0;
            for (std::size_t l = 0; l < n; ++l) {
                const double g = delta + (b[k] - b[l]);
                sum += weight[l] / (g * g);
            }
            return sum;
        };
        double lo = 0.0;
        double hi = (k + 1 < n) ? b[k + 1] - b[k] : total;
        if (k + 1 == n && f(hi) == 0.0) {
            s.offset[k] = hi;
            s.c[k] = b[k] + hi;
            continue;
        }
        for (int iter = 0; iter < 60; ++iter) {
            const double mid = 0.5 * (lo + hi);
            (f(mid) < 0.0 ? lo : hi) = mid;
        }
        double delta = 0.5 * (lo + hi);
        for (int iter = 0; iter < 100; ++iter) {
            const double value = f(delta);
            if (value == 0.0) break;
            (value < 0.0 ? lo : hi) = delta;
            double next = delta - value / df(delta);
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            const double step = std::abs(next - delta);
            delta = next;
            if (step <= 1e-16 * delta) break;
        }
        s.offset[k] = delta;
        s.c[k] = b[k] + delta;
    }
    return s;
}

CauchyFactors cauchy_factors(const SecularSpectrum& s) {
    const std::size_t n = s.size();
    CauchyFactors f;
    f.qtilde.resize(n, n);
    f.d1.resize(n);
    f.d2.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) f.qtilde(i, j) = 1.0 / s.gap(j, i);
    for (std::size_t i = 0; i < n; ++i) {
        double p1 = s.offset[i];
        double p2 = s.offset[i];
        for (std::size_t l = 0; l < n; ++l) {
            if (l == i) continue;
            const double cc = (s.b[i] - s.b[l]) + (s.offset[i] - s.offset[l]);  // c_i - c_l
            p1 *= s.gap(i, l) / cc;
            p2 *= -s.gap(l, i) / (s.b[i] - s.b[l]);  // (b_i - c_l) / (b_i - b_l)
        }
        f.d1(i) = p1;
        f.d2(i) = p2;
    }
    return f;
}

ExpClosedForm build_closed_form(const Kernel& kernel, double gamma, double horizon) {
    Assembled as = assemble(kernel, gamma, horizon);
    const std::size_t n = as.spectrum.size();

    Eigen::PartialPivLU<MatrixXd> lu(as.ntilde);
    const double rcond = lu.rcond();
    if (!(rcond >= 1e-14)) throw IllConditioned("closed-form system ill-conditioned", rcond);
    const VectorXd w = lu.solve(VectorXd::Ones(n));

    ExpClosedForm cf;
    cf.gamma = gamma;
    cf.horizon = horizon;
    double inv_sqrt_sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) inv_sqrt_sum += as.spectrum.a[k] / std::sqrt(as.spectrum.b[k]);
    cf.d = 1.0 / (1.0 + 2.0 * as.spectrum.lambda * inv_sqrt_sum);
    cf.sqrt_c.assign(as.sqrt_c.data(), as.sqrt_c.data() + n);
    cf.w.resize(n);
    cf.z.resize(n);
    double mass = horizon;
    for (std::size_t i = 0; i < n; ++i) {
        const double scale = std::expm1(cf.sqrt_c[i] * horizon);
        double z = w(i) / scale;
        if (z < -1e-12)
            throw Error("closed_form_sign", "closed-form coefficient is negative",
                        {{"index", double(i)}, {"z", z}, {"threshold", -1e-12}});
        double wi = w(i);
        if (z < 0.0) {
            z = 0.0;
            wi = 0.0;
        }
        cf.z[i] = z;
        cf.w[i] = wi;
        mass += 2.0 * wi / cf.sqrt_c[i];
    }
    cf.spectrum = std::move(as.spectrum);
    // With sigma = gamma, int phi = d (T + sum 2 w_i / sqrt(c_i)).
    cf.normalization = 1.0 / (cf.d * mass);
    cf.sigma = gamma * cf.normalization;
    return cf;
}

double eval_closed_form(const ExpClosedForm& cf, double t) {
    if (!(t >= 0.0 && t <= cf.horizon)) throw DomainError("closed form evaluated outside [0, T]", {{"t", t}});
    double sum = 1.0;
    for (std::size_t i = 0; i < cf.w.size(); ++i)
        if (cf.w[i] != 0.0) sum += cf.w[i] * basis(cf.sqrt_c[i], cf.horizon, t);
    return cf.normalization * cf.d * sum;
}

double closed_form_convolution(const ExpClosedForm& cf, double t) {
    if (!(t >= 0.0 && t <= cf.horizon)) throw DomainError("closed form evaluated outside [0, T]", {{"t", t}});
    const double T = cf.horizon;
    const SecularSpectrum& s = cf.spectrum;
    double total = 0.0;
    for (std::size_t k = 0; k < s.a.size(); ++k) {
        const double beta = std::sqrt(s.b[k]);
        double term = conv_constant(beta, T, t);
        for (std::size_t i = 0; i < cf.w.size(); ++i) {
            if (cf.w[i] == 0.0) continue;
            const double kappa = cf.sqrt_c[i];
            const double pair = conv_rising(beta, kappa, T, t) + conv_rising(beta, kappa, T, T - t);
            term += cf.w[i] * pair / (-std::expm1(-kappa * T));
        }
        total += s.a[k] * term;
    }
    return cf.normalization * cf.d * total;
}

double closed_form_residual(const ExpClosedForm& cf, int samples) {
    if (samples < 2) throw InvalidArgument("residual needs at least two samples");
    double worst = 0.0;
    for (int k = 0; k < samples; ++k) {
        const double t = cf.horizon * k / (samples - 1);
        const double r = cf.gamma * eval_closed_form(cf, t) + closed_form_convolution(cf, t) - cf.sigma;
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

double closed_form_energy(const ExpClosedForm& cf) {
    const double T = cf.horizon;
    double fastest = 1.0 / T;
    for (double k : cf.sqrt_c) fastest = std::max(fastest, k);
    // Boundary layers have width ~ 1 / sqrt(c_max); grade the panels into them.
    const double layer = std::min(0.5 * T, 40.0 / fastest);
    std::vector<double> breaks;
    for (double x = layer; x > 1e-3 / fastest; x *= 0.5) {
        breaks.push_back(x);
        breaks.push_back(T - x);
    }
    auto integrand = [&](double t) {
        const double phi = eval_closed_form(cf, t);
        return 0.5 * cf.gamma * phi * phi + 0.5 * phi * closed_form_convolution(cf, t);
    };
    return quad::piecewise_gauss(integrand, 0.0, T, breaks, std::max(T / 16.0, layer), 30);
}

StepReport verify_step_identities(const Kernel& kernel, double gamma, double horizon) {
    const Assembled as = assemble(kernel, gamma, horizon);
    const SecularSpectrum& s = as.spectrum;
    const CauchyFactors& f = as.cauchy;
    const auto n = static_cast<Eigen::Index>(s.size());
    const MatrixXd I = MatrixXd::Identity(n, n);
    VectorXd a(n), b(n), c(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        a(i) = s.a[i];
        b(i) = s.b[i];
        c(i) = s.c[i];
    }
    const VectorXd sqrt_b = b.cwiseSqrt();
    StepReport report;
    auto add = [&](std::string name, double value, double threshold) {
        report.certificates.push_back({std::move(name), value, threshold, value <= threshold});
    };

    // Explicit Cauchy inverse.
    const MatrixXd qinv = f.d1.asDiagonal() * f.qtilde.transpose() * f.d2.asDiagonal();
    add("cauchy_inverse", (f.qtilde * qinv - I).cwiseAbs().maxCoeff(), 1e-10);

    // Column sums of Q = A B^{1/2} Qtilde equal gamma / 2.
    const MatrixXd Q = a.cwiseProduct(sqrt_b).asDiagonal() * f.qtilde;
    const double half_gamma = 0.5 * gamma;
    add("q_column_sums", (Q.colwise().sum().array() - half_gamma).abs().maxCoeff() / half_gamma, 1e-10);

    // Ntilde_2^{-1} is a Z-matrix.
    const MatrixXd n2 = f.qtilde.transpose() * f.d2.asDiagonal() * sqrt_b.cwiseInverse().asDiagonal() * f.qtilde;
    const MatrixXd n2inv = n2.partialPivLu().inverse();
    double off = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (i != j) off = std::max(off, n2inv(i, j));
    if (n == 1) off = 0.0;
    add("n2_inverse_z_matrix", off / n2inv.cwiseAbs().maxCoeff(), 1e-10);

    // (Ntilde_2 + Ntilde_3)^{-1} Ntilde_2 and Ntilde^{-1} 1 are nonnegative.
    const VectorXd n3 = f.d1.cwiseInverse().cwiseProduct(as.coth).cwiseQuotient(as.sqrt_c);
    MatrixXd sum = n2;
    sum.diagonal() += n3;
    const MatrixXd u = sum.partialPivLu().solve(n2);
    add("u_nonnegative", std::max(0.0, -u.minCoeff()), 1e-10);
    const VectorXd w = as.ntilde.partialPivLu().solve(VectorXd::Ones(n));
    add("ntilde_inverse_one_nonnegative", std::max(0.0, -w.minCoeff()), 1e-10);

    // M = Q C Q^{-1}.
    MatrixXd M = b.asDiagonal();
    const VectorXd v = 2.0 * s.lambda * a.cwiseProduct(sqrt_b);
    M += v * VectorXd::Ones(n).transpose();
    const MatrixXd rebuilt = Q * c.asDiagonal() * Q.partialPivLu().inverse();
    add("eigendecomposition", (rebuilt - M).cwiseAbs().maxCoeff() / M.cwiseAbs().maxCoeff(), 1e-9);
    return report;
}

}  // namespace fredholm
