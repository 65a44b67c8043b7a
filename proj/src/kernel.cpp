#include "fredholm/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "fredholm/errors.hpp"
#include "fredholm/quadrature.hpp"

namespace fredholm {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

// 1 - e^{-x}(1 + x), accurate for small x.
double one_minus_exp_poly(double x) {
    if (x < 0.1) {
        double term = x * x / 2.0;
        double sum = 0.0;
        for (int n = 2; n < 16; ++n) {
            sum += (n % 2 == 0 ? 1.0 : -1.0) * (n - 1) * term;
            term *= x / (n + 1);
        }
        return sum;
    }
    return -std::expm1(-x) - x * std::exp(-x);
}

// Integral over [0, L] of v^j e^{i theta v} for j = 0, 1.
std::pair<std::complex<double>, std::complex<double>> oscillatory_moments(double theta, double L) {
    using namespace std::complex_literals;
    if (theta * L < 0.5) {
        std::complex<double> m0 = 0.0;
        std::complex<double> m1 = 0.0;
        std::complex<double> pw = 1.0;  // (i theta L)^n / n!
        for (int n = 0; n < 24; ++n) {
            m0 += pw * L / double(n + 1);
            m1 += pw * L * L / double(n + 2);
            pw *= 1i * theta * L / double(n + 1);
        }
        return {m0, m1};
    }
    const std::complex<double> e = std::exp(1i * theta * L);
    const std::complex<double> m0 = (e - 1.0) / (1i * theta);
    const std::complex<double> m1 = L * e / (1i * theta) + (e - 1.0) / (theta * theta);
    return {m0, m1};
}

std::vector<double> divided_differences_min_sign(const std::vector<double>& x,
                                                 const std::vector<double>& y, int order) {
    // Returns, for k = 1..order, min over i of (-1)^k f[x_i, ..., x_{i+k}].
    std::vector<double> result;
    std::vector<double> dd = y;
    for (int k = 1; k <= order && static_cast<std::size_t>(k) < x.size(); ++k) {
        std::vector<double> next(dd.size() - 1);
        double worst = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < dd.size(); ++i) {
            next[i] = (dd[i + 1] - dd[i]) / (x[i + k] - x[i]);
            worst = std::min(worst, (k % 2 == 0 ? 1.0 : -1.0) * next[i]);
        }
        result.push_back(worst);
        dd = std::move(next);
    }
    return result;
}

}  // namespace

Kernel Kernel::exponential_sum(std::vector<double> weights, std::vector<double> rates_sq) {
    if (weights.empty()) throw InvalidArgument("exponential_sum needs at least one term");
    if (weights.size() != rates_sq.size())
        throw InvalidArgument("exponential_sum: a and b must have equal length");
    for (std::size_t k = 0; k < weights.size(); ++k) {
        if (!finite_positive(weights[k]))
            throw InvalidArgument("exponential_sum: weights must be positive", {{"index", double(k)}});
        if (!finite_positive(rates_sq[k]))
            throw InvalidArgument("exponential_sum: rates must be positive", {{"index", double(k)}});
        if (k > 0 && !(rates_sq[k] > rates_sq[k - 1]))
            throw InvalidArgument("exponential_sum: b must be strictly increasing", {{"index", double(k)}});
    }
    return Kernel(ExponentialSum{std::move(weights), std::move(rates_sq)});
}

Kernel Kernel::capped_linear(double cap) {
    if (!finite_positive(cap)) throw InvalidArgument("capped_linear: cap must be positive");
    return Kernel(CappedLinear{cap});
}

Kernel Kernel::power_capped(double rho, int power) {
    if (!finite_positive(rho)) throw InvalidArgument("power_capped: rho must be positive");
    if (power < 1 || power > 100) throw InvalidArgument("power_capped: p must be in 1..100");
    return Kernel(PowerCapped{rho, power});
}

Kernel Kernel::trigonometric(double rho) {
    if (!finite_positive(rho)) throw InvalidArgument("trigonometric: rho must be positive");
    return Kernel(Trigonometric{rho});
}

Kernel Kernel::power_law(double alpha, double scale) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("power_law: alpha must lie in (0, 1)");
    if (!finite_positive(scale)) throw InvalidArgument("power_law: scale must be positive");
    return Kernel(PowerLaw{alpha, scale});
}

Kernel Kernel::tabulated(std::vector<double> abscissae, std::vector<double> values) {
    if (abscissae.size() < 2) throw InvalidArgument("tabulated: need at least two points");
    if (abscissae.size() != values.size())
        throw InvalidArgument("tabulated: abscissae and values must have equal length");
    if (abscissae.front() != 0.0) throw InvalidArgument("tabulated: first abscissa must be 0");
    bool all_positive = true;
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (!std::isfinite(abscissae[k]) || !std::isfinite(values[k]))
            throw InvalidArgument("tabulated: non-finite entry", {{"index", double(k)}});
        if (values[k] < 0.0)
            throw InvalidArgument("tabulated: values must be nonnegative", {{"index", double(k)}});
        if (k > 0 && !(abscissae[k] > abscissae[k - 1]))
            throw InvalidArgument("tabulated: abscissae must be strictly increasing", {{"index", double(k)}});
        all_positive = all_positive && values[k] > 0.0;
    }
    const auto rule = all_positive ? Interpolation::LogLinear : Interpolation::Linear;
    return Kernel(Tabulated{std::move(abscissae), std::move(values), rule});
}

std::string Kernel::name() const {
    return std::visit(overloaded{
                          [](const ExponentialSum&) { return std::string("exponential_sum"); },
                          [](const CappedLinear&) { return std::string("capped_linear"); },
                          [](const PowerCapped&) { return std::string("power_capped"); },
                          [](const Trigonometric&) { return std::string("trigonometric"); },
                          [](const PowerLaw&) { return std::string("power_law"); },
                          [](const Tabulated&) { return std::string("tabulated"); },
                      },
                      family_);
}

double Kernel::operator()(double t) const {
    if (!(t >= 0.0)) throw DomainError("kernel evaluated at negative or NaN lag", {{"t", t}});
    return std::visit(
        overloaded{
            [t](const ExponentialSum& k) {
                double sum = 0.0;
                for (std::size_t i = 0; i < k.weights.size(); ++i)
                    sum += k.weights[i] * std::exp(-std::sqrt(k.rates_sq[i]) * t);
                return sum;
            },
            [t](const CappedLinear& k) { return std::max(k.cap - t, 0.0); },
            [t](const PowerCapped& k) { return std::pow(std::max(1.0 - k.rho * t, 0.0), k.power); },
            [t](const Trigonometric& k) { return std::cos(k.rho * t); },
            [t](const PowerLaw& k) -> double {
                if (t == 0.0) throw DomainError("power_law kernel is infinite at t = 0", {{"t", t}});
                return k.scale * std::pow(t, -k.alpha);
            },
            [t](const Tabulated& k) {
                const auto& x = k.abscissae;
                const auto& y = k.values;
                if (t >= x.back()) return y.back();
                const auto it = std::upper_bound(x.begin(), x.end(), t);
                const std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
                const double s = (t - x[i]) / (x[i + 1] - x[i]);
                if (k.interpolation == Interpolation::LogLinear)
                    return y[i] * std::pow(y[i + 1] / y[i], s);
                return y[i] + s * (y[i + 1] - y[i]);
            },
        },
        family_);
}

std::vector<double> Kernel::breakpoints() const {
    return std::visit(overloaded{
                          [](const CappedLinear& k) { return std::vector<double>{k.cap}; },
                          [](const PowerCapped& k) { return std::vector<double>{1.0 / k.rho}; },
                          [](const Tabulated& k) {
                              return std::vector<double>(k.abscissae.begin() + 1, k.abscissae.end());
                          },
                          [](const auto&) { return std::vector<double>{}; },
                      },
                      family_);
}

bool Kernel::even_smooth() const { return std::holds_alternative<Trigonometric>(family_); }

double Kernel::smooth_piece(double lo, double hi, double w0, double slope) const {
    const double L = hi - lo;
    return std::visit(
        overloaded{
            [&](const ExponentialSum& k) {
                double sum = 0.0;
                for (std::size_t i = 0; i < k.weights.size(); ++i) {
                    const double kappa = std::sqrt(k.rates_sq[i]);
                    const double x = kappa * L;
                    const double e0 = -std::expm1(-x) / kappa;
                    const double e1 = one_minus_exp_poly(x) / (kappa * kappa);
                    sum += k.weights[i] * std::exp(-kappa * lo) * (w0 * e0 + slope * e1);
                }
                return sum;
            },
            [&](const CappedLinear& k) {
                if (lo >= k.cap) return 0.0;
                return quad::gauss([&](double u) { return (k.cap - u) * (w0 + slope * (u - lo)); }, lo, hi, 2);
            },
            [&](const PowerCapped& k) {
                if (lo * k.rho >= 1.0) return 0.0;
                const int order = k.power / 2 + 2;
                return quad::gauss(
                    [&](double u) { return std::pow(1.0 - k.rho * u, k.power) * (w0 + slope * (u - lo)); },
                    lo, hi, order);
            },
            [&](const Trigonometric& k) {
                using namespace std::complex_literals;
                const auto [m0, m1] = oscillatory_moments(k.rho, L);
                return std::real(std::exp(1i * (k.rho * lo)) * (w0 * m0 + slope * m1));
            },
            [&](const PowerLaw& k) {
                const double a = k.alpha;
                if (lo == 0.0)
                    return k.scale * (w0 * std::pow(L, 1.0 - a) / (1.0 - a) +
                                      slope * std::pow(L, 2.0 - a) / (2.0 - a));
                if (L >= 0.25 * lo) {
                    const double p0 = (std::pow(hi, 1.0 - a) - std::pow(lo, 1.0 - a)) / (1.0 - a);
                    const double p1 = (std::pow(hi, 2.0 - a) - std::pow(lo, 2.0 - a)) / (2.0 - a);
                    return k.scale * ((w0 - slope * lo) * p0 + slope * p1);
                }
                // Far from the singularity the integrand is analytic on a disc
                // of radius lo around the piece; 16 nodes reach full precision.
                return quad::gauss(
                    [&](double u) { return k.scale * std::pow(u, -a) * (w0 + slope * (u - lo)); }, lo, hi, 16);
            },
            [&](const Tabulated& k) {
                const auto integrand = [&](double u) { return (*this)(u) * (w0 + slope * (u - lo)); };
                // Linear pieces give a quadratic integrand.
                if (k.interpolation == Interpolation::Linear) return quad::gauss(integrand, lo, hi, 2);
                return quad::adaptive(integrand, lo, hi);
            },
        },
        family_);
}

double Kernel::weighted_integral(double lo, double hi, double w_lo, double w_hi) const {
    if (!(hi > lo)) return 0.0;
    const double slope = (w_hi - w_lo) / (hi - lo);
    const auto weight = [&](double u) { return w_lo + slope * (u - lo); };

    // Pieces on the nonnegative axis as (a, b, w(a), w(b)) in the folded variable.
    struct Piece {
        double a, b, wa, wb;
    };
    std::vector<Piece> pieces;
    if (lo < 0.0) {
        const double top = std::min(hi, 0.0);
        // u in [lo, top] maps to v = -u in [-top, -lo].
        pieces.push_back({-top, -lo, top == hi ? w_hi : weight(0.0), w_lo});
    }
    if (hi > 0.0) {
        const double bottom = std::max(lo, 0.0);
        pieces.push_back({bottom, hi, bottom == lo ? w_lo : weight(0.0), w_hi});
    }

    const std::vector<double> breaks = breakpoints();
    double total = 0.0;
    for (const Piece& p : pieces) {
        if (!(p.b > p.a)) continue;
        const double s = (p.wb - p.wa) / (p.b - p.a);
        double a = p.a;
        double wa = p.wa;
        for (double br : breaks) {
            if (br > a && br < p.b) {
                const double wbr = p.wa + s * (br - p.a);
                total += smooth_piece(a, br, wa, s);
                a = br;
                wa = wbr;
            }
        }
        total += smooth_piece(a, p.b, wa, s);
    }
    return total;
}

double Kernel::cell_double_integral(Interval x, Interval y) const {
    if (!(x.hi > x.lo) || !(y.hi > y.lo)) throw InvalidArgument("cell_double_integral: empty rectangle");
    // With u = s - t the integrand depends on u only; the measure of
    // {(t, s) in x × y : s - t = u} is a trapezoid in u.
    const double u1 = y.lo - x.hi;
    const double u4 = y.hi - x.lo;
    const double c1 = y.lo - x.lo;
    const double c2 = y.hi - x.hi;
    const double u2 = std::min(c1, c2);
    const double u3 = std::max(c1, c2);
    const double top = std::min(x.length(), y.length());
    return weighted_integral(u1, u2, 0.0, top) + weighted_integral(u2, u3, top, top) +
           weighted_integral(u3, u4, top, 0.0);
}

double Kernel::cell_integral(double t, Interval y) const {
    if (!(y.hi > y.lo)) throw InvalidArgument("cell_integral: empty interval");
    return weighted_integral(y.lo - t, y.hi - t, 1.0, 1.0);
}

StructureFlags Kernel::classify(double tolerance) const {
    StructureFlags f;
    f.tolerance = tolerance;
    std::visit(overloaded{
                   [&](const ExponentialSum&) {
                       f = {true, true, true, true, -1, tolerance};
                   },
                   [&](const PowerLaw&) { f = {true, true, true, true, -1, tolerance}; },
                   [&](const CappedLinear&) { f = {true, true, false, true, 2, tolerance}; },
                   [&](const PowerCapped& k) { f = {true, true, false, true, k.power + 1, tolerance}; },
                   [&](const Trigonometric&) { f = {false, false, false, true, 0, tolerance}; },
                   [&](const Tabulated& k) {
                       const auto& x = k.abscissae;
                       const auto& y = k.values;
                       const auto signs = divided_differences_min_sign(x, y, 4);
                       f.nonincreasing = !signs.empty() && signs[0] >= -tolerance;
                       // Convexity of the interpolant itself, including the flat tail.
                       bool convex = f.nonincreasing;
                       double prev = -std::numeric_limits<double>::infinity();
                       for (std::size_t i = 0; i + 1 < x.size(); ++i) {
                           const double dx = x[i + 1] - x[i];
                           const double rate = k.interpolation == Interpolation::LogLinear
                                                   ? std::log(y[i + 1] / y[i]) / dx
                                                   : (y[i + 1] - y[i]) / dx;
                           if (rate < prev - tolerance) convex = false;
                           prev = rate;
                       }
                       f.convex = convex;
                       f.completely_monotone = false;
                       f.positive_type_known = f.nonincreasing && f.convex;
                       int order = 0;
                       for (double s : signs) {
                           if (s < -tolerance) break;
                           ++order;
                       }
                       f.monotone_order = order;
                   },
               },
               family_);
    return f;
}

}  // namespace fredholm
