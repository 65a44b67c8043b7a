#pragma once

#include <string>
#include <variant>
#include <vector>

namespace fredholm {

/// Closed interval [lo, hi] on the time axis.
struct Interval {
    double lo;
    double hi;
    double length() const { return hi - lo; }
};

/// G(t) = sum_k weights[k] * exp(-sqrt(rates_sq[k]) * t).
struct ExponentialSum {
    std::vector<double> weights;   // a_k > 0
    std::vector<double> rates_sq;  // b_k, strictly increasing, b_1 > 0
};

/// G(t) = (cap - t)^+.
struct CappedLinear {
    double cap = 1.0;
};

/// G(t) = ((1 - rho t)^+)^power.
struct PowerCapped {
    double rho = 1.0;
    int power = 1;
};

/// G(t) = cos(rho t). Of positive type but neither monotone nor convex.
struct Trigonometric {
    double rho = 1.0;
};

/// G(t) = scale * t^(-alpha), weakly singular at the origin.
struct PowerLaw {
    double alpha = 0.5;
    double scale = 1.0;
};

enum class Interpolation { Linear, LogLinear };

/// Kernel sampled at abscissae starting at 0. Interpolated log-linearly when
/// every value is positive, linearly otherwise; held constant past the last
/// abscissa.
struct Tabulated {
    std::vector<double> abscissae;
    std::vector<double> values;
    Interpolation interpolation = Interpolation::Linear;
};

/// Structural facts about a kernel. For the analytic families these are known
/// exactly; for tables they are finite-difference evidence at `tolerance`.
struct StructureFlags {
    bool nonincreasing = false;
    bool convex = false;
    bool completely_monotone = false;
    bool positive_type_known = false;
    /// Largest n for which the kernel is known to be n-monotone; -1 when
    /// completely monotone, 0 when no claim is made.
    int monotone_order = 0;
    double tolerance = 0.0;
};

/// A displacement kernel G acting through G(|t - s|).
///
/// Kernels are immutable once built; every member function is const and
/// reentrant. Construct through the named factories, which validate the
/// family invariants and throw InvalidArgument otherwise.
class Kernel {
public:
    using Family =
        std::variant<ExponentialSum, CappedLinear, PowerCapped, Trigonometric, PowerLaw, Tabulated>;

    static Kernel exponential_sum(std::vector<double> weights, std::vector<double> rates_sq);
    static Kernel capped_linear(double cap = 1.0);
    static Kernel power_capped(double rho, int power);
    static Kernel trigonometric(double rho);
    static Kernel power_law(double alpha, double scale = 1.0);
    static Kernel tabulated(std::vector<double> abscissae, std::vector<double> values);

    const Family& family() const { return family_; }
    std::string name() const;

    /// G(t) for t >= 0. PowerLaw at t = 0 is a DomainError.
    double operator()(double t) const;
    double evaluate(double t) const { return (*this)(t); }

    /// Integral of G(|t - s|) over the rectangle x × y (t in x, s in y).
    double cell_double_integral(Interval x, Interval y) const;

    /// Integral of G(|t - s|) ds over s in y, for a fixed t.
    double cell_integral(double t, Interval y) const;

    /// Integral of G(|u|) w(u) du over [lo, hi] where w is affine with
    /// w(lo) = w_lo and w(hi) = w_hi. Any sign of lo, hi is allowed.
    double weighted_integral(double lo, double hi, double w_lo, double w_hi) const;

    StructureFlags classify(double tolerance = 1e-12) const;

    /// Points on (0, inf) where G or one of its derivatives jumps.
    std::vector<double> breakpoints() const;

    /// True if G is smooth across t = 0 when extended evenly (cos only).
    bool even_smooth() const;

private:
    explicit Kernel(Family family) : family_(std::move(family)) {}

    // Integral of G(u) (w0 + slope (u - lo)) over [lo, hi], 0 <= lo < hi, with
    // no breakpoint strictly inside.
    double smooth_piece(double lo, double hi, double w0, double slope) const;

    Family family_;
};

}  // namespace fredholm
