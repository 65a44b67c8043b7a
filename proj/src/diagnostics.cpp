#include "fredholm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fredholm/errors.hpp"

namespace fredholm {

namespace {

// Steps (in grid units) tried per order; all of them when there are few.
std::vector<long> step_multiples(long lo, long hi) {
    std::vector<long> out;
    if (lo > hi) return out;
    if (hi - lo < 64) {
        for (long j = lo; j <= hi; ++j) out.push_back(j);
        return out;
    }
    const double ratio = std::pow(double(hi) / lo, 1.0 / 63.0);
    double x = lo;
    for (int i = 0; i < 64; ++i, x *= ratio) {
        const long j = std::min(hi, std::lround(x));
        if (out.empty() || j > out.back()) out.push_back(j);
    }
    if (out.back() != hi) out.push_back(hi);
    return out;
}

}  // namespace

UniformSamples sample_function(const std::function<double(double)>& f, double horizon, int points) {
    if (!(horizon > 0.0)) throw InvalidArgument("horizon must be positive", {{"horizon", horizon}});
    if (points < 2) throw InvalidArgument("need at least two sample points", {{"points", double(points)}});
    UniformSamples s;
    s.start = 0.0;
    s.step = horizon / (points - 1);
    s.values.resize(points);
    for (int k = 0; k < points; ++k) s.values[k] = f(k + 1 == points ? horizon : k * s.step);
    return s;
}

UniformSamples samples_of(const SolutionGrid& solution) {
    return {0.5 * solution.step(), solution.step(), solution.values};
}

MonotonicityReport analyze(const UniformSamples& samples, double horizon, int max_order, double tol) {
    if (max_order < 2) throw InvalidArgument("max_order must be at least 2", {{"max_order", double(max_order)}});
    if (!(tol >= 0.0)) throw InvalidArgument("tol must be nonnegative", {{"tol", tol}});
    if (!(horizon > 0.0)) throw InvalidArgument("horizon must be positive", {{"horizon", horizon}});
    const auto N = static_cast<long>(samples.values.size());
    if (N < 8L * max_order)
        throw InvalidArgument("grid too coarse for the requested order",
                              {{"points", double(N)}, {"minimum_points", 8.0 * max_order}});
    const double last = samples.at(N - 1);
    const double slack = 1e-9 * horizon;
    if (!(samples.step > 0.0) || std::abs(samples.start + last - horizon) > slack || samples.start < -slack)
        throw InvalidArgument("grid is not symmetric about T/2",
                              {{"start", samples.start}, {"last", last}, {"horizon", horizon}});

    const std::vector<double>& v = samples.values;
    MonotonicityReport r;
    r.tol = tol;
    r.max_order = max_order;

    for (long k = 0; k < N / 2; ++k) r.symmetry_err = std::max(r.symmetry_err, std::abs(v[k] - v[N - 1 - k]));
    r.min_value = *std::min_element(v.begin(), v.end());

    const double unit = samples.step / horizon;
    r.convexity_defect = std::numeric_limits<double>::infinity();
    for (long k = 1; k + 1 < N; ++k)
        r.convexity_defect = std::min(r.convexity_defect, (v[k - 1] - 2.0 * v[k] + v[k + 1]) / (unit * unit));

    // First index strictly right of the centre.
    long first = 0;
    while (first < N && samples.at(first) <= 0.5 * horizon + slack) ++first;

    // Order k uses steps j >= jmin[k] (grid units) with windows inside (T/2, T).
    std::vector<long> jmin(max_order + 1), jmax(max_order + 1);
    std::vector<long> steps;
    for (int k = 1; k <= max_order; ++k) {
        const double floor = std::min(1e-8, std::pow(4.0 * k, -double(k)));
        jmin[k] = std::max(1L, static_cast<long>(std::ceil(std::pow(floor, 1.0 / k) / unit - 1e-9)));
        jmax[k] = (N - 1 - first) / k;
        for (long j : step_multiples(jmin[k], jmax[k])) steps.push_back(j);
    }
    std::sort(steps.begin(), steps.end());
    steps.erase(std::unique(steps.begin(), steps.end()), steps.end());

    r.diff_orders.resize(max_order);
    for (int k = 1; k <= max_order; ++k) {
        OrderResult& o = r.diff_orders[k - 1];
        o.order = k;
        o.threshold = -tol * std::pow(2.0, k);
        o.min_scaled = std::numeric_limits<double>::infinity();
    }
    // Iterated first differences: exact zeros on constant data.
    std::vector<double> diff;
    for (long j : steps) {
        diff.assign(v.begin() + first, v.end());
        for (int k = 1; k <= max_order; ++k) {
            const long count = static_cast<long>(diff.size()) - j;
            if (count <= 0) break;
            for (long i = 0; i < count; ++i) diff[i] = diff[i + j] - diff[i];
            diff.resize(count);
            if (j < jmin[k] || j > jmax[k]) continue;
            OrderResult& o = r.diff_orders[k - 1];
            const double scale = std::pow(j * unit, k);
            for (long i = 0; i < count; ++i) {
                if (!(samples.at(first + i + k * j) < horizon - slack)) break;
                ++o.windows;
                const double scaled = diff[i] / scale;
                if (scaled < o.min_scaled) {
                    o.min_scaled = scaled;
                    o.x_at_min = samples.at(first + i);
                    o.h_at_min = j * samples.step;
                }
            }
        }
    }
    for (OrderResult& o : r.diff_orders) o.passed = o.windows > 0 && o.min_scaled >= o.threshold;

    r.symmetric = r.symmetry_err <= tol;
    r.nonnegative = r.min_value >= -tol;
    r.convex = r.convexity_defect >= -tol;
    r.totally_monotone = r.symmetric && r.nonnegative &&
                         std::all_of(r.diff_orders.begin(), r.diff_orders.end(), [](const OrderResult& o) { return o.passed; });
    return r;
}

Comparison compare(const SampledSolution& a, const SampledSolution& b) {
    const UniformSamples& x = a.samples;
    const UniformSamples& y = b.samples;
    const double scale = std::max({std::abs(x.step), std::abs(y.step), 1e-300}) * std::max<std::size_t>(x.values.size(), 1);
    if (x.values.size() != y.values.size() || x.values.empty() || std::abs(x.start - y.start) > 1e-12 * scale ||
        std::abs(x.step - y.step) > 1e-12 * std::abs(x.step))
        throw InvalidArgument("compare needs identical grids",
                              {{"points_a", double(x.values.size())}, {"points_b", double(y.values.size())},
                               {"step_a", x.step}, {"step_b", y.step}});
    Comparison c;
    double sq = 0.0;
    for (std::size_t k = 0; k < x.values.size(); ++k) {
        const double d = std::abs(x.values[k] - y.values[k]);
        c.max_abs = std::max(c.max_abs, d);
        sq += d * d;
    }
    c.l2 = std::sqrt(x.step * sq);
    const double denom = std::max(std::abs(a.sigma), std::abs(b.sigma));
    c.sigma_rel_diff = denom > 0.0 ? std::abs(a.sigma - b.sigma) / denom : 0.0;
    return c;
}

}  // namespace fredholm
