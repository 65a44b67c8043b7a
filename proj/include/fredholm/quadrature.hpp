#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace fredholm::quad {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Rules are computed once per order and cached; valid orders are 1..64.
const Rule& gauss_legendre(int order);

template <class F>
double gauss(F&& f, double lo, double hi, int order = 20) {
    const Rule& rule = gauss_legendre(order);
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return half * sum;
}

/// Composite Gauss-Legendre on [lo, hi], first split at every break point
/// inside the interval, then into panels no longer than max_panel.
template <class F>
double piecewise_gauss(F&& f, double lo, double hi, std::span<const double> breaks,
                       double max_panel, int order = 20) {
    if (!(hi > lo)) return 0.0;
    std::vector<double> cuts{lo};
    for (double b : breaks)
        if (b > lo && b < hi) cuts.push_back(b);
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double a = cuts[k];
        const double b = cuts[k + 1];
        if (!(b > a)) continue;
        const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / max_panel)));
        const double step = (b - a) / panels;
        for (int p = 0; p < panels; ++p) {
            const double pa = a + p * step;
            const double pb = (p + 1 == panels) ? b : pa + step;
            total += gauss(f, pa, pb, order);
        }
    }
    return total;
}

/// Adaptive Gauss-Kronrod (15 point) to relative tolerance `tol`.
double adaptive(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-12);

}  // namespace fredholm::quad
