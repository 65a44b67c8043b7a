#include "fredholm/discrete.hpp"

#include <algorithm>
#include <cmath>

#include "fredholm/errors.hpp"

namespace fredholm {

void Problem::validate() const {
    if (!(std::isfinite(gamma) && gamma > 0.0))
        throw InvalidArgument("gamma must be positive", {{"gamma", gamma}});
    if (!(std::isfinite(horizon) && horizon > 0.0))
        throw InvalidArgument("horizon must be positive", {{"horizon", horizon}});
}

namespace {

void require_cells(int cells, int minimum) {
    if (cells < minimum)
        throw InvalidArgument("too few cells", {{"cells", double(cells)}, {"minimum", double(minimum)}});
}

// Row of H by lag: entry k is H_{i, i+k}.
std::vector<double> hessian_row(const Problem& problem, int cells) {
    const DiscreteKernelRow row = discrete_kernel_row(problem, cells);
    std::vector<double> out;
    out.reserve(cells);
    out.push_back(row.diagonal);
    out.insert(out.end(), row.lags.begin(), row.lags.end());
    return out;
}

}  // namespace

double SolutionGrid::mass() const {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum * step();
}

double SolutionGrid::symmetry_error() const {
    double worst = 0.0;
    const std::size_t m = values.size();
    for (std::size_t k = 0; k < m / 2; ++k) worst = std::max(worst, std::abs(values[k] - values[m - 1 - k]));
    return worst;
}

double SolutionGrid::sample(double t) const {
    if (!(t >= 0.0 && t <= horizon)) throw DomainError("sample point outside [0, T]", {{"t", t}});
    const double h = step();
    const double x = t / h - 0.5;  // fractional midpoint index
    int k = static_cast<int>(std::floor(x));
    k = std::clamp(k, 0, cells - 2);
    const double s = x - k;
    return values[k] + s * (values[k + 1] - values[k]);
}

DiscreteKernelRow discrete_kernel_row(const Problem& problem, int cells) {
    problem.validate();
    require_cells(cells, 1);
    const double h = problem.horizon / cells;
    const Interval first{0.0, h};
    DiscreteKernelRow row;
    row.diagonal = 0.5 * problem.gamma * h + 0.5 * problem.kernel.cell_double_integral(first, first);
    row.lags.resize(cells - 1);
    for (int k = 1; k < cells; ++k)
        row.lags[k - 1] = 0.5 * problem.kernel.cell_double_integral(first, {k * h, (k + 1) * h});
    return row;
}

double discrete_kernel(const Problem& problem, int cells, double t) {
    problem.validate();
    require_cells(cells, 1);
    if (!(t >= 0.0)) throw DomainError("discrete kernel lag must be nonnegative", {{"t", t}});
    const double h = problem.horizon / cells;
    const Interval first{0.0, h};
    if (t >= h) return 0.5 * problem.kernel.cell_double_integral(first, {t, t + h});
    const double at_zero = 0.5 * problem.gamma * h + 0.5 * problem.kernel.cell_double_integral(first, first);
    const double at_h = 0.5 * problem.kernel.cell_double_integral(first, {h, 2.0 * h});
    return at_zero + (t / h) * (at_h - at_zero);
}

QuadraticForm discretize(const Problem& problem, int cells) {
    require_cells(cells, 2);
    const std::vector<double> row = hessian_row(problem, cells);
    QuadraticForm form;
    form.step = problem.horizon / cells;
    form.hessian.resize(cells, cells);
    for (int j = 0; j < cells; ++j)
        for (int i = 0; i < cells; ++i) form.hessian(i, j) = row[std::abs(i - j)];
    form.weights = Eigen::VectorXd::Constant(cells, form.step);
    return form;
}

double quadratic_energy(const QuadraticForm& form, std::span<const double> values) {
    const Eigen::Map<const Eigen::VectorXd> phi(values.data(), static_cast<Eigen::Index>(values.size()));
    return phi.dot(form.hessian * phi);
}

SolutionGrid solve(const Problem& problem, int cells) {
    problem.validate();
    const QuadraticForm form = discretize(problem, cells);
    const Eigen::MatrixXd& H = form.hessian;
    const double threshold = 1e-13 * H.cwiseAbs().maxCoeff();

    Eigen::LLT<Eigen::MatrixXd> llt(H);
    bool ok = llt.info() == Eigen::Success;
    if (ok) {
        const Eigen::VectorXd pivots = llt.matrixLLT().diagonal().cwiseAbs2();
        ok = pivots.minCoeff() >= threshold;
    }
    if (!ok) {
        // Locate the offending pivot with a symmetric-indefinite factorization.
        Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
        const Eigen::VectorXd d = ldlt.vectorD();
        Eigen::Index where = 0;
        const double smallest = d.minCoeff(&where);
        throw NotPositiveType(static_cast<long>(where), smallest, threshold);
    }

    const Eigen::VectorXd x = llt.solve(form.weights);
    const double wx = form.weights.dot(x);
    if (!(wx > 0.0)) throw NotPositiveType(-1, wx, threshold);
    const Eigen::VectorXd phi = x / wx;

    SolutionGrid sol;
    sol.cells = cells;
    sol.horizon = problem.horizon;
    sol.gamma = problem.gamma;
    sol.values.assign(phi.data(), phi.data() + phi.size());
    sol.sigma = 2.0 / wx;
    sol.energy = phi.dot(H * phi);

    // Residual at midpoints with exact single-cell integrals; the integral of
    // G(|t_i - s|) over cell j depends on |i - j| only.
    const double h = form.step;
    std::vector<double> lag_integral(cells);
    for (int d = 0; d < cells; ++d) lag_integral[d] = problem.kernel.cell_integral(0.5 * h, {d * h, (d + 1) * h});
    double worst = 0.0;
    for (int i = 0; i < cells; ++i) {
        double conv = 0.0;
        for (int j = 0; j < cells; ++j) conv += sol.values[j] * lag_integral[std::abs(i - j)];
        worst = std::max(worst, std::abs(problem.gamma * sol.values[i] + conv - sol.sigma));
    }
    sol.residual_max = worst;
    return sol;
}

std::vector<SolutionGrid> gamma_sweep(const Problem& problem, int cells, std::span<const double> gammas) {
    if (gammas.empty()) throw InvalidArgument("gamma_sweep needs at least one gamma");
    for (std::size_t i = 0; i < gammas.size(); ++i) {
        if (!(gammas[i] > 0.0)) throw InvalidArgument("gamma_sweep: gammas must be positive", {{"index", double(i)}});
        if (i > 0 && !(gammas[i] < gammas[i - 1]))
            throw InvalidArgument("gamma_sweep: gammas must be strictly decreasing", {{"index", double(i)}});
    }
    std::vector<SolutionGrid> out;
    out.reserve(gammas.size());
    for (double g : gammas) {
        Problem p = problem;
        p.gamma = g;
        out.push_back(solve(p, cells));
    }
    return out;
}

double endpoint_mass(const SolutionGrid& solution) {
    return (solution.values.front() + solution.values.back()) * solution.step();
}

}  // namespace fredholm
