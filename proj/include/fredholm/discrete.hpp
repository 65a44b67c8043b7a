#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fredholm/kernel.hpp"

namespace fredholm {

/// One minimization instance: minimize
///   (gamma/2) int phi^2 + (1/2) int int G(|t-s|) phi(t) phi(s)
/// over phi on [0, horizon] with int phi = 1.
struct Problem {
    double gamma;
    double horizon;
    Kernel kernel;

    /// Throws InvalidArgument unless gamma > 0 and horizon > 0.
    void validate() const;
};

/// Discretized kernel of the piecewise-constant scheme, indexed by lag:
/// for phi constant on m uniform cells,
///   J[phi] = sum_{i,j} phi_i phi_j G_m(|t_i - t_j|).
/// `diagonal` is G_m(0), `lags[k-1]` is G_m(k h) for k = 1..m-1.
struct DiscreteKernelRow {
    double diagonal = 0.0;
    std::vector<double> lags;
};

/// Quadratic form phi' H phi with linear constraint w' phi = 1.
struct QuadraticForm {
    Eigen::MatrixXd hessian;
    Eigen::VectorXd weights;
    double step = 0.0;
};

/// Piecewise-constant minimizer on the uniform grid t_k = k T / m.
struct SolutionGrid {
    int cells = 0;
    double horizon = 0.0;
    double gamma = 0.0;
    std::vector<double> values;
    double sigma = 0.0;
    double energy = 0.0;
    /// max over cell midpoints of |gamma phi(t) + int G(|t-s|) phi(s) ds - sigma|
    double residual_max = 0.0;

    double step() const { return horizon / cells; }
    double midpoint(int k) const { return (k + 0.5) * step(); }
    /// int phi, i.e. sum of values times the cell width.
    double mass() const;
    /// max_k |phi_k - phi_{m-1-k}|
    double symmetry_error() const;
    /// Linear interpolation through the cell midpoints, extended linearly
    /// over the two outer half cells. DomainError outside [0, T].
    double sample(double t) const;
};

/// G_m at the grid lags. Requires cells >= 1.
DiscreteKernelRow discrete_kernel_row(const Problem& problem, int cells);

/// G_m at an arbitrary lag t >= 0: the cell double integral at lags >= h and
/// linear interpolation between G_m(0) and G_m(h) below.
double discrete_kernel(const Problem& problem, int cells, double t);

/// Toeplitz Hessian H_ij = G_m(|t_i - t_j|) and weights w_k = T / m.
QuadraticForm discretize(const Problem& problem, int cells);

/// Minimizer of phi' H phi subject to w' phi = 1.
///
/// Factorizes H by Cholesky; sigma is the Lagrange multiplier of the
/// constraint, recovered as 2 / (w' H^{-1} w). Throws NotPositiveType when a
/// pivot falls below 1e-13 * max|H|.
SolutionGrid solve(const Problem& problem, int cells);

/// Solves the same problem for each gamma in a strictly decreasing list.
std::vector<SolutionGrid> gamma_sweep(const Problem& problem, int cells, std::span<const double> gammas);

/// Mass carried by the first and last cell together.
double endpoint_mass(const SolutionGrid& solution);

/// phi' H phi for an arbitrary coefficient vector.
double quadratic_energy(const QuadraticForm& form, std::span<const double> values);

}  // namespace fredholm
