#pragma once

#include <vector>

#include <Eigen/Dense>

namespace fredholm {

/// Minimizer for G(t) = (1 - t)^+ on [0, n], n a positive integer.
///
/// On the unit segment [i - 1, i] the solution is row i of
/// Q (E(s) + E(1 - s) J) a with s the local coordinate,
/// Q_ij = sin(i j pi / (n + 1)), E(s) = diag(exp(b_i s)), J = diag((-1)^{i+1}).
struct CappedLinearSolution {
    int n = 0;
    double gamma = 0.0;
    double sigma = 0.0;
    std::vector<double> a_vec;
    std::vector<double> lambda_vec;
    std::vector<double> b_vec;
    /// E(1) a, the coefficients actually used for evaluation (no overflow).
    std::vector<double> scaled_a;
    Eigen::MatrixXd q;
};

/// Minimizer for G(t) = cos(rho t) on [0, T] (not necessarily nonnegative).
struct TrigSolution {
    double rho = 0.0;
    double gamma = 0.0;
    double horizon = 0.0;
    double sigma = 0.0;
};

/// Throws InvalidArgument for n < 1 or gamma <= 0, IllConditioned if the
/// n x n coefficient system is numerically singular.
CappedLinearSolution capped_linear_solve(int n, double gamma);

/// As above for a real horizon; InvalidArgument unless it is a positive integer.
CappedLinearSolution capped_linear_solve_horizon(double horizon, double gamma);

/// DomainError outside [0, n].
double eval_capped_linear(const CappedLinearSolution& sol, double t);

/// int_0^n (1 - |t - s|)^+ phi(s) ds by Gauss-Legendre on the smooth pieces.
double capped_linear_convolution(const CappedLinearSolution& sol, double t);

/// max over `samples` equispaced points of |gamma phi + G * phi - sigma|.
double capped_linear_residual(const CappedLinearSolution& sol, int samples = 500);

double capped_linear_energy(const CappedLinearSolution& sol);

/// Throws Error("trig_pole") when rho T / 2 is within 1e-8 (relative) of an
/// odd multiple of pi / 2.
TrigSolution trig_solve(double rho, double gamma, double horizon);

/// DomainError outside [0, T].
double eval_trig(const TrigSolution& sol, double t);

/// int_0^T cos(rho (t - s)) phi(s) ds, analytically.
double trig_convolution(const TrigSolution& sol, double t);

double trig_residual(const TrigSolution& sol, int samples = 500);

double trig_energy(const TrigSolution& sol);

}  // namespace fredholm
