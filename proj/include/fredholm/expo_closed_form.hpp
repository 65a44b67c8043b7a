#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fredholm/kernel.hpp"

namespace fredholm {

/// Eigenvalues of M = B + 2 lambda A B^{1/2} 1 1' for G(t) = sum a_k exp(-sqrt(b_k) t),
/// i.e. the roots of f(x) = 1 - 2 lambda sum a_k sqrt(b_k) / (x - b_k).
struct SecularSpectrum {
    std::vector<double> a;
    std::vector<double> b;
    double lambda = 0.0;
    /// Ascending; c[i] lies in (b[i], b[i+1]) and c[n-1] > b[n-1].
    std::vector<double> c;
    /// c[i] - b[i], kept separately so that differences c_i - b_l stay accurate.
    std::vector<double> offset;

    std::size_t size() const { return c.size(); }
    /// c_i - b_l without cancellation.
    double gap(std::size_t i, std::size_t l) const { return offset[i] + (b[i] - b[l]); }
};

/// Qtilde_ij = 1 / (c_j - b_i) and the diagonal factors of its explicit inverse,
/// Qtilde^{-1} = D1 Qtilde' D2.
struct CauchyFactors {
    Eigen::MatrixXd qtilde;
    Eigen::VectorXd d1;
    Eigen::VectorXd d2;
};

/// phi(t) = normalization * d * (1 + sum_i z_i (exp(sqrt(c_i) t) + exp(sqrt(c_i) (T - t)))).
///
/// z_i underflows for large sqrt(c_i) T, so the coefficients are also kept in
/// the scaled form w_i = z_i (exp(sqrt(c_i) T) - 1), which is what evaluation uses.
struct ExpClosedForm {
    SecularSpectrum spectrum;
    double gamma = 0.0;
    double horizon = 0.0;
    double d = 0.0;
    std::vector<double> z;
    std::vector<double> w;
    std::vector<double> sqrt_c;
    /// Rescales the sigma = gamma solution to unit mass.
    double normalization = 0.0;
    /// gamma * normalization.
    double sigma = 0.0;
};

/// Named numerical certificate: passed iff `value` is within `threshold`.
struct Certificate {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool passed = false;
};

struct StepReport {
    std::vector<Certificate> certificates;
    bool all_passed() const;
};

/// Roots of the secular function by bracketed bisection and a Newton polish.
SecularSpectrum secular_roots(std::span<const double> a, std::span<const double> b, double lambda);

CauchyFactors cauchy_factors(const SecularSpectrum& spectrum);

/// Requires an ExponentialSum kernel. Throws IllConditioned if the n x n
/// boundary system is numerically singular and Error("closed_form_sign") if a
/// coefficient z_i is below -1e-12.
ExpClosedForm build_closed_form(const Kernel& kernel, double gamma, double horizon);

/// phi(t); DomainError outside [0, T].
double eval_closed_form(const ExpClosedForm& cf, double t);

/// int_0^T G(|t - s|) phi(s) ds, analytically per basis term.
double closed_form_convolution(const ExpClosedForm& cf, double t);

/// max over `samples` equispaced points of |gamma phi + G * phi - sigma|.
double closed_form_residual(const ExpClosedForm& cf, int samples = 200);

/// J_gamma[phi] by composite Gauss-Legendre on phi and its convolution.
double closed_form_energy(const ExpClosedForm& cf);

/// Certifies the matrix identities behind the closed form. Never throws on a
/// failed certificate; the failures are in the report.
StepReport verify_step_identities(const Kernel& kernel, double gamma, double horizon);

}  // namespace fredholm
