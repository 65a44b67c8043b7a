#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "fredholm/discrete.hpp"
#include "fredholm/errors.hpp"
#include "fredholm/expo_closed_form.hpp"
#include "oracles.hpp"

using fredholm::Kernel;
using Catch::Approx;

namespace {

struct Fixture {
    std::vector<double> a, b;
    double gamma, horizon;
    Kernel kernel() const { return Kernel::exponential_sum(a, b); }
};

std::vector<Fixture> fixtures() {
    return {
        {{1.0}, {1.0}, 1.0, 1.0},
        {{1.0, 1.0}, {1.0, 4.0}, 0.5, 2.0},
        {{1.0, 2.0, 3.0}, {1.0, 2.0, 5.0}, 0.2, 1.5},
        {{0.5, 1.0, 0.25, 2.0}, {0.1, 0.9, 3.0, 20.0}, 0.05, 4.0},
        {{1.0}, {100.0}, 1e-3, 10.0},
    };
}

Eigen::MatrixXd secular_matrix(const std::vector<double>& a, const std::vector<double>& b, double lambda) {
    const auto n = static_cast<Eigen::Index>(a.size());
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) M(i, j) = 2.0 * lambda * a[i] * std::sqrt(b[i]);
        M(i, i) += b[i];
    }
    return M;
}

// Inverse of C_ij = 1 / (x_i - y_j) from the explicit product formula.
Eigen::MatrixXd cauchy_inverse(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    Eigen::MatrixXd inv(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double num = 1.0, den = 1.0;
            for (std::size_t k = 0; k < n; ++k) {
                num *= (x[j] - y[k]) * (x[k] - y[i]);
                if (k != j) den *= x[j] - x[k];
                if (k != i) den *= y[i] - y[k];
            }
            inv(i, j) = num / ((x[j] - y[i]) * den);
        }
    return inv;
}

}  // namespace

TEST_CASE("secular_roots: documented values") {
    const std::vector<double> a{1.0}, b{1.0};
    const auto s = fredholm::secular_roots(a, b, 1.0);
    REQUIRE(s.size() == 1);
    CHECK(s.c[0] == Approx(3.0).epsilon(1e-15));

    const std::vector<double> a2{1.0, 1.0}, b2{1.0, 4.0};
    const auto s2 = fredholm::secular_roots(a2, b2, 0.5);
    CHECK(s2.c[0] > 1.0);
    CHECK(s2.c[0] < 4.0);
    CHECK(s2.c[1] > 4.0);
    CHECK(s2.c[1] <= 4.0 + 2.0 * 0.5 * (1.0 + 2.0));
}

TEST_CASE("secular_roots: characteristic polynomial vanishes") {
    const std::vector<double> a{2.0, 3.0}, b{1.0, 9.0};
    const double lambda = 2.0;
    const auto s = fredholm::secular_roots(a, b, lambda);
    const Eigen::MatrixXd M = secular_matrix(a, b, lambda);
    const double norm = M.norm();
    for (double c : s.c) {
        const Eigen::MatrixXd shifted = c * Eigen::MatrixXd::Identity(2, 2) - M;
        CHECK(std::abs(shifted.determinant()) <= 1e-10 * norm * norm);
    }
}

TEST_CASE("secular_roots: agree with a dense eigensolver and interlace") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unit(0.1, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + trial % 6;
        std::vector<double> a(n), b(n);
        double acc = 0.0;
        for (int k = 0; k < n; ++k) {
            a[k] = unit(rng);
            acc += unit(rng);
            b[k] = acc;
        }
        const double lambda = unit(rng) * (trial % 2 ? 10.0 : 0.1);
        const auto s = fredholm::secular_roots(a, b, lambda);
        Eigen::EigenSolver<Eigen::MatrixXd> es(secular_matrix(a, b, lambda));
        std::vector<double> ref;
        for (int k = 0; k < n; ++k) ref.push_back(es.eigenvalues()(k).real());
        std::sort(ref.begin(), ref.end());
        for (int k = 0; k < n; ++k) {
            CHECK(s.c[k] == Approx(ref[k]).epsilon(1e-10));
            CHECK(s.c[k] > b[k]);
            if (k + 1 < n) CHECK(s.c[k] < b[k + 1]);
            CHECK(s.offset[k] > 0.0);
        }
    }
}

TEST_CASE("cauchy_factors: explicit inverse and positive diagonals") {
    const std::vector<double> a{1.0, 2.0, 3.0}, b{1.0, 2.0, 5.0};
    const auto s = fredholm::secular_roots(a, b, 5.0);
    const auto f = fredholm::cauchy_factors(s);
    const Eigen::MatrixXd explicit_inv = f.d1.asDiagonal() * f.qtilde.transpose() * f.d2.asDiagonal();
    // Qtilde_ij = 1 / (c_j - b_i) = -1 / (b_i - c_j).
    const Eigen::MatrixXd schechter = -cauchy_inverse(s.b, s.c);
    CHECK((explicit_inv - schechter).cwiseAbs().maxCoeff() <= 1e-10 * schechter.cwiseAbs().maxCoeff());
    CHECK((f.qtilde.inverse() - schechter).cwiseAbs().maxCoeff() <= 1e-9 * schechter.cwiseAbs().maxCoeff());
    const Eigen::VectorXd row_sums = schechter * Eigen::VectorXd::Ones(3);
    CHECK((row_sums - f.d1).cwiseAbs().maxCoeff() <= 1e-10 * f.d1.cwiseAbs().maxCoeff());
    for (int i = 0; i < 3; ++i) {
        CHECK(f.d1(i) > 0.0);
        CHECK(f.d2(i) > 0.0);
        double p = s.c[i] - s.b[i];
        for (int l = 0; l < 3; ++l)
            if (l != i) p *= (s.c[i] - s.b[l]) / (s.c[i] - s.c[l]);
        CHECK(f.d1(i) == Approx(p).epsilon(1e-12));
    }
}

TEST_CASE("build_closed_form: n = 1 matches the explicit formula") {
    const auto cf = fredholm::build_closed_form(Kernel::exponential_sum({1.0}, {1.0}), 1.0, 1.0);
    const double sc = std::sqrt(3.0);
    const double den = std::exp(sc) * (1.0 + sc) + 1.0 - sc;
    auto shape = [&](double t) { return 1.0 + 2.0 * (std::exp(sc * t) + std::exp(sc * (1.0 - t))) / den; };
    const double k = 1.0 / oracle::gk(shape, 0.0, 1.0);
    for (double t : {0.0, 0.1, 0.37, 0.5, 0.9, 1.0}) CHECK(fredholm::eval_closed_form(cf, t) == Approx(k * shape(t)).epsilon(1e-12));
    // phi = (sigma b / (gamma c)) (1 + ...), b = gamma = 1, c = 3.
    CHECK(cf.sigma == Approx(3.0 * k).epsilon(1e-12));
    CHECK(cf.d == Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(fredholm::eval_closed_form(cf, 0.0) == Approx(fredholm::eval_closed_form(cf, 1.0)).epsilon(1e-15));
}

TEST_CASE("build_closed_form: invariants over fixtures") {
    for (const Fixture& fx : fixtures()) {
        INFO("n=" << fx.a.size() << " gamma=" << fx.gamma << " T=" << fx.horizon);
        const auto cf = fredholm::build_closed_form(fx.kernel(), fx.gamma, fx.horizon);
        CHECK(cf.d > 0.0);
        for (double z : cf.z) CHECK(z >= 0.0);
        CHECK(cf.sigma > 0.0);

        const double T = fx.horizon;
        const double mass = oracle::split([&](double t) { return fredholm::eval_closed_form(cf, t); }, 0.0, T,
                                          {0.5 * T, 0.01 * T, 0.99 * T});
        CHECK(mass == Approx(1.0).epsilon(1e-12));

        for (double s : {0.0, 0.1, 0.25, 0.49}) {
            const double lo = fredholm::eval_closed_form(cf, (0.5 - s) * T);
            const double hi = fredholm::eval_closed_form(cf, (0.5 + s) * T);
            CHECK(std::abs(lo - hi) <= 1e-12 * std::max(1.0, lo));
        }

        CHECK(fredholm::closed_form_residual(cf, 200) <= 1e-8 * cf.sigma);
        CHECK(cf.sigma == Approx(2.0 * fredholm::closed_form_energy(cf)).epsilon(1e-10));

        const int N = 1000;
        double scale = 0.0;
        std::vector<double> v(N + 1);
        for (int k = 0; k <= N; ++k) scale = std::max(scale, v[k] = fredholm::eval_closed_form(cf, T * k / N));
        for (int k = 1; k < N; ++k) CHECK(v[k - 1] - 2.0 * v[k] + v[k + 1] >= -1e-10 * std::max(1.0, scale));
    }
}

TEST_CASE("closed_form_convolution: matches quadrature") {
    const Fixture fx = fixtures()[2];
    const Kernel k = fx.kernel();
    const auto cf = fredholm::build_closed_form(k, fx.gamma, fx.horizon);
    for (double t : {0.0, 0.2, 0.75, 1.3, 1.5}) {
        const double ref = oracle::split(
            [&](double s) { return k(std::abs(t - s)) * fredholm::eval_closed_form(cf, s); }, 0.0, fx.horizon, {t});
        CHECK(fredholm::closed_form_convolution(cf, t) == Approx(ref).epsilon(1e-11));
    }
}

TEST_CASE("build_closed_form: large exponents stay finite") {
    const auto cf = fredholm::build_closed_form(Kernel::exponential_sum({1.0}, {100.0}), 1e-3, 10.0);
    REQUIRE(cf.sqrt_c[0] * cf.horizon > 700.0);
    CHECK(std::isfinite(fredholm::eval_closed_form(cf, 0.0)));
    CHECK(std::isfinite(fredholm::eval_closed_form(cf, 5.0)));
    CHECK(fredholm::eval_closed_form(cf, 0.0) > fredholm::eval_closed_form(cf, 5.0));
}

TEST_CASE("eval_closed_form: zero coefficients give a constant") {
    auto cf = fredholm::build_closed_form(Kernel::exponential_sum({1.0, 2.0}, {1.0, 3.0}), 0.4, 2.0);
    std::fill(cf.w.begin(), cf.w.end(), 0.0);
    std::fill(cf.z.begin(), cf.z.end(), 0.0);
    for (double t : {0.0, 0.3, 1.0, 2.0}) CHECK(fredholm::eval_closed_form(cf, t) == cf.normalization * cf.d);
}

TEST_CASE("closed form and discrete solver converge to each other") {
    for (const Fixture& fx : {fixtures()[0], fixtures()[1], fixtures()[2]}) {
        INFO("n=" << fx.a.size());
        const auto cf = fredholm::build_closed_form(fx.kernel(), fx.gamma, fx.horizon);
        const fredholm::Problem p{fx.gamma, fx.horizon, fx.kernel()};
        double prev = std::numeric_limits<double>::infinity();
        for (int m : {64, 256, 1024}) {
            const auto sol = fredholm::solve(p, m);
            double worst = 0.0;
            for (int k = 0; k < m; ++k)
                worst = std::max(worst, std::abs(sol.values[k] - fredholm::eval_closed_form(cf, sol.midpoint(k))));
            CHECK(worst < prev);
            prev = worst;
        }
        CHECK(prev <= 5e-3);
    }
}

TEST_CASE("closed form boundary value matches extrapolated discrete solution") {
    const Kernel k = Kernel::exponential_sum({1.0}, {1.0});
    const auto cf = fredholm::build_closed_form(k, 1.0, 1.0);
    const fredholm::Problem p{1.0, 1.0, k};
    const double coarse = fredholm::solve(p, 256).sample(0.0);
    const double fine = fredholm::solve(p, 512).sample(0.0);
    CHECK(std::abs(2.0 * fine - coarse - fredholm::eval_closed_form(cf, 0.0)) <= 1e-2);
}

TEST_CASE("verify_step_identities") {
    SECTION("n = 1 Cauchy identity is exact") {
        const auto r = fredholm::verify_step_identities(Kernel::exponential_sum({1.0}, {1.0}), 1.0, 1.0);
        CHECK(r.all_passed());
        CHECK(r.certificates.front().name == "cauchy_inverse");
        CHECK(r.certificates.front().value <= 4e-16);
    }
    SECTION("n = 3 documented instance") {
        const auto r = fredholm::verify_step_identities(Kernel::exponential_sum({1.0, 2.0, 3.0}, {1.0, 2.0, 5.0}), 0.2, 1.0);
        CHECK(r.certificates.size() == 6);
        for (const auto& c : r.certificates) {
            INFO(c.name << " value=" << c.value);
            CHECK(c.passed);
        }
    }
    SECTION("random well-separated instances") {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> unit(0.2, 2.0);
        for (int trial = 0; trial < 20; ++trial) {
            const int n = 1 + trial % 4;
            std::vector<double> a(n), b(n);
            double acc = 0.0;
            for (int k = 0; k < n; ++k) {
                a[k] = unit(rng);
                acc += 1.0 + unit(rng);
                b[k] = acc;
            }
            const auto r = fredholm::verify_step_identities(Kernel::exponential_sum(a, b), unit(rng), 2.0);
            for (const auto& c : r.certificates) {
                INFO(trial << " " << c.name << " value=" << c.value);
                CHECK(c.passed);
            }
        }
    }
}

TEST_CASE("expo closed form: errors") {
    CHECK_THROWS_AS(fredholm::build_closed_form(Kernel::capped_linear(1.0), 1.0, 1.0), fredholm::InvalidArgument);
    const Kernel k = Kernel::exponential_sum({1.0}, {1.0});
    CHECK_THROWS_AS(fredholm::build_closed_form(k, 0.0, 1.0), fredholm::InvalidArgument);
    CHECK_THROWS_AS(fredholm::build_closed_form(k, 1.0, -2.0), fredholm::InvalidArgument);
    const auto cf = fredholm::build_closed_form(k, 1.0, 1.0);
    CHECK_THROWS_AS(fredholm::eval_closed_form(cf, -0.1), fredholm::DomainError);
    CHECK_THROWS_AS(fredholm::eval_closed_form(cf, 1.1), fredholm::DomainError);
    const std::vector<double> a{1.0, 1.0}, b{2.0, 1.0};
    CHECK_THROWS_AS(fredholm::secular_roots(a, b, 1.0), fredholm::InvalidArgument);
}
