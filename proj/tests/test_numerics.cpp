#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nsfd/numerics.hpp"

#include <cmath>
#include <numbers>

using namespace nsfd;

TEST_CASE("adaptive Simpson handles smooth and mildly singular integrands") {
    CHECK(adaptive_simpson([](double x) { return std::sin(x); }, 0.0, std::numbers::pi, 1e-12) ==
          doctest::Approx(2.0).epsilon(1e-11));
    CHECK(adaptive_simpson([](double x) { return x * x; }, 0.0, 1.0, 1e-13) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    // Reversed limits flip the sign.
    CHECK(adaptive_simpson([](double x) { return x; }, 1.0, 0.0, 1e-13) ==
          doctest::Approx(-0.5).epsilon(1e-12));
    // Integrable endpoint growth z^(-0.9) on [eps, 1].
    const double v = adaptive_simpson([](double z) { return std::pow(z, -0.9); }, 1e-4, 1.0,
                                      1e-11, 0.0, 60);
    CHECK(v == doctest::Approx(10.0 * (1.0 - std::pow(1e-4, 0.1))).epsilon(1e-9));
}

TEST_CASE("Gauss-Legendre rules integrate polynomials of degree 2n-1 exactly") {
    for (int order : {8, 24, 32}) {
        const double deg = 2 * order - 1;
        const double got = gauss_legendre_integrate(
            [&](double x) { return std::pow(x, deg); }, 0.0, 1.0, order);
        CHECK(got == doctest::Approx(1.0 / (deg + 1.0)).epsilon(1e-12));
    }
    CHECK(gauss_legendre_integrate([](double x) { return std::exp(x); }, -1.0, 2.0, 24) ==
          doctest::Approx(std::exp(2.0) - std::exp(-1.0)).epsilon(1e-13));
}

TEST_CASE("solve_increasing inverts monotone maps with safeguards") {
    const double x = solve_increasing([](double t) { return t * t * t + t; },
                                      [](double t) { return 3.0 * t * t + 1.0; }, 10.0, 0.0,
                                      10.0, 1e-13);
    CHECK(x * x * x + x == doctest::Approx(10.0).epsilon(1e-12));
    CHECK_THROWS_AS(solve_increasing([](double t) { return t; }, [](double) { return 1.0; },
                                     1e9, 0.0, 1.0, 1e-13),
                    ConvergenceFailure);
}

TEST_CASE("conjugate gradient solves an SPD tridiagonal system") {
    const int n = 64;
    auto apply = [n](std::span<const double> x, std::span<double> y) {
        for (int i = 0; i < n; ++i) {
            double v = 2.0 * x[i];
            if (i > 0) v -= x[i - 1];
            if (i + 1 < n) v -= x[i + 1];
            y[i] = v;
        }
    };
    std::vector<double> b(n, 1.0), x(n, 0.0);
    const auto res = conjugate_gradient(apply, std::span<const double>(b), std::span<double>(x),
                                        {}, 1e-13, 1000);
    CHECK(res.converged);
    std::vector<double> ax(n);
    apply(std::span<const double>(x), std::span<double>(ax));
    for (int i = 0; i < n; ++i) CHECK(ax[i] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("linear fit recovers slope and intercept") {
    std::vector<double> xs, ys;
    for (int i = 0; i < 20; ++i) {
        xs.push_back(0.1 * i);
        ys.push_back(3.0 - 2.0 * 0.1 * i);
    }
    const auto fit = linear_fit(xs, ys);
    CHECK(fit.slope == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(fit.intercept == doctest::Approx(3.0).epsilon(1e-12));
    CHECK_THROWS_AS(linear_fit(std::vector<double>{1.0}, std::vector<double>{1.0}),
                    InvalidInput);
}
