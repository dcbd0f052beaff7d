#pragma once

// Test-only oracles, deliberately independent of the library's numerics:
// a composite-Simpson integrator with Richardson refinement, and central
// finite differences. Used to freeze expected values for the derived cases.

#include <cmath>
#include <functional>
#include <stdexcept>

namespace oracles {

/// Composite Simpson with interval doubling until two refinements agree.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double rel_tol = 1e-12) {
    if (a == b) return 0.0;
    auto composite = [&](int n) {
        const double h = (b - a) / n;
        double sum = f(a) + f(b);
        for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
        return sum * h / 3.0;
    };
    double prev = composite(16);
    for (int n = 32; n <= (1 << 22); n *= 2) {
        const double cur = composite(n);
        if (std::abs(cur - prev) <= rel_tol * std::max(1.0, std::abs(cur)))
            return cur + (cur - prev) / 15.0;
        prev = cur;
    }
    throw std::runtime_error("oracle integrate: no convergence");
}

/// Fourth-order central difference first derivative.
inline double derivative(const std::function<double(double)>& f, double x, double h) {
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

/// Second-order central difference second derivative.
inline double second_derivative(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

} // namespace oracles
