#include "nsfd/numerics.hpp"

#include <map>
#include <numbers>

namespace nsfd {

namespace {

std::vector<QuadNode> compute_gauss_legendre(int order) {
    std::vector<QuadNode> nodes(static_cast<std::size_t>(order));
    const int half = (order + 1) / 2;
    for (int k = 0; k < half; ++k) {
        // Chebyshev-like initial guess, then Newton on P_n.
        double x = std::cos(std::numbers::pi * (k + 0.75) / (order + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= order; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = order * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[static_cast<std::size_t>(k)] = {-x, w};
        nodes[static_cast<std::size_t>(order - 1 - k)] = {x, w};
    }
    return nodes;
}

} // namespace

const std::vector<QuadNode>& gauss_legendre(int order) {
    static std::map<int, std::vector<QuadNode>> cache;
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, compute_gauss_legendre(order)).first;
    return it->second;
}

double solve_increasing(const std::function<double(double)>& f,
                        const std::function<double(double)>& fprime, double target, double lo,
                        double hi, double tol_f, int max_iter) {
    double flo = f(lo) - target;
    double fhi = f(hi) - target;
    if (flo > 0.0 || fhi < 0.0) {
        // Widen once; the callers' brackets are analytic so this is rare.
        const double span = std::max(hi - lo, 1.0);
        lo -= span;
        hi += span;
        flo = f(lo) - target;
        fhi = f(hi) - target;
        if (flo > 0.0 || fhi < 0.0)
            throw ConvergenceFailure("solve_increasing: target not bracketed");
    }
    if (std::abs(flo) <= tol_f) return lo;
    if (std::abs(fhi) <= tol_f) return hi;

    double x = 0.5 * (lo + hi);
    for (int it = 0; it < max_iter; ++it) {
        const double fx = f(x) - target;
        if (std::abs(fx) <= tol_f) return x;
        if (fx > 0.0)
            hi = x;
        else
            lo = x;
        const double d = fprime(x);
        double next = (d > 0.0) ? x - fx / d : x;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x)))
            return 0.5 * (lo + hi);
        x = next;
    }
    throw ConvergenceFailure("solve_increasing: no convergence after " +
                             std::to_string(max_iter) + " iterations");
}

LineFit linear_fit(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw InvalidInput("linear_fit: need two or more points");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw InvalidInput("linear_fit: degenerate abscissae");
    LineFit fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    return fit;
}

} // namespace nsfd
