#pragma once

// Small numerical utilities shared by the modules: adaptive quadrature,
// Gauss-Legendre rules, a safeguarded Newton root finder for monotone
// functions, a matrix-free conjugate gradient, and least-squares line fits.

#include "nsfd/errors.hpp"

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace nsfd {

namespace detail {

template <class F>
double simpson_segment(const F& f, double a, double fa, double b, double fb, double m, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <class F>
double adaptive_simpson_rec(const F& f, double a, double fa, double b, double fb, double m,
                            double fm, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson_segment(f, a, fa, m, fm, lm, flm);
    const double right = simpson_segment(f, m, fm, b, fb, rm, frm);
    const double err = left + right - whole;
    if (depth <= 0) {
        if (std::abs(err) > 1e3 * tol)
            throw OracleFailure("adaptive Simpson: max depth reached with error " +
                                std::to_string(err));
        return left + right + err / 15.0;
    }
    if (std::abs(err) <= 15.0 * tol)
        return left + right + err / 15.0;
    return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

} // namespace detail

/// Adaptive Simpson quadrature of f over [a, b]. The tolerance is applied as
/// rel_tol * |coarse estimate| + abs_tol.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double rel_tol, double abs_tol = 0.0,
                        int max_depth = 48) {
    if (a == b) return 0.0;
    const double sign = (a < b) ? 1.0 : -1.0;
    if (a > b) std::swap(a, b);
    const double fa = f(a);
    const double fb = f(b);
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    const double whole = detail::simpson_segment(f, a, fa, b, fb, m, fm);
    const double tol = std::max(rel_tol * std::abs(whole), abs_tol);
    const double floor = std::numeric_limits<double>::min() * 16.0;
    return sign * detail::adaptive_simpson_rec(f, a, fa, b, fb, m, fm, whole,
                                               std::max(tol, floor), max_depth);
}

struct QuadNode {
    double x; // node in (-1, 1)
    double w; // weight
};

/// Gauss-Legendre nodes/weights on (-1, 1), computed once per order by Newton
/// iteration on the Legendre recurrence.
const std::vector<QuadNode>& gauss_legendre(int order);

/// Integrate f over [a, b] with a fixed-order Gauss-Legendre rule.
template <class F>
double gauss_legendre_integrate(const F& f, double a, double b, int order) {
    const auto& rule = gauss_legendre(order);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double sum = 0.0;
    for (const auto& n : rule) sum += n.w * f(mid + half * n.x);
    return half * sum;
}

/// Solve f(x) = target for strictly increasing f on [lo, hi] by Newton with a
/// bisection safeguard. fprime may return 0; the bracket then takes over.
double solve_increasing(const std::function<double(double)>& f,
                        const std::function<double(double)>& fprime, double target, double lo,
                        double hi, double tol_f, int max_iter = 200);

struct CgResult {
    int iterations = 0;
    double rel_residual = 0.0;
    double linf_residual = 0.0;
    bool converged = false;
};

/// Matrix-free preconditioned conjugate gradient for SPD systems. `apply`
/// computes y = A x. `inv_diag` is the Jacobi preconditioner (empty = none).
/// Stops when ||r||_2 <= rel_tol * ||b||_2 and, if linf_tol > 0, additionally
/// ||r||_inf <= linf_tol. The true residual is refreshed every 50 iterations.
template <class Apply>
CgResult conjugate_gradient(const Apply& apply, std::span<const double> b, std::span<double> x,
                            std::span<const double> inv_diag, double rel_tol, int max_iter,
                            double linf_tol = 0.0) {
    const std::size_t n = b.size();
    std::vector<double> r(n), z(n), p(n), ap(n);

    auto linf = [](std::span<const double> v) {
        double m = 0.0;
        for (double a : v) m = std::max(m, std::abs(a));
        return m;
    };
    auto dot = [n](std::span<const double> a, std::span<const double> c) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += a[i] * c[i];
        return s;
    };

    apply(x, std::span<double>(ap));
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];

    const double bnorm = std::sqrt(dot(b, b));
    CgResult res;
    if (bnorm == 0.0) {
        for (std::size_t i = 0; i < n; ++i) x[i] = 0.0;
        res.converged = true;
        return res;
    }
    {
        const double rnorm = std::sqrt(dot(r, r));
        res.rel_residual = rnorm / bnorm;
        res.linf_residual = linf(r);
        if (rnorm <= rel_tol * bnorm && (linf_tol <= 0.0 || res.linf_residual <= linf_tol)) {
            res.converged = true;
            return res;
        }
    }

    auto precondition = [&] {
        if (inv_diag.empty())
            z = r;
        else
            for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    };

    precondition();
    p = z;
    double rz = dot(r, z);

    for (int it = 0; it < max_iter; ++it) {
        apply(std::span<const double>(p), std::span<double>(ap));
        const double pap = dot(p, ap);
        if (pap <= 0.0) break; // lost positivity, bail with current iterate
        const double alpha = rz / pap;
        for (std::size_t i = 0; i < n; ++i) x[i] += alpha * p[i];
        if ((it + 1) % 50 == 0) {
            apply(std::span<const double>(x), std::span<double>(ap));
            for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
        } else {
            for (std::size_t i = 0; i < n; ++i) r[i] -= alpha * ap[i];
        }
        const double rnorm = std::sqrt(dot(r, r));
        res.iterations = it + 1;
        res.rel_residual = rnorm / bnorm;
        if (rnorm <= rel_tol * bnorm) {
            res.linf_residual = linf(r);
            if (linf_tol <= 0.0 || res.linf_residual <= linf_tol) {
                res.converged = true;
                return res;
            }
        }
        precondition();
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    res.linf_residual = linf(r);
    return res;
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Ordinary least squares fit y ~ slope * x + intercept.
LineFit linear_fit(std::span<const double> x, std::span<const double> y);

} // namespace nsfd
