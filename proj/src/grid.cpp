#include "nsfd/grid.hpp"

#include "nsfd/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace nsfd {

Domain::Domain(double lx, double ly, int nx_, int ny_) : Lx(lx), Ly(ly), nx(nx_), ny(ny_) {
    if (!(Lx > 0.0) || !(Ly > 0.0)) throw InvalidInput("domain: side lengths must be positive");
    if (nx < 4 || ny < 4) throw InvalidInput("domain: need at least 4 cells per direction");
}

ScalarField divergence(const VectorField& v) {
    const Domain& d = v.dom;
    ScalarField out(d);
    const double ihx = 1.0 / d.hx(), ihy = 1.0 / d.hy();
    for (int j = 0; j < d.ny; ++j)
        for (int i = 0; i < d.nx; ++i)
            out(i, j) = (v.u(i + 1, j) - v.u(i, j)) * ihx + (v.v(i, j + 1) - v.v(i, j)) * ihy;
    return out;
}

StrainRate mac_strain(const VectorField& vf) {
    const Domain& d = vf.dom;
    StrainRate s(d);
    const double ihx = 1.0 / d.hx(), ihy = 1.0 / d.hy();
    for (int j = 0; j < d.ny; ++j)
        for (int i = 0; i < d.nx; ++i) {
            s.dxx(i, j) = (vf.u(i + 1, j) - vf.u(i, j)) * ihx;
            s.dyy(i, j) = (vf.v(i, j + 1) - vf.v(i, j)) * ihy;
        }
    // Shear at nodes; reflection ghosts encode the no-slip wall value.
    for (int j = 0; j <= d.ny; ++j)
        for (int i = 0; i <= d.nx; ++i) {
            double du_dy;
            if (j == 0)
                du_dy = 2.0 * vf.u(i, 0) * ihy;
            else if (j == d.ny)
                du_dy = -2.0 * vf.u(i, d.ny - 1) * ihy;
            else
                du_dy = (vf.u(i, j) - vf.u(i, j - 1)) * ihy;
            double dv_dx;
            if (i == 0)
                dv_dx = 2.0 * vf.v(0, j) * ihx;
            else if (i == d.nx)
                dv_dx = -2.0 * vf.v(d.nx - 1, j) * ihx;
            else
                dv_dx = (vf.v(i, j) - vf.v(i - 1, j)) * ihx;
            s.dxy_node(i, j) = 0.5 * (du_dy + dv_dx);
        }
    return s;
}

SymTensorField sym_gradient(const VectorField& v) {
    const StrainRate s = mac_strain(v);
    const Domain& d = v.dom;
    SymTensorField t(d);
    for (int j = 0; j < d.ny; ++j)
        for (int i = 0; i < d.nx; ++i) {
            t.xx(i, j) = s.dxx(i, j);
            t.yy(i, j) = s.dyy(i, j);
            t.xy(i, j) = 0.25 * (s.dxy_node(i, j) + s.dxy_node(i + 1, j) +
                                 s.dxy_node(i, j + 1) + s.dxy_node(i + 1, j + 1));
        }
    return t;
}

double strain_inner_product(const MacStress& s, const StrainRate& r) {
    const Domain& d = s.dom;
    const double a = d.cell_area();
    double sum = 0.0;
    for (int j = 0; j < d.ny; ++j)
        for (int i = 0; i < d.nx; ++i)
            sum += s.sxx(i, j) * r.dxx(i, j) + s.syy(i, j) * r.dyy(i, j);
    for (int j = 0; j <= d.ny; ++j)
        for (int i = 0; i <= d.nx; ++i)
            sum += 2.0 * s.sxy_node(i, j) * r.dxy_node(i, j);
    return sum * a;
}

VectorField stress_divergence(const MacStress& s) {
    const Domain& d = s.dom;
    VectorField f(d);
    const double ihx = 1.0 / d.hx(), ihy = 1.0 / d.hy();
    // Wall nodes enter with weight 2 (the reflection ghosts double the
    // one-sided wall derivative in the pairing).
    auto cy = [&](int j) { return (j == 0 || j == d.ny) ? 2.0 : 1.0; };
    auto cx = [&](int i) { return (i == 0 || i == d.nx) ? 2.0 : 1.0; };
    for (int j = 0; j < d.ny; ++j)
        for (int i = 1; i < d.nx; ++i)
            f.u(i, j) = (s.sxx(i, j) - s.sxx(i - 1, j)) * ihx +
                        (cy(j + 1) * s.sxy_node(i, j + 1) - cy(j) * s.sxy_node(i, j)) * ihy;
    for (int j = 1; j < d.ny; ++j)
        for (int i = 0; i < d.nx; ++i)
            f.v(i, j) = (s.syy(i, j) - s.syy(i, j - 1)) * ihy +
                        (cx(i + 1) * s.sxy_node(i + 1, j) - cx(i) * s.sxy_node(i, j)) * ihx;
    return f;
}

double face_dot(const VectorField& a, const VectorField& b) {
    const Domain& d = a.dom;
    if (!(b.dom == d)) throw InvalidInput("face_dot: mismatched domains");
    const double area = d.cell_area();
    double sum = 0.0;
    for (int j = 0; j < d.ny; ++j)
        for (int i = 1; i < d.nx; ++i) sum += a.u(i, j) * b.u(i, j);
    for (int j = 1; j < d.ny; ++j)
        for (int i = 0; i < d.nx; ++i) sum += a.v(i, j) * b.v(i, j);
    return sum * area;
}

double l1_norm(const ScalarField& f) {
    double s = 0.0;
    for (double x : f.cells.data()) s += std::abs(x);
    return s * f.dom.cell_area();
}

double l2_norm(const ScalarField& f) {
    double s = 0.0;
    for (double x : f.cells.data()) s += x * x;
    return std::sqrt(s * f.dom.cell_area());
}

double lp_norm(const ScalarField& f, double p) {
    if (!(p >= 1.0)) throw InvalidInput("lp_norm: p must be >= 1");
    double s = 0.0;
    for (double x : f.cells.data()) s += std::pow(std::abs(x), p);
    return std::pow(s * f.dom.cell_area(), 1.0 / p);
}

double linf_norm(const ScalarField& f) {
    double m = 0.0;
    for (double x : f.cells.data()) m = std::max(m, std::abs(x));
    return m;
}

double l2_norm(const VectorField& v) { return std::sqrt(face_dot(v, v)); }

double linf_norm(const VectorField& v) {
    double m = 0.0;
    for (double x : v.ufaces.data()) m = std::max(m, std::abs(x));
    for (double x : v.vfaces.data()) m = std::max(m, std::abs(x));
    return m;
}

double lp_norm(const SymTensorField& t, double p) {
    double s = 0.0;
    for (int j = 0; j < t.dom.ny; ++j)
        for (int i = 0; i < t.dom.nx; ++i) s += std::pow(t.at(i, j).norm(), p);
    return std::pow(s * t.dom.cell_area(), 1.0 / p);
}

double min_value(const ScalarField& f) {
    double m = std::numeric_limits<double>::infinity();
    for (double x : f.cells.data()) m = std::min(m, x);
    return m;
}

double max_value(const ScalarField& f) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : f.cells.data()) m = std::max(m, x);
    return m;
}

bool all_finite(const ScalarField& f) {
    for (double x : f.cells.data())
        if (!std::isfinite(x)) return false;
    return true;
}

bool all_finite(const VectorField& v) {
    for (double x : v.ufaces.data())
        if (!std::isfinite(x)) return false;
    for (double x : v.vfaces.data())
        if (!std::isfinite(x)) return false;
    return true;
}

double integral(const ScalarField& f) {
    double s = 0.0;
    for (double x : f.cells.data()) s += x;
    return s * f.dom.cell_area();
}

// ---------------------------------------------------------------------------
// Dirichlet Laplacian

void apply_dirichlet_laplacian(const Domain& d, std::span<const double> x, std::span<double> y) {
    const double ihx = 1.0 / d.hx(), ihy = 1.0 / d.hy();
    const int nx = d.nx, ny = d.ny;
    auto at = [&](int i, int j) { return x[static_cast<std::size_t>(j) * nx + i]; };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double c = at(i, j);
            const double fe = (i + 1 < nx) ? (at(i + 1, j) - c) * ihx : -2.0 * c * ihx;
            const double fw = (i > 0) ? (c - at(i - 1, j)) * ihx : 2.0 * c * ihx;
            const double fn = (j + 1 < ny) ? (at(i, j + 1) - c) * ihy : -2.0 * c * ihy;
            const double fs = (j > 0) ? (c - at(i, j - 1)) * ihy : 2.0 * c * ihy;
            y[static_cast<std::size_t>(j) * nx + i] = -((fe - fw) * ihx + (fn - fs) * ihy);
        }
}

namespace {

std::vector<double> dirichlet_inv_diag(const Domain& d) {
    const double ihx2 = 1.0 / (d.hx() * d.hx()), ihy2 = 1.0 / (d.hy() * d.hy());
    std::vector<double> inv(static_cast<std::size_t>(d.nx) * d.ny);
    for (int j = 0; j < d.ny; ++j)
        for (int i = 0; i < d.nx; ++i) {
            const double cx = ((i == 0) ? 2.0 : 1.0) + ((i == d.nx - 1) ? 2.0 : 1.0);
            const double cy = ((j == 0) ? 2.0 : 1.0) + ((j == d.ny - 1) ? 2.0 : 1.0);
            inv[static_cast<std::size_t>(j) * d.nx + i] = 1.0 / (cx * ihx2 + cy * ihy2);
        }
    return inv;
}

} // namespace

EigenResult smallest_dirichlet_eigenvalue(const Domain& d, double rel_tol) {
    const std::size_t n = static_cast<std::size_t>(d.nx) * d.ny;
    std::vector<double> x(n, 1.0), y(n, 0.0);
    const auto inv_diag = dirichlet_inv_diag(d);
    auto apply = [&](std::span<const double> in, std::span<double> out) {
        apply_dirichlet_laplacian(d, in, out);
    };
    auto norm = [&](const std::vector<double>& v) {
        double s = 0.0;
        for (double a : v) s += a * a;
        return std::sqrt(s);
    };
    const double n0 = norm(x);
    for (double& a : x) a /= n0;

    double lambda = 0.0;
    EigenResult res;
    for (int it = 0; it < 500; ++it) {
        std::fill(y.begin(), y.end(), 0.0);
        auto cg = conjugate_gradient(apply, std::span<const double>(x), std::span<double>(y),
                                     inv_diag, 1e-13, 20000);
        if (!cg.converged)
            throw ConvergenceFailure("eigenvalue inner solve stalled at relative residual " +
                                     std::to_string(cg.rel_residual));
        double xy = 0.0, yy = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            xy += x[k] * y[k];
            yy += y[k] * y[k];
        }
        const double lambda_new = xy / yy; // Rayleigh quotient of A at y, using A y ~ x
        const double ny_ = std::sqrt(yy);
        for (std::size_t k = 0; k < n; ++k) x[k] = y[k] / ny_;
        res.iterations = it + 1;
        if (it > 0 && std::abs(lambda_new - lambda) <= rel_tol * std::abs(lambda_new)) {
            lambda = lambda_new;
            break;
        }
        lambda = lambda_new;
    }
    res.lambda = lambda;
    res.mode = ScalarField(d);
    double mean = 0.0;
    for (double a : x) mean += a;
    const double sign = (mean >= 0.0) ? 1.0 : -1.0;
    for (int j = 0; j < d.ny; ++j)
        for (int i = 0; i < d.nx; ++i) res.mode(i, j) = sign * x[static_cast<std::size_t>(j) * d.nx + i];
    return res;
}

double estimate_mu(const Domain& dom, const FluidParams& params) {
    if (params.p < 2.0)
        throw UnsupportedRegime(
            "estimate_mu: p < 2 is outside the exponential-rate regime (see the appendixb "
            "polynomial-decay path)");
    if (params.delta != 1.0)
        throw UnsupportedRegime(
            "estimate_mu: the exponential rate is derived for delta = 1 (see the appendixb "
            "path for delta = 0)");
    return params.kappa_lo * smallest_dirichlet_eigenvalue(dom).lambda;
}

double dirichlet_gradient_norm_sq(const ScalarField& w) {
    const std::size_t n = w.cells.data().size();
    std::vector<double> y(n, 0.0);
    apply_dirichlet_laplacian(w.dom, w.cells.data(), y);
    double s = 0.0;
    const auto x = w.cells.data();
    for (std::size_t k = 0; k < n; ++k) s += x[k] * y[k];
    return s * w.dom.cell_area();
}

double estimate_embedding_constant(const Domain& dom, double q) {
    if (!(q >= 2.0) || !std::isfinite(q))
        throw InvalidInput("estimate_embedding_constant: q must be finite and >= 2");
    double best = 0.0;
    auto ratio = [&](const ScalarField& w) {
        const double grad = dirichlet_gradient_norm_sq(w);
        if (grad <= 0.0) return 0.0;
        return lp_norm(w, q) / std::sqrt(grad);
    };

    best = std::max(best, ratio(smallest_dirichlet_eigenvalue(dom).mode));

    // Seeded smooth probes: random combinations of the first 4x4 sine modes.
    // The coefficients are drawn independently of the resolution so the probe
    // family is identical across grids.
    constexpr int kProbes = 24;
    constexpr int kModes = 4;
    std::mt19937_64 rng(0x5eed0001ULL);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int probe = 0; probe < kProbes; ++probe) {
        double coeff[kModes][kModes];
        for (int m = 0; m < kModes; ++m)
            for (int k = 0; k < kModes; ++k) coeff[m][k] = unif(rng);
        ScalarField w(dom);
        for (int j = 0; j < dom.ny; ++j)
            for (int i = 0; i < dom.nx; ++i) {
                const double x = dom.cell_x(i) / dom.Lx;
                const double y = dom.cell_y(j) / dom.Ly;
                double val = 0.0;
                for (int m = 0; m < kModes; ++m)
                    for (int k = 0; k < kModes; ++k)
                        val += coeff[m][k] * std::sin((m + 1) * std::numbers::pi * x) *
                               std::sin((k + 1) * std::numbers::pi * y);
                w(i, j) = val;
            }
        best = std::max(best, ratio(w));
    }
    return best;
}

double estimate_sobolev_constant(const Domain& dom, double alpha) {
    if (!(alpha > 0.5 && alpha <= 2.0 / 3.0))
        throw InvalidInput("estimate_sobolev_constant: alpha must lie in (1/2, 2/3]");
    return estimate_embedding_constant(dom, 2.0 / (1.0 - alpha));
}

} // namespace nsfd
