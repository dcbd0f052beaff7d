#include "nsfd/steady_state.hpp"

#include "nsfd/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace nsfd {

BoundaryTrace BoundaryTrace::constant(const Domain& d, double value) {
    BoundaryTrace t;
    t.left.assign(d.ny, value);
    t.right.assign(d.ny, value);
    t.bottom.assign(d.nx, value);
    t.top.assign(d.nx, value);
    return t;
}

BoundaryTrace BoundaryTrace::per_side(const Domain& d, double left, double right, double bottom,
                                      double top) {
    BoundaryTrace t;
    t.left.assign(d.ny, left);
    t.right.assign(d.ny, right);
    t.bottom.assign(d.nx, bottom);
    t.top.assign(d.nx, top);
    return t;
}

BoundaryTrace BoundaryTrace::sample(const Domain& d,
                                    const std::function<double(double, double)>& fn) {
    BoundaryTrace t;
    t.left.resize(d.ny);
    t.right.resize(d.ny);
    t.bottom.resize(d.nx);
    t.top.resize(d.nx);
    for (int j = 0; j < d.ny; ++j) {
        t.left[j] = fn(0.0, d.cell_y(j));
        t.right[j] = fn(d.Lx, d.cell_y(j));
    }
    for (int i = 0; i < d.nx; ++i) {
        t.bottom[i] = fn(d.cell_x(i), 0.0);
        t.top[i] = fn(d.cell_x(i), d.Ly);
    }
    return t;
}

BoundaryTrace BoundaryTrace::from_arclength_table(
    const Domain& d, const std::vector<std::array<double, 2>>& table) {
    if (table.size() < 2) throw InvalidInput("boundary table needs at least two points");
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (table[i][0] < 0.0 || table[i][0] > 1.0)
            throw InvalidInput("boundary table fractions must lie in [0, 1]");
        if (i > 0 && table[i][0] <= table[i - 1][0])
            throw InvalidInput("boundary table fractions must be strictly increasing");
    }
    auto value_at = [&](double frac) {
        // Wrap-around interpolation on the closed curve.
        if (frac <= table.front()[0] || frac >= table.back()[0]) {
            const double span = table.front()[0] + 1.0 - table.back()[0];
            const double w = (frac >= table.back()[0]) ? (frac - table.back()[0]) / span
                                                       : (frac + 1.0 - table.back()[0]) / span;
            return table.back()[1] + w * (table.front()[1] - table.back()[1]);
        }
        auto it = std::upper_bound(
            table.begin(), table.end(), frac,
            [](double f, const std::array<double, 2>& p) { return f < p[0]; });
        const auto& hi = *it;
        const auto& lo = *(it - 1);
        const double w = (frac - lo[0]) / (hi[0] - lo[0]);
        return lo[1] + w * (hi[1] - lo[1]);
    };
    const double perim = 2.0 * (d.Lx + d.Ly);
    return sample(d, [&](double x, double y) {
        double arc;
        if (y == 0.0)
            arc = x;                                   // bottom, left to right
        else if (x == d.Lx)
            arc = d.Lx + y;                            // right, bottom to top
        else if (y == d.Ly)
            arc = d.Lx + d.Ly + (d.Lx - x);            // top, right to left
        else
            arc = 2.0 * d.Lx + d.Ly + (d.Ly - y);      // left, top to bottom
        return value_at(arc / perim);
    });
}

BoundaryTrace BoundaryTrace::from_arclength_file(const Domain& d, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open boundary table: " + path);
    std::vector<std::array<double, 2>> table;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        double a, b;
        if (ls >> a >> b)
            table.push_back({a, b});
        else if (line.find_first_not_of(" \t\r") != std::string::npos)
            throw InvalidInput(path + ":" + std::to_string(line_no) + ": expected two columns");
    }
    return from_arclength_table(d, table);
}

double BoundaryTrace::min() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto* side : {&left, &right, &bottom, &top})
        for (double v : *side) m = std::min(m, v);
    return m;
}

double BoundaryTrace::max() const {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto* side : {&left, &right, &bottom, &top})
        for (double v : *side) m = std::max(m, v);
    return m;
}

BoundaryTrace BoundaryTrace::transformed(const std::function<double(double)>& fn) const {
    BoundaryTrace t = *this;
    for (auto* side : {&t.left, &t.right, &t.bottom, &t.top})
        for (double& v : *side) v = fn(v);
    return t;
}

namespace {

/// y = -Laplace(x) with inhomogeneous Dirichlet data folded into the RHS by
/// the caller; this is the homogeneous SPD operator.
struct DirichletPoisson {
    const Domain& dom;
    void operator()(std::span<const double> x, std::span<double> y) const {
        apply_dirichlet_laplacian(dom, x, y);
    }
};

} // namespace

SteadyTemperature solve_steady(const BoundaryTrace& trace, const FluidParams& params,
                               const Domain& dom, double tol) {
    if (trace.min() <= 0.0)
        throw InvalidInput("solve_steady: boundary temperatures must be positive");
    if (static_cast<int>(trace.left.size()) != dom.ny ||
        static_cast<int>(trace.bottom.size()) != dom.nx)
        throw InvalidInput("solve_steady: trace size does not match the domain");

    // Kirchhoff transform: u = G(theta) is discretely harmonic with boundary
    // data G(trace). Fold the Dirichlet data into the right-hand side.
    const int nx = dom.nx, ny = dom.ny;
    const double ihx2 = 1.0 / (dom.hx() * dom.hx());
    const double ihy2 = 1.0 / (dom.hy() * dom.hy());
    std::vector<double> rhs(static_cast<std::size_t>(nx) * ny, 0.0);
    auto g = [&](double s) { return kirchhoff_g(s, params); };
    for (int j = 0; j < ny; ++j) {
        rhs[static_cast<std::size_t>(j) * nx + 0] += 2.0 * ihx2 * g(trace.left[j]);
        rhs[static_cast<std::size_t>(j) * nx + (nx - 1)] += 2.0 * ihx2 * g(trace.right[j]);
    }
    for (int i = 0; i < nx; ++i) {
        rhs[static_cast<std::size_t>(0) * nx + i] += 2.0 * ihy2 * g(trace.bottom[i]);
        rhs[static_cast<std::size_t>(ny - 1) * nx + i] += 2.0 * ihy2 * g(trace.top[i]);
    }

    std::vector<double> u(static_cast<std::size_t>(nx) * ny, g(trace.min()));
    std::vector<double> inv_diag(u.size());
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double cx = ((i == 0) ? 2.0 : 1.0) + ((i == nx - 1) ? 2.0 : 1.0);
            const double cy = ((j == 0) ? 2.0 : 1.0) + ((j == ny - 1) ? 2.0 : 1.0);
            inv_diag[static_cast<std::size_t>(j) * nx + i] = 1.0 / (cx * ihx2 + cy * ihy2);
        }

    DirichletPoisson op{dom};
    const auto cg = conjugate_gradient(op, std::span<const double>(rhs), std::span<double>(u),
                                       inv_diag, tol, 40 * (nx + ny) * std::max(nx, ny));
    if (!cg.converged)
        throw ConvergenceFailure("solve_steady: CG stalled at relative residual " +
                                 std::to_string(cg.rel_residual) + " after " +
                                 std::to_string(cg.iterations) + " iterations");

    SteadyTemperature steady;
    steady.trace = trace;
    steady.theta_lo = trace.min();
    steady.theta_hi = trace.max();
    steady.theta_hat = ScalarField(dom);
    // Clamp into the trace range: the M-matrix solve obeys the max principle
    // up to the linear tolerance and the inverse transform adds Newton
    // round-off; the principle itself is exact.
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            steady.theta_hat(i, j) = std::clamp(
                kirchhoff_g_inv(u[static_cast<std::size_t>(j) * nx + i], params),
                steady.theta_lo, steady.theta_hi);
    return steady;
}

namespace {

double secant_g(double a, double b, const FluidParams& params) {
    if (a == b) return params.conductivity(a);
    return (kirchhoff_g(a, params) - kirchhoff_g(b, params)) / (a - b);
}

} // namespace

double weak_residual(const SteadyTemperature& steady, const FluidParams& params) {
    // The bilinear form against the unit nodal hat at cell c equals the flux
    // divergence times the cell area.
    const Domain& dom = steady.theta_hat.dom;
    const double ihx = 1.0 / dom.hx(), ihy = 1.0 / dom.hy();
    const double area = dom.cell_area();
    const auto& th = steady.theta_hat;
    double worst = 0.0;
    for (int j = 0; j < dom.ny; ++j)
        for (int i = 0; i < dom.nx; ++i) {
            const double c = th(i, j);
            const double fe = (i + 1 < dom.nx)
                                  ? secant_g(th(i + 1, j), c, params) * (th(i + 1, j) - c) * ihx
                                  : secant_g(steady.trace.right[j], c, params) *
                                        (steady.trace.right[j] - c) * 2.0 * ihx;
            const double fw = (i > 0)
                                  ? secant_g(c, th(i - 1, j), params) * (c - th(i - 1, j)) * ihx
                                  : secant_g(c, steady.trace.left[j], params) *
                                        (c - steady.trace.left[j]) * 2.0 * ihx;
            const double fn = (j + 1 < dom.ny)
                                  ? secant_g(th(i, j + 1), c, params) * (th(i, j + 1) - c) * ihy
                                  : secant_g(steady.trace.top[i], c, params) *
                                        (steady.trace.top[i] - c) * 2.0 * ihy;
            const double fs = (j > 0)
                                  ? secant_g(c, th(i, j - 1), params) * (c - th(i, j - 1)) * ihy
                                  : secant_g(c, steady.trace.bottom[i], params) *
                                        (c - steady.trace.bottom[i]) * 2.0 * ihy;
            worst = std::max(worst, std::abs((fe - fw) * ihx + (fn - fs) * ihy) * area);
        }
    return worst;
}

} // namespace nsfd
