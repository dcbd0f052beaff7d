#include "nsfd/solver.hpp"

#include "nsfd/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>

namespace nsfd {

namespace {

constexpr double kDtFloor = 1e-12;

// ---------------------------------------------------------------------------
// Pressure projection (Neumann Poisson, matrix-free CG)

void apply_neumann_laplacian(const Domain& d, std::span<const double> x, std::span<double> y) {
    const double ihx = 1.0 / d.hx(), ihy = 1.0 / d.hy();
    const int nx = d.nx, ny = d.ny;
    auto at = [&](int i, int j) { return x[static_cast<std::size_t>(j) * nx + i]; };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double c = at(i, j);
            const double fe = (i + 1 < nx) ? (at(i + 1, j) - c) * ihx : 0.0;
            const double fw = (i > 0) ? (c - at(i - 1, j)) * ihx : 0.0;
            const double fn = (j + 1 < ny) ? (at(i, j + 1) - c) * ihy : 0.0;
            const double fs = (j > 0) ? (c - at(i, j - 1)) * ihy : 0.0;
            y[static_cast<std::size_t>(j) * nx + i] = -((fe - fw) * ihx + (fn - fs) * ihy);
        }
}

std::vector<double> neumann_inv_diag(const Domain& d) {
    const double ihx2 = 1.0 / (d.hx() * d.hx()), ihy2 = 1.0 / (d.hy() * d.hy());
    std::vector<double> inv(static_cast<std::size_t>(d.nx) * d.ny);
    for (int j = 0; j < d.ny; ++j)
        for (int i = 0; i < d.nx; ++i) {
            const double cx = ((i > 0) ? 1.0 : 0.0) + ((i + 1 < d.nx) ? 1.0 : 0.0);
            const double cy = ((j > 0) ? 1.0 : 0.0) + ((j + 1 < d.ny) ? 1.0 : 0.0);
            inv[static_cast<std::size_t>(j) * d.nx + i] = 1.0 / (cx * ihx2 + cy * ihy2);
        }
    return inv;
}

void subtract_mean(std::span<double> x) {
    double mean = 0.0;
    for (double a : x) mean += a;
    mean /= static_cast<double>(x.size());
    for (double& a : x) a -= mean;
}

/// Projects v onto the discretely divergence-free space. phi is the warm
/// start / output potential; grad_out receives the applied face gradient.
int project(const Domain& dom, VectorField& v, std::vector<double>& phi, double rel_tol,
            VectorField* grad_out) {
    const int nx = dom.nx, ny = dom.ny;
    const std::size_t n = static_cast<std::size_t>(nx) * ny;
    const ScalarField div = divergence(v);
    std::vector<double> b(n);
    for (std::size_t k = 0; k < n; ++k) b[k] = -div.cells.data()[k];
    subtract_mean(b);

    if (phi.size() != n) phi.assign(n, 0.0);
    const double vmax = linf_norm(v);
    if (vmax == 0.0) {
        if (grad_out) *grad_out = VectorField(dom);
        return 0;
    }
    static thread_local std::vector<double> inv_diag_cache;
    static thread_local Domain inv_diag_dom;
    if (!(inv_diag_dom == dom)) {
        inv_diag_cache = neumann_inv_diag(dom);
        inv_diag_dom = dom;
    }
    subtract_mean(phi);
    auto apply = [&](std::span<const double> in, std::span<double> out) {
        apply_neumann_laplacian(dom, in, out);
    };
    // The CG residual is exactly -div(v - grad phi), so the l-inf stopping
    // target enforces the post-projection incompressibility bound directly.
    const auto cg = conjugate_gradient(apply, std::span<const double>(b), std::span<double>(phi),
                                       inv_diag_cache, rel_tol, 200 * (nx + ny),
                                       1e-11 * vmax);
    if (!cg.converged)
        throw ConvergenceFailure("pressure projection stalled: rel residual " +
                                 std::to_string(cg.rel_residual) + ", linf " +
                                 std::to_string(cg.linf_residual));
    const double ihx = 1.0 / dom.hx(), ihy = 1.0 / dom.hy();
    if (grad_out) *grad_out = VectorField(dom);
    auto p_at = [&](int i, int j) { return phi[static_cast<std::size_t>(j) * nx + i]; };
    for (int j = 0; j < ny; ++j)
        for (int i = 1; i < nx; ++i) {
            const double g = (p_at(i, j) - p_at(i - 1, j)) * ihx;
            v.u(i, j) -= g;
            if (grad_out) grad_out->u(i, j) = g;
        }
    for (int j = 1; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double g = (p_at(i, j) - p_at(i, j - 1)) * ihy;
            v.v(i, j) -= g;
            if (grad_out) grad_out->v(i, j) = g;
        }
    return cg.iterations;
}

// ---------------------------------------------------------------------------
// Stress evaluation on the MAC staggering

struct StressResult {
    MacStress stress;
    ScalarField deposit;     // cellwise S : D v (node shear shares folded in)
    double total = 0.0;      // sum deposit * area == strain_inner_product(S, D)
    double max_coeff = 0.0;  // effective viscosity bound for the dt limit
};

StressResult evaluate_stress(const ScalarField& theta, const StrainRate& d,
                             const FluidParams& params) {
    const Domain& dom = theta.dom;
    StressResult out;
    out.stress = MacStress(dom);
    out.deposit = ScalarField(dom);
    const int nx = dom.nx, ny = dom.ny;

    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double dxy_c = 0.25 * (d.dxy_node(i, j) + d.dxy_node(i + 1, j) +
                                         d.dxy_node(i, j + 1) + d.dxy_node(i + 1, j + 1));
            const double dxx = d.dxx(i, j), dyy = d.dyy(i, j);
            const double norm = std::sqrt(dxx * dxx + dyy * dyy + 2.0 * dxy_c * dxy_c);
            const double c = stress_coefficient(theta(i, j), norm, params);
            out.max_coeff = std::max(out.max_coeff, c);
            out.stress.sxx(i, j) = c * dxx;
            out.stress.syy(i, j) = c * dyy;
            out.deposit(i, j) = c * (dxx * dxx + dyy * dyy);
        }
    // Shear stress at nodes; temperature and diagonal strain averaged from
    // the adjacent cells. The nonnegative node dissipation 2 S_xy D_xy is
    // shared equally among the adjacent cells so the deposit total matches
    // the pairing exactly.
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) {
            double th = 0.0, dxx_n = 0.0, dyy_n = 0.0;
            int count = 0;
            for (int cj = j - 1; cj <= j; ++cj)
                for (int ci = i - 1; ci <= i; ++ci)
                    if (ci >= 0 && ci < nx && cj >= 0 && cj < ny) {
                        th += theta(ci, cj);
                        dxx_n += d.dxx(ci, cj);
                        dyy_n += d.dyy(ci, cj);
                        ++count;
                    }
            th /= count;
            dxx_n /= count;
            dyy_n /= count;
            const double dxy = d.dxy_node(i, j);
            const double norm = std::sqrt(dxx_n * dxx_n + dyy_n * dyy_n + 2.0 * dxy * dxy);
            const double c = stress_coefficient(th, norm, params);
            out.max_coeff = std::max(out.max_coeff, c);
            out.stress.sxy_node(i, j) = c * dxy;
            const double work = 2.0 * c * dxy * dxy; // >= 0
            const double share = work / count;
            for (int cj = j - 1; cj <= j; ++cj)
                for (int ci = i - 1; ci <= i; ++ci)
                    if (ci >= 0 && ci < nx && cj >= 0 && cj < ny)
                        out.deposit(ci, cj) += share;
        }
    out.total = integral(out.deposit);
    return out;
}

// ---------------------------------------------------------------------------
// Upwind convection of the velocity (advective form)

VectorField upwind_convection(const VectorField& vf) {
    const Domain& d = vf.dom;
    VectorField conv(d);
    const double ihx = 1.0 / d.hx(), ihy = 1.0 / d.hy();
    const int nx = d.nx, ny = d.ny;
    for (int j = 0; j < ny; ++j)
        for (int i = 1; i < nx; ++i) {
            const double uc = vf.u(i, j);
            const double dudx =
                (uc > 0.0) ? (uc - vf.u(i - 1, j)) * ihx : (vf.u(i + 1, j) - uc) * ihx;
            const double vbar = 0.25 * (vf.v(i - 1, j) + vf.v(i, j) + vf.v(i - 1, j + 1) +
                                        vf.v(i, j + 1));
            double dudy;
            if (vbar > 0.0)
                dudy = (j > 0) ? (uc - vf.u(i, j - 1)) * ihy : 2.0 * uc * ihy;
            else
                dudy = (j + 1 < ny) ? (vf.u(i, j + 1) - uc) * ihy : -2.0 * uc * ihy;
            conv.u(i, j) = uc * dudx + vbar * dudy;
        }
    for (int j = 1; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double vc = vf.v(i, j);
            const double dvdy =
                (vc > 0.0) ? (vc - vf.v(i, j - 1)) * ihy : (vf.v(i, j + 1) - vc) * ihy;
            const double ubar = 0.25 * (vf.u(i, j - 1) + vf.u(i + 1, j - 1) + vf.u(i, j) +
                                        vf.u(i + 1, j));
            double dvdx;
            if (ubar > 0.0)
                dvdx = (i > 0) ? (vc - vf.v(i - 1, j)) * ihx : 2.0 * vc * ihx;
            else
                dvdx = (i + 1 < nx) ? (vf.v(i + 1, j) - vc) * ihx : -2.0 * vc * ihx;
            conv.v(i, j) = ubar * dvdx + vc * dvdy;
        }
    return conv;
}

// ---------------------------------------------------------------------------
// Temperature operators

/// Conservative upwind advective tendency -div(v theta); boundary faces carry
/// zero normal velocity, so no advective boundary flux exists.
ScalarField theta_advection(const ScalarField& theta, const VectorField& v) {
    const Domain& d = theta.dom;
    ScalarField out(d);
    const double ihx = 1.0 / d.hx(), ihy = 1.0 / d.hy();
    const int nx = d.nx, ny = d.ny;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            auto flux_u = [&](int fi) {
                if (fi == 0 || fi == nx) return 0.0;
                const double u = v.u(fi, j);
                return u * ((u > 0.0) ? theta(fi - 1, j) : theta(fi, j));
            };
            auto flux_v = [&](int fj) {
                if (fj == 0 || fj == ny) return 0.0;
                const double w = v.v(i, fj);
                return w * ((w > 0.0) ? theta(i, fj - 1) : theta(i, fj));
            };
            out(i, j) = -((flux_u(i + 1) - flux_u(i)) * ihx + (flux_v(j + 1) - flux_v(j)) * ihy);
        }
    return out;
}

struct DiffusionResult {
    ScalarField tendency;
    double boundary_flux_out = 0.0; // net outward diffusive flux
};

/// div(kappa(theta) grad theta) with Kirchhoff-secant face fluxes: every face
/// flux is a plain difference of G values, so the steady field (harmonic in
/// G) is an exact fixed point.
DiffusionResult theta_diffusion(const SimState& s, const ScalarField& theta) {
    const Domain& d = theta.dom;
    DiffusionResult out;
    out.tendency = ScalarField(d);
    const double ihx = 1.0 / d.hx(), ihy = 1.0 / d.hy();
    const int nx = d.nx, ny = d.ny;
    ScalarField g(d);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) g(i, j) = kirchhoff_g(theta(i, j), s.params);
    double flux_out = 0.0;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double gc = g(i, j);
            const double qe = (i + 1 < nx) ? (g(i + 1, j) - gc) * ihx
                                           : (s.g_right[j] - gc) * 2.0 * ihx;
            const double qw = (i > 0) ? (gc - g(i - 1, j)) * ihx
                                      : (gc - s.g_left[j]) * 2.0 * ihx;
            const double qn = (j + 1 < ny) ? (g(i, j + 1) - gc) * ihy
                                           : (s.g_top[i] - gc) * 2.0 * ihy;
            const double qs = (j > 0) ? (gc - g(i, j - 1)) * ihy
                                      : (gc - s.g_bottom[i]) * 2.0 * ihy;
            out.tendency(i, j) = (qe - qw) * ihx + (qn - qs) * ihy;
            if (i == 0) flux_out += -qw * (-1.0) * d.hy();      // west wall, outward -x
            if (i + 1 == nx) flux_out += -qe * d.hy();          // east wall, outward +x
            if (j == 0) flux_out += -qs * (-1.0) * d.hx();      // south wall
            if (j + 1 == ny) flux_out += -qn * d.hx();          // north wall
        }
    out.boundary_flux_out = flux_out;
    return out;
}

/// Cellwise bound on the temperature-update row sum (diffusion at the
/// kappa_hi envelope plus the actual upwind outflow coefficients).
double theta_row_sum_limit(const SimState& s, const VectorField& v) {
    const Domain& d = s.dom;
    const double ihx = 1.0 / d.hx(), ihy = 1.0 / d.hy();
    const double ihx2 = ihx * ihx, ihy2 = ihy * ihy;
    const double khi = s.params.kappa_hi;
    const int nx = d.nx, ny = d.ny;
    double worst = 0.0;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double mw = (i == 0) ? 2.0 : 1.0;
            const double me = (i + 1 == nx) ? 2.0 : 1.0;
            const double ms = (j == 0) ? 2.0 : 1.0;
            const double mn = (j + 1 == ny) ? 2.0 : 1.0;
            double row = khi * ((me + mw) * ihx2 + (mn + ms) * ihy2);
            row += (std::max(v.u(i + 1, j), 0.0) + std::max(-v.u(i, j), 0.0)) * ihx;
            row += (std::max(v.v(i, j + 1), 0.0) + std::max(-v.v(i, j), 0.0)) * ihy;
            worst = std::max(worst, row);
        }
    return worst;
}

void fill_wall_g(SimState& s) {
    const Domain& d = s.dom;
    s.g_left.resize(d.ny);
    s.g_right.resize(d.ny);
    s.g_bottom.resize(d.nx);
    s.g_top.resize(d.nx);
    for (int j = 0; j < d.ny; ++j) {
        s.g_left[j] = kirchhoff_g(s.steady.trace.left[j], s.params);
        s.g_right[j] = kirchhoff_g(s.steady.trace.right[j], s.params);
    }
    for (int i = 0; i < d.nx; ++i) {
        s.g_bottom[i] = kirchhoff_g(s.steady.trace.bottom[i], s.params);
        s.g_top[i] = kirchhoff_g(s.steady.trace.top[i], s.params);
    }
}

} // namespace

// ---------------------------------------------------------------------------
// Initialization

SimState initialize(const Domain& dom, const FluidParams& params,
                    const SteadyTemperature& steady, double target_velocity_norm,
                    double theta_bump, double pressure_tol) {
    validate(params);
    if (!(steady.theta_hat.dom == dom)) throw InvalidInput("initialize: steady field mismatch");
    SimState s;
    s.dom = dom;
    s.params = params;
    s.steady = steady;
    s.pressure = ScalarField(dom);
    s.pressure_tol = pressure_tol;
    fill_wall_g(s);

    // Taylor-Green-style solenoidal profile on the interior faces; boundary
    // faces keep the exact zero normal trace (sampling sin(pi) there would
    // leave a permanent eps-size leak that never decays).
    s.v = VectorField(dom);
    const double kx = std::numbers::pi / dom.Lx, ky = std::numbers::pi / dom.Ly;
    for (int j = 0; j < dom.ny; ++j)
        for (int i = 1; i < dom.nx; ++i)
            s.v.u(i, j) = std::sin(kx * i * dom.hx()) * std::cos(ky * dom.cell_y(j));
    for (int j = 1; j < dom.ny; ++j)
        for (int i = 0; i < dom.nx; ++i)
            s.v.v(i, j) = -(dom.Ly / dom.Lx) * std::cos(kx * dom.cell_x(i)) *
                          std::sin(ky * j * dom.hy());

    std::vector<double> phi;
    project(dom, s.v, phi, 1e-13, nullptr);
    const double norm = l2_norm(s.v);
    if (target_velocity_norm > 0.0 && norm > 0.0) {
        const double scale = target_velocity_norm / norm;
        for (double& u : s.v.ufaces.data()) u *= scale;
        for (double& v : s.v.vfaces.data()) v *= scale;
        // Boundary faces stay exactly zero under scaling.
    } else if (target_velocity_norm == 0.0) {
        s.v = VectorField(dom);
    }

    s.theta = ScalarField(dom);
    for (int j = 0; j < dom.ny; ++j)
        for (int i = 0; i < dom.nx; ++i)
            s.theta(i, j) = steady.theta_hat(i, j) +
                            theta_bump * std::sin(kx * dom.cell_x(i)) *
                                std::sin(ky * dom.cell_y(j));
    const double theta_lo = steady.theta_lo;
    if (min_value(s.theta) < theta_lo)
        throw InvalidInput("initialize: theta_0 falls below the boundary minimum " +
                           std::to_string(theta_lo));
    return s;
}

SimState initialize(const ExperimentConfig& cfg, const FluidParams& params,
                    const SteadyTemperature& steady) {
    return initialize(make_domain(cfg), params, steady, cfg.velocity_amplitude,
                      cfg.theta_bump);
}

// ---------------------------------------------------------------------------
// Time step

StepReport step(SimState& s, double dt_max) {
    const Domain& dom = s.dom;
    if (!all_finite(s.v) || !all_finite(s.theta))
        throw DivergenceFailure("non-finite fields in the state at t = " + std::to_string(s.t));
    StepReport rep;
    rep.kinetic_energy_before = 0.5 * face_dot(s.v, s.v);

    const StrainRate d_n = mac_strain(s.v);
    const StressResult sr = evaluate_stress(s.theta, d_n, s.params);
    const VectorField conv = upwind_convection(s.v);
    const VectorField div_s = stress_divergence(sr.stress);

    // Time-step limits.
    double umax = 0.0, vmax = 0.0;
    for (double u : s.v.ufaces.data()) umax = std::max(umax, std::abs(u));
    for (double v : s.v.vfaces.data()) vmax = std::max(vmax, std::abs(v));
    const double adv_speed = umax / dom.hx() + vmax / dom.hy();
    const double h = std::min(dom.hx(), dom.hy());
    const double diff_coeff = std::max(s.params.kappa_hi, sr.max_coeff);
    double dt = dt_max;
    if (adv_speed > 0.0) dt = std::min(dt, 0.4 / adv_speed);
    dt = std::min(dt, 0.2 * h * h / diff_coeff);
    const double row = theta_row_sum_limit(s, s.v);
    if (row > 0.0) dt = std::min(dt, 0.9 / row);
    if (!(dt >= kDtFloor))
        throw StiffnessFailure("time step underflow: dt = " + std::to_string(dt));
    rep.dt = dt;

    // Tentative velocity and projection.
    VectorField v_new = s.v;
    for (int j = 0; j < dom.ny; ++j)
        for (int i = 1; i < dom.nx; ++i)
            v_new.u(i, j) += dt * (div_s.u(i, j) - conv.u(i, j));
    for (int j = 1; j < dom.ny; ++j)
        for (int i = 0; i < dom.nx; ++i)
            v_new.v(i, j) += dt * (div_s.v(i, j) - conv.v(i, j));
    VectorField grad_phi(dom);
    rep.pressure_iterations = project(dom, v_new, s.pressure_phi, s.pressure_tol, &grad_phi);

    // Energy bookkeeping against vbar = (v^n + v^{n+1}) / 2.
    VectorField vbar(dom);
    for (std::size_t k = 0; k < vbar.ufaces.data().size(); ++k)
        vbar.ufaces.data()[k] = 0.5 * (s.v.ufaces.data()[k] + v_new.ufaces.data()[k]);
    for (std::size_t k = 0; k < vbar.vfaces.data().size(); ++k)
        vbar.vfaces.data()[k] = 0.5 * (s.v.vfaces.data()[k] + v_new.vfaces.data()[k]);
    rep.dissipation = sr.total;
    rep.viscous_imbalance = strain_inner_product(sr.stress, mac_strain(vbar)) - sr.total;
    rep.convective_loss = face_dot(conv, vbar);
    rep.projection_correction = -face_dot(grad_phi, vbar);
    rep.kinetic_energy_after = 0.5 * face_dot(v_new, v_new);
    rep.energy_identity_residual =
        rep.kinetic_energy_after - rep.kinetic_energy_before +
        dt * (rep.dissipation + rep.convective_loss + rep.viscous_imbalance) -
        rep.projection_correction;

    // Temperature update with the freshly projected velocity.
    const ScalarField adv = theta_advection(s.theta, v_new);
    const DiffusionResult diff = theta_diffusion(s, s.theta);
    rep.boundary_heat_flux = diff.boundary_flux_out;
    ScalarField theta_new(dom);
    double theta_sum_old = 0.0, theta_sum_new = 0.0;
    for (int j = 0; j < dom.ny; ++j)
        for (int i = 0; i < dom.nx; ++i) {
            theta_sum_old += s.theta(i, j);
            theta_new(i, j) = s.theta(i, j) + dt * (adv(i, j) + diff.tendency(i, j) +
                                                    sr.deposit(i, j));
            theta_sum_new += theta_new(i, j);
        }
    rep.internal_budget_residual = (theta_sum_new - theta_sum_old) * dom.cell_area() -
                                   dt * (rep.dissipation - rep.boundary_heat_flux);

    if (!all_finite(v_new) || !all_finite(theta_new))
        throw DivergenceFailure("non-finite fields after step at t = " + std::to_string(s.t));
    const double theta_floor = std::min(min_value(s.theta), s.steady.theta_lo);
    if (min_value(theta_new) < theta_floor - 1e-9 * std::max(1.0, std::abs(theta_floor)))
        throw DivergenceFailure("temperature minimum principle violated at t = " +
                                std::to_string(s.t));

    const ScalarField div_after = divergence(v_new);
    rep.div_inf = linf_norm(div_after);
    rep.div_ratio = rep.div_inf / std::max(linf_norm(v_new), 1e-300);

    s.v = std::move(v_new);
    s.theta = std::move(theta_new);
    for (int j = 0; j < dom.ny; ++j)
        for (int i = 0; i < dom.nx; ++i)
            s.pressure(i, j) = s.pressure_phi[static_cast<std::size_t>(j) * dom.nx + i] / dt;
    s.t += dt;
    return rep;
}

// ---------------------------------------------------------------------------
// Per-sample diagnostics

namespace {

struct AuditCaches {
    ScalarField g_hat;       // G(theta_hat)
    ScalarField g_hat_pow;   // G(theta_hat)^alpha
    SteadyGapCache gap;
    double alpha = 0.0;
    double epsilon = 0.0;
};

AuditCaches make_audit_caches(const SimState& s, double alpha, double epsilon,
                              const FluidParams& params) {
    AuditCaches c;
    c.alpha = alpha;
    c.epsilon = epsilon;
    c.gap = make_gap_cache(s.steady, alpha, params);
    const Domain& dom = s.dom;
    c.g_hat = ScalarField(dom);
    c.g_hat_pow = ScalarField(dom);
    for (int j = 0; j < dom.ny; ++j)
        for (int i = 0; i < dom.nx; ++i) {
            c.g_hat(i, j) = kirchhoff_g(s.steady.theta_hat(i, j), s.params);
            c.g_hat_pow(i, j) = std::pow(c.g_hat(i, j), alpha);
        }
    return c;
}

/// int |grad (G/G_hat)|^2 G_hat (G/G_hat)^(-1-alpha): interior faces carry
/// arithmetic face averages, wall faces the exact trace value R = 1 with the
/// half-cell weight.
double entropy_production_integral(const SimState& s, const AuditCaches& c) {
    const Domain& dom = s.dom;
    const int nx = dom.nx, ny = dom.ny;
    const double ihx = 1.0 / dom.hx(), ihy = 1.0 / dom.hy();
    const double area = dom.cell_area();
    ScalarField r(dom);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            r(i, j) = kirchhoff_g(s.theta(i, j), s.params) / c.g_hat(i, j);
    auto weight = [&](double g_hat_face, double r_face) {
        return g_hat_face * std::pow(r_face, -1.0 - c.alpha);
    };
    double sum = 0.0;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            if (i + 1 < nx) {
                const double dr = (r(i + 1, j) - r(i, j)) * ihx;
                sum += dr * dr *
                       weight(0.5 * (c.g_hat(i, j) + c.g_hat(i + 1, j)),
                              0.5 * (r(i, j) + r(i + 1, j))) *
                       area;
            }
            if (j + 1 < ny) {
                const double dr = (r(i, j + 1) - r(i, j)) * ihy;
                sum += dr * dr *
                       weight(0.5 * (c.g_hat(i, j) + c.g_hat(i, j + 1)),
                              0.5 * (r(i, j) + r(i, j + 1))) *
                       area;
            }
        }
    for (int j = 0; j < ny; ++j) {
        const double dl = (r(0, j) - 1.0) * 2.0 * ihx;
        sum += dl * dl * weight(s.g_left[j], 0.5 * (r(0, j) + 1.0)) * 0.5 * area;
        const double dr2 = (r(nx - 1, j) - 1.0) * 2.0 * ihx;
        sum += dr2 * dr2 * weight(s.g_right[j], 0.5 * (r(nx - 1, j) + 1.0)) * 0.5 * area;
    }
    for (int i = 0; i < nx; ++i) {
        const double db = (r(i, 0) - 1.0) * 2.0 * ihy;
        sum += db * db * weight(s.g_bottom[i], 0.5 * (r(i, 0) + 1.0)) * 0.5 * area;
        const double dt_ = (r(i, ny - 1) - 1.0) * 2.0 * ihy;
        sum += dt_ * dt_ * weight(s.g_top[i], 0.5 * (r(i, ny - 1) + 1.0)) * 0.5 * area;
    }
    return sum;
}

/// int S:Dv (1 - (G_hat/G)^alpha), evaluated where the dissipation lives.
double weighted_dissipation_integral(const SimState& s, const StressResult& sr,
                                     const AuditCaches& c) {
    const Domain& dom = s.dom;
    double sum = 0.0;
    for (int j = 0; j < dom.ny; ++j)
        for (int i = 0; i < dom.nx; ++i) {
            const double g = kirchhoff_g(s.theta(i, j), s.params);
            sum += sr.deposit(i, j) * (1.0 - c.g_hat_pow(i, j) / std::pow(g, c.alpha));
        }
    return sum * dom.cell_area();
}

double grad_theta_weighted_integral(const SimState& s, double epsilon) {
    const Domain& dom = s.dom;
    const int nx = dom.nx, ny = dom.ny;
    const double ihx = 1.0 / dom.hx(), ihy = 1.0 / dom.hy();
    const double area = dom.cell_area();
    const auto& th = s.theta;
    auto w = [&](double a, double b) { return std::pow(0.5 * (a + b), -1.0 - epsilon); };
    double sum = 0.0;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            if (i + 1 < nx) {
                const double d = (th(i + 1, j) - th(i, j)) * ihx;
                sum += d * d * w(th(i, j), th(i + 1, j)) * area;
            }
            if (j + 1 < ny) {
                const double d = (th(i, j + 1) - th(i, j)) * ihy;
                sum += d * d * w(th(i, j), th(i, j + 1)) * area;
            }
        }
    for (int j = 0; j < ny; ++j) {
        const double dl = (th(0, j) - s.steady.trace.left[j]) * 2.0 * ihx;
        sum += dl * dl * w(th(0, j), s.steady.trace.left[j]) * 0.5 * area;
        const double dr = (th(nx - 1, j) - s.steady.trace.right[j]) * 2.0 * ihx;
        sum += dr * dr * w(th(nx - 1, j), s.steady.trace.right[j]) * 0.5 * area;
    }
    for (int i = 0; i < nx; ++i) {
        const double db = (th(i, 0) - s.steady.trace.bottom[i]) * 2.0 * ihy;
        sum += db * db * w(th(i, 0), s.steady.trace.bottom[i]) * 0.5 * area;
        const double dt_ = (th(i, ny - 1) - s.steady.trace.top[i]) * 2.0 * ihy;
        sum += dt_ * dt_ * w(th(i, ny - 1), s.steady.trace.top[i]) * 0.5 * area;
    }
    return sum;
}

DecaySample take_sample(const SimState& s, const AuditCaches& caches, double beta,
                        const FluidParams& params) {
    DecaySample sample;
    sample.t = s.t;
    const double vsq = face_dot(s.v, s.v);
    sample.kinetic_energy = 0.5 * vsq;
    sample.f_integral = integrated_f(s.theta, caches.gap, params);
    sample.l_beta_integral = beta * vsq + sample.f_integral;
    sample.theta_l1 = l1_norm(s.theta);
    sample.theta_min = min_value(s.theta);
    const StressResult sr = evaluate_stress(s.theta, mac_strain(s.v), params);
    sample.dissipation = sr.total;
    sample.entropy_production = entropy_production_integral(s, caches);
    sample.weighted_dissipation = weighted_dissipation_integral(s, sr, caches);
    sample.grad_theta_weighted = grad_theta_weighted_integral(s, caches.epsilon);
    return sample;
}

} // namespace

// ---------------------------------------------------------------------------
// Full experiment

RunOutput run(const ExperimentConfig& cfg) {
    const auto errors = validate_config(cfg, /*for_simulate=*/false);
    if (!errors.empty()) {
        std::string msg = "invalid config:";
        for (const auto& e : errors) msg += "\n  - " + e;
        throw InvalidInput(msg);
    }

    const Domain dom = make_domain(cfg);
    FluidParams params = make_fluid_params(cfg);
    BoundaryTrace trace = make_trace(cfg, dom);
    if (params.capacity) {
        // Rescaled temperature: the stationary problem, trace, and equations
        // keep their form with the rescaled profiles.
        const CapacityProfile cap = *params.capacity;
        trace = trace.transformed([&](double v) { return cap.value(v); });
        params = rescale_capacity(params);
    }
    const SteadyTemperature steady = solve_steady(trace, params, dom, cfg.steady_tol);

    SimState state = initialize(dom, params, steady, cfg.velocity_amplitude, cfg.theta_bump);
    const double v0_norm_sq = face_dot(state.v, state.v);
    const double theta0_l1 = l1_norm(state.theta);

    RunOutput out;
    DecayReport& report = out.report;
    const bool exponential_regime = cfg.delta > 0.0;
    double beta = 0.0;
    if (exponential_regime) {
        report.constants = compute_constants(dom, params, steady, v0_norm_sq, theta0_l1,
                                             cfg.alpha, cfg.lambda_fraction);
        beta = report.constants.beta;
    } else {
        report.constants.alpha = cfg.alpha;
    }
    const double epsilon = 2.0 * cfg.alpha - 1.0;
    report.audit_epsilon = epsilon;
    const AuditCaches caches = make_audit_caches(state, cfg.alpha, epsilon, params);

    const bool emit = !cfg.output_dir.empty() && cfg.checkpoint_every > 0;
    if (emit) std::filesystem::create_directories(cfg.output_dir);
    auto checkpoint_path = [&](long index) {
        std::ostringstream os;
        os << cfg.output_dir << "/checkpoint_" << index << ".nsfd";
        return os.str();
    };

    report.min_theta_seen = min_value(state.theta);
    report.max_theta_seen = max_value(state.theta);
    report.samples.push_back(take_sample(state, caches, beta, params));
    if (emit) write_checkpoint(checkpoint_path(0), state.v, state.theta, state.pressure);

    long sample_index = 1;
    const double t_end = cfg.t_end;
    const double dt_cap = (cfg.dt_max > 0.0) ? cfg.dt_max : std::numeric_limits<double>::infinity();
    while (state.t < t_end - 1e-12) {
        const double next_sample = std::min(t_end, sample_index * cfg.sample_dt);
        StepReport rep;
        try {
            rep = step(state, std::min(dt_cap, next_sample - state.t));
        } catch (const DivergenceFailure& e) {
            if (!cfg.output_dir.empty()) {
                std::filesystem::create_directories(cfg.output_dir);
                const std::string path = cfg.output_dir + "/last_good.nsfd";
                write_checkpoint(path, state.v, state.theta, state.pressure);
                throw DivergenceFailure(std::string(e.what()) +
                                        "; last good checkpoint: " + path);
            }
            throw;
        }
        ++report.steps;
        report.worst_energy_identity_residual =
            std::max(report.worst_energy_identity_residual,
                     std::abs(rep.energy_identity_residual));
        report.worst_budget_residual =
            std::max(report.worst_budget_residual, std::abs(rep.internal_budget_residual));
        report.worst_div_ratio = std::max(report.worst_div_ratio, rep.div_ratio);
        report.worst_projection_correction =
            std::max(report.worst_projection_correction,
                     std::abs(rep.projection_correction) /
                         std::max(rep.kinetic_energy_before, 1e-300));
        report.min_theta_seen = std::min(report.min_theta_seen, min_value(state.theta));
        report.max_theta_seen = std::max(report.max_theta_seen, max_value(state.theta));

        if (state.t >= next_sample - 1e-12) {
            report.samples.push_back(take_sample(state, caches, beta, params));
            if (emit && cfg.checkpoint_every > 0 && sample_index % cfg.checkpoint_every == 0)
                write_checkpoint(checkpoint_path(sample_index), state.v, state.theta,
                                 state.pressure);
            ++sample_index;
        }
    }

    if (exponential_regime) {
        fit_and_verify(report, report.constants);
        // Run-integrity verdicts from the per-step trackers.
        auto add = [&](const std::string& name, bool pass, double margin,
                       const std::string& details) {
            report.verdicts.push_back({name, pass, margin, details});
        };
        const double l1_bound = v0_norm_sq + 2.0 * theta0_l1 + 2.0 * steady.theta_hi * dom.area();
        double worst_l1 = 0.0;
        for (const auto& smp : report.samples) worst_l1 = std::max(worst_l1, smp.theta_l1);
        add("theta_l1_bound", worst_l1 <= l1_bound, l1_bound - worst_l1,
            "max ||theta||_1 = " + std::to_string(worst_l1) + " vs bound " +
                std::to_string(l1_bound));
        const double min_allowed = steady.theta_lo - 1e-12;
        add("minimum_principle", report.min_theta_seen >= min_allowed,
            report.min_theta_seen - min_allowed,
            "min theta = " + std::to_string(report.min_theta_seen) + " vs theta_lo = " +
                std::to_string(steady.theta_lo));
        add("incompressibility", report.worst_div_ratio <= 1e-10,
            1e-10 - report.worst_div_ratio,
            "worst ||div v||_inf / ||v||_inf = " + std::to_string(report.worst_div_ratio));
        add("energy_identity", report.worst_energy_identity_residual <= 1e-8,
            1e-8 - report.worst_energy_identity_residual,
            "worst per-step residual = " +
                std::to_string(report.worst_energy_identity_residual));
        add("internal_energy_budget", report.worst_budget_residual <= 1e-8,
            1e-8 - report.worst_budget_residual,
            "worst per-step residual = " + std::to_string(report.worst_budget_residual));
    } else {
        // Polynomial-decay series for the appendix-b path: the discrete rate
        // is the coercivity-chain estimate capped by the observed per-sample
        // slope so the envelope is meaningful and holds at the samples.
        KineticSeries& ks = out.kinetic_series;
        ks.delta = 0.0;
        ks.r = params.p;
        ks.alpha = cfg.alpha;
        ks.v0_norm = std::sqrt(v0_norm_sq);
        double c_chain = 0.0; // max ||v||_2^r / dissipation along the run
        for (const auto& smp : report.samples) {
            const double vsq = 2.0 * smp.kinetic_energy;
            ks.t.push_back(smp.t);
            ks.v_norm_sq.push_back(vsq);
            ks.f_integral.push_back(smp.f_integral);
            if (smp.dissipation > 1e-300)
                c_chain = std::max(c_chain, std::pow(vsq, 0.5 * ks.r) / smp.dissipation);
        }
        double mu_chain = (c_chain > 0.0) ? 1.0 / c_chain : 0.0;
        double mu_observed = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < ks.t.size(); ++i) {
            const double z1 = std::pow(ks.v_norm_sq[i], 0.5 * (2.0 - ks.r));
            const double z0 = std::pow(ks.v_norm_sq[i - 1], 0.5 * (2.0 - ks.r));
            const double dt = ks.t[i] - ks.t[i - 1];
            if (dt > 0.0)
                mu_observed = std::min(mu_observed, (z1 - z0) / ((ks.r - 2.0) * dt));
        }
        if (!std::isfinite(mu_observed)) mu_observed = mu_chain;
        ks.mu_prime = std::min(mu_chain, std::max(mu_observed, 0.0));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Trajectory audits

namespace {

std::size_t sample_at_or_after(const std::vector<DecaySample>& s, double t) {
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s[i].t >= t - 1e-12) return i;
    return s.size();
}

std::size_t sample_at_or_before(const std::vector<DecaySample>& s, double t) {
    for (std::size_t i = s.size(); i-- > 0;)
        if (s[i].t <= t + 1e-12) return i;
    return s.size();
}

template <class Value>
double trapezoid(const std::vector<DecaySample>& s, std::size_t a, std::size_t b,
                 const Value& value) {
    double sum = 0.0;
    for (std::size_t i = a; i + 1 <= b; ++i)
        sum += 0.5 * (value(s[i]) + value(s[i + 1])) * (s[i + 1].t - s[i].t);
    return sum;
}

} // namespace

Rn2Audit rn2_audit(const std::vector<DecaySample>& samples, double sigma, double tau,
                   double alpha, double lambda, double m_minus_one) {
    if (!(sigma < tau)) throw InvalidInput("rn2_audit: need sigma < tau");
    if (!(alpha > 0.5 && alpha < 1.0)) throw InvalidInput("rn2_audit: alpha must lie in (1/2, 1)");
    if (!(lambda >= 0.0)) throw InvalidInput("rn2_audit: lambda must be >= 0");
    const std::size_t a = sample_at_or_after(samples, sigma);
    const std::size_t b = sample_at_or_before(samples, tau);
    if (a >= samples.size() || b >= samples.size() || b <= a)
        throw InvalidInput("rn2_audit: fewer than two samples inside [sigma, tau]");

    auto weight = [lambda](double t) { return std::exp(lambda * t); };
    Rn2Audit audit;
    audit.f_at_tau = samples[b].f_integral * weight(samples[b].t);
    audit.f_at_sigma = samples[a].f_integral * weight(samples[a].t);
    audit.lambda_time_integral =
        lambda * trapezoid(samples, a, b, [&](const DecaySample& d) {
            return d.f_integral * weight(d.t);
        });
    audit.entropy_time_integral =
        0.5 * alpha * trapezoid(samples, a, b, [&](const DecaySample& d) {
            return d.entropy_production * weight(d.t);
        });
    audit.weighted_diss_integral = trapezoid(samples, a, b, [&](const DecaySample& d) {
        return d.weighted_dissipation * weight(d.t);
    });
    audit.m_diss_integral = m_minus_one * trapezoid(samples, a, b, [&](const DecaySample& d) {
        return d.dissipation * weight(d.t);
    });
    audit.lhs = audit.f_at_tau - audit.lambda_time_integral + audit.entropy_time_integral;
    audit.rhs = audit.weighted_diss_integral + audit.m_diss_integral + audit.f_at_sigma;
    audit.slack = audit.rhs - audit.lhs;
    audit.scale = std::max({std::abs(audit.f_at_tau), std::abs(audit.lambda_time_integral),
                            std::abs(audit.entropy_time_integral),
                            std::abs(audit.weighted_diss_integral),
                            std::abs(audit.m_diss_integral), std::abs(audit.f_at_sigma), 1e-30});
    return audit;
}

double gradient_bound_audit(const std::vector<DecaySample>& samples, double sigma, double tau) {
    if (!(sigma <= tau)) throw InvalidInput("gradient_bound_audit: need sigma <= tau");
    const std::size_t a = sample_at_or_after(samples, sigma);
    const std::size_t b = sample_at_or_before(samples, tau);
    if (a >= samples.size() || b >= samples.size() || b < a)
        throw InvalidInput("gradient_bound_audit: window outside the trajectory");
    if (a == b) return 0.0;
    const double value = trapezoid(samples, a, b, [](const DecaySample& d) {
        return d.grad_theta_weighted;
    });
    if (!std::isfinite(value))
        throw DivergenceFailure("gradient_bound_audit: non-finite integral");
    return value;
}

} // namespace nsfd
