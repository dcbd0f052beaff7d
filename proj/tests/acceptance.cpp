// Acceptance suite: runs every quantitative criterion end to end and prints
// one pass/fail line each. Exit code 0 iff all pass.
//
//  1. kinetic exponential decay under the discrete rate (default scenario)
//  2. combined Lyapunov quantity decays at lambda (5% tolerance)
//  3. temperature minimum principle on every acceptance run
//  4. L1 temperature bound at every sample (exact inequality)
//  5. incompressibility after every projection
//  6. per-step energy and internal-budget bookkeeping
//  7. gap-function suites at 1e5 seeded samples each
//  8. primitive bounds and cut-off ladders
//  9. steady solver: exact cases, curved-harmonic convergence, weak residual
// 10. discrete eigenvalue rate vs the analytic value
// 11. delta = 0 polynomial envelope (decay exponent reported)
// 12. renormalized-entropy audit slack
// 13. byte-identical outputs for identical seeds

#include "nsfd/config.hpp"
#include "nsfd/inequality_lab.hpp"
#include "nsfd/report.hpp"
#include "nsfd/solver.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace nsfd;

namespace {

int failures = 0;

void report_line(int criterion, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", criterion,
                name.c_str(), detail.c_str());
    if (!pass) ++failures;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

const char* kTracePath = "acceptance_trace.txt";

ExperimentConfig default_scenario() {
    ExperimentConfig cfg;
    cfg.Lx = cfg.Ly = 1.0;
    cfg.nx = cfg.ny = 32;
    cfg.p = 2.5;
    cfg.delta = 1.0;
    cfg.kappa_lo = 1.0;
    cfg.kappa_hi = 2.0;
    cfg.trace = std::string("table:") + kTracePath;
    cfg.velocity_amplitude = 1.0;
    cfg.theta_bump = 0.5;
    cfg.alpha = 0.6;
    cfg.lambda_fraction = 0.5;
    cfg.t_end = 1.0;
    cfg.sample_dt = 0.01;
    cfg.seed = 42;
    cfg.output_dir.clear();
    return cfg;
}

struct RunChecks {
    double worst_min_theta_margin = std::numeric_limits<double>::infinity();
    double worst_l1_margin = std::numeric_limits<double>::infinity();
    double worst_div = 0.0;
    double worst_energy = 0.0;
    double worst_budget = 0.0;

    void fold(const DecayReport& report, double theta_lo, double theta_hi, double area) {
        worst_min_theta_margin = std::min(worst_min_theta_margin,
                                          report.min_theta_seen - (theta_lo - 1e-12));
        const double v0sq = 2.0 * report.samples.front().kinetic_energy;
        const double th0l1 = report.samples.front().theta_l1;
        const double bound = v0sq + 2.0 * th0l1 + 2.0 * theta_hi * area;
        for (const auto& s : report.samples)
            worst_l1_margin = std::min(worst_l1_margin, bound - s.theta_l1);
        worst_div = std::max(worst_div, report.worst_div_ratio);
        worst_energy = std::max(worst_energy, report.worst_energy_identity_residual);
        worst_budget = std::max(worst_budget, report.worst_budget_residual);
    }
};

} // namespace

int main() {
    {
        std::ofstream trace(kTracePath);
        trace << "0.00 1.0\n0.25 2.0\n0.50 2.0\n0.75 1.0\n";
    }
    RunChecks checks;

    // ------------------------------------------------------------------
    // Default scenario run (criteria 1, 2, 3, 4, 5, 6, 12).
    const ExperimentConfig cfg = default_scenario();
    const auto t0 = std::chrono::steady_clock::now();
    const RunOutput def = run(cfg);
    const double run_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const DecayReport& rep = def.report;
    const DecayConstants& c = rep.constants;
    checks.fold(rep, 1.0, 2.0, 1.0);

    {
        double worst = 0.0;
        for (std::size_t a = 0; a < rep.samples.size(); ++a) {
            const double ea = rep.samples[a].kinetic_energy;
            if (ea <= 1e-300) continue;
            for (std::size_t b = a + 1; b < rep.samples.size(); ++b) {
                const double env =
                    std::exp(-c.mu * (rep.samples[b].t - rep.samples[a].t)) * ea;
                if (env > 1e-300)
                    worst = std::max(worst, rep.samples[b].kinetic_energy / env);
            }
        }
        const bool pass = worst <= 1.05 && run_seconds <= 30.0;
        report_line(1, "kinetic exponential decay", pass,
                    "worst E(tau)/envelope = " + fmt(worst) + " vs 1.05 at mu = " + fmt(c.mu) +
                        ", runtime " + fmt(run_seconds) + " s (limit 30)");
    }
    {
        const double coeff = c.M * c.mu / (2.0 * (c.mu - c.lambda));
        double worst = 0.0;
        for (std::size_t a = 0; a < rep.samples.size(); ++a) {
            const double va = (coeff * 2.0 * rep.samples[a].kinetic_energy +
                               rep.samples[a].f_integral) *
                              std::exp(c.lambda * rep.samples[a].t);
            if (va <= 1e-300) continue;
            for (std::size_t b = a + 1; b < rep.samples.size(); ++b) {
                const double vb = (coeff * 2.0 * rep.samples[b].kinetic_energy +
                                   rep.samples[b].f_integral) *
                                  std::exp(c.lambda * rep.samples[b].t);
                worst = std::max(worst, vb / va);
            }
        }
        report_line(2, "combined Lyapunov decay", worst <= 1.05,
                    "worst weighted growth = " + fmt(worst) + " vs 1.05 at lambda = " +
                        fmt(c.lambda));
    }

    // ------------------------------------------------------------------
    // Criterion 7: gap-function suites, 1e5 samples each.
    const FluidParams params = make_fluid_params(cfg);
    {
        const auto t7 = std::chrono::steady_clock::now();
        SampleConfig sc;
        sc.n_samples = 100000;
        sc.seed = cfg.seed;
        sc.theta_hat_min = 1.0;
        sc.theta_hat_max = 2.0;
        const auto v1 = verify_lemma1(sc, params);
        const auto v2 = verify_lemma2(sc, params);
        const double lemma_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t7).count();
        // Coincidence case is exact.
        const double f_eq = oracle_f(1.37, 1.37, 0.6, params);
        const auto gap_eq = temperature_gap(1.37, 1.37, 0.6, params);
        const bool equality_exact = std::abs(f_eq) <= 1e-12 && std::abs(gap_eq.f) <= 1e-12 &&
                                    std::abs(gap_eq.g) <= 1e-12 &&
                                    std::abs(gap_eq.hbar) <= 1e-12;
        const bool pass =
            v1.pass && v2.pass && equality_exact && lemma_seconds <= 60.0;
        report_line(7, "gap-function suites", pass,
                    "lemma1 margin = " + fmt(v1.worst_margin) + ", lemma2 margin = " +
                        fmt(v2.worst_margin) + ", samples = " + std::to_string(v1.samples) +
                        "+" + std::to_string(v2.samples) + ", runtime " + fmt(lemma_seconds) +
                        " s (limit 60)");
    }
    // Criterion 8: primitive bounds and cut-off ladders.
    {
        SampleConfig sc;
        sc.n_samples = 20000;
        sc.seed = cfg.seed;
        sc.theta_hat_min = 1.0;
        sc.theta_hat_max = 2.0;
        const auto v = verify_bound_g_and_limits(sc, params);
        report_line(8, "primitive bounds and cut-off ladders", v.pass,
                    "worst margin = " + fmt(v.worst_margin) + " over " +
                        std::to_string(v.samples) + " ladder checks");
    }

    // ------------------------------------------------------------------
    // Criterion 9: steady solver.
    {
        bool pass = true;
        std::string detail;
        // Constant trace: exact constant field.
        {
            const Domain dom(1.0, 1.0, 32, 32);
            const auto steady = solve_steady(BoundaryTrace::constant(dom, 1.5), params, dom,
                                             cfg.steady_tol);
            double err = 0.0;
            for (int j = 0; j < dom.ny; ++j)
                for (int i = 0; i < dom.nx; ++i)
                    err = std::max(err, std::abs(steady.theta_hat(i, j) - 1.5));
            pass = pass && err <= 1e-11;
            detail += "constant err = " + fmt(err);
        }
        // Kirchhoff ramp with kappa = 1 + theta: closed-form oracle at three
        // resolutions (discretely exact), plus a curved harmonic showing the
        // O(h^2) order.
        {
            FluidParams affine;
            affine.p = 2.0;
            affine.delta = 1.0;
            affine.kappa_lo = 1.0;
            affine.kappa_hi = 4.0;
            affine.conductivity =
                ScalarProfile::custom([](double t) { return 1.0 + t; }, "affine");
            affine.viscosity = ScalarProfile::constant(1.0);
            auto g = [](double s) { return s + 0.5 * s * s; };
            auto g_inv = [](double u) { return std::sqrt(1.0 + 2.0 * u) - 1.0; };
            const double g1 = g(1.0), g2 = g(2.0);
            double worst_ramp = 0.0, worst_weak = 0.0;
            for (int n : {16, 32, 64}) {
                const Domain dom(1.0, 1.0, n, n);
                const auto trace = BoundaryTrace::sample(
                    dom, [&](double x, double) { return g_inv(g1 + x * (g2 - g1)); });
                const auto steady = solve_steady(trace, affine, dom, 1e-13);
                for (int j = 0; j < dom.ny; ++j)
                    for (int i = 0; i < dom.nx; ++i)
                        worst_ramp = std::max(
                            worst_ramp, std::abs(steady.theta_hat(i, j) -
                                                 g_inv(g1 + dom.cell_x(i) * (g2 - g1))));
                worst_weak = std::max(worst_weak, weak_residual(steady, affine));
            }
            pass = pass && worst_ramp <= 1e-9 && worst_weak <= 1e-10;
            detail += ", ramp err = " + fmt(worst_ramp) + ", weak residual = " +
                      fmt(worst_weak);

            FluidParams unit;
            unit.conductivity = ScalarProfile::constant(1.0);
            unit.viscosity = ScalarProfile::constant(1.0);
            auto exact = [](double x, double y) {
                return 1.5 + std::sin(std::numbers::pi * x) *
                                 std::sinh(std::numbers::pi * y) / std::sinh(std::numbers::pi);
            };
            double prev_err = 0.0;
            bool order2 = true;
            for (int n : {16, 32, 64}) {
                const Domain dom(1.0, 1.0, n, n);
                const auto steady =
                    solve_steady(BoundaryTrace::sample(dom, exact), unit, dom, 1e-13);
                double err = 0.0;
                for (int j = 0; j < dom.ny; ++j)
                    for (int i = 0; i < dom.nx; ++i)
                        err = std::max(err, std::abs(steady.theta_hat(i, j) -
                                                     exact(dom.cell_x(i), dom.cell_y(j))));
                if (prev_err > 0.0) order2 = order2 && err <= prev_err / 3.0;
                prev_err = err;
            }
            pass = pass && order2;
            detail += std::string(", O(h^2) refinement ") + (order2 ? "holds" : "broken");
        }
        report_line(9, "steady solver", pass, detail);
    }

    // Criterion 10: discrete rate vs the analytic eigenvalue.
    {
        const double mu64 = estimate_mu(Domain(1.0, 1.0, 64, 64), params);
        const double target = params.kappa_lo * 2.0 * std::numbers::pi * std::numbers::pi;
        const double rel = std::abs(mu64 - target) / target;
        report_line(10, "mu convergence", rel <= 0.02,
                    "mu(64x64) = " + fmt(mu64) + " vs 2 pi^2 = " + fmt(target) +
                        ", rel err = " + fmt(rel));
    }

    // ------------------------------------------------------------------
    // Criterion 11: delta = 0 polynomial envelope.
    {
        ExperimentConfig cfg0 = default_scenario();
        cfg0.delta = 0.0;
        const RunOutput out0 = run(cfg0);
        checks.fold(out0.report, 1.0, 2.0, 1.0);
        const auto v = verify_appendix_b(out0.kinetic_series, make_fluid_params(cfg0));
        report_line(11, "delta = 0 polynomial envelope", v.pass,
                    "worst margin = " + fmt(v.worst_margin) + ", mu' = " +
                        fmt(out0.kinetic_series.mu_prime) + "; " + v.notes);
    }

    // Criterion 12: renormalized-entropy audit.
    {
        const auto audit =
            rn2_audit(rep.samples, 0.0, cfg.t_end, c.alpha, c.lambda, c.M - 1.0);
        bool pass = audit.slack >= -1e-8 * audit.scale && audit.slack > 0.0;

        ExperimentConfig eq = default_scenario();
        eq.velocity_amplitude = 0.0;
        eq.theta_bump = 0.0;
        eq.t_end = 0.05;
        const RunOutput eq_out = run(eq);
        checks.fold(eq_out.report, 1.0, 2.0, 1.0);
        const auto& ec = eq_out.report.constants;
        const auto eq_audit =
            rn2_audit(eq_out.report.samples, 0.0, eq.t_end, ec.alpha, ec.lambda, ec.M - 1.0);
        pass = pass && std::abs(eq_audit.slack) <= 1e-10;
        report_line(12, "rn2 audit", pass,
                    "default slack = " + fmt(audit.slack) + " (scale " + fmt(audit.scale) +
                        "), equilibrium slack = " + fmt(eq_audit.slack));
    }

    // ------------------------------------------------------------------
    // Criterion 13: determinism (identical seed, byte-identical CSVs).
    {
        ExperimentConfig det = default_scenario();
        det.t_end = 0.1;
        const RunOutput a = run(det);
        const RunOutput b = run(det);
        const std::string csv_a = render_diagnostics_csv(a.report);
        const std::string csv_b = render_diagnostics_csv(b.report);
        const std::string audit_a = render_audit_csv(a.report);
        const std::string audit_b = render_audit_csv(b.report);
        checks.fold(a.report, 1.0, 2.0, 1.0);
        const bool pass = csv_a == csv_b && audit_a == audit_b && !csv_a.empty();
        report_line(13, "determinism", pass,
                    "diagnostics CSV bytes: " + std::to_string(csv_a.size()) +
                        (pass ? " (identical across invocations)" : " (MISMATCH)"));
    }

    // ------------------------------------------------------------------
    // Criteria 3-6 fold over every run performed above.
    report_line(3, "temperature minimum principle", checks.worst_min_theta_margin >= 0.0,
                "worst margin above theta_lo - 1e-12 = " + fmt(checks.worst_min_theta_margin));
    report_line(4, "L1 temperature bound", checks.worst_l1_margin >= 0.0,
                "worst bound slack = " + fmt(checks.worst_l1_margin));
    report_line(5, "incompressibility", checks.worst_div <= 1e-10,
                "worst ||div v||_inf / ||v||_inf = " + fmt(checks.worst_div));
    report_line(6, "energy bookkeeping", checks.worst_energy <= 1e-8 && checks.worst_budget <= 1e-8,
                "worst kinetic identity residual = " + fmt(checks.worst_energy) +
                    ", worst budget residual = " + fmt(checks.worst_budget));

    std::remove(kTracePath);
    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all 13 acceptance criteria passed\n");
    return 0;
}
