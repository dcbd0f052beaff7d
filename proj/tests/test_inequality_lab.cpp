#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nsfd/inequality_lab.hpp"
#include "nsfd/numerics.hpp"

#include <cmath>
#include <random>

using namespace nsfd;

namespace {

FluidParams rational_params() { return FluidParams::with_rational_profiles(2.5, 1.0, 1.0, 2.0); }

FluidParams constant_params(double value) {
    FluidParams fp;
    fp.p = 2.0;
    fp.delta = 1.0;
    fp.kappa_lo = value;
    fp.kappa_hi = value;
    fp.conductivity = ScalarProfile::constant(value);
    fp.viscosity = ScalarProfile::constant(value);
    return fp;
}

SampleConfig small_config(long n = 20000) {
    SampleConfig sc;
    sc.n_samples = n;
    sc.theta_hat_min = 1.0;
    sc.theta_hat_max = 2.0;
    sc.seed = 42;
    return sc;
}

} // namespace

TEST_CASE("oracle f: coincidence point and the closed-form value") {
    const auto c1 = constant_params(1.0);
    CHECK(oracle_f(3.0, 3.0, 0.5, c1) == 0.0);
    CHECK(oracle_f(4.0, 1.0, 0.5, c1) == doctest::Approx(1.0).epsilon(1e-9));
    // f / g = 1 / (sqrt(2) - 1)^2 for that spot sample.
    const double g = std::pow(std::sqrt(2.0) - 1.0, 2);
    CHECK(oracle_f(4.0, 1.0, 0.5, c1) / g ==
          doctest::Approx(5.828427124746190).epsilon(1e-9));
}

TEST_CASE("calibration is deterministic and reproduces itself bit-identically") {
    const auto rat = rational_params();
    const double c1a = calibrate_lemma1_constant(rat, 0.6);
    const double c1b = calibrate_lemma1_constant(rat, 0.6);
    CHECK(c1a == c1b);
    CHECK(c1a > 0.0);
    const double c2a = calibrate_lemma2_constant(rat, 0.6);
    CHECK(c2a == calibrate_lemma2_constant(rat, 0.6));
    const double csg = calibrate_sqrt_g_constant(rat, 0.6);
    CHECK(csg == calibrate_sqrt_g_constant(rat, 0.6));
    // For constant kappa, hbar and sqrt(g) coincide exactly, so the
    // calibrated constant is exactly the 2x headroom.
    CHECK(calibrate_sqrt_g_constant(constant_params(1.7), 0.6) ==
          doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("lemma1 suite: frozen bound holds on seeded samples") {
    const auto v = verify_lemma1(small_config(), rational_params());
    CHECK(v.pass);
    CHECK(v.samples == 20000);
    CHECK(v.worst_margin >= -1e-9);
    CHECK(v.failing_sample.empty());
    // The closed-form spot sample sits below the calibrated constant: the
    // normalized ratio at (4, 1, 1/2) for constant kappa.
    const auto c1 = constant_params(1.0);
    const double ratio = oracle_f(4.0, 1.0, 0.5, c1) /
                         (gap_normalizer(4.0, 1.0, 0.5) *
                          std::pow(std::pow(4.0, 0.25) - 1.0, 2));
    CHECK(ratio < calibrate_lemma1_constant(c1, 0.5));
}

TEST_CASE("lemma1 ratio growth respects the two-branch structure") {
    // For theta / theta_hat -> infinity, f / (theta_hat g) grows no faster
    // than (theta/theta_hat)^alpha: the log-log slope along a ratio ladder
    // stays below alpha (plus fitting slack).
    const auto rat = rational_params();
    const double alpha = 0.6;
    std::vector<double> xs, ys;
    const double theta_hat = 1.5;
    for (int k = 6; k <= 16; ++k) {
        const double r = std::pow(2.0, k);
        const double f = oracle_f(r * theta_hat, theta_hat, alpha, rat);
        const double g = std::pow(std::pow(r, 0.5 * (1.0 - alpha)) - 1.0, 2);
        xs.push_back(std::log(r));
        ys.push_back(std::log(f / (theta_hat * g)));
    }
    const double slope = linear_fit(xs, ys).slope;
    CHECK(slope <= alpha + 0.02);
    CHECK(slope >= 0.0);
}

TEST_CASE("lemma2 suite: bound plus the intermediate sqrt(g) <= C' |hbar|") {
    const auto v = verify_lemma2(small_config(), rational_params());
    CHECK(v.pass);
    CHECK(v.worst_margin >= -1e-9);

    // Constant kappa: hbar(theta, theta_hat) = (theta/theta_hat)^((1-a)/2)-1
    // exactly, so sqrt(g) = |hbar| - the exact power identity.
    const auto c1 = constant_params(2.5);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> logu(-2.0, 2.0);
    for (int n = 0; n < 200; ++n) {
        const double theta = std::pow(10.0, logu(rng));
        const double theta_hat = std::pow(10.0, logu(rng));
        const double a = 0.55;
        const double hbar =
            std::pow(kirchhoff_g(theta, c1) / kirchhoff_g(theta_hat, c1), 0.5 * (1.0 - a)) -
            1.0;
        const double sqrt_g = std::abs(std::pow(theta / theta_hat, 0.5 * (1.0 - a)) - 1.0);
        CHECK(sqrt_g == doctest::Approx(std::abs(hbar)).epsilon(1e-12));
    }

    // A seeded random conductivity table also satisfies the frozen bounds.
    std::mt19937_64 table_rng(1234);
    std::uniform_real_distribution<double> val(1.0, 2.0);
    std::vector<std::array<double, 2>> pts;
    for (int k = 0; k <= 12; ++k) pts.push_back({std::pow(10.0, -3.0 + 0.5 * k), val(table_rng)});
    FluidParams table_params = rational_params();
    table_params.conductivity = ScalarProfile::table(pts, 1.0, 2.0);
    auto sc = small_config(5000);
    const auto vt = verify_lemma2(sc, table_params);
    CHECK(vt.pass);
}

TEST_CASE("bound-G and the cut-off ladders") {
    auto sc = small_config(5000);
    const auto v = verify_bound_g_and_limits(sc, rational_params());
    CHECK(v.pass);
    CHECK(v.worst_margin >= -1e-9);
    // Constant conductivity: G(s) = c s exactly, margins stay clean.
    const auto vc = verify_bound_g_and_limits(sc, constant_params(1.5));
    CHECK(vc.pass);
}

TEST_CASE("appendix-b envelope: exact synthetic series and input validation") {
    KineticSeries series;
    series.delta = 0.0;
    series.r = 2.5;
    series.mu_prime = 3.0;
    series.v0_norm = 2.0;
    series.alpha = 0.6;
    for (int i = 0; i <= 50; ++i) {
        const double t = 0.04 * i;
        const double env = series.v0_norm /
                           std::pow(1.0 + series.mu_prime * (series.r - 2.0) * t *
                                        std::pow(series.v0_norm, series.r - 2.0),
                                    1.0 / (series.r - 2.0));
        series.t.push_back(t);
        series.v_norm_sq.push_back(env * env); // exactly on the envelope
        series.f_integral.push_back(1.0 / std::pow(1.0 + t, 1.2));
    }
    const auto v = verify_appendix_b(series, rational_params());
    CHECK(v.pass);
    CHECK(v.worst_margin >= -1e-12);
    CHECK(v.worst_margin <= 1e-9); // zero slack: the series touches the envelope
    CHECK(v.notes.find("nu/(r-2)") != std::string::npos);

    // t = 0 sample equals ||v_0||^2: trivially tight.
    CHECK(series.v_norm_sq[0] == doctest::Approx(4.0));

    // A series above the envelope fails.
    KineticSeries bad = series;
    bad.v_norm_sq[10] *= 1.5;
    CHECK_FALSE(verify_appendix_b(bad, rational_params()).pass);

    // Non-delta-0 series are rejected.
    KineticSeries wrong = series;
    wrong.delta = 1.0;
    CHECK_THROWS_AS(verify_appendix_b(wrong, rational_params()), InvalidInput);
}

TEST_CASE("verdict invariants and rendering") {
    auto sc = small_config(2000);
    const auto rat = rational_params();
    std::vector<InequalityVerdict> vs{verify_lemma1(sc, rat)};
    // Re-running with the same seed reproduces the margin bit-identically.
    const auto again = verify_lemma1(sc, rat);
    CHECK(vs[0].worst_margin == again.worst_margin);
    CHECK(vs[0].pass == (vs[0].worst_margin >= -1e-9));
    const std::string text = render_verdicts(vs);
    CHECK(text.find("lemma1") != std::string::npos);
    const std::string machine = render_verdicts_machine(vs);
    CHECK(machine.find("id,samples,margin,constant,seed,pass") == 0);
}
