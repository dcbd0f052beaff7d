#pragma once

// The Lyapunov machinery: the temperature gap functions f, g, hbar, the
// density L_beta, its domain integral, the decay constants mu / K / M /
// lambda / beta, and the decay-rate fits and envelope verdicts.

#include "nsfd/constitutive.hpp"
#include "nsfd/grid.hpp"
#include "nsfd/steady_state.hpp"

#include <string>
#include <vector>

namespace nsfd {

/// The rates and sizes entering the decay envelopes.
struct DecayConstants {
    double mu = 0.0;     // kinetic rate, kappa_lo * lambda_1
    double K = 0.0;      // temperature-relaxation rate
    double M = 0.0;      // dissipation-to-heat transfer factor
    double lambda = 0.0; // chosen envelope rate, in (0, min(mu, K))
    double beta = 0.0;   // velocity weight 2 M mu / (mu - lambda)
    double alpha = 0.0;  // exponent in (1/2, 2/3]
    double R = 0.0;      // data size ||v0||_2^2 + ||theta0||_1

    // Provenance of the composed estimate.
    double sobolev_constant = 0.0;    // ||w||_{2/(1-alpha)} <= C ||grad w||_2
    double embedding_constant_m = 0.0; // ||v||_{2/alpha}^2 <= C ||Dv||_2^2 (Korn folded in)
    double lemma2_constant = 0.0;     // calibrated gap bound constant
    double chain_constant = 0.0;      // 3 * lemma2 * C_S^2 * (1-alpha)^2 / 4
};

/// Pointwise gap functions between theta and the stationary theta_hat:
///   f    = theta - theta_hat - (H^a(theta) - H^a(theta_hat)) G(theta_hat)^a
///   g    = |(theta/theta_hat)^((1-a)/2) - 1|^2
///   hbar = (G(theta)/G(theta_hat))^((1-a)/2) - 1
/// All three vanish exactly at theta = theta_hat; f and g are nonnegative.
struct TemperatureGap {
    double f = 0.0;
    double g = 0.0;
    double hbar = 0.0;
};
TemperatureGap temperature_gap(double theta, double theta_hat, double alpha,
                               const FluidParams& params);

/// L_beta(v, theta, theta_hat) = beta |v|^2 + f(theta, theta_hat); vanishes
/// only at (0, theta_hat) and is strictly convex in theta for beta > 0.
double lyapunov_density(double v_sq, double theta, double theta_hat, double beta, double alpha,
                        const FluidParams& params);

/// Per-run cache of the stationary quantities entering f.
struct SteadyGapCache {
    double alpha = 0.0;
    ScalarField theta_hat;
    ScalarField h_alpha_hat; // H^alpha(theta_hat)
    ScalarField g_hat_pow;   // G(theta_hat)^alpha
};
SteadyGapCache make_gap_cache(const SteadyTemperature& steady, double alpha,
                              const FluidParams& params);

/// Midpoint-rule integral of f(theta, theta_hat) over the domain.
double integrated_f(const ScalarField& theta, const SteadyGapCache& cache,
                    const FluidParams& params);

/// Integral of L_beta: beta ||v||_2^2 (face-weighted, so the velocity part is
/// exactly the kinetic norm) plus the f integral.
double integrated_lyapunov(const VectorField& v, const ScalarField& theta,
                           const SteadyGapCache& cache, double beta,
                           const FluidParams& params);

/// Compose mu, K, M, lambda, beta from the discrete embedding estimates and
/// the calibrated gap constant. theta0_l1 and v0_norm_sq are the initial data
/// sizes; lambda = lambda_fraction * min(mu, K).
DecayConstants compute_constants(const Domain& dom, const FluidParams& params,
                                 const SteadyTemperature& steady, double v0_norm_sq,
                                 double theta0_l1, double alpha, double lambda_fraction);

/// One diagnostics sample along a trajectory.
struct DecaySample {
    double t = 0.0;
    double kinetic_energy = 0.0;  // 0.5 ||v||_2^2
    double l_beta_integral = 0.0;
    double f_integral = 0.0;
    double theta_l1 = 0.0;
    double theta_min = 0.0;
    double dissipation = 0.0;     // instantaneous sum S:Dv
    // Extra series consumed by the trajectory audits.
    double entropy_production = 0.0;     // int |grad(G/G_hat)|^2 G_hat (G/G_hat)^(-1-a)
    double weighted_dissipation = 0.0;   // int S:Dv (1 - (G_hat/G)^a)
    double grad_theta_weighted = 0.0;    // int |grad theta|^2 / theta^(1+eps)
};

struct Verdict {
    std::string name;
    bool pass = false;
    double margin = 0.0;
    std::string details;
};

struct DecayReport {
    std::vector<DecaySample> samples;
    DecayConstants constants;
    double fitted_kinetic_rate = 0.0;
    double fitted_lyapunov_rate = 0.0;
    double fitted_f_rate = 0.0;
    std::vector<Verdict> verdicts;

    // Worst-case trackers filled per step by the integrator.
    double worst_energy_identity_residual = 0.0;
    double worst_budget_residual = 0.0;
    double worst_div_ratio = 0.0;
    double worst_projection_correction = 0.0;
    double min_theta_seen = 0.0;
    double max_theta_seen = 0.0;  // truncation levels k > this are inactive
    double audit_epsilon = 0.0;   // epsilon of the grad_theta_weighted series
    long steps = 0;

    bool all_pass() const;
};

/// Pairwise envelope checks at multiplicative tolerance `tol` plus
/// least-squares decay-rate fits over the last 80% of samples. Appends the
/// verdicts to the report and returns them.
std::vector<Verdict> fit_and_verify(DecayReport& report, const DecayConstants& constants,
                                    double tol = 0.05);

} // namespace nsfd
