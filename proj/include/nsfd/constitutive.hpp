#pragma once

// Pointwise constitutive closures: temperature-dependent conductivity and
// viscosity profiles, the power-law stress, the conductivity primitive G and
// its inverse, the weighted primitives H^alpha / F_k / F_k^alpha, and the
// heat-capacity rescaling.

#include "nsfd/errors.hpp"

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace nsfd {

/// Symmetric 2x2 tensor (shear-rate / stress values). Only the three
/// independent components are stored; |T| = sqrt(xx^2 + 2 xy^2 + yy^2).
struct SymTensor2 {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;

    double norm() const;
    /// Frobenius contraction T : U.
    double contract(const SymTensor2& other) const;
};

/// Named map theta -> value with an optional closed-form primitive.
///
/// Built-in kinds: constant, rational lo + (hi-lo)/(1+theta), piecewise-linear
/// table (clamped), and an arbitrary callable for tests. The primitive
/// integral from 0 is closed-form for the built-ins and adaptive Simpson
/// (relative tolerance 1e-12) for callables.
class ScalarProfile {
public:
    ScalarProfile(); // constant 1

    static ScalarProfile constant(double value);
    static ScalarProfile rational(double lo, double hi);
    static ScalarProfile table(std::vector<std::array<double, 2>> points, double clamp_lo,
                               double clamp_hi);
    static ScalarProfile table_from_file(const std::string& path, double clamp_lo,
                                         double clamp_hi);
    static ScalarProfile custom(std::function<double(double)> fn, std::string label);
    /// Custom profile with a closed-form primitive supplied by the caller
    /// (used by the capacity rescale, where the primitive composes exactly).
    static ScalarProfile custom_with_primitive(std::function<double(double)> fn,
                                               std::function<double(double)> primitive,
                                               std::string label);

    /// Parse a config spec: "constant:<v>", "rational", "table:<path>".
    static ScalarProfile parse(const std::string& spec, double lo, double hi);

    double operator()(double theta) const;
    /// Integral of the profile from 0 to s (s >= 0).
    double primitive(double s) const;
    bool has_closed_primitive() const;
    bool is_constant() const;
    const std::string& name() const;

private:
    enum class Kind { Constant, Rational, Table, Custom };
    Kind kind_;
    double c0_ = 1.0;           // constant value
    double lo_ = 1.0, hi_ = 1.0; // rational endpoints
    std::vector<std::array<double, 2>> pts_;
    std::vector<double> cumulative_; // primitive values at the table knots
    std::function<double(double)> fn_;
    std::function<double(double)> primitive_fn_; // optional, for Custom
    std::string name_;

    double table_value(double theta) const;
    double table_primitive(double s) const;
};

/// Increasing heat-capacity map theta -> e(theta) with derivative and inverse.
class CapacityProfile {
public:
    static CapacityProfile identity();
    static CapacityProfile linear(double slope);
    static CapacityProfile theta_plus_log(); // theta + ln(1+theta)
    static CapacityProfile custom(std::function<double(double)> value,
                                  std::function<double(double)> derivative, std::string label);

    static CapacityProfile parse(const std::string& spec);

    double value(double theta) const;
    double derivative(double theta) const;
    /// Solve e(theta) = capacity for theta >= 0 (closed form where available,
    /// safeguarded Newton otherwise).
    double inverse(double capacity) const;
    bool is_identity() const;
    const std::string& name() const;

private:
    enum class Kind { Identity, Linear, ThetaPlusLog, Custom };
    Kind kind_ = Kind::Identity;
    double slope_ = 1.0;
    std::function<double(double)> value_fn_, deriv_fn_;
    std::string name_ = "identity";
};

/// Constitutive configuration of the fluid.
struct FluidParams {
    double p = 2.0;        // power-law exponent, >= 2 in 2-D
    double delta = 1.0;    // stress offset in [0, 1]
    double kappa_lo = 1.0; // lower conductivity/viscosity bound, > 0
    double kappa_hi = 1.0; // upper bound, >= kappa_lo
    ScalarProfile conductivity; // theta -> kappa(theta)
    ScalarProfile viscosity;    // theta -> nu(theta)
    std::optional<CapacityProfile> capacity;

    /// Rational conductivity/viscosity profiles spanning [kappa_lo, kappa_hi].
    static FluidParams with_rational_profiles(double p, double delta, double kappa_lo,
                                              double kappa_hi);
};

/// Throws InvalidInput if the bounds are inconsistent or a sampled profile
/// value escapes [kappa_lo, kappa_hi] (log grid over theta in [1e-6, 1e6]).
void validate(const FluidParams& params);

/// Power-law stress S(theta, D) = nu(theta) (delta + |D|)^(p-2) D.
/// Satisfies S:D >= kappa_lo (delta+|D|)^(p-2) |D|^2 and
/// |S| <= kappa_hi (delta+|D|)^(p-2) |D|.
SymTensor2 stress(double theta, const SymTensor2& d, const FluidParams& params);

/// The scalar factor nu(theta) (delta + |D|)^(p-2).
double stress_coefficient(double theta, double d_norm, const FluidParams& params);

/// G(s) = integral of kappa over [0, s]; strictly increasing,
/// kappa_lo * s <= G(s) <= kappa_hi * s.
double kirchhoff_g(double s, const FluidParams& params);

/// Inverse of G by bracketed Newton; |G(result) - u| <= 1e-11 * max(1, u).
double kirchhoff_g_inv(double u, const FluidParams& params);

/// H^alpha(s) = integral of G(z)^(-alpha) over [1, s], alpha in (0, 1).
double h_alpha(double s, double alpha, const FluidParams& params);

/// Cut-off T_k(z) = sign(z) min(|z|, k), k > 0.
double cutoff(double z, double k);

/// F_k(s) = integral of T_k(z)/z over [1, s]; equals s - 1 for s <= k.
double f_k(double s, double k);

/// F_k^alpha(s) = integral of T_k(z)/z G(T_k(z))^(-alpha) over [1, s];
/// converges to H^alpha(s) as k grows and agrees with it once k >= s.
double f_k_alpha(double s, double k, double alpha, const FluidParams& params);

/// Rewrites the system for the rescaled temperature e(theta): conductivity
/// becomes kappa(e^-1) * (e^-1)' and viscosity nu(e^-1). Bounds widen to the
/// envelopes [min(k_lo, k_lo/k_hi), max(k_hi, k_hi/k_lo)]. Identity capacity
/// returns the params unchanged (with the capacity consumed).
FluidParams rescale_capacity(const FluidParams& params);

} // namespace nsfd
