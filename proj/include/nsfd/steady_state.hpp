#pragma once

// Stationary boundary-temperature problem: -div(kappa(theta) grad theta) = 0
// with Dirichlet trace, solved through the Kirchhoff transform u = G(theta)
// (one linear SPD solve), plus the weak-form residual certificate.

#include "nsfd/constitutive.hpp"
#include "nsfd/grid.hpp"

#include <functional>
#include <string>
#include <vector>

namespace nsfd {

/// Dirichlet temperature trace, one value per boundary face (piecewise
/// constant on faces; smooth traces are sampled at face midpoints).
struct BoundaryTrace {
    std::vector<double> left, right;  // ny values each (y-ordered)
    std::vector<double> bottom, top;  // nx values each (x-ordered)

    static BoundaryTrace constant(const Domain& d, double value);
    static BoundaryTrace per_side(const Domain& d, double left, double right, double bottom,
                                  double top);
    /// Sample a function of the boundary point at face midpoints.
    static BoundaryTrace sample(const Domain& d,
                                const std::function<double(double, double)>& fn);
    /// Piecewise-linear table over the arc-length fraction, counterclockwise
    /// from (0, 0): bottom, right, top (reversed), left (reversed).
    static BoundaryTrace from_arclength_table(const Domain& d,
                                              const std::vector<std::array<double, 2>>& table);
    static BoundaryTrace from_arclength_file(const Domain& d, const std::string& path);

    double min() const;
    double max() const;
    /// Applies a pointwise map (used for capacity rescaling).
    BoundaryTrace transformed(const std::function<double(double)>& fn) const;
};

/// The stationary field theta_hat with its trace and bounds.
struct SteadyTemperature {
    ScalarField theta_hat;
    BoundaryTrace trace;
    double theta_lo = 0.0; // min of the trace
    double theta_hi = 0.0; // max of the trace
};

/// Solve the stationary problem: G(theta_hat) is discretely harmonic with
/// boundary data G(trace); theta_hat = G^-1. `tol` is the relative residual
/// of the linear solve (default 1e-11).
SteadyTemperature solve_steady(const BoundaryTrace& trace, const FluidParams& params,
                               const Domain& dom, double tol = 1e-11);

/// Max over interior nodal test functions of the discrete bilinear form
/// int kappa(theta_hat) grad theta_hat . grad phi, with the Kirchhoff-secant
/// face conductivity (G(a)-G(b))/(a-b). Zero certifies a discrete stationary
/// temperature compatible with the time stepper's diffusion stencil.
double weak_residual(const SteadyTemperature& steady, const FluidParams& params);

} // namespace nsfd
