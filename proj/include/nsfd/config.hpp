#pragma once

// Plain-text sectioned key-value experiment configuration. Grammar:
//
//   [section]
//   key = value          # trailing comments allowed
//
// Sections and keys (defaults in parentheses):
//   [domain]      Lx (1), Ly (1), nx (32), ny (32)
//   [fluid]       p (2.5), delta (1), kappa_lo (1), kappa_hi (2),
//                 conductivity_profile (rational), viscosity_profile (rational),
//                 capacity_profile (absent)
//   [boundary]    trace (constant:1) - one of constant:<v>,
//                 sides:<left>,<right>,<bottom>,<top>, table:<path>
//   [initial]     velocity_amplitude (1) - target ||v0||_2, theta_bump (0.5)
//   [diagnostics] alpha (0.6), lambda_fraction (0.5), t_end (1),
//                 sample_dt (0.01), dt_max (0 = uncapped), checkpoint_every (0),
//                 seed (42), steady_tol (1e-13)
//   [output]      directory (out)

#include "nsfd/constitutive.hpp"
#include "nsfd/grid.hpp"
#include "nsfd/steady_state.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace nsfd {

struct ExperimentConfig {
    // [domain]
    double Lx = 1.0, Ly = 1.0;
    int nx = 32, ny = 32;
    // [fluid]
    double p = 2.5;
    double delta = 1.0;
    double kappa_lo = 1.0, kappa_hi = 2.0;
    std::string conductivity_profile = "rational";
    std::string viscosity_profile = "rational";
    std::string capacity_profile; // empty = unit capacity
    // [boundary]
    std::string trace = "constant:1";
    // [initial]
    double velocity_amplitude = 1.0;
    double theta_bump = 0.5;
    // [diagnostics]
    double alpha = 0.6;
    double lambda_fraction = 0.5;
    double t_end = 1.0;
    double sample_dt = 0.01;
    double dt_max = 0.0; // 0 = stability-limited only
    int checkpoint_every = 0;
    std::uint64_t seed = 42;
    double steady_tol = 1e-13;
    // [output]
    std::string output_dir = "out"; // empty = keep everything in memory

    bool operator==(const ExperimentConfig&) const = default;
};

/// Parse and fully validate; throws InvalidInput carrying either the parse
/// error with its line number or the complete list of validation failures.
ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin = "<text>");

/// Validation only (all violations collected); `for_simulate` additionally
/// rejects delta = 0, which belongs to the appendixb subcommand.
std::vector<std::string> validate_config(const ExperimentConfig& cfg, bool for_simulate);

/// Lossless round trip: parse_config_text(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& cfg);

Domain make_domain(const ExperimentConfig& cfg);
FluidParams make_fluid_params(const ExperimentConfig& cfg);
BoundaryTrace make_trace(const ExperimentConfig& cfg, const Domain& dom);

} // namespace nsfd
