#pragma once

// Diagnostics emission: the fixed-column CSV, the extended audit CSV, native
// log-linear SVG plots with optional theoretical envelopes, and the verdict
// text block. All output is deterministic (17 significant digits, LF line
// endings, no timestamps).

#include "nsfd/lyapunov.hpp"

#include <string>
#include <vector>

namespace nsfd {

/// Columns: t, kinetic_energy, L_beta_integral, f_integral, theta_L1,
/// theta_min, dissipation.
std::string render_diagnostics_csv(const DecayReport& report);

/// The diagnostics columns plus entropy_production, weighted_dissipation,
/// grad_theta_weighted (the series consumed by the trajectory audits).
std::string render_audit_csv(const DecayReport& report);

/// Human-readable verdicts plus fitted rates and constants.
std::string render_verdict_block(const DecayReport& report);

/// Log-linear polyline of one series; when envelope_rate > 0, the straight
/// line value0 * exp(-rate (t - t0)) is overlaid.
std::string render_series_svg(const std::vector<double>& t, const std::vector<double>& values,
                              const std::string& title, double envelope_rate = 0.0,
                              double envelope_value0 = 0.0);

void write_text_file(const std::string& path, const std::string& content);

/// Writes diagnostics.csv, audit.csv, verdicts.txt and one SVG per series
/// into directory (created if needed).
void emit_report_files(const DecayReport& report, const std::string& directory);

} // namespace nsfd
