#pragma once

#include <stdexcept>
#include <string>

namespace nsfd {

/// Contract violation on operation inputs (non-finite values, out-of-range
/// parameters, malformed configuration).
struct InvalidInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// An iterative method exhausted its iteration budget before reaching the
/// requested tolerance. The message carries the residual report.
struct ConvergenceFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The stable time step fell below the representable floor (1e-12).
struct StiffnessFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Fields became non-finite during integration. When a checkpoint of the last
/// good state was written, its path is included in the message.
struct DivergenceFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A quadrature oracle failed to converge to its tolerance.
struct OracleFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parameter regime outside the supported theory path (e.g. p < 2).
struct UnsupportedRegime : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace nsfd
