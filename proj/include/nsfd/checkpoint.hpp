#pragma once

// Flat binary checkpoint: header (magic "NSFD", version u32, then nx, ny, Lx,
// Ly as 64-bit floats), followed by row-major 64-bit float payloads in order
// u-faces, v-faces, theta, pressure. Little-endian host layout.

#include "nsfd/grid.hpp"

#include <string>

namespace nsfd {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointData {
    Domain dom;
    VectorField v;
    ScalarField theta;
    ScalarField pressure;
};

void write_checkpoint(const std::string& path, const VectorField& v, const ScalarField& theta,
                      const ScalarField& pressure);

CheckpointData read_checkpoint(const std::string& path);

} // namespace nsfd
