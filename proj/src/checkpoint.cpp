#include "nsfd/checkpoint.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace nsfd {

namespace {

constexpr char kMagic[4] = {'N', 'S', 'F', 'D'};

void write_doubles(std::ofstream& out, std::span<const double> data) {
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(double)));
}

void read_doubles(std::ifstream& in, std::span<double> data) {
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
    if (!in) throw InvalidInput("checkpoint: truncated payload");
}

} // namespace

void write_checkpoint(const std::string& path, const VectorField& v, const ScalarField& theta,
                      const ScalarField& pressure) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("checkpoint: cannot open for writing: " + path);
    out.write(kMagic, 4);
    const std::uint32_t version = kCheckpointVersion;
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));
    const Domain& d = v.dom;
    const double header[4] = {static_cast<double>(d.nx), static_cast<double>(d.ny), d.Lx, d.Ly};
    out.write(reinterpret_cast<const char*>(header), sizeof(header));
    write_doubles(out, v.ufaces.data());
    write_doubles(out, v.vfaces.data());
    write_doubles(out, theta.cells.data());
    write_doubles(out, pressure.cells.data());
    if (!out) throw InvalidInput("checkpoint: write failed: " + path);
}

CheckpointData read_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("checkpoint: cannot open: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw InvalidInput("checkpoint: bad magic in " + path);
    std::uint32_t version = 0;
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    if (!in || version != kCheckpointVersion)
        throw InvalidInput("checkpoint: unsupported version in " + path);
    double header[4];
    in.read(reinterpret_cast<char*>(header), sizeof(header));
    if (!in) throw InvalidInput("checkpoint: truncated header in " + path);
    const int nx = static_cast<int>(std::llround(header[0]));
    const int ny = static_cast<int>(std::llround(header[1]));
    CheckpointData data;
    data.dom = Domain(header[2], header[3], nx, ny);
    data.v = VectorField(data.dom);
    data.theta = ScalarField(data.dom);
    data.pressure = ScalarField(data.dom);
    read_doubles(in, data.v.ufaces.data());
    read_doubles(in, data.v.vfaces.data());
    read_doubles(in, data.theta.cells.data());
    read_doubles(in, data.pressure.cells.data());
    return data;
}

} // namespace nsfd
