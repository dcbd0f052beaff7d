#include "nsfd/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace nsfd {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, const std::string& where) {
    std::size_t pos = 0;
    double out;
    try {
        out = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw InvalidInput(where + ": expected a number, got '" + v + "'");
    }
    if (pos != v.size()) throw InvalidInput(where + ": trailing characters in '" + v + "'");
    return out;
}

long parse_int(const std::string& v, const std::string& where) {
    const double d = parse_double(v, where);
    if (d != std::floor(d)) throw InvalidInput(where + ": expected an integer, got '" + v + "'");
    return static_cast<long>(d);
}

} // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto where = origin + ":" + std::to_string(line_no);
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw InvalidInput(where + ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "domain" && section != "fluid" && section != "boundary" &&
                section != "initial" && section != "diagnostics" && section != "output")
                throw InvalidInput(where + ": unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw InvalidInput(where + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty()) throw InvalidInput(where + ": key outside any section");

        auto unknown = [&]() -> InvalidInput {
            return InvalidInput(where + ": unknown key '" + key + "' in [" + section + "]");
        };
        if (section == "domain") {
            if (key == "Lx") cfg.Lx = parse_double(value, where);
            else if (key == "Ly") cfg.Ly = parse_double(value, where);
            else if (key == "nx") cfg.nx = static_cast<int>(parse_int(value, where));
            else if (key == "ny") cfg.ny = static_cast<int>(parse_int(value, where));
            else throw unknown();
        } else if (section == "fluid") {
            if (key == "p") cfg.p = parse_double(value, where);
            else if (key == "delta") cfg.delta = parse_double(value, where);
            else if (key == "kappa_lo") cfg.kappa_lo = parse_double(value, where);
            else if (key == "kappa_hi") cfg.kappa_hi = parse_double(value, where);
            else if (key == "conductivity_profile") cfg.conductivity_profile = value;
            else if (key == "viscosity_profile") cfg.viscosity_profile = value;
            else if (key == "capacity_profile") cfg.capacity_profile = value;
            else throw unknown();
        } else if (section == "boundary") {
            if (key == "trace") cfg.trace = value;
            else throw unknown();
        } else if (section == "initial") {
            if (key == "velocity_amplitude") cfg.velocity_amplitude = parse_double(value, where);
            else if (key == "theta_bump") cfg.theta_bump = parse_double(value, where);
            else throw unknown();
        } else if (section == "diagnostics") {
            if (key == "alpha") cfg.alpha = parse_double(value, where);
            else if (key == "lambda_fraction") cfg.lambda_fraction = parse_double(value, where);
            else if (key == "t_end") cfg.t_end = parse_double(value, where);
            else if (key == "sample_dt") cfg.sample_dt = parse_double(value, where);
            else if (key == "dt_max") cfg.dt_max = parse_double(value, where);
            else if (key == "checkpoint_every") cfg.checkpoint_every = static_cast<int>(parse_int(value, where));
            else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(value, where));
            else if (key == "steady_tol") cfg.steady_tol = parse_double(value, where);
            else throw unknown();
        } else if (section == "output") {
            if (key == "directory") cfg.output_dir = value;
            else throw unknown();
        }
    }
    return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open config file: " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config_text(text.str(), path);
}

std::vector<std::string> validate_config(const ExperimentConfig& cfg, bool for_simulate) {
    std::vector<std::string> errors;
    auto check = [&](bool ok, const std::string& msg) {
        if (!ok) errors.push_back(msg);
    };
    check(cfg.Lx > 0.0 && cfg.Ly > 0.0, "domain: Lx and Ly must be positive");
    check(cfg.nx >= 4 && cfg.ny >= 4, "domain: nx and ny must be >= 4");
    check(cfg.p >= 2.0, "fluid: p >= 2 required in 2D");
    check(cfg.delta >= 0.0 && cfg.delta <= 1.0, "fluid: delta must lie in [0, 1]");
    check(cfg.kappa_lo > 0.0 && cfg.kappa_hi >= cfg.kappa_lo,
          "fluid: need 0 < kappa_lo <= kappa_hi");
    if (for_simulate)
        check(cfg.delta > 0.0,
              "fluid: delta = 0 has no exponential envelope; use the appendixb subcommand");
    check(cfg.alpha > 0.5 && cfg.alpha <= 2.0 / 3.0,
          "diagnostics: alpha must lie in (1/2, 2/3]");
    check(cfg.lambda_fraction > 0.0 && cfg.lambda_fraction < 1.0,
          "diagnostics: lambda_fraction must lie in (0, 1)");
    check(cfg.t_end >= 0.0, "diagnostics: t_end must be >= 0");
    check(cfg.sample_dt > 0.0, "diagnostics: sample_dt must be positive");
    check(cfg.dt_max >= 0.0, "diagnostics: dt_max must be >= 0 (0 = uncapped)");
    check(cfg.checkpoint_every >= 0, "diagnostics: checkpoint_every must be >= 0");
    check(cfg.steady_tol > 0.0 && cfg.steady_tol < 1e-3,
          "diagnostics: steady_tol must lie in (0, 1e-3)");
    check(cfg.velocity_amplitude >= 0.0, "initial: velocity_amplitude must be >= 0");
    // Profile and trace specs must parse.
    if (cfg.kappa_lo > 0.0 && cfg.kappa_hi >= cfg.kappa_lo) {
        try {
            (void)ScalarProfile::parse(cfg.conductivity_profile, cfg.kappa_lo, cfg.kappa_hi);
        } catch (const InvalidInput& e) {
            errors.push_back(std::string("fluid: conductivity_profile: ") + e.what());
        }
        try {
            (void)ScalarProfile::parse(cfg.viscosity_profile, cfg.kappa_lo, cfg.kappa_hi);
        } catch (const InvalidInput& e) {
            errors.push_back(std::string("fluid: viscosity_profile: ") + e.what());
        }
        if (!cfg.capacity_profile.empty()) {
            try {
                (void)CapacityProfile::parse(cfg.capacity_profile);
            } catch (const InvalidInput& e) {
                errors.push_back(std::string("fluid: capacity_profile: ") + e.what());
            }
        }
    }
    if (cfg.trace.rfind("constant:", 0) != 0 && cfg.trace.rfind("sides:", 0) != 0 &&
        cfg.trace.rfind("table:", 0) != 0)
        errors.push_back("boundary: trace must be constant:<v>, sides:<l>,<r>,<b>,<t>, "
                         "or table:<path>");
    return errors;
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os.precision(17);
    os << "[domain]\n"
       << "Lx = " << cfg.Lx << "\nLy = " << cfg.Ly << "\nnx = " << cfg.nx
       << "\nny = " << cfg.ny << "\n\n[fluid]\np = " << cfg.p << "\ndelta = " << cfg.delta
       << "\nkappa_lo = " << cfg.kappa_lo << "\nkappa_hi = " << cfg.kappa_hi
       << "\nconductivity_profile = " << cfg.conductivity_profile
       << "\nviscosity_profile = " << cfg.viscosity_profile;
    if (!cfg.capacity_profile.empty()) os << "\ncapacity_profile = " << cfg.capacity_profile;
    os << "\n\n[boundary]\ntrace = " << cfg.trace
       << "\n\n[initial]\nvelocity_amplitude = " << cfg.velocity_amplitude
       << "\ntheta_bump = " << cfg.theta_bump << "\n\n[diagnostics]\nalpha = " << cfg.alpha
       << "\nlambda_fraction = " << cfg.lambda_fraction << "\nt_end = " << cfg.t_end
       << "\nsample_dt = " << cfg.sample_dt << "\ndt_max = " << cfg.dt_max
       << "\ncheckpoint_every = " << cfg.checkpoint_every << "\nseed = " << cfg.seed
       << "\nsteady_tol = " << cfg.steady_tol << "\n\n[output]\ndirectory = " << cfg.output_dir
       << "\n";
    return os.str();
}

Domain make_domain(const ExperimentConfig& cfg) { return Domain(cfg.Lx, cfg.Ly, cfg.nx, cfg.ny); }

FluidParams make_fluid_params(const ExperimentConfig& cfg) {
    FluidParams params;
    params.p = cfg.p;
    params.delta = cfg.delta;
    params.kappa_lo = cfg.kappa_lo;
    params.kappa_hi = cfg.kappa_hi;
    params.conductivity = ScalarProfile::parse(cfg.conductivity_profile, cfg.kappa_lo, cfg.kappa_hi);
    params.viscosity = ScalarProfile::parse(cfg.viscosity_profile, cfg.kappa_lo, cfg.kappa_hi);
    if (!cfg.capacity_profile.empty())
        params.capacity = CapacityProfile::parse(cfg.capacity_profile);
    validate(params);
    return params;
}

BoundaryTrace make_trace(const ExperimentConfig& cfg, const Domain& dom) {
    const std::string& spec = cfg.trace;
    if (spec.rfind("constant:", 0) == 0)
        return BoundaryTrace::constant(dom, std::stod(spec.substr(9)));
    if (spec.rfind("sides:", 0) == 0) {
        std::istringstream ss(spec.substr(6));
        double vals[4];
        char comma;
        for (int k = 0; k < 4; ++k) {
            if (!(ss >> vals[k])) throw InvalidInput("boundary trace: expected four values");
            if (k < 3 && !(ss >> comma)) throw InvalidInput("boundary trace: expected commas");
        }
        return BoundaryTrace::per_side(dom, vals[0], vals[1], vals[2], vals[3]);
    }
    if (spec.rfind("table:", 0) == 0)
        return BoundaryTrace::from_arclength_file(dom, spec.substr(6));
    throw InvalidInput("boundary trace: unknown spec '" + spec + "'");
}

} // namespace nsfd
