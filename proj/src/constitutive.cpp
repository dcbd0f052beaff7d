#include "nsfd/constitutive.hpp"

#include "nsfd/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace nsfd {

namespace {

bool finite(double x) { return std::isfinite(x); }

void require_finite(double x, const char* what) {
    if (!finite(x)) throw InvalidInput(std::string(what) + ": non-finite value");
}

} // namespace

double SymTensor2::norm() const { return std::sqrt(xx * xx + 2.0 * xy * xy + yy * yy); }

double SymTensor2::contract(const SymTensor2& other) const {
    return xx * other.xx + 2.0 * xy * other.xy + yy * other.yy;
}

// ---------------------------------------------------------------------------
// ScalarProfile

ScalarProfile::ScalarProfile() : kind_(Kind::Constant), c0_(1.0), name_("constant:1") {}

ScalarProfile ScalarProfile::constant(double value) {
    if (!(value > 0.0) || !finite(value)) throw InvalidInput("constant profile needs value > 0");
    ScalarProfile p;
    p.kind_ = Kind::Constant;
    p.c0_ = value;
    p.name_ = "constant:" + std::to_string(value);
    return p;
}

ScalarProfile ScalarProfile::rational(double lo, double hi) {
    if (!(lo > 0.0) || hi < lo) throw InvalidInput("rational profile needs 0 < lo <= hi");
    ScalarProfile p;
    p.kind_ = Kind::Rational;
    p.lo_ = lo;
    p.hi_ = hi;
    p.name_ = "rational";
    return p;
}

ScalarProfile ScalarProfile::table(std::vector<std::array<double, 2>> points, double clamp_lo,
                                   double clamp_hi) {
    if (points.size() < 2) throw InvalidInput("table profile needs at least two points");
    for (std::size_t i = 0; i < points.size(); ++i) {
        require_finite(points[i][0], "table abscissa");
        require_finite(points[i][1], "table value");
        if (i > 0 && points[i][0] <= points[i - 1][0])
            throw InvalidInput("table profile: abscissae must be strictly increasing");
        points[i][1] = std::clamp(points[i][1], clamp_lo, clamp_hi);
    }
    ScalarProfile p;
    p.kind_ = Kind::Table;
    p.pts_ = std::move(points);
    p.name_ = "table";
    // Cumulative integral at the knots: constant extension below the first
    // knot, trapezoids between knots.
    p.cumulative_.resize(p.pts_.size());
    p.cumulative_[0] = p.pts_[0][0] * p.pts_[0][1];
    for (std::size_t i = 1; i < p.pts_.size(); ++i) {
        const double dx = p.pts_[i][0] - p.pts_[i - 1][0];
        p.cumulative_[i] = p.cumulative_[i - 1] + 0.5 * dx * (p.pts_[i][1] + p.pts_[i - 1][1]);
    }
    return p;
}

ScalarProfile ScalarProfile::table_from_file(const std::string& path, double clamp_lo,
                                             double clamp_hi) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open table file: " + path);
    std::vector<std::array<double, 2>> pts;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        double a, b;
        if (ls >> a >> b)
            pts.push_back({a, b});
        else if (!line.empty() && line.find_first_not_of(" \t\r") != std::string::npos)
            throw InvalidInput(path + ":" + std::to_string(line_no) + ": expected two columns");
    }
    auto prof = table(std::move(pts), clamp_lo, clamp_hi);
    prof.name_ = "table:" + path;
    return prof;
}

ScalarProfile ScalarProfile::custom(std::function<double(double)> fn, std::string label) {
    ScalarProfile p;
    p.kind_ = Kind::Custom;
    p.fn_ = std::move(fn);
    p.name_ = std::move(label);
    return p;
}

ScalarProfile ScalarProfile::custom_with_primitive(std::function<double(double)> fn,
                                                   std::function<double(double)> primitive,
                                                   std::string label) {
    ScalarProfile p = custom(std::move(fn), std::move(label));
    p.primitive_fn_ = std::move(primitive);
    return p;
}

ScalarProfile ScalarProfile::parse(const std::string& spec, double lo, double hi) {
    if (spec == "rational") return rational(lo, hi);
    if (spec.rfind("constant:", 0) == 0) return constant(std::stod(spec.substr(9)));
    if (spec == "constant") return constant(lo);
    if (spec.rfind("table:", 0) == 0) return table_from_file(spec.substr(6), lo, hi);
    throw InvalidInput("unknown profile spec '" + spec +
                       "' (expected rational, constant:<v>, table:<path>)");
}

double ScalarProfile::table_value(double theta) const {
    if (theta <= pts_.front()[0]) return pts_.front()[1];
    if (theta >= pts_.back()[0]) return pts_.back()[1];
    auto it = std::upper_bound(pts_.begin(), pts_.end(), theta,
                               [](double t, const std::array<double, 2>& p) { return t < p[0]; });
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double w = (theta - lo[0]) / (hi[0] - lo[0]);
    return lo[1] + w * (hi[1] - lo[1]);
}

double ScalarProfile::table_primitive(double s) const {
    if (s <= pts_.front()[0]) return s * pts_.front()[1];
    auto it = std::upper_bound(pts_.begin(), pts_.end(), s,
                               [](double t, const std::array<double, 2>& p) { return t < p[0]; });
    if (it == pts_.end()) {
        return cumulative_.back() + (s - pts_.back()[0]) * pts_.back()[1];
    }
    const std::size_t k = static_cast<std::size_t>(it - pts_.begin());
    const auto& lo = pts_[k - 1];
    const auto& hi = pts_[k];
    const double dx = s - lo[0];
    const double slope = (hi[1] - lo[1]) / (hi[0] - lo[0]);
    return cumulative_[k - 1] + dx * lo[1] + 0.5 * slope * dx * dx;
}

double ScalarProfile::operator()(double theta) const {
    switch (kind_) {
        case Kind::Constant: return c0_;
        case Kind::Rational: return lo_ + (hi_ - lo_) / (1.0 + theta);
        case Kind::Table: return table_value(theta);
        case Kind::Custom: return fn_(theta);
    }
    return c0_;
}

bool ScalarProfile::has_closed_primitive() const { return kind_ != Kind::Custom; }

bool ScalarProfile::is_constant() const { return kind_ == Kind::Constant; }

double ScalarProfile::primitive(double s) const {
    switch (kind_) {
        case Kind::Constant: return c0_ * s;
        case Kind::Rational: return lo_ * s + (hi_ - lo_) * std::log1p(s);
        case Kind::Table: return table_primitive(s);
        case Kind::Custom:
            if (primitive_fn_) return primitive_fn_(s);
            return adaptive_simpson([this](double z) { return fn_(z); }, 0.0, s, 1e-12, 1e-300);
    }
    return c0_ * s;
}

const std::string& ScalarProfile::name() const { return name_; }

// ---------------------------------------------------------------------------
// CapacityProfile

CapacityProfile CapacityProfile::identity() { return CapacityProfile{}; }

CapacityProfile CapacityProfile::linear(double slope) {
    if (!(slope > 0.0)) throw InvalidInput("linear capacity needs slope > 0");
    CapacityProfile c;
    c.kind_ = Kind::Linear;
    c.slope_ = slope;
    c.name_ = "linear:" + std::to_string(slope);
    return c;
}

CapacityProfile CapacityProfile::theta_plus_log() {
    CapacityProfile c;
    c.kind_ = Kind::ThetaPlusLog;
    c.name_ = "theta_plus_log";
    return c;
}

CapacityProfile CapacityProfile::custom(std::function<double(double)> value,
                                        std::function<double(double)> derivative,
                                        std::string label) {
    CapacityProfile c;
    c.kind_ = Kind::Custom;
    c.value_fn_ = std::move(value);
    c.deriv_fn_ = std::move(derivative);
    c.name_ = std::move(label);
    return c;
}

CapacityProfile CapacityProfile::parse(const std::string& spec) {
    if (spec == "identity") return identity();
    if (spec == "theta_plus_log") return theta_plus_log();
    if (spec.rfind("linear:", 0) == 0) return linear(std::stod(spec.substr(7)));
    throw InvalidInput("unknown capacity spec '" + spec +
                       "' (expected identity, linear:<slope>, theta_plus_log)");
}

double CapacityProfile::value(double theta) const {
    switch (kind_) {
        case Kind::Identity: return theta;
        case Kind::Linear: return slope_ * theta;
        case Kind::ThetaPlusLog: return theta + std::log1p(theta);
        case Kind::Custom: return value_fn_(theta);
    }
    return theta;
}

double CapacityProfile::derivative(double theta) const {
    switch (kind_) {
        case Kind::Identity: return 1.0;
        case Kind::Linear: return slope_;
        case Kind::ThetaPlusLog: return 1.0 + 1.0 / (1.0 + theta);
        case Kind::Custom: return deriv_fn_(theta);
    }
    return 1.0;
}

double CapacityProfile::inverse(double capacity) const {
    switch (kind_) {
        case Kind::Identity: return capacity;
        case Kind::Linear: return capacity / slope_;
        default: break;
    }
    if (capacity == 0.0) return 0.0;
    // e is increasing with e(0) ~ 0 and slope within [d_min, d_max] on the
    // bracket, so [capacity / d_hi, capacity / d_lo] brackets the preimage.
    const double d0 = derivative(0.0);
    const double d1 = derivative(capacity);
    const double d_lo = 0.5 * std::min(d0, d1);
    const double d_hi = 2.0 * std::max(d0, d1);
    const double e0 = value(0.0);
    return solve_increasing([this](double t) { return value(t); },
                            [this](double t) { return derivative(t); }, capacity,
                            std::max(0.0, (capacity - e0) / d_hi), (capacity - e0) / d_lo + 1.0,
                            1e-13 * std::max(1.0, std::abs(capacity)));
}

bool CapacityProfile::is_identity() const { return kind_ == Kind::Identity; }

const std::string& CapacityProfile::name() const { return name_; }

// ---------------------------------------------------------------------------
// FluidParams

FluidParams FluidParams::with_rational_profiles(double p, double delta, double kappa_lo,
                                                double kappa_hi) {
    FluidParams fp;
    fp.p = p;
    fp.delta = delta;
    fp.kappa_lo = kappa_lo;
    fp.kappa_hi = kappa_hi;
    fp.conductivity = ScalarProfile::rational(kappa_lo, kappa_hi);
    fp.viscosity = ScalarProfile::rational(kappa_lo, kappa_hi);
    return fp;
}

void validate(const FluidParams& params) {
    if (!(params.kappa_lo > 0.0) || !(params.kappa_hi >= params.kappa_lo))
        throw InvalidInput("fluid params: need 0 < kappa_lo <= kappa_hi");
    if (!(params.p >= 2.0)) throw InvalidInput("fluid params: p >= 2 required in 2D");
    if (!(params.delta >= 0.0 && params.delta <= 1.0))
        throw InvalidInput("fluid params: delta must lie in [0, 1]");
    const double slack = 1e-9 * params.kappa_hi;
    for (int i = 0; i <= 120; ++i) {
        const double theta = std::pow(10.0, -6.0 + 0.1 * i);
        const double k = params.conductivity(theta);
        const double nu = params.viscosity(theta);
        if (k < params.kappa_lo - slack || k > params.kappa_hi + slack)
            throw InvalidInput("conductivity profile escapes [kappa_lo, kappa_hi] at theta=" +
                               std::to_string(theta));
        if (nu < params.kappa_lo - slack || nu > params.kappa_hi + slack)
            throw InvalidInput("viscosity profile escapes [kappa_lo, kappa_hi] at theta=" +
                               std::to_string(theta));
        if (params.capacity) {
            const double h = 1e-5 * std::max(1.0, theta);
            const double d =
                (params.capacity->value(theta + h) - params.capacity->value(theta)) / h;
            if (d < params.kappa_lo - 1e-3 * params.kappa_hi ||
                d > params.kappa_hi + 1e-3 * params.kappa_hi)
                throw InvalidInput("capacity slope escapes [kappa_lo, kappa_hi] at theta=" +
                                   std::to_string(theta));
        }
    }
}

// ---------------------------------------------------------------------------
// Stress

double stress_coefficient(double theta, double d_norm, const FluidParams& params) {
    return params.viscosity(theta) * std::pow(params.delta + d_norm, params.p - 2.0);
}

SymTensor2 stress(double theta, const SymTensor2& d, const FluidParams& params) {
    if (!(theta > 0.0)) throw InvalidInput("stress: theta must be positive");
    require_finite(theta, "stress theta");
    if (!finite(d.xx) || !finite(d.xy) || !finite(d.yy))
        throw InvalidInput("stress: non-finite shear rate");
    const double c = stress_coefficient(theta, d.norm(), params);
    return {c * d.xx, c * d.xy, c * d.yy};
}

// ---------------------------------------------------------------------------
// Kirchhoff transform and weighted primitives

double kirchhoff_g(double s, const FluidParams& params) {
    if (!(s >= 0.0)) throw InvalidInput("kirchhoff_g: s must be >= 0");
    require_finite(s, "kirchhoff_g s");
    return params.conductivity.primitive(s);
}

double kirchhoff_g_inv(double u, const FluidParams& params) {
    if (!(u >= 0.0)) throw InvalidInput("kirchhoff_g_inv: u must be >= 0");
    require_finite(u, "kirchhoff_g_inv u");
    if (u == 0.0) return 0.0;
    const double tol = 1e-12 * std::max(1.0, u);
    return solve_increasing([&](double s) { return kirchhoff_g(s, params); },
                            [&](double s) { return params.conductivity(s); }, u,
                            u / params.kappa_hi, u / params.kappa_lo, tol);
}

double h_alpha(double s, double alpha, const FluidParams& params) {
    if (!(s > 0.0)) throw InvalidInput("h_alpha: s must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("h_alpha: alpha must lie in (0, 1)");
    require_finite(s, "h_alpha s");
    if (s == 1.0) return 0.0;
    if (params.conductivity.is_constant()) {
        const double c = params.conductivity(1.0);
        return std::pow(c, -alpha) * (std::pow(s, 1.0 - alpha) - 1.0) / (1.0 - alpha);
    }
    return adaptive_simpson(
        [&](double z) { return std::pow(kirchhoff_g(z, params), -alpha); }, 1.0, s, 1e-12,
        1e-300);
}

double cutoff(double z, double k) {
    if (!(k > 0.0)) throw InvalidInput("cutoff: k must be positive");
    const double mag = std::min(std::abs(z), k);
    return z < 0.0 ? -mag : mag;
}

double f_k(double s, double k) {
    if (!(s > 0.0)) throw InvalidInput("f_k: s must be positive");
    if (!(k >= 1.0)) throw InvalidInput("f_k: k must be >= 1");
    if (s <= k) return s - 1.0;                 // T_k(z) = z on [1, s]
    return (k - 1.0) + k * std::log(s / k);     // tail integrand k/z
}

double f_k_alpha(double s, double k, double alpha, const FluidParams& params) {
    if (!(s > 0.0)) throw InvalidInput("f_k_alpha: s must be positive");
    if (!(k >= 1.0)) throw InvalidInput("f_k_alpha: k must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw InvalidInput("f_k_alpha: alpha must lie in (0, 1)");
    if (s <= k) return h_alpha(s, alpha, params);
    // Integrand is G(z)^-alpha up to z = k, then (k/z) G(k)^-alpha.
    return h_alpha(k, alpha, params) +
           k * std::pow(kirchhoff_g(k, params), -alpha) * std::log(s / k);
}

// ---------------------------------------------------------------------------
// Heat-capacity rescaling

FluidParams rescale_capacity(const FluidParams& params) {
    if (!params.capacity) throw InvalidInput("rescale_capacity: no capacity profile present");
    const CapacityProfile cap = *params.capacity;
    // Monotonicity sweep; slopes must stay within the conductivity bounds.
    for (int i = 0; i <= 60; ++i) {
        const double theta = std::pow(10.0, -3.0 + 0.1 * i);
        const double d = cap.derivative(theta);
        if (!(d > 0.0)) throw InvalidInput("rescale_capacity: capacity not increasing");
        if (d < params.kappa_lo - 1e-9 || d > params.kappa_hi + 1e-9)
            throw InvalidInput("rescale_capacity: capacity slope outside [kappa_lo, kappa_hi]");
    }
    if (cap.is_identity()) {
        FluidParams out = params;
        out.capacity.reset();
        return out;
    }
    FluidParams out = params;
    out.capacity.reset();
    const ScalarProfile kappa = params.conductivity;
    const ScalarProfile nu = params.viscosity;
    // The Kirchhoff primitive composes exactly: integral of
    // kappa(e^-1) (e^-1)' from 0 to s equals G(e^-1(s)).
    out.conductivity = ScalarProfile::custom_with_primitive(
        [cap, kappa](double big_theta) {
            const double theta = cap.inverse(big_theta);
            return kappa(theta) / cap.derivative(theta);
        },
        [cap, kappa](double s) { return kappa.primitive(cap.inverse(s)); },
        "rescaled(" + kappa.name() + "," + cap.name() + ")");
    out.viscosity = ScalarProfile::custom(
        [cap, nu](double big_theta) { return nu(cap.inverse(big_theta)); },
        "rescaled(" + nu.name() + "," + cap.name() + ")");
    out.kappa_lo = std::min(params.kappa_lo, params.kappa_lo / params.kappa_hi);
    out.kappa_hi = std::max(params.kappa_hi, params.kappa_hi / params.kappa_lo);
    return out;
}

} // namespace nsfd
