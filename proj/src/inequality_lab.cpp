#include "nsfd/inequality_lab.hpp"

#include "nsfd/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace nsfd {

namespace {

std::string describe_sample(double theta, double theta_hat, double alpha) {
    std::ostringstream os;
    os << "theta=" << theta << " theta_hat=" << theta_hat << " alpha=" << alpha;
    return os.str();
}

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> unif(std::log(lo), std::log(hi));
    return std::exp(unif(rng));
}

} // namespace

double oracle_f(double theta, double theta_hat, double alpha, const FluidParams& params) {
    if (theta == theta_hat) return 0.0;
    // Proof representation rewritten in temperature variables,
    //   f = alpha int_{theta_hat}^{theta} G(a)^-alpha
    //             int_{theta_hat}^{a} kappa(u) G(u)^(alpha-1) du  da,
    // with both levels log-parametrized so a fixed Gauss rule stays accurate
    // when theta and theta_hat sit decades apart. Oriented integrals: both
    // flip sign together for theta < theta_hat.
    constexpr int kOrder = 32;
    const double ly = std::log(theta_hat);
    auto inner = [&](double a) {
        return gauss_legendre_integrate(
            [&](double y) {
                const double u = std::exp(y);
                return params.conductivity(u) *
                       std::pow(kirchhoff_g(u, params), alpha - 1.0) * u;
            },
            ly, std::log(a), kOrder);
    };
    const double outer = gauss_legendre_integrate(
        [&](double z) {
            const double a = std::exp(z);
            return std::pow(kirchhoff_g(a, params), -alpha) * inner(a) * a;
        },
        ly, std::log(theta), kOrder);
    return alpha * outer;
}

double gap_normalizer(double theta, double theta_hat, double alpha) {
    const double r = theta / theta_hat;
    return theta_hat * std::pow(r, alpha) *
           (1.0 + std::pow(1.0 / r, alpha) + std::pow(1.0 / r, 0.5 * (1.0 - alpha)));
}

namespace {

double gap_g(double theta, double theta_hat, double alpha) {
    const double t = std::pow(theta / theta_hat, 0.5 * (1.0 - alpha)) - 1.0;
    return t * t;
}

double gap_hbar(double theta, double theta_hat, double alpha, const FluidParams& params) {
    return std::pow(kirchhoff_g(theta, params) / kirchhoff_g(theta_hat, params),
                    0.5 * (1.0 - alpha)) -
           1.0;
}

/// Dense deterministic calibration grid: ratio exponent in [-6, 6] step
/// 0.05 (excluding the coincidence point), theta_hat decade grid.
template <class Ratio>
double calibrate(const Ratio& ratio) {
    double sup = 0.0;
    for (int e_hat = -8; e_hat <= 8; ++e_hat) {
        const double theta_hat = std::pow(10.0, 0.25 * e_hat);
        for (int e = -120; e <= 120; ++e) {
            if (e == 0) continue;
            const double theta = theta_hat * std::pow(10.0, 0.05 * e);
            sup = std::max(sup, ratio(theta, theta_hat));
        }
    }
    return 2.0 * sup;
}

} // namespace

double calibrate_lemma1_constant(const FluidParams& params, double alpha) {
    return calibrate([&](double theta, double theta_hat) {
        const double denom =
            gap_normalizer(theta, theta_hat, alpha) * gap_g(theta, theta_hat, alpha);
        return oracle_f(theta, theta_hat, alpha, params) / denom;
    });
}

double calibrate_lemma2_constant(const FluidParams& params, double alpha) {
    return calibrate([&](double theta, double theta_hat) {
        const double h = gap_hbar(theta, theta_hat, alpha, params);
        const double denom = gap_normalizer(theta, theta_hat, alpha) * h * h;
        return oracle_f(theta, theta_hat, alpha, params) / denom;
    });
}

double calibrate_sqrt_g_constant(const FluidParams& params, double alpha) {
    return calibrate([&](double theta, double theta_hat) {
        return std::sqrt(gap_g(theta, theta_hat, alpha)) /
               std::abs(gap_hbar(theta, theta_hat, alpha, params));
    });
}

InequalityVerdict verify_lemma1(const SampleConfig& config, const FluidParams& params) {
    InequalityVerdict v;
    v.lemma_id = "lemma1";
    v.oracle = "double-quadrature integral representation of f";
    v.seed = config.seed;
    std::mt19937_64 rng(config.seed);

    std::vector<double> constants;
    for (double a : config.alphas) constants.push_back(calibrate_lemma1_constant(params, a));
    v.calibrated_constant = *std::max_element(constants.begin(), constants.end());

    for (long n = 0; n < config.n_samples; ++n) {
        const std::size_t ai = static_cast<std::size_t>(n) % config.alphas.size();
        const double alpha = config.alphas[ai];
        const double theta = log_uniform(rng, config.theta_min, config.theta_max);
        const double theta_hat = log_uniform(rng, config.theta_hat_min, config.theta_hat_max);
        const double f = oracle_f(theta, theta_hat, alpha, params);
        if (f < -1e-12 * std::max(1.0, std::abs(theta - theta_hat))) {
            v.worst_margin = std::min(v.worst_margin, f);
            v.failing_sample = describe_sample(theta, theta_hat, alpha) + " (f < 0)";
            continue;
        }
        const double rhs = constants[ai] * gap_normalizer(theta, theta_hat, alpha) *
                           gap_g(theta, theta_hat, alpha);
        const double margin = (rhs - f) / std::max(rhs, 1e-300);
        if (margin < v.worst_margin) {
            v.worst_margin = margin;
            if (margin < -1e-9) v.failing_sample = describe_sample(theta, theta_hat, alpha);
        }
        ++v.samples;
    }
    v.finish();
    return v;
}

InequalityVerdict verify_lemma2(const SampleConfig& config, const FluidParams& params) {
    InequalityVerdict v;
    v.lemma_id = "lemma2";
    v.oracle = "double-quadrature f oracle plus closed-form g, hbar";
    v.seed = config.seed;
    std::mt19937_64 rng(config.seed + 1);

    std::vector<double> constants, sqrt_constants;
    for (double a : config.alphas) {
        constants.push_back(calibrate_lemma2_constant(params, a));
        sqrt_constants.push_back(calibrate_sqrt_g_constant(params, a));
    }
    v.calibrated_constant = *std::max_element(constants.begin(), constants.end());

    for (long n = 0; n < config.n_samples; ++n) {
        const std::size_t ai = static_cast<std::size_t>(n) % config.alphas.size();
        const double alpha = config.alphas[ai];
        const double theta = log_uniform(rng, config.theta_min, config.theta_max);
        const double theta_hat = log_uniform(rng, config.theta_hat_min, config.theta_hat_max);
        const double f = oracle_f(theta, theta_hat, alpha, params);
        const double h = gap_hbar(theta, theta_hat, alpha, params);
        const double rhs = constants[ai] * gap_normalizer(theta, theta_hat, alpha) * h * h;
        double margin = (rhs - f) / std::max(rhs, 1e-300);
        // Intermediate bound sqrt(g) <= C' |hbar|.
        const double lhs2 = std::sqrt(gap_g(theta, theta_hat, alpha));
        const double rhs2 = sqrt_constants[ai] * std::abs(h);
        margin = std::min(margin, (rhs2 - lhs2) / std::max(rhs2, 1e-300));
        if (margin < v.worst_margin) {
            v.worst_margin = margin;
            if (margin < -1e-9) v.failing_sample = describe_sample(theta, theta_hat, alpha);
        }
        ++v.samples;
    }
    v.finish();
    return v;
}

namespace {

/// A_k(s) for the truncated exponential test function, by quadrature of the
/// definition (the integrand vanishes below ln theta_hi).
double a_k_quadrature(double s, double k, double theta_hi) {
    const double lo = std::log(theta_hi);
    if (s <= lo) return 0.0;
    return adaptive_simpson(
        [&](double tau) {
            const double e = std::exp(tau);
            return std::min(e, k) * (1.0 - theta_hi / e);
        },
        lo, s, 1e-12, 1e-300);
}

double a_limit(double s, double theta_hi) {
    const double e = std::exp(s);
    const double lo = std::log(theta_hi);
    const double first = std::max(e - theta_hi, 0.0);
    const double second = theta_hi * std::max(s - lo, 0.0);
    return first - second;
}

} // namespace

InequalityVerdict verify_bound_g_and_limits(const SampleConfig& config,
                                            const FluidParams& params) {
    InequalityVerdict v;
    v.lemma_id = "bound_g_limits";
    v.oracle = "direct quadrature of kappa and of the truncated integrands";
    v.seed = config.seed;
    std::mt19937_64 rng(config.seed + 2);

    const double ladder_max = 32768.0; // 2^15

    // G bounds and the quadrature cross-check of the production primitive.
    const long n_g = config.n_samples;
    for (long n = 0; n < n_g; ++n) {
        const double s = log_uniform(rng, config.theta_min, config.theta_max);
        const double g = kirchhoff_g(s, params);
        const double scale = std::max(params.kappa_hi * s, 1e-300);
        const double margin =
            std::min(g - params.kappa_lo * s, params.kappa_hi * s - g) / scale;
        if (margin < v.worst_margin) {
            v.worst_margin = margin;
            if (margin < -1e-9) v.failing_sample = "G bound at s=" + std::to_string(s);
        }
        ++v.samples;
    }
    // Independent quadrature of kappa on a small subset.
    for (int n = 0; n < 64; ++n) {
        const double s = log_uniform(rng, config.theta_min, config.theta_max);
        const double ref = adaptive_simpson([&](double z) { return params.conductivity(z); },
                                            0.0, s, 1e-11, 1e-300);
        const double margin =
            1e-8 - std::abs(kirchhoff_g(s, params) - ref) / std::max(std::abs(ref), 1e-300);
        if (margin < v.worst_margin) {
            v.worst_margin = margin;
            if (margin < -1e-9)
                v.failing_sample = "G vs quadrature at s=" + std::to_string(s);
        }
        ++v.samples;
    }

    // Cut-off ladders: monotone errors, exact once k >= s.
    for (int n = 0; n < 64; ++n) {
        const double s = log_uniform(rng, 1.5, config.theta_max);
        const double alpha = config.alphas[static_cast<std::size_t>(n) % config.alphas.size()];
        const double h_ref = h_alpha(s, alpha, params);
        double prev_err = std::numeric_limits<double>::infinity();
        double prev_err_a = std::numeric_limits<double>::infinity();
        for (double k = 2.0; k <= ladder_max; k *= 2.0) {
            const double err = std::abs(f_k(s, k) - (s - 1.0));
            const double err_a = std::abs(f_k_alpha(s, k, alpha, params) - h_ref);
            const double slack = 1e-12 * std::max(1.0, s);
            double margin = std::min(prev_err - err + slack, prev_err_a - err_a + slack);
            if (k >= s) margin = std::min(margin, slack - err); // exact equality regime
            if (margin < v.worst_margin) {
                v.worst_margin = margin;
                if (margin < -1e-9)
                    v.failing_sample =
                        "F_k ladder at s=" + std::to_string(s) + " k=" + std::to_string(k);
            }
            prev_err = err;
            prev_err_a = err_a;
            ++v.samples;
        }
    }

    // A_k: monotone increase toward the closed-form limit.
    const double theta_hi = std::max(config.theta_hat_max, 1.0);
    for (int n = 0; n < 32; ++n) {
        const double s = std::log(theta_hi) - 0.5 + 0.15 * n;
        const double limit = a_limit(s, theta_hi);
        double prev = -std::numeric_limits<double>::infinity();
        double prev_err = std::numeric_limits<double>::infinity();
        for (double k = 2.0; k <= ladder_max; k *= 2.0) {
            const double a = a_k_quadrature(s, k, theta_hi);
            const double err = limit - a;
            const double slack = 1e-10 * std::max(1.0, std::abs(limit));
            const double margin =
                std::min({a - prev + slack, prev_err - err + slack, err + slack});
            if (margin < v.worst_margin) {
                v.worst_margin = margin;
                if (margin < -1e-9)
                    v.failing_sample =
                        "A_k ladder at s=" + std::to_string(s) + " k=" + std::to_string(k);
            }
            prev = a;
            prev_err = err;
            ++v.samples;
        }
    }

    v.finish();
    return v;
}

InequalityVerdict verify_appendix_b(const KineticSeries& series, const FluidParams& params) {
    if (series.delta != 0.0)
        throw InvalidInput("verify_appendix_b: series must come from a delta = 0 run");
    if (series.t.size() != series.v_norm_sq.size() || series.t.empty())
        throw InvalidInput("verify_appendix_b: inconsistent series");
    if (!(series.r > 2.0)) throw InvalidInput("verify_appendix_b: need r > 2");

    InequalityVerdict v;
    v.lemma_id = "appendix_b";
    v.oracle = "closed-form polynomial envelope";
    v.samples = static_cast<long>(series.t.size());

    const double r = series.r;
    const double v0 = series.v0_norm;
    for (std::size_t i = 0; i < series.t.size(); ++i) {
        const double env = v0 / std::pow(1.0 + series.mu_prime * (r - 2.0) * series.t[i] *
                                             std::pow(v0, r - 2.0),
                                         1.0 / (r - 2.0));
        const double env_sq = env * env;
        const double margin = (env_sq - series.v_norm_sq[i]) / std::max(env_sq, 1e-300);
        if (margin < v.worst_margin) {
            v.worst_margin = margin;
            if (margin < -1e-9) v.failing_sample = "t=" + std::to_string(series.t[i]);
        }
    }

    // Fitted polynomial exponent of the f-integral, reported next to the
    // interpolation exponent nu/(r-2); not asserted.
    std::ostringstream notes;
    notes << "r = p = " << r << " (exponent choice recorded in the verdict); ";
    if (series.f_integral.size() == series.t.size() && series.t.size() > 4) {
        std::vector<double> xs, ys;
        for (std::size_t i = series.t.size() / 5; i < series.t.size(); ++i)
            if (series.f_integral[i] > 1e-300) {
                xs.push_back(std::log(1.0 + series.t[i]));
                ys.push_back(std::log(series.f_integral[i]));
            }
        const double nu =
            (3.0 * r * series.alpha - 6.0 + 2.0 * r) / (3.0 * r - 6.0 + 2.0 * r);
        notes << "f-integral fitted exponent ";
        if (xs.size() > 2)
            notes << -linear_fit(xs, ys).slope;
        else
            notes << "n/a";
        notes << " vs nu/(r-2) = " << nu / (r - 2.0) << " (reported, not asserted)";
    }
    v.notes = notes.str();
    (void)params;
    v.finish();
    return v;
}

std::string render_verdicts(const std::vector<InequalityVerdict>& verdicts) {
    std::ostringstream os;
    for (const auto& v : verdicts) {
        os << (v.pass ? "[PASS] " : "[FAIL] ") << v.lemma_id << ": samples=" << v.samples
           << " worst_margin=" << v.worst_margin;
        if (v.calibrated_constant > 0.0) os << " constant=" << v.calibrated_constant;
        os << " oracle=\"" << v.oracle << "\"";
        if (!v.failing_sample.empty()) os << " failing_sample=\"" << v.failing_sample << "\"";
        if (!v.notes.empty()) os << "\n       " << v.notes;
        os << "\n";
    }
    return os.str();
}

std::string render_verdicts_machine(const std::vector<InequalityVerdict>& verdicts) {
    std::ostringstream os;
    os << "id,samples,margin,constant,seed,pass\n";
    os.precision(17);
    for (const auto& v : verdicts)
        os << v.lemma_id << "," << v.samples << "," << v.worst_margin << ","
           << v.calibrated_constant << "," << v.seed << "," << (v.pass ? 1 : 0) << "\n";
    return os.str();
}

} // namespace nsfd
