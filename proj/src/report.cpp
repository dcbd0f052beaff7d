#include "nsfd/report.hpp"

#include "nsfd/errors.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace nsfd {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.16e", v);
    return buf;
}

} // namespace

std::string render_diagnostics_csv(const DecayReport& report) {
    std::ostringstream os;
    os << "t,kinetic_energy,L_beta_integral,f_integral,theta_L1,theta_min,dissipation\n";
    for (const auto& s : report.samples)
        os << fmt(s.t) << ',' << fmt(s.kinetic_energy) << ',' << fmt(s.l_beta_integral) << ','
           << fmt(s.f_integral) << ',' << fmt(s.theta_l1) << ',' << fmt(s.theta_min) << ','
           << fmt(s.dissipation) << '\n';
    return os.str();
}

std::string render_audit_csv(const DecayReport& report) {
    std::ostringstream os;
    os << "t,kinetic_energy,L_beta_integral,f_integral,theta_L1,theta_min,dissipation,"
          "entropy_production,weighted_dissipation,grad_theta_weighted\n";
    for (const auto& s : report.samples)
        os << fmt(s.t) << ',' << fmt(s.kinetic_energy) << ',' << fmt(s.l_beta_integral) << ','
           << fmt(s.f_integral) << ',' << fmt(s.theta_l1) << ',' << fmt(s.theta_min) << ','
           << fmt(s.dissipation) << ',' << fmt(s.entropy_production) << ','
           << fmt(s.weighted_dissipation) << ',' << fmt(s.grad_theta_weighted) << '\n';
    return os.str();
}

std::string render_verdict_block(const DecayReport& report) {
    std::ostringstream os;
    const auto& c = report.constants;
    os << "constants: mu=" << c.mu << " K=" << c.K << " M=" << c.M << " lambda=" << c.lambda
       << " beta=" << c.beta << " alpha=" << c.alpha << " R=" << c.R << "\n";
    os << "fitted rates: kinetic=" << report.fitted_kinetic_rate
       << " L_beta=" << report.fitted_lyapunov_rate << " f=" << report.fitted_f_rate << "\n";
    os << "steps=" << report.steps << " min_theta=" << report.min_theta_seen
       << " max_theta=" << report.max_theta_seen
       << " (truncation levels k > max_theta are inactive)\n";
    for (const auto& v : report.verdicts)
        os << (v.pass ? "[PASS] " : "[FAIL] ") << v.name << ": margin=" << v.margin << " ("
           << v.details << ")\n";
    return os.str();
}

std::string render_series_svg(const std::vector<double>& t, const std::vector<double>& values,
                              const std::string& title, double envelope_rate,
                              double envelope_value0) {
    if (t.size() != values.size() || t.empty())
        throw InvalidInput("render_series_svg: inconsistent series");
    const int width = 640, height = 420;
    const int ml = 70, mr = 20, mt = 40, mb = 50;
    const double t0 = t.front(), t1 = t.back();
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double v : values)
        if (v > 0.0) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    if (!(lo < hi)) {
        lo = (lo == std::numeric_limits<double>::infinity()) ? 1e-16 : lo * 0.5;
        hi = lo * 10.0;
    }
    const double ylo = std::log10(lo), yhi = std::log10(hi);
    auto xpix = [&](double x) {
        return ml + (x - t0) / std::max(t1 - t0, 1e-300) * (width - ml - mr);
    };
    auto ypix = [&](double v) {
        const double y = std::log10(std::max(v, 1e-300));
        return height - mb - (y - ylo) / std::max(yhi - ylo, 1e-300) * (height - mt - mb);
    };
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
       << height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
       << title << "</text>\n";
    // Axes.
    os << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr
       << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
       << height - mb << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 5; ++k) {
        const double x = t0 + k * (t1 - t0) / 5.0;
        os << "<line x1=\"" << xpix(x) << "\" y1=\"" << height - mb << "\" x2=\"" << xpix(x)
           << "\" y2=\"" << height - mb + 5 << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << xpix(x) << "\" y=\"" << height - mb + 20
           << "\" text-anchor=\"middle\" font-size=\"11\">" << x << "</text>\n";
    }
    const int decades = std::max(1, static_cast<int>(std::ceil(yhi) - std::floor(ylo)));
    for (int k = 0; k <= decades; ++k) {
        const double y = std::floor(ylo) + k;
        if (y < ylo - 0.5 || y > yhi + 0.5) continue;
        const double py = height - mb - (y - ylo) / std::max(yhi - ylo, 1e-300) *
                                            (height - mt - mb);
        os << "<line x1=\"" << ml - 5 << "\" y1=\"" << py << "\" x2=\"" << ml << "\" y2=\""
           << py << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << ml - 8 << "\" y=\"" << py + 4
           << "\" text-anchor=\"end\" font-size=\"11\">1e" << static_cast<int>(y)
           << "</text>\n";
    }
    auto polyline = [&](const std::vector<double>& ys, const char* color) {
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < t.size(); ++i)
            os << xpix(t[i]) << ',' << ypix(ys[i]) << ' ';
        os << "\"/>\n";
    };
    polyline(values, "#1f6fb2");
    if (envelope_rate > 0.0 && envelope_value0 > 0.0) {
        std::vector<double> env(t.size());
        for (std::size_t i = 0; i < t.size(); ++i)
            env[i] = envelope_value0 * std::exp(-envelope_rate * (t[i] - t0));
        polyline(env, "#c23b22");
        os << "<text x=\"" << width - mr - 4 << "\" y=\"" << mt + 14
           << "\" text-anchor=\"end\" font-size=\"11\" fill=\"#c23b22\">envelope rate "
           << envelope_rate << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary); // LF endings everywhere
    if (!out) throw InvalidInput("cannot open for writing: " + path);
    out << content;
}

void emit_report_files(const DecayReport& report, const std::string& directory) {
    std::filesystem::create_directories(directory);
    write_text_file(directory + "/diagnostics.csv", render_diagnostics_csv(report));
    write_text_file(directory + "/audit.csv", render_audit_csv(report));
    write_text_file(directory + "/verdicts.txt", render_verdict_block(report));

    std::vector<double> t;
    for (const auto& s : report.samples) t.push_back(s.t);
    auto series = [&](double (*get)(const DecaySample&)) {
        std::vector<double> v;
        for (const auto& s : report.samples) v.push_back(get(s));
        return v;
    };
    const auto kinetic = series([](const DecaySample& s) { return s.kinetic_energy; });
    write_text_file(directory + "/kinetic_energy.svg",
                    render_series_svg(t, kinetic, "kinetic energy", report.constants.mu,
                                      kinetic.empty() ? 0.0 : kinetic.front()));
    const auto lbeta = series([](const DecaySample& s) { return s.l_beta_integral; });
    write_text_file(directory + "/l_beta_integral.svg",
                    render_series_svg(t, lbeta, "L_beta integral", report.constants.lambda,
                                      lbeta.empty() ? 0.0 : lbeta.front()));
    write_text_file(directory + "/f_integral.svg",
                    render_series_svg(t, series([](const DecaySample& s) { return s.f_integral; }),
                                      "f integral"));
    write_text_file(directory + "/theta_l1.svg",
                    render_series_svg(t, series([](const DecaySample& s) { return s.theta_l1; }),
                                      "theta L1 norm"));
    write_text_file(directory + "/theta_min.svg",
                    render_series_svg(t, series([](const DecaySample& s) { return s.theta_min; }),
                                      "theta minimum"));
    write_text_file(directory + "/dissipation.svg",
                    render_series_svg(t, series([](const DecaySample& s) { return s.dissipation; }),
                                      "dissipation"));
}

} // namespace nsfd
