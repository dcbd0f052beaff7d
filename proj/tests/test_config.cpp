#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nsfd/config.hpp"
#include "nsfd/report.hpp"

#include <fstream>

using namespace nsfd;

TEST_CASE("minimal file fills every default") {
    const auto cfg = parse_config_text("[output]\ndirectory = results\n");
    CHECK(cfg.nx == 32);
    CHECK(cfg.ny == 32);
    CHECK(cfg.p == 2.5);
    CHECK(cfg.delta == 1.0);
    CHECK(cfg.kappa_lo == 1.0);
    CHECK(cfg.kappa_hi == 2.0);
    CHECK(cfg.alpha == 0.6);
    CHECK(cfg.output_dir == "results");
    CHECK(validate_config(cfg, true).empty());
}

TEST_CASE("parse errors carry line numbers") {
    try {
        parse_config_text("[domain]\nnx = 16\nbogus line\n", "test.ini");
        FAIL("expected a parse error");
    } catch (const InvalidInput& e) {
        CHECK(std::string(e.what()).find("test.ini:3") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config_text("[nosuch]\n"), InvalidInput);
    CHECK_THROWS_AS(parse_config_text("[domain]\nnx = sixteen\n"), InvalidInput);
    CHECK_THROWS_AS(parse_config_text("key = 1\n"), InvalidInput);
    CHECK_THROWS_AS(parse_config_text("[domain]\nnkx = 1\n"), InvalidInput);
    CHECK_THROWS_AS(parse_config("no_such_config_file.ini"), InvalidInput);
}

TEST_CASE("validation collects every violation, not just the first") {
    auto cfg = parse_config_text("[fluid]\np = 1.5\nkappa_lo = -1\n[diagnostics]\nalpha = 0.9\n");
    const auto errors = validate_config(cfg, true);
    CHECK(errors.size() >= 3);
    bool p_msg = false;
    for (const auto& e : errors)
        if (e.find("p >= 2 required in 2D") != std::string::npos) p_msg = true;
    CHECK(p_msg);
}

TEST_CASE("delta = 0 is rejected for the exponential path with a pointer") {
    auto cfg = parse_config_text("[fluid]\ndelta = 0\n");
    const auto errors = validate_config(cfg, true);
    bool found = false;
    for (const auto& e : errors)
        if (e.find("appendixb") != std::string::npos) found = true;
    CHECK(found);
    // The appendixb path itself accepts delta = 0.
    CHECK(validate_config(cfg, false).empty());
}

TEST_CASE("config round trips losslessly through serialize and parse") {
    ExperimentConfig cfg;
    cfg.Lx = 2.25;
    cfg.nx = 48;
    cfg.p = 3.125;
    cfg.delta = 0.5;
    cfg.kappa_hi = 2.75;
    cfg.conductivity_profile = "constant:1.5";
    cfg.capacity_profile = "theta_plus_log";
    cfg.trace = "sides:1,2,1.25,1.75";
    cfg.velocity_amplitude = 0.875;
    cfg.theta_bump = 0.03125;
    cfg.alpha = 0.625;
    cfg.lambda_fraction = 0.25;
    cfg.t_end = 0.75;
    cfg.sample_dt = 0.015625;
    cfg.dt_max = 1e-4;
    cfg.checkpoint_every = 7;
    cfg.seed = 987654321;
    cfg.steady_tol = 1e-12;
    cfg.output_dir = "runs/exp1";
    const auto back = parse_config_text(serialize_config(cfg));
    CHECK(back == cfg);
}

TEST_CASE("factories build validated physics objects") {
    ExperimentConfig cfg;
    cfg.trace = "table:missing.txt";
    const Domain dom = make_domain(cfg);
    CHECK(dom.nx == 32);
    CHECK_THROWS_AS(make_trace(cfg, dom), InvalidInput);
    cfg.trace = "constant:1.5";
    const auto trace = make_trace(cfg, dom);
    CHECK(trace.min() == 1.5);
    cfg.trace = "sides:1,2,1.4,1.6";
    const auto sides = make_trace(cfg, dom);
    CHECK(sides.left[0] == 1.0);
    CHECK(sides.top[0] == 1.6);
    const auto params = make_fluid_params(cfg);
    CHECK(params.p == 2.5);
    CHECK(params.conductivity(0.0) == doctest::Approx(2.0));
}

TEST_CASE("report rendering: pinned CSV columns and SVG structure") {
    DecayReport report;
    for (int i = 0; i < 5; ++i) {
        DecaySample s;
        s.t = 0.1 * i;
        s.kinetic_energy = std::exp(-2.0 * s.t);
        s.l_beta_integral = 2.0 * s.kinetic_energy;
        s.f_integral = 0.1 * s.kinetic_energy;
        s.theta_l1 = 1.5;
        s.theta_min = 1.0;
        s.dissipation = 2.0 * s.kinetic_energy;
        report.samples.push_back(s);
    }
    report.constants.mu = 2.0;
    const std::string csv = render_diagnostics_csv(report);
    CHECK(csv.rfind("t,kinetic_energy,L_beta_integral,f_integral,theta_L1,theta_min,"
                    "dissipation\n", 0) == 0);
    // 17 significant digits, LF endings, one row per sample.
    CHECK(csv.find("1.0000000000000001e-01") != std::string::npos);
    CHECK(csv.find('\r') == std::string::npos);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);

    const std::string audit = render_audit_csv(report);
    CHECK(audit.find("grad_theta_weighted") != std::string::npos);

    std::vector<double> t, v;
    for (const auto& s : report.samples) {
        t.push_back(s.t);
        v.push_back(s.kinetic_energy);
    }
    const std::string svg = render_series_svg(t, v, "kinetic energy", 2.0, v.front());
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("polyline") != std::string::npos);
    CHECK(svg.find("envelope rate") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("boundary table file loads through the trace spec") {
    const std::string path = "trace_table_test.txt";
    {
        std::ofstream out(path);
        out << "0.0 1.0\n0.25 2.0\n0.5 2.0\n0.75 1.0\n";
    }
    ExperimentConfig cfg;
    cfg.trace = "table:" + path;
    const Domain dom = make_domain(cfg);
    const auto trace = make_trace(cfg, dom);
    CHECK(trace.right[0] == doctest::Approx(2.0));
    CHECK(trace.left[0] == doctest::Approx(1.0));
    std::remove(path.c_str());
}
