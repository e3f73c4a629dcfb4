// Command-line front end: closed-loop scenario runs, offline calibration
// from twist logs, persistent-excitation audits, and stability-margin
// reports.

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "coopmanip/config_io.hpp"
#include "coopmanip/csv_io.hpp"
#include "coopmanip/estimation.hpp"
#include "coopmanip/sim.hpp"
#include "coopmanip/stability.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace coopmanip;

namespace {

constexpr const char* kVersion = "1.0.0";

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntimeHalt = 3;
constexpr int kExitNotPersistent = 4;
constexpr int kExitNotHurwitz = 5;

json constants_to_json(const BoundConstants& c) {
    return json{{"c_m", c.c_m},       {"c_M", c.c_M},
                {"c_g", c.c_g},       {"c_h", c.c_h},
                {"c_v", c.c_v},       {"c_a", c.c_a},
                {"cbar_m", c.cbar_m}, {"cbar_M", c.cbar_M},
                {"cbar_g", c.cbar_g}, {"cbar_h", c.cbar_h},
                {"c_n", c.c_n},       {"c_t", c.c_t},
                {"c_d", c.c_d},       {"c_lambda", c.c_lambda},
                {"c_l", c.c_l},       {"eps_t", c.eps_t},
                {"eps_d", c.eps_d}};
}

json report_to_json(const StabilityReport& rep, const BoundConstants& c,
                    const RunSettings& run) {
    return json{
        {"lambda_min", rep.lambda_min},
        {"lambda_max", rep.lambda_max},
        {"gamma", rep.gamma},
        {"kappa0", rep.kappas.k0},
        {"kappa1", rep.kappas.k1},
        {"kappa2", rep.kappas.k2},
        {"sigma", rep.sigma},
        {"b", rep.b},
        {"r_z", rep.r_z},
        {"r_theta_bound", rep.r_theta_bound},
        {"r_theta_initial", rep.r_theta_input},
        {"alpha", rep.alpha},
        {"sigma_positive", rep.sigma_positive},
        {"initial_error_admissible", rep.initial_error_admissible},
        {"infeasible_r_z", rep.infeasible_r_z},
        {"constants", constants_to_json(c)},
        {"sampling",
         {{"samples", run.constants_samples},
          {"radius", run.constants_radius},
          {"position_range", run.region.position_range},
          {"euler_range", run.region.euler_range},
          {"velocity_scale", run.region.velocity_scale}}},
    };
}

void print_report_text(std::ostream& os, const StabilityReport& rep,
                       const BoundConstants& c) {
    os << "lambda_min: " << rep.lambda_min << "\n"
       << "lambda_max: " << rep.lambda_max << "\n"
       << "gamma: " << rep.gamma << "\n"
       << "kappa0: " << rep.kappas.k0 << "\n"
       << "kappa1: " << rep.kappas.k1 << "\n"
       << "kappa2: " << rep.kappas.k2 << "\n"
       << "sigma: " << rep.sigma << "\n"
       << "b: " << rep.b << "\n"
       << "r_z: " << rep.r_z << "\n"
       << "r_theta_bound: " << rep.r_theta_bound << "\n"
       << "r_theta_initial: " << rep.r_theta_input << "\n"
       << "alpha: " << rep.alpha << "\n"
       << "sigma_positive: " << (rep.sigma_positive ? "true" : "false") << "\n"
       << "initial_error_admissible: "
       << (rep.initial_error_admissible ? "true" : "false") << "\n"
       << "infeasible_r_z: " << (rep.infeasible_r_z ? "true" : "false") << "\n"
       << "c_m: " << c.c_m << "\nc_M: " << c.c_M << "\nc_g: " << c.c_g
       << "\nc_h: " << c.c_h << "\nc_v: " << c.c_v << "\nc_a: " << c.c_a
       << "\ncbar_m: " << c.cbar_m << "\ncbar_M: " << c.cbar_M
       << "\ncbar_g: " << c.cbar_g << "\ncbar_h: " << c.cbar_h
       << "\nc_n: " << c.c_n << "\nc_t: " << c.c_t << "\nc_d: " << c.c_d
       << "\nc_lambda: " << c.c_lambda << "\nc_l: " << c.c_l
       << "\neps_t: " << c.eps_t << "\neps_d: " << c.eps_d << "\n";
}

// Final-window (last quarter) RMS of the tracking error norm.
double final_window_rms(const SimLog& log) {
    const std::size_t n = log.records.size();
    const std::size_t begin = n - n / 4;
    double acc = 0.0;
    for (std::size_t i = begin; i < n; ++i) {
        acc += log.records[i].e.squaredNorm();
    }
    return std::sqrt(acc / static_cast<double>(n - begin));
}

struct ReportBundle {
    BoundConstants constants;
    StabilityReport report;
};

ReportBundle analyze_scenario(const Scenario& scenario) {
    const SimConfig& cfg = scenario.sim;
    const BoundConstants constants = estimate_constants(
        cfg.model, cfg.theta_true, scenario.run.constants_radius,
        cfg.trajectory.c_v, cfg.trajectory.c_a, scenario.run.constants_samples,
        scenario.run.region);
    const Kappas kappas = scenario.run.use_kappa_override
                              ? scenario.run.kappa_override
                              : kappa_bounds(constants, cfg.gains.norm());
    const double r0 = param_distance(cfg.theta_true, cfg.theta_guess);
    const StabilityReport report =
        stability_report(cfg.gains, kappas, r0, scenario.run.alpha);
    return {constants, report};
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 std::optional<std::uint64_t> seed, bool no_adapt) {
    Scenario scenario = load_scenario(config_path);
    if (seed) scenario.sim.noise.seed = *seed;
    fs::create_directories(out_dir);

    const SimLog log = run(scenario.sim);
    const std::string log_path = (fs::path(out_dir) / "run_log.csv").string();
    write_run_log(log_path, log);

    json manifest{{"artifact_version", kVersion},
                  {"config_digest", scenario_digest(scenario)},
                  {"seed", scenario.sim.noise.seed},
                  {"outputs", json::array({log_path})}};

    if (log.halted) {
        manifest["halted"] = true;
        manifest["halt_reason"] = log.halt_reason;
        std::ofstream((fs::path(out_dir) / "manifest.json").string())
            << manifest.dump(2) << "\n";
        std::cerr << "run halted: " << log.halt_reason << "\n";
        return kExitRuntimeHalt;
    }

    const ReportBundle bundle = analyze_scenario(scenario);
    const std::string report_json_path =
        (fs::path(out_dir) / "stability_report.json").string();
    const std::string report_txt_path =
        (fs::path(out_dir) / "stability_report.txt").string();
    std::ofstream(report_json_path)
        << report_to_json(bundle.report, bundle.constants, scenario.run).dump(2)
        << "\n";
    {
        std::ofstream txt(report_txt_path);
        print_report_text(txt, bundle.report, bundle.constants);
    }
    manifest["outputs"].push_back(report_json_path);
    manifest["outputs"].push_back(report_txt_path);

    std::cout << "run complete: " << log.records.size() << " records, final "
              << "theta_err " << log.records.back().theta_err << "\n";

    if (no_adapt) {
        Scenario baseline = scenario;
        baseline.sim.adaptation_enabled = false;
        const SimLog base_log = run(baseline.sim);
        const std::string base_path =
            (fs::path(out_dir) / "run_log_noadapt.csv").string();
        write_run_log(base_path, base_log);
        manifest["outputs"].push_back(base_path);
        if (base_log.halted) {
            manifest["halted"] = true;
            manifest["halt_reason"] = base_log.halt_reason;
            std::ofstream((fs::path(out_dir) / "manifest.json").string())
                << manifest.dump(2) << "\n";
            std::cerr << "baseline run halted: " << base_log.halt_reason << "\n";
            return kExitRuntimeHalt;
        }
        const double rms_adapt = final_window_rms(log);
        const double rms_base = final_window_rms(base_log);
        const double ratio = rms_base / std::max(rms_adapt, 1e-300);
        manifest["comparison"] = {{"rms_adapt", rms_adapt},
                                  {"rms_noadapt", rms_base},
                                  {"rms_ratio", ratio}};
        std::cout << "final-window tracking RMS: adapt " << rms_adapt
                  << ", no-adapt " << rms_base << ", ratio " << ratio << "\n";
    }

    std::ofstream((fs::path(out_dir) / "manifest.json").string())
        << manifest.dump(2) << "\n";
    return kExitOk;
}

int cmd_calibrate(const std::string& log_path,
                  const std::optional<std::string>& config_path,
                  const std::string& out_dir, std::size_t window,
                  double threshold) {
    Scenario scenario =
        config_path ? load_scenario(*config_path) : default_scenario_full();
    const EstimatorSettings& es = scenario.sim.estimators;

    const std::vector<TwistLogRecord> records = read_twist_log(log_path);
    if (records.size() < 2) {
        throw InvalidConfig("twist log must contain at least two records");
    }
    const double h = records[1].t - records[0].t;

    AttitudeEstimatorState att =
        attitude_init(scenario.sim.theta_guess.eta, es.mu_attitude, h);
    DisplacementEstimatorState disp =
        displacement_init(scenario.sim.theta_guess.rho,
                          es.p0_scale * Mat3::Identity(), es.mu_displacement, h);
    bool ever_degenerate = false;
    for (const TwistLogRecord& r : records) {
        att = attitude_update(att, r.w1, r.w2);
        disp = displacement_update(disp, att.eta_hat, r.v1, r.v2, r.w2);
        ever_degenerate = ever_degenerate || att.degenerate_spectrum;
    }

    // Residual RMS of the stacked twist residuals at the final estimates.
    const Mat3 a_hat = rotation_from_quaternion(att.eta_hat);
    double acc = 0.0;
    for (const TwistLogRecord& r : records) {
        const Vec3 eps_w = r.w2 - a_hat * r.w1;
        const Vec3 eps_v = r.v2 - a_hat * r.v1 + disp.rho_hat.cross(r.w2);
        acc += eps_w.squaredNorm() + eps_v.squaredNorm();
    }
    const double residual_rms =
        std::sqrt(acc / static_cast<double>(records.size()));

    // PE verdict over non-overlapping windows of the requested length.
    const std::size_t p = window > 0 ? window : es.pe_window;
    const double thr = threshold > 0.0 ? threshold : es.pe_threshold;
    bool pe_ok = true;
    double min_lambda = std::numeric_limits<double>::infinity();
    for (std::size_t base = 0; base < records.size(); base += p) {
        const std::size_t end = std::min(base + p, records.size());
        PeWindow win(p, thr);
        for (std::size_t i = base; i < end; ++i) win.push(records[i].w2);
        const auto [pi, lmin] = pe_check(win);
        min_lambda = std::min(min_lambda, lmin);
        pe_ok = pe_ok && lmin > thr;
    }

    const Vec4 eta = att.eta_hat.as_vec4();
    std::cout << "eta_hat: [" << eta[0] << ", " << eta[1] << ", " << eta[2]
              << ", " << eta[3] << "]\n"
              << "rho_hat: [" << disp.rho_hat[0] << ", " << disp.rho_hat[1]
              << ", " << disp.rho_hat[2] << "]\n"
              << "residual_rms: " << residual_rms << "\n"
              << "pe_lambda_min: " << min_lambda << "\n"
              << "pe_verdict: " << (pe_ok ? "positive" : "negative") << "\n"
              << "degenerate_spectrum: " << (ever_degenerate ? "true" : "false")
              << "\n";
    if (!pe_ok) {
        std::cout << "result is non-identifiable: angular-velocity directions "
                     "do not persistently excite the chain\n";
    }

    fs::create_directories(out_dir);
    json report{{"eta_hat", {eta[0], eta[1], eta[2], eta[3]}},
                {"rho_hat", {disp.rho_hat[0], disp.rho_hat[1], disp.rho_hat[2]}},
                {"residual_rms", residual_rms},
                {"pe_lambda_min", min_lambda},
                {"pe_verdict", pe_ok ? "positive" : "negative"},
                {"degenerate_spectrum", ever_degenerate},
                {"window", p},
                {"threshold", thr},
                {"records", records.size()}};
    std::ofstream((fs::path(out_dir) / "calibration_report.json").string())
        << report.dump(2) << "\n";
    return pe_ok ? kExitOk : kExitNotPersistent;
}

int cmd_analyze(const std::string& config_path) {
    const Scenario scenario = load_scenario(config_path);
    const ReportBundle bundle = analyze_scenario(scenario);
    print_report_text(std::cout, bundle.report, bundle.constants);
    if (bundle.report.infeasible_r_z) {
        std::cout << "note: kappa2 is zero, r_z fell back to the supplied "
                     "default\n";
    }
    std::cout << "initial_guess_verdict: "
              << (bundle.report.initial_error_admissible ? "admissible"
                                                         : "inadmissible")
              << "\n";
    std::cout << report_to_json(bundle.report, bundle.constants, scenario.run)
                     .dump(2)
              << "\n";
    return kExitOk;
}

int cmd_pe_audit(const std::string& log_path, std::size_t window,
                 double threshold) {
    const std::vector<TwistLogRecord> records = read_twist_log(log_path);
    if (records.empty()) {
        throw InvalidConfig("twist log is empty");
    }
    if (records.size() < window) {
        std::cout << "warning: log shorter than one window; single truncated "
                     "window\n";
    }
    bool all_ok = true;
    std::size_t index = 0;
    for (std::size_t base = 0; base < records.size(); base += window) {
        const std::size_t end = std::min(base + window, records.size());
        PeWindow win(window, threshold);
        for (std::size_t i = base; i < end; ++i) win.push(records[i].w2);
        const auto [pi, lmin] = pe_check(win);
        const bool ok = lmin > threshold;
        all_ok = all_ok && ok;
        std::cout << "window " << index++ << " [" << records[base].t << ", "
                  << records[end - 1].t << "]: lambda_min " << lmin << " "
                  << (ok ? "pass" : "fail") << "\n";
    }
    std::cout << "overall: " << (all_ok ? "pass" : "fail") << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Self-tuning cooperative-manipulator control toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::string twist_log_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool no_adapt = false;
    std::size_t window = 500;
    double threshold = 1.0;

    CLI::App* sim = app.add_subcommand("simulate", "Run a closed-loop scenario");
    sim->add_option("--config", config_path, "Scenario config file")->required();
    sim->add_option("--out", out_dir, "Output directory");
    sim->add_option("--seed", seed, "Override the noise seed")
        ->each([&seed_set](const std::string&) { seed_set = true; });
    sim->add_flag("--no-adapt", no_adapt,
                  "Also run the fixed-parameter baseline and compare");

    CLI::App* cal = app.add_subcommand(
        "calibrate", "Estimate the relative pose offline from a twist log");
    cal->add_option("log", twist_log_path, "Twist log CSV")->required();
    cal->add_option("--config", config_path, "Scenario config for settings");
    cal->add_option("--out", out_dir, "Output directory");
    cal->add_option("--window", window, "PE window length (samples)");
    cal->add_option("--threshold", threshold, "PE eigenvalue threshold");

    CLI::App* ana =
        app.add_subcommand("analyze", "Stability margins for a scenario");
    ana->add_option("--config", config_path, "Scenario config file")->required();

    CLI::App* pe = app.add_subcommand(
        "pe-audit", "Per-window persistent-excitation audit of a twist log");
    pe->add_option("log", twist_log_path, "Twist log CSV")->required();
    pe->add_option("--window", window, "Window length (samples)");
    pe->add_option("--threshold", threshold, "Eigenvalue threshold");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            return cmd_simulate(config_path, out_dir,
                                seed_set ? std::optional<std::uint64_t>(seed)
                                         : std::nullopt,
                                no_adapt);
        }
        if (cal->parsed()) {
            return cmd_calibrate(
                twist_log_path,
                config_path.empty() ? std::nullopt
                                    : std::optional<std::string>(config_path),
                out_dir, window, threshold);
        }
        if (ana->parsed()) {
            return cmd_analyze(config_path);
        }
        if (pe->parsed()) {
            return cmd_pe_audit(twist_log_path, window, threshold);
        }
    } catch (const NotHurwitz& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNotHurwitz;
    } catch (const CsvFormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const InvalidConfig& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntimeHalt;
    }
    return kExitOk;
}
