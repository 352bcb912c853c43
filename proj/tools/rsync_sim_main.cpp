// Command-line front end: simulate scenarios, sweep parameters, fit tracks,
// generate synthetic tracks, and calibrate the simulator noise knobs.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rsync_sim/rsync_sim.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

using namespace rsync_sim;

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

int cmd_simulate(const std::string& scenario_path, const std::string& out_csv,
                 const std::string& out_json) {
    std::vector<std::string> warnings;
    const Scenario sc = read_scenario(scenario_path, &warnings);
    print_warnings(warnings);
    const auto reports = run_scenario(sc);
    if (!out_csv.empty()) write_report(reports, out_csv, ReportFormat::Csv, &sc);
    if (!out_json.empty()) write_report(reports, out_json, ReportFormat::Json, &sc);
    if (out_csv.empty() && out_json.empty()) std::cout << reports_to_csv(reports, &sc);
    int finished = 0;
    for (const auto& r : reports) finished += r.finished ? 1 : 0;
    std::cerr << reports.size() << " trials, " << finished << " finished\n";
    return kExitOk;
}

int cmd_sweep(const std::string& scenario_path, const std::string& param,
              const std::vector<double>& values, const std::string& out_csv) {
    std::vector<std::string> warnings;
    std::ifstream in(scenario_path);
    if (!in) throw IoError("cannot open scenario file: " + scenario_path);
    json tmpl;
    try {
        in >> tmpl;
    } catch (const json::parse_error& e) {
        throw ConfigError("scenario parse error: " + std::string(e.what()));
    }
    parse_scenario(tmpl, &warnings);  // validate the template up front
    print_warnings(warnings);

    SweepSpec sw;
    sw.scenario_template = tmpl;
    sw.param = param;
    sw.values = values;
    const SweepReport rep = run_sweep(sw);
    const std::string csv = sweep_to_csv(rep, param);
    if (out_csv.empty()) {
        std::cout << csv;
    } else {
        std::ofstream out(out_csv);
        if (!out) throw IoError("cannot open for writing: " + out_csv);
        out << csv;
    }
    return kExitOk;
}

int cmd_fit(const std::string& track_path) {
    const TrackSeries track = read_track(track_path);
    const auto fits = fit_all(track);
    static const char* names[6] = {"tx", "ty", "tz", "rx", "ry", "rz"};
    std::printf("axis  alpha        freq_hz      phase_s      offset       rmse    flat\n");
    for (int i = 0; i < 6; ++i) {
        const auto& f = fits[i];
        std::printf("%-4s  %-11.6g  %-11.6g  %-11.6g  %-11.6g  %-7.3g %s\n", names[i], f.alpha,
                    f.flat ? 0.0 : f.omega / (2.0 * kPi), f.phi, f.offset, f.rmse,
                    f.flat ? "yes" : "no");
    }
    try {
        const int dom = dominant_axis(fits);
        std::printf("dominant axis: %s\n", names[dom]);
    } catch (const AllFlatError&) {
        std::printf("dominant axis: none (all flat)\n");
    }
    return kExitOk;
}

int cmd_gen_track(const std::string& out_path, double amplitude, double frequency, double phase,
                  const std::string& kind, double fps, double duration, double sigma_trans,
                  double sigma_rot, std::uint64_t seed) {
    RhythmicMotion m = RhythmicMotion::x_only(amplitude, frequency, phase);
    if (kind == "breathing")
        m.axes[0].kind = WaveformKind::Breathing;
    else if (kind != "sinusoidal")
        throw ConfigError("kind: expected 'sinusoidal' or 'breathing'");
    SensorModel s;
    s.fps = fps;
    s.duration = duration;
    s.sigma_trans = sigma_trans;
    s.sigma_rot = sigma_rot;
    s.seed = seed;
    write_track(observe(m, s), out_path);
    std::cerr << "wrote " << out_path << '\n';
    return kExitOk;
}

int cmd_calibrate(const std::string& out_json) {
    CalibrationSpec spec;
    const CalibrationResult res = calibrate(spec);
    std::printf("sigma_trans      = %.6g mm\n", res.sigma_trans);
    std::printf("latency_jitter   = %.6g s\n", res.latency_jitter);
    std::printf("freq rel RMSE    = %.4g %%   (target %.4g %%)\n", res.fit.freq_rmse * 100.0,
                spec.freq_target * 100.0);
    std::printf("phase RMSE       = %.4g s    (band [%.3g, %.3g])\n", res.fit.phase_rmse,
                spec.phase_band_lo, spec.phase_band_hi);
    std::printf("latency spread   = %.4g s    (target %.4g)\n", res.latency_spread,
                spec.spread_target);
    std::printf("retained fits    = %d/%d (gross misdetections excluded)\n", res.fit.retained,
                spec.n_seeds);
    std::printf("evaluations      = %d\n", res.evaluations);
    std::printf("converged        = %s\n", res.converged ? "yes" : "no");
    if (!out_json.empty()) {
        json j{{"sigma_trans", res.sigma_trans},
               {"latency_jitter", res.latency_jitter},
               {"freq_rmse", res.fit.freq_rmse},
               {"phase_rmse", res.fit.phase_rmse},
               {"latency_spread", res.latency_spread},
               {"retained", res.fit.retained},
               {"evaluations", res.evaluations},
               {"converged", res.converged}};
        std::ofstream out(out_json);
        if (!out) throw IoError("cannot open for writing: " + out_json);
        out << j.dump(2) << '\n';
    }
    return res.converged ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rhythmic-motion synchronization simulator"};
    app.require_subcommand(1);

    std::string scenario_path, out_csv, out_json, track_path, param;
    std::vector<double> values;

    auto* simulate = app.add_subcommand("simulate", "run one scenario file");
    simulate->add_option("scenario", scenario_path, "scenario JSON file")->required();
    simulate->add_option("--out-csv", out_csv, "results CSV path");
    simulate->add_option("--out-json", out_json, "results JSON path");

    auto* sweep = app.add_subcommand("sweep", "run a scenario once per parameter value");
    sweep->add_option("scenario", scenario_path, "scenario template JSON file")->required();
    sweep->add_option("--param", param, "dotted parameter path, e.g. motion.frequency")
        ->required();
    sweep->add_option("--values", values, "values to sweep")->required()->delimiter(',');
    sweep->add_option("--out-csv", out_csv, "sweep CSV path");

    auto* fit = app.add_subcommand("fit", "fit the sinusoid model to a track CSV");
    fit->add_option("track", track_path, "track CSV file")->required();

    double amplitude = 25.0, frequency = 0.2, phase = 0.0, fps = 15.0, duration = 60.0;
    double sigma_trans = 0.0, sigma_rot = 0.0;
    std::uint64_t seed = 0;
    std::string kind = "sinusoidal", out_path = "track.csv";
    auto* gen = app.add_subcommand("gen-track", "generate a synthetic track CSV");
    gen->add_option("--out", out_path, "output path");
    gen->add_option("--amplitude", amplitude, "x amplitude, mm");
    gen->add_option("--frequency", frequency, "Hz");
    gen->add_option("--phase", phase, "s");
    gen->add_option("--kind", kind, "sinusoidal|breathing");
    gen->add_option("--fps", fps, "frames per second");
    gen->add_option("--duration", duration, "s");
    gen->add_option("--sigma-trans", sigma_trans, "mm");
    gen->add_option("--sigma-rot", sigma_rot, "deg");
    gen->add_option("--seed", seed, "noise seed");

    auto* cal = app.add_subcommand("calibrate",
                                   "tune sensor noise and latency jitter to the reference "
                                   "estimation-error targets");
    cal->add_option("--out-json", out_json, "write the calibration result as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);  // prints usage/help
    }

    try {
        if (simulate->parsed()) return cmd_simulate(scenario_path, out_csv, out_json);
        if (sweep->parsed()) return cmd_sweep(scenario_path, param, values, out_csv);
        if (fit->parsed()) return cmd_fit(track_path);
        if (gen->parsed())
            return cmd_gen_track(out_path, amplitude, frequency, phase, kind, fps, duration,
                                 sigma_trans, sigma_rot, seed);
        if (cal->parsed()) return cmd_calibrate(out_json);
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return kExitIo;
    } catch (const MalformedRowError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return kExitIo;
    } catch (const ConfigError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const SimError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    return kExitOk;
}
