#pragma once

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "rsync_sim/tasks.hpp"

namespace rsync_sim {

using nlohmann::json;

enum class TaskType { Cutting, Debridement };

/// One experimental condition: motion, sensing, actuation, task, the policies to
/// compare, and how many seeded trials to run of each.
struct Scenario {
    std::string id = "scenario";

    std::array<double, 6> amplitudes{};
    std::array<WaveformKind, 6> kinds{WaveformKind::Sinusoidal, WaveformKind::Sinusoidal,
                                      WaveformKind::Sinusoidal, WaveformKind::Sinusoidal,
                                      WaveformKind::Sinusoidal, WaveformKind::Sinusoidal};
    double frequency = 0.0;
    bool random_phase = true;  // phase drawn per trial; otherwise fixed `phase`
    double phase = 0.0;

    SensorModel sensor;
    ActuationModel actuation;

    TaskType task_type = TaskType::Cutting;
    CuttingTask cutting;
    DebridementTask debridement;

    std::vector<PolicyKind> policies{PolicyKind::None, PolicyKind::Full,
                                     PolicyKind::Intermittent};
    int n_trials = 1;
    std::uint64_t seed = 0;

    /// Motion for one trial; the platform phase is not synchronized to the robot's
    /// clock, so by default each trial draws its own.
    RhythmicMotion motion_for_trial(std::uint64_t trial_seed) const {
        double ph = phase;
        if (random_phase && frequency > 0.0) {
            Rng rng(derive_seed(trial_seed, 0xfa5e));
            ph = rng.uniform(0.0, 1.0 / frequency);
        }
        RhythmicMotion m;
        for (int i = 0; i < 6; ++i)
            m.axes[i] = Waveform{kinds[i], amplitudes[i], frequency, ph};
        return m;
    }
};

namespace detail {

inline WaveformKind parse_kind(const std::string& s, const std::string& path) {
    if (s == "sinusoidal") return WaveformKind::Sinusoidal;
    if (s == "breathing") return WaveformKind::Breathing;
    throw ConfigError(path + ": unknown waveform kind '" + s + "'");
}

inline PolicyKind parse_policy(const std::string& s, const std::string& path) {
    if (s == "none") return PolicyKind::None;
    if (s == "full") return PolicyKind::Full;
    if (s == "intermittent") return PolicyKind::Intermittent;
    throw ConfigError(path + ": unknown policy '" + s + "'");
}

inline double require_number(const json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key)) throw ConfigError(path + "." + key + ": missing required field");
    if (!j[key].is_number()) throw ConfigError(path + "." + key + ": expected a number");
    return j[key].get<double>();
}

inline void collect_unknown(const json& j, const std::vector<std::string>& known,
                            const std::string& path, std::vector<std::string>* warnings) {
    if (!warnings || !j.is_object()) return;
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool found = false;
        for (const auto& k : known)
            if (it.key() == k) { found = true; break; }
        if (!found) warnings->push_back(path + "." + it.key() + ": unknown field (ignored)");
    }
}

}  // namespace detail

/// Parse and validate a scenario. Missing required fields raise ConfigError with
/// the field path; unknown fields are reported as warnings, not errors.
inline Scenario parse_scenario(const json& j, std::vector<std::string>* warnings = nullptr) {
    Scenario sc;
    detail::collect_unknown(
        j, {"id", "motion", "sensor", "actuation", "task", "policies", "n_trials", "seed"},
        "scenario", warnings);
    if (j.contains("id")) sc.id = j["id"].get<std::string>();

    if (!j.contains("motion")) throw ConfigError("motion: missing required field");
    const json& jm = j["motion"];
    detail::collect_unknown(jm, {"amplitudes", "frequency", "phase", "kind", "kinds"}, "motion",
                            warnings);
    if (!jm.contains("amplitudes") || !jm["amplitudes"].is_array() || jm["amplitudes"].size() != 6)
        throw ConfigError("motion.amplitudes: expected an array of 6 numbers");
    for (int i = 0; i < 6; ++i) sc.amplitudes[i] = jm["amplitudes"][i].get<double>();
    sc.frequency = detail::require_number(jm, "frequency", "motion");
    if (sc.frequency < 0.0) throw ConfigError("motion.frequency: must be >= 0");
    for (int i = 0; i < 6; ++i)
        if (sc.amplitudes[i] < 0.0) throw ConfigError("motion.amplitudes: must be >= 0");
    if (jm.contains("phase")) {
        if (jm["phase"].is_string()) {
            if (jm["phase"].get<std::string>() != "random")
                throw ConfigError("motion.phase: expected a number or \"random\"");
            sc.random_phase = true;
        } else {
            sc.random_phase = false;
            sc.phase = jm["phase"].get<double>();
        }
    }
    if (jm.contains("kind")) {
        const auto k = detail::parse_kind(jm["kind"].get<std::string>(), "motion.kind");
        sc.kinds.fill(k);
    }
    if (jm.contains("kinds")) {
        if (!jm["kinds"].is_array() || jm["kinds"].size() != 6)
            throw ConfigError("motion.kinds: expected an array of 6 strings");
        for (int i = 0; i < 6; ++i)
            sc.kinds[i] = detail::parse_kind(jm["kinds"][i].get<std::string>(), "motion.kinds");
    }

    if (j.contains("sensor")) {
        const json& js = j["sensor"];
        detail::collect_unknown(
            js, {"fps", "duration", "sigma_trans", "sigma_rot", "outlier_fraction"}, "sensor",
            warnings);
        if (js.contains("fps")) sc.sensor.fps = js["fps"].get<double>();
        if (js.contains("duration")) sc.sensor.duration = js["duration"].get<double>();
        if (js.contains("sigma_trans")) sc.sensor.sigma_trans = js["sigma_trans"].get<double>();
        if (js.contains("sigma_rot")) sc.sensor.sigma_rot = js["sigma_rot"].get<double>();
        if (js.contains("outlier_fraction"))
            sc.sensor.outlier_fraction = js["outlier_fraction"].get<double>();
    }
    if (sc.sensor.sigma_trans < 0 || sc.sensor.sigma_rot < 0)
        throw ConfigError("sensor.sigma_trans: noise magnitudes must be >= 0");
    if (sc.sensor.outlier_fraction != 0.0)
        throw ConfigError("sensor.outlier_fraction: reserved field, must be 0");
    if (sc.frequency > 0.0 && sc.sensor.fps <= 2.0 * sc.frequency)
        throw ConfigError("sensor.fps: must exceed twice motion.frequency (sampling constraint)");

    if (j.contains("actuation")) {
        const json& ja = j["actuation"];
        detail::collect_unknown(ja, {"speed", "latency_mean", "latency_jitter"}, "actuation",
                                warnings);
        if (ja.contains("speed")) sc.actuation.speed = ja["speed"].get<double>();
        if (ja.contains("latency_mean"))
            sc.actuation.latency_mean = ja["latency_mean"].get<double>();
        if (ja.contains("latency_jitter"))
            sc.actuation.latency_jitter = ja["latency_jitter"].get<double>();
    }
    if (sc.actuation.speed <= 0) throw ConfigError("actuation.speed: must be positive");
    if (sc.actuation.latency_mean < 0 || sc.actuation.latency_jitter < 0)
        throw ConfigError("actuation.latency_mean: latency terms must be >= 0");

    if (!j.contains("task")) throw ConfigError("task: missing required field");
    const json& jt = j["task"];
    if (!jt.contains("type")) throw ConfigError("task.type: missing required field");
    const std::string type = jt["type"].get<std::string>();
    if (type == "cutting") {
        sc.task_type = TaskType::Cutting;
        detail::collect_unknown(jt,
                                {"type", "line_length", "line_thickness", "waypoint_spacing",
                                 "disengage_threshold"},
                                "task", warnings);
        if (jt.contains("line_length")) sc.cutting.line_length = jt["line_length"].get<double>();
        if (jt.contains("line_thickness"))
            sc.cutting.line_thickness = jt["line_thickness"].get<double>();
        if (jt.contains("waypoint_spacing"))
            sc.cutting.waypoint_spacing = jt["waypoint_spacing"].get<double>();
        if (jt.contains("disengage_threshold"))
            sc.cutting.disengage_threshold = jt["disengage_threshold"].get<double>();
        if (sc.cutting.line_length <= 0 || sc.cutting.line_thickness <= 0)
            throw ConfigError("task.line_length: cutting geometry must be positive");
        if (sc.cutting.waypoint_spacing > sc.cutting.line_length)
            throw ConfigError("task.waypoint_spacing: must not exceed line_length");
    } else if (type == "debridement") {
        sc.task_type = TaskType::Debridement;
        detail::collect_unknown(
            jt,
            {"type", "n_inclusions", "max_attempts", "grasp_tolerance", "registration_sigma",
             "orientation_tolerance", "region_size", "min_separation", "seed_half_length",
             "grasp_window", "capture_speed_max", "handling_time"},
            "task", warnings);
        auto& d = sc.debridement;
        if (jt.contains("n_inclusions")) d.n_inclusions = jt["n_inclusions"].get<int>();
        if (jt.contains("max_attempts")) d.max_attempts = jt["max_attempts"].get<int>();
        if (jt.contains("grasp_tolerance")) d.grasp_tolerance = jt["grasp_tolerance"].get<double>();
        if (jt.contains("registration_sigma"))
            d.registration_sigma = jt["registration_sigma"].get<double>();
        if (jt.contains("orientation_tolerance"))
            d.orientation_tolerance = jt["orientation_tolerance"].get<double>();
        if (jt.contains("region_size")) d.region_size = jt["region_size"].get<double>();
        if (jt.contains("min_separation")) d.min_separation = jt["min_separation"].get<double>();
        if (jt.contains("seed_half_length"))
            d.seed_half_length = jt["seed_half_length"].get<double>();
        if (jt.contains("grasp_window")) d.grasp_window = jt["grasp_window"].get<double>();
        if (jt.contains("capture_speed_max"))
            d.capture_speed_max = jt["capture_speed_max"].get<double>();
        if (jt.contains("handling_time")) d.handling_time = jt["handling_time"].get<double>();
        if (d.max_attempts < d.n_inclusions)
            throw ConfigError("task.max_attempts: must be >= n_inclusions");
        if (d.grasp_tolerance <= 0 || d.orientation_tolerance <= 0)
            throw ConfigError("task.grasp_tolerance: tolerances must be positive");
    } else {
        throw ConfigError("task.type: expected 'cutting' or 'debridement'");
    }

    if (!j.contains("policies")) throw ConfigError("policies: missing required field");
    if (!j["policies"].is_array() || j["policies"].empty())
        throw ConfigError("policies: expected a non-empty array");
    sc.policies.clear();
    for (const auto& p : j["policies"])
        sc.policies.push_back(detail::parse_policy(p.get<std::string>(), "policies"));

    if (!j.contains("n_trials")) throw ConfigError("n_trials: missing required field");
    sc.n_trials = j["n_trials"].get<int>();
    if (sc.n_trials < 1) throw ConfigError("n_trials: must be >= 1");
    if (!j.contains("seed")) throw ConfigError("seed: missing required field");
    sc.seed = j["seed"].get<std::uint64_t>();
    return sc;
}

/// Resolved scenario (post-defaults) as JSON, for reproducible report headers.
inline json scenario_to_json(const Scenario& sc) {
    json jm;
    jm["amplitudes"] = sc.amplitudes;
    jm["frequency"] = sc.frequency;
    if (sc.random_phase)
        jm["phase"] = "random";
    else
        jm["phase"] = sc.phase;
    json kinds = json::array();
    for (const auto& k : sc.kinds)
        kinds.push_back(k == WaveformKind::Sinusoidal ? "sinusoidal" : "breathing");
    jm["kinds"] = kinds;

    json js{{"fps", sc.sensor.fps},
            {"duration", sc.sensor.duration},
            {"sigma_trans", sc.sensor.sigma_trans},
            {"sigma_rot", sc.sensor.sigma_rot},
            {"outlier_fraction", sc.sensor.outlier_fraction}};
    json ja{{"speed", sc.actuation.speed},
            {"latency_mean", sc.actuation.latency_mean},
            {"latency_jitter", sc.actuation.latency_jitter}};
    json jt;
    if (sc.task_type == TaskType::Cutting) {
        jt = json{{"type", "cutting"},
                  {"line_length", sc.cutting.line_length},
                  {"line_thickness", sc.cutting.line_thickness},
                  {"waypoint_spacing", sc.cutting.waypoint_spacing},
                  {"disengage_threshold", sc.cutting.disengage_threshold}};
    } else {
        const auto& d = sc.debridement;
        jt = json{{"type", "debridement"},
                  {"n_inclusions", d.n_inclusions},
                  {"max_attempts", d.max_attempts},
                  {"grasp_tolerance", d.grasp_tolerance},
                  {"registration_sigma", d.registration_sigma},
                  {"orientation_tolerance", d.orientation_tolerance},
                  {"region_size", d.region_size},
                  {"min_separation", d.min_separation},
                  {"seed_half_length", d.seed_half_length},
                  {"grasp_window", d.grasp_window},
                  {"capture_speed_max", d.capture_speed_max},
                  {"handling_time", d.handling_time}};
    }
    json jp = json::array();
    for (const auto& p : sc.policies) jp.push_back(policy_name(p));
    return json{{"id", sc.id},      {"motion", jm},        {"sensor", js},
                {"actuation", ja},  {"task", jt},          {"policies", jp},
                {"n_trials", sc.n_trials}, {"seed", sc.seed}};
}

inline Scenario read_scenario(const std::string& path, std::vector<std::string>* warnings = nullptr) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("scenario parse error in " + path + ": " + e.what());
    }
    return parse_scenario(j, warnings);
}

inline TrialReport run_trial(const Scenario& sc, PolicyKind policy, int trial) {
    const std::uint64_t trial_seed = sc.seed + static_cast<std::uint64_t>(trial);
    const RhythmicMotion m = sc.motion_for_trial(trial_seed);
    TrialReport r;
    if (sc.task_type == TaskType::Cutting)
        r = run_cutting(sc.cutting, m, sc.sensor, policy, sc.actuation, trial_seed);
    else
        r = run_debridement(sc.debridement, m, sc.sensor, policy, sc.actuation, trial_seed);
    r.scenario = sc.id;
    return r;
}

namespace detail {

inline unsigned thread_budget() {
    if (const char* env = std::getenv("RSYNC_SIM_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

}  // namespace detail

/// Run every (policy, trial) pair of a scenario. Output order is (policy as
/// listed, trial index) regardless of how many worker threads execute the trials.
inline std::vector<TrialReport> run_scenario(const Scenario& sc) {
    const std::size_t total = sc.policies.size() * static_cast<std::size_t>(sc.n_trials);
    std::vector<TrialReport> reports(total);
    const unsigned n_threads =
        std::min<unsigned>(detail::thread_budget(), static_cast<unsigned>(total));
    std::atomic<std::size_t> cursor{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= total) return;
            const std::size_t pi = i / static_cast<std::size_t>(sc.n_trials);
            const int trial = static_cast<int>(i % static_cast<std::size_t>(sc.n_trials));
            reports[i] = run_trial(sc, sc.policies[pi], trial);
        }
    };
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return reports;
}

namespace detail {

inline std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

}  // namespace detail

inline const char* kReportCsvHeader =
    "scenario,policy,trial,seed,finished,max_error_mm,cumulative_error_mm,duration_s,attempts,"
    "successes";

/// Render reports as CSV rows in their given order. Trial numbers restart per
/// policy block, mirroring how run_scenario assigns seeds.
inline std::string reports_to_csv(const std::vector<TrialReport>& reports,
                                  const Scenario* sc = nullptr) {
    std::ostringstream out;
    out << kReportCsvHeader << '\n';
    std::map<std::string, int> counters;
    for (const auto& r : reports) {
        const int trial = sc ? static_cast<int>(r.seed - sc->seed) : counters[r.policy]++;
        out << r.scenario << ',' << r.policy << ',' << trial << ',' << r.seed << ','
            << (r.finished ? "true" : "false") << ','
            << (r.max_error ? detail::fmt_double(*r.max_error) : std::string()) << ','
            << detail::fmt_double(r.cumulative_error) << ',' << detail::fmt_double(r.duration)
            << ',' << (r.attempts ? std::to_string(*r.attempts) : std::string()) << ','
            << (r.successes ? std::to_string(*r.successes) : std::string()) << '\n';
    }
    return out.str();
}

inline json report_to_json(const TrialReport& r, int trial) {
    json j{{"scenario", r.scenario}, {"policy", r.policy},
           {"trial", trial},         {"seed", r.seed},
           {"finished", r.finished}, {"cumulative_error_mm", r.cumulative_error},
           {"duration_s", r.duration}};
    j["max_error_mm"] = r.max_error ? json(*r.max_error) : json(nullptr);
    j["attempts"] = r.attempts ? json(*r.attempts) : json(nullptr);
    j["successes"] = r.successes ? json(*r.successes) : json(nullptr);
    return j;
}

enum class ReportFormat { Csv, Json };

/// Write trial reports. The JSON form also embeds the resolved scenario so a
/// results file reproduces on its own.
inline void write_report(const std::vector<TrialReport>& reports, const std::string& path,
                         ReportFormat format, const Scenario* sc = nullptr) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    if (format == ReportFormat::Csv) {
        out << reports_to_csv(reports, sc);
    } else {
        json j;
        if (sc) j["scenario_config"] = scenario_to_json(*sc);
        json arr = json::array();
        std::map<std::string, int> counters;
        for (const auto& r : reports) {
            const int trial = sc ? static_cast<int>(r.seed - sc->seed) : counters[r.policy]++;
            arr.push_back(report_to_json(r, trial));
        }
        j["reports"] = arr;
        out << j.dump(2) << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

/// A parameter sweep: one scenario template plus a dotted parameter path (e.g.
/// "motion.frequency") and the values to substitute.
struct SweepSpec {
    json scenario_template;
    std::string param;
    std::vector<double> values;
};

inline json with_param(const json& tmpl, const std::string& dotted_path, double value) {
    json out = tmpl;
    json* node = &out;
    std::istringstream ss(dotted_path);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    if (parts.empty()) throw ConfigError("sweep.param: empty parameter path");
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        if (!node->contains(parts[i]))
            throw ConfigError("sweep.param: path '" + dotted_path + "' not found in template");
        node = &(*node)[parts[i]];
    }
    if (!node->contains(parts.back()))
        throw ConfigError("sweep.param: path '" + dotted_path + "' not found in template");
    (*node)[parts.back()] = value;
    return out;
}

struct SweepCell {
    double value = 0.0;
    std::string policy;
    int trials = 0;
    int finished = 0;
    double mean_error = 0.0;
    double median_error = 0.0;
    double max_error = 0.0;
    double std_error = 0.0;
    double mean_duration = 0.0;
    double median_duration = 0.0;
    double success_rate = -1.0;  // debridement per-grasp rate; -1 when n/a
};

struct SweepReport {
    std::vector<SweepCell> cells;                  // value-major, policy order preserved
    std::vector<std::vector<TrialReport>> raw;     // per value
};

namespace detail {

inline double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double std_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace detail

/// Run the scenario once per swept value and aggregate the headline error (the
/// cutting max_error, or the per-decision mean error when max_error is absent).
inline SweepReport run_sweep(const SweepSpec& sw) {
    SweepReport out;
    for (double value : sw.values) {
        const json j = with_param(sw.scenario_template, sw.param, value);
        Scenario sc = parse_scenario(j);
        auto reports = run_scenario(sc);
        for (const auto& p : sc.policies) {
            const std::string pname = policy_name(p);
            std::vector<double> errs, durs;
            int finished = 0, attempts = 0, successes = 0;
            bool any_grasps = false;
            for (const auto& r : reports) {
                if (r.policy != pname) continue;
                const double err = r.max_error
                                       ? *r.max_error
                                       : (r.decisions ? r.cumulative_error /
                                                            static_cast<double>(r.decisions)
                                                      : 0.0);
                errs.push_back(err);
                durs.push_back(r.duration);
                finished += r.finished ? 1 : 0;
                if (r.attempts) {
                    any_grasps = true;
                    attempts += *r.attempts;
                    successes += r.successes.value_or(0);
                }
            }
            SweepCell cell;
            cell.value = value;
            cell.policy = pname;
            cell.trials = static_cast<int>(errs.size());
            cell.finished = finished;
            cell.mean_error = detail::mean_of(errs);
            cell.median_error = detail::median_of(errs);
            cell.max_error = errs.empty() ? 0.0 : *std::max_element(errs.begin(), errs.end());
            cell.std_error = detail::std_of(errs);
            cell.mean_duration = detail::mean_of(durs);
            cell.median_duration = detail::median_of(durs);
            if (any_grasps && attempts > 0)
                cell.success_rate = static_cast<double>(successes) / attempts;
            out.cells.push_back(cell);
        }
        out.raw.push_back(std::move(reports));
    }
    return out;
}

inline const char* kSweepCsvHeader =
    "param,value,policy,trials,finished,mean_error_mm,median_error_mm,max_error_mm,std_error_mm,"
    "mean_duration_s,median_duration_s,success_rate";

inline std::string sweep_to_csv(const SweepReport& rep, const std::string& param) {
    std::ostringstream out;
    out << kSweepCsvHeader << '\n';
    for (const auto& c : rep.cells) {
        out << param << ',' << detail::fmt_double(c.value) << ',' << c.policy << ',' << c.trials
            << ',' << c.finished << ',' << detail::fmt_double(c.mean_error) << ','
            << detail::fmt_double(c.median_error) << ',' << detail::fmt_double(c.max_error) << ','
            << detail::fmt_double(c.std_error) << ',' << detail::fmt_double(c.mean_duration) << ','
            << detail::fmt_double(c.median_duration) << ','
            << (c.success_rate >= 0.0 ? detail::fmt_double(c.success_rate) : std::string())
            << '\n';
    }
    return out.str();
}

}  // namespace rsync_sim
