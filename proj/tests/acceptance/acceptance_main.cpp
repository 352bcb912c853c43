// Acceptance suite: every headline requirement is checked at its stated
// tolerance and reported as one PASS/FAIL line. The simulator noise knobs are
// tuned once by the calibration search and then held fixed for the trend
// studies, mirroring how the physical system's uncertainty was quoted first and
// the task benchmarks run second.

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "rsync_sim/rsync_sim.hpp"

using namespace rsync_sim;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof(buf), f, args);
    va_end(args);
    return buf;
}

// ---------------------------------------------------------------------------
// 1. Estimator exactness on noiseless data
// ---------------------------------------------------------------------------
Outcome criterion_estimator_exactness() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(2024);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double alpha = rng.uniform(1.0, 50.0);
        const double f = rng.uniform(0.05, 0.45);
        const double T = 1.0 / f;
        const double phi = rng.uniform(0.05, 0.95) * T;
        const double offset = rng.uniform(1.0, 20.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
        const double dur = std::max(60.0, 4.5 * T);
        const std::size_t n = static_cast<std::size_t>(dur * 15.0);
        std::vector<double> ts(n), xs(n);
        for (std::size_t k = 0; k < n; ++k) {
            ts[k] = static_cast<double>(k) / 15.0;
            xs[k] = offset + alpha * std::sin(2.0 * kPi * f * (ts[k] + phi));
        }
        const SineFit fit = fit_axis(ts, xs);
        if (fit.flat) return {false, "unexpected flat fit on noiseless data"};
        double dphi = std::fmod(fit.phi - phi, T);
        if (dphi > T / 2) dphi -= T;
        if (dphi < -T / 2) dphi += T;
        worst = std::max({worst, std::abs(fit.alpha - alpha) / alpha,
                          std::abs(fit.omega - 2.0 * kPi * f) / (2.0 * kPi * f),
                          std::abs(dphi) / phi, std::abs(fit.offset - offset) / std::abs(offset)});
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = worst < 1e-5 && secs < 10.0;
    return {pass, fmt("worst relative error %.3g (limit 1e-5), %.2f s (limit 10 s)", worst, secs)};
}

// ---------------------------------------------------------------------------
// 2. Analytic extrema scheduling
// ---------------------------------------------------------------------------
Outcome criterion_extrema() {
    SineFit fit{5.0, 2.0 * kPi * 0.2, 0.0, 0.0, 0.0, false};
    const auto sched = extrema_schedule(fit, 0.0, 3);
    const double expected[3] = {1.25, 3.75, 6.25};
    double worst_example = 0.0;
    for (int i = 0; i < 3; ++i)
        worst_example = std::max(worst_example, std::abs(sched.times[i] - expected[i]));

    Rng rng(7);
    double worst_deriv = 0.0;
    for (int i = 0; i < 200; ++i) {
        SineFit f{rng.uniform(1.0, 50.0), 2.0 * kPi * rng.uniform(0.05, 0.45),
                  rng.uniform(0.0, 10.0), rng.uniform(-5.0, 5.0), 0.0, false};
        const auto s = extrema_schedule(f, rng.uniform(0.0, 50.0), 4);
        for (double ti : s.times) worst_deriv = std::max(worst_deriv, std::abs(f.derivative(ti)));
    }
    const bool pass = worst_example <= 1e-12 && worst_deriv < 1e-9;
    return {pass, fmt("example offset %.2g (limit 1e-12), worst |dC/dt| %.2g (limit 1e-9)",
                      worst_example, worst_deriv)};
}

// ---------------------------------------------------------------------------
// 3. Calibration targets
// ---------------------------------------------------------------------------
CalibrationResult g_cal;  // shared with the trend criteria

Outcome criterion_calibration() {
    CalibrationSpec spec;
    g_cal = calibrate(spec);
    const bool freq_ok = g_cal.fit.freq_rmse >= 0.025 && g_cal.fit.freq_rmse <= 0.035;
    const bool phase_ok = g_cal.fit.phase_rmse >= 0.17 && g_cal.fit.phase_rmse <= 0.27;
    const bool spread_ok = g_cal.latency_spread >= 0.5 && g_cal.latency_spread <= 0.65;
    const bool budget_ok = g_cal.evaluations <= spec.max_evals;
    return {freq_ok && phase_ok && spread_ok && budget_ok,
            fmt("freq RMSE %.2f%% [2.5,3.5], phase RMSE %.3f s [0.17,0.27], spread %.3f s "
                "[0.5,0.65], %d evals (max 200); sigma=%.2f mm jitter=%.3f s",
                g_cal.fit.freq_rmse * 100, g_cal.fit.phase_rmse, g_cal.latency_spread,
                g_cal.evaluations, g_cal.sigma_trans, g_cal.latency_jitter)};
}

// ---------------------------------------------------------------------------
// 4. Error-propagation arithmetic
// ---------------------------------------------------------------------------
Outcome criterion_error_propagation() {
    SineFit fit{5.0, 2.0 * kPi * 0.2, 0.0, 0.0, 0.0, false};
    const double e_phase = worst_case_error(fit, 0.22);
    const double e_latency = worst_case_error(fit, 0.576);
    const bool pass = e_phase >= 0.8 && e_phase <= 1.6 && e_latency >= 3.0 && e_latency <= 4.2;
    return {pass, fmt("0.22 s -> %.2f mm [0.8,1.6]; 0.576 s -> %.2f mm [3.0,4.2]", e_phase,
                      e_latency)};
}

// ---------------------------------------------------------------------------
// Scenario builders for the trend criteria
// ---------------------------------------------------------------------------
Scenario cutting_scenario(const std::array<double, 6>& amplitudes, double frequency,
                          int n_trials, std::uint64_t seed) {
    Scenario sc;
    sc.id = "cutting";
    sc.amplitudes = amplitudes;
    sc.frequency = frequency;
    sc.random_phase = true;
    sc.sensor.fps = 15.0;
    sc.sensor.duration = 60.0;
    sc.sensor.sigma_trans = g_cal.sigma_trans;
    sc.sensor.sigma_rot = 0.25;
    sc.actuation.speed = 25.0;
    sc.actuation.latency_mean = 0.3;
    sc.actuation.latency_jitter = g_cal.latency_jitter;
    sc.task_type = TaskType::Cutting;
    sc.policies = {PolicyKind::None, PolicyKind::Full, PolicyKind::Intermittent};
    sc.n_trials = n_trials;
    sc.seed = seed;
    return sc;
}

// ---------------------------------------------------------------------------
// 5. Cutting trend
// ---------------------------------------------------------------------------
Outcome criterion_cutting_trend() {
    const auto t0 = std::chrono::steady_clock::now();
    const int n = 40;
    Scenario sc = cutting_scenario({25, 0, 0, 0, 0, 0}, 0.2, n, 500);
    const auto reports = run_scenario(sc);

    int none_finished = 0, int_finished = 0;
    std::vector<double> full_err_finished, full_dur_finished, int_err, int_dur;
    for (const auto& r : reports) {
        if (r.policy == "none") none_finished += r.finished;
        if (r.policy == "full" && r.finished) {
            full_err_finished.push_back(*r.max_error);
            full_dur_finished.push_back(r.duration);
        }
        if (r.policy == "intermittent") {
            int_finished += r.finished;
            int_err.push_back(*r.max_error);
            int_dur.push_back(r.duration);
        }
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (full_err_finished.empty())
        return {false, "full sync finished no trials; medians undefined"};
    const double med_full = median_of(full_err_finished);
    const double med_int = median_of(int_err);
    const double ratio_dur = median_of(int_dur) / median_of(full_dur_finished);
    const int need_int = static_cast<int>(std::ceil(0.9 * n));
    const bool pass = none_finished == 0 && int_finished >= need_int &&
                      med_int <= 0.5 * med_full && ratio_dur >= 1.4 && ratio_dur <= 2.4 &&
                      secs < 300.0;
    return {pass,
            fmt("none finished %d/%d (need 0), intermittent %d/%d (need >=%d), max-err median "
                "int %.2f vs full %.2f mm (need <=0.5x), duration ratio %.2f [1.4,2.4], full "
                "finished %zu, %.1f s",
                none_finished, n, int_finished, n, need_int, med_int, med_full, ratio_dur,
                full_err_finished.size(), secs)};
}

// ---------------------------------------------------------------------------
// 6. Frequency sweep
// ---------------------------------------------------------------------------
Outcome criterion_frequency_sweep() {
    const std::vector<double> freqs{0.0, 0.1, 0.2, 0.25, 0.3};
    std::vector<double> medians;
    for (double f : freqs) {
        Scenario sc = cutting_scenario({5, 0, 0, 0, 0, 0}, f, 30, 777);
        // observation scaled to the period so every sweep point sees the same
        // number of cycles; the shorter absolute record at high frequency is
        // what makes the timing there harder, as in the physical study
        sc.sensor.duration = f > 0.0 ? 12.0 / f : 60.0;
        sc.cutting.line_length = 30.0;
        sc.policies = {PolicyKind::Intermittent};
        if (f == 0.0) sc.amplitudes = {0, 0, 0, 0, 0, 0};
        const auto reports = run_scenario(sc);
        std::vector<double> errs;
        for (const auto& r : reports) errs.push_back(*r.max_error);
        medians.push_back(median_of(errs));
    }
    bool monotone = true;
    for (std::size_t i = 1; i < medians.size(); ++i)
        if (medians[i] < medians[i - 1] - 1e-12) monotone = false;
    const bool jump = medians[4] >= 2.0 * medians[3];
    return {monotone && jump,
            fmt("medians %.3f/%.3f/%.3f/%.3f/%.3f mm, monotone=%s, 0.25->0.3 step %.3f->%.3f "
                "(need >=2x)",
                medians[0], medians[1], medians[2], medians[3], medians[4],
                monotone ? "yes" : "no", medians[3], medians[4])};
}

// ---------------------------------------------------------------------------
// 7. Multi-axis ordering
// ---------------------------------------------------------------------------
Outcome criterion_multi_axis() {
    struct Mode {
        const char* name;
        std::array<double, 6> amp;
    };
    // translational norms match the x-only amplitude; the 6-DOF mode adds
    // rotations with a 15 degree norm
    const std::vector<Mode> modes{{"none", {0, 0, 0, 0, 0, 0}},
                                  {"x", {25, 0, 0, 0, 0, 0}},
                                  {"3d", {17, 7, 17, 0, 0, 0}},
                                  {"6d", {17, 7, 17, 7.5, 10.4, 7.5}}};
    std::vector<double> means;
    for (const auto& mode : modes) {
        Scenario sc = cutting_scenario(mode.amp, 0.2, 24, 1400);
        sc.policies = {PolicyKind::Intermittent};
        const auto reports = run_scenario(sc);
        std::vector<double> errs;
        for (const auto& r : reports) errs.push_back(*r.max_error);
        means.push_back(mean_of(errs));
    }
    const bool pass = means[0] < means[1] && means[1] < means[2] && means[2] < means[3];
    return {pass, fmt("mean max-error none %.3f < x %.3f < 3d %.3f < 6d %.3f mm", means[0],
                      means[1], means[2], means[3])};
}

// ---------------------------------------------------------------------------
// 8. Debridement trend
// ---------------------------------------------------------------------------
Outcome criterion_debridement() {
    Scenario sc;
    sc.id = "debridement";
    sc.amplitudes = {12.5, 0, 0, 0, 0, 0};
    sc.frequency = 0.5;
    sc.sensor.fps = 15.0;
    sc.sensor.duration = 60.0;
    sc.sensor.sigma_trans = g_cal.sigma_trans;
    sc.sensor.sigma_rot = 0.25;
    sc.actuation.speed = 25.0;
    sc.actuation.latency_mean = 0.3;
    sc.actuation.latency_jitter = g_cal.latency_jitter;
    sc.task_type = TaskType::Debridement;
    sc.policies = {PolicyKind::None, PolicyKind::Intermittent};
    sc.n_trials = 24;
    sc.seed = 2200;
    const auto reports = run_scenario(sc);

    int none_att = 0, none_suc = 0, none_fin = 0, int_att = 0, int_suc = 0, int_fin = 0;
    std::vector<double> none_rate, int_rate;
    for (const auto& r : reports) {
        if (r.policy == "none") {
            none_att += *r.attempts;
            none_suc += *r.successes;
            none_fin += r.finished;
            none_rate.push_back(grasp_rate(r));
        } else {
            int_att += *r.attempts;
            int_suc += *r.successes;
            int_fin += r.finished;
            int_rate.push_back(grasp_rate(r));
        }
    }
    const double p_none = static_cast<double>(none_suc) / none_att;
    const double p_int = static_cast<double>(int_suc) / int_att;
    const double rate_none = mean_of(none_rate);
    const double rate_int = mean_of(int_rate);
    const bool pass = p_int >= 0.70 && p_int <= 0.90 && p_none >= 0.52 && p_none <= 0.72 &&
                      int_fin >= none_fin && rate_none > rate_int;
    return {pass,
            fmt("per-grasp success int %.0f%% [70,90] vs none %.0f%% [52,72]; completions %d vs "
                "%d; grasps/min %.1f vs %.1f (none must be faster)",
                p_int * 100, p_none * 100, int_fin, none_fin, rate_none, rate_int)};
}

// ---------------------------------------------------------------------------
// 9. Policy equivalence, determinism, time ordering
// ---------------------------------------------------------------------------
Outcome criterion_property_suites() {
    // zero-amplitude equivalence
    const RhythmicMotion still{};
    std::vector<Pose6> targets;
    for (int i = 0; i < 12; ++i) targets.push_back(Pose6{0, 2.5 * i, 0, 0, 0, 0});
    ActuationModel act;
    act.speed = 25.0;
    act.latency_mean = 0.3;
    act.latency_jitter = g_cal.latency_jitter;
    act.seed = 31;
    std::array<SineFit, 6> flat{};
    for (auto& f : flat) f.flat = true;
    NoSyncPlanner pn;
    FullSyncPlanner pf(flat, act);
    IntermittentPlanner pi(flat, act);
    const auto ln = run_policy(pn, targets, still, act);
    const auto lf = run_policy(pf, targets, still, act);
    const auto li = run_policy(pi, targets, still, act);
    double worst_gap = 0.0;
    for (std::size_t i = 0; i < ln.decisions.size(); ++i) {
        worst_gap = std::max(worst_gap, std::abs(ln.decisions[i].error - lf.decisions[i].error));
        worst_gap = std::max(worst_gap, std::abs(ln.decisions[i].error - li.decisions[i].error));
    }
    const bool equiv_ok = worst_gap <= 1e-9;

    // byte-for-byte reproducibility through the harness
    Scenario sc = cutting_scenario({25, 0, 0, 0, 0, 0}, 0.2, 6, 77);
    const std::string run1 = reports_to_csv(run_scenario(sc), &sc);
    const std::string run2 = reports_to_csv(run_scenario(sc), &sc);
    const bool bytes_ok = run1 == run2;

    // duration ordering none <= full <= intermittent (median over seeds)
    const auto reports = run_scenario(cutting_scenario({25, 0, 0, 0, 0, 0}, 0.2, 12, 3100));
    std::vector<double> dn, df, di;
    for (const auto& r : reports) {
        if (r.policy == "none") dn.push_back(r.duration);
        if (r.policy == "full") df.push_back(r.duration);
        if (r.policy == "intermittent") di.push_back(r.duration);
    }
    const bool order_ok =
        median_of(dn) <= median_of(df) + 1e-9 && median_of(df) <= median_of(di) + 1e-9;

    return {equiv_ok && bytes_ok && order_ok,
            fmt("zero-amplitude worst gap %.2g mm (limit 1e-9); identical result bytes: %s; "
                "median durations %.1f <= %.1f <= %.1f s",
                worst_gap, bytes_ok ? "yes" : "no", median_of(dn), median_of(df), median_of(di))};
}

}  // namespace

int main() {
    struct Entry {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Entry> entries{
        {1, "estimator exactness (noiseless recovery < 1e-5)", criterion_estimator_exactness},
        {2, "analytic extrema scheduling", criterion_extrema},
        {3, "calibration targets (3% freq, 0.22 s phase, 0.576 s spread)",
         criterion_calibration},
        {4, "error-propagation arithmetic", criterion_error_propagation},
        {5, "cutting trend (finish rates, error ratio, duration ratio)",
         criterion_cutting_trend},
        {6, "frequency sweep (monotone, >=2x jump at 0.3 Hz)", criterion_frequency_sweep},
        {7, "multi-axis ordering (none < x < 3d < 6d)", criterion_multi_axis},
        {8, "debridement trend (success rates, completion, grasp rate)", criterion_debridement},
        {9, "policy equivalence, determinism, time ordering", criterion_property_suites},
    };
    int failures = 0;
    for (const auto& e : entries) {
        Outcome o;
        try {
            o = e.run();
        } catch (const std::exception& ex) {
            o = {false, std::string("exception: ") + ex.what()};
        }
        std::printf("[%s] %d. %s — %s\n", o.pass ? "PASS" : "FAIL", e.id, e.name,
                    o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failures;
    }
    std::printf("%zu criteria, %d failed\n", entries.size(), failures);
    return failures == 0 ? 0 : 1;
}
