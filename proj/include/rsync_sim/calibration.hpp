#pragma once

#include <cmath>
#include <vector>

#include "rsync_sim/control.hpp"
#include "rsync_sim/estimation.hpp"
#include "rsync_sim/sensing.hpp"

namespace rsync_sim {

/// Search configuration for tuning the simulator's two uncertainty knobs:
/// the sensor pose-noise magnitude (drives fit frequency/phase error) and the
/// actuation latency jitter (drives completion-time spread).
///
/// The fit-error targets are measured on a reference single-axis scenario whose
/// shape (amplitude, frequency, record length) fixes the ratio between frequency
/// and phase error, so a single noise knob can land both. Gross misdetections
/// (relative frequency error beyond gross_threshold, or a flat verdict) are
/// reported separately and excluded from the RMSE, mirroring how tracking outliers
/// are handled when quoting estimator precision.
struct CalibrationSpec {
    // reference estimation scenario
    double alpha = 5.0;        // mm
    double frequency = 0.45;   // Hz
    double fps = 15.0;
    double duration = 10.0;    // s  (4.5 periods)
    double offset = 3.0;       // mm DC term
    int n_seeds = 10;
    std::uint64_t base_seed = 0;

    // targets
    double freq_target = 0.03;       // relative RMSE
    double freq_band_lo = 0.025, freq_band_hi = 0.035;
    double phase_band_lo = 0.17, phase_band_hi = 0.27;  // s
    double gross_threshold = 0.25;   // relative; beyond this a fit is a misdetection

    // reference execution for the latency spread (std of the total run duration
    // over seeded repetitions)
    double spread_target = 0.576;    // s
    double spread_band_lo = 0.5, spread_band_hi = 0.65;
    int ref_decisions = 21;
    int spread_seeds = 40;
    double ref_speed = 25.0;
    double ref_latency_mean = 0.3;

    int max_evals = 200;
};

struct FitErrorMetrics {
    double freq_rmse = 0.0;   // relative, over retained fits
    double phase_rmse = 0.0;  // s, over retained fits
    int retained = 0;
    int gross = 0;
};

struct CalibrationResult {
    double sigma_trans = 0.0;
    double latency_jitter = 0.0;
    FitErrorMetrics fit;
    double latency_spread = 0.0;
    int evaluations = 0;
    bool converged = false;
};

/// Fit-error metrics of the reference scenario at one noise magnitude. Phase error
/// is the wrap-aware difference of the fitted phi (the model's t = 0 phase
/// reference), in seconds.
inline FitErrorMetrics evaluate_fit_noise(const CalibrationSpec& spec, double sigma_trans) {
    const double omega_true = 2.0 * kPi * spec.frequency;
    const double T = 1.0 / spec.frequency;
    double sum_f2 = 0.0, sum_p2 = 0.0;
    FitErrorMetrics m;
    for (int i = 0; i < spec.n_seeds; ++i) {
        const std::uint64_t trial_seed = spec.base_seed + static_cast<std::uint64_t>(i);
        Rng phase_rng(derive_seed(trial_seed, 0xca1));
        const double phi = phase_rng.uniform(0.05, 0.95) * T;

        RhythmicMotion motion = RhythmicMotion::x_only(spec.alpha, spec.frequency, phi);
        SensorModel sensor;
        sensor.fps = spec.fps;
        sensor.duration = spec.duration;
        sensor.sigma_trans = sigma_trans;
        sensor.seed = derive_seed(trial_seed, 0x0b5);
        const TrackSeries track = observe(motion, sensor);

        std::vector<double> xs = track.axis_values(0);
        for (double& v : xs) v += spec.offset;
        SineFit fit;
        try {
            fit = fit_axis(track.times(), xs);
        } catch (const SimError&) {
            ++m.gross;
            continue;
        }
        if (fit.flat) {
            ++m.gross;
            continue;
        }
        const double rel = (fit.omega - omega_true) / omega_true;
        if (std::abs(rel) > spec.gross_threshold) {
            ++m.gross;
            continue;
        }
        double dp = std::fmod(fit.phi - phi, T);
        if (dp > T / 2) dp -= T;
        if (dp < -T / 2) dp += T;
        sum_f2 += rel * rel;
        sum_p2 += dp * dp;
        ++m.retained;
    }
    if (m.retained > 0) {
        m.freq_rmse = std::sqrt(sum_f2 / m.retained);
        m.phase_rmse = std::sqrt(sum_p2 / m.retained);
    }
    return m;
}

/// Spread of the total execution time of a reference run (seeded, through the
/// executor): the standard deviation of the run duration over repetitions. The
/// reference plan is open loop on a still platform, so travel is identical across
/// seeds and only the latency draws vary.
inline double evaluate_latency_spread(const CalibrationSpec& spec, double latency_jitter) {
    const RhythmicMotion still{};
    std::vector<Pose6> targets;
    for (int i = 0; i < spec.ref_decisions; ++i)
        targets.push_back(Pose6{0.0, 2.5 * i, 0.0, 0.0, 0.0, 0.0});
    std::vector<double> durations;
    durations.reserve(spec.spread_seeds);
    for (int i = 0; i < spec.spread_seeds; ++i) {
        ActuationModel act;
        act.speed = spec.ref_speed;
        act.latency_mean = spec.ref_latency_mean;
        act.latency_jitter = latency_jitter;
        act.seed = derive_seed(spec.base_seed + static_cast<std::uint64_t>(i), 0xace);
        const auto plan = plan_no_sync(targets);
        const auto log = execute(plan, targets, still, act);
        durations.push_back(log.duration());
    }
    double mean = 0.0;
    for (double d : durations) mean += d;
    mean /= durations.size();
    double var = 0.0;
    for (double d : durations) var += (d - mean) * (d - mean);
    var /= (durations.size() - 1);
    return std::sqrt(var);
}

/// Tune (sigma_trans, latency_jitter) to the reference targets. Bisection on
/// each knob (both responses are monotone in their knob up to sampling noise),
/// followed by a local scan if the bisected point misses a band.
inline CalibrationResult calibrate(const CalibrationSpec& spec = {}) {
    CalibrationResult res;
    int evals = 0;

    // --- latency jitter: monotone, clean bisection ---
    {
        double lo = 0.0, hi = 0.05;
        while (evaluate_latency_spread(spec, hi) < spec.spread_target && hi < 4.0) {
            ++evals;
            hi *= 2.0;
        }
        ++evals;
        for (int it = 0; it < 30 && evals < spec.max_evals; ++it) {
            const double mid = 0.5 * (lo + hi);
            ++evals;
            if (evaluate_latency_spread(spec, mid) < spec.spread_target)
                lo = mid;
            else
                hi = mid;
        }
        res.latency_jitter = 0.5 * (lo + hi);
        res.latency_spread = evaluate_latency_spread(spec, res.latency_jitter);
    }

    // --- sensor noise: bisection on the trimmed frequency RMSE, then a local
    // scan to land inside both bands ---
    auto freq_of = [&](double sigma) {
        ++evals;
        const auto m = evaluate_fit_noise(spec, sigma);
        if (m.retained < std::max(2, spec.n_seeds / 2)) return 10.0;  // unusable regime
        return m.freq_rmse;
    };
    double lo = 0.05, hi = 1.0;
    while (freq_of(hi) < spec.freq_target && hi < 128.0 && evals < spec.max_evals) hi *= 1.6;
    for (int it = 0; it < 25 && evals < spec.max_evals; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (freq_of(mid) < spec.freq_target)
            lo = mid;
        else
            hi = mid;
    }
    double best_sigma = 0.5 * (lo + hi);
    auto in_bands = [&](const FitErrorMetrics& m) {
        return m.retained >= std::max(2, spec.n_seeds / 2) && m.freq_rmse >= spec.freq_band_lo &&
               m.freq_rmse <= spec.freq_band_hi && m.phase_rmse >= spec.phase_band_lo &&
               m.phase_rmse <= spec.phase_band_hi;
    };
    FitErrorMetrics best = evaluate_fit_noise(spec, best_sigma);
    ++evals;
    if (!in_bands(best)) {
        double best_dist = 1e9;
        double found_sigma = best_sigma;
        FitErrorMetrics found = best;
        bool any = false;
        for (int k = -8; k <= 8 && evals < spec.max_evals; ++k) {
            const double sigma = best_sigma * (1.0 + 0.03 * k);
            if (sigma <= 0.0) continue;
            ++evals;
            const auto m = evaluate_fit_noise(spec, sigma);
            if (!in_bands(m)) continue;
            const double dist = std::abs(m.freq_rmse - spec.freq_target);
            if (!any || dist < best_dist) {
                any = true;
                best_dist = dist;
                found_sigma = sigma;
                found = m;
            }
        }
        if (any) {
            best_sigma = found_sigma;
            best = found;
        }
    }
    res.sigma_trans = best_sigma;
    res.fit = best;
    res.evaluations = evals;
    res.converged = in_bands(best) && res.latency_spread >= spec.spread_band_lo &&
                    res.latency_spread <= spec.spread_band_hi;
    return res;
}

}  // namespace rsync_sim
