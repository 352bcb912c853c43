#pragma once

#include <array>
#include <cmath>

#include "rsync_sim/errors.hpp"
#include "rsync_sim/pose.hpp"

namespace rsync_sim {

enum class WaveformKind { Sinusoidal, Breathing };

/// One axis of the platform's rhythmic motion. Units follow the axis it drives:
/// millimetres for translations, degrees for rotations. `phase` is in seconds.
struct Waveform {
    WaveformKind kind = WaveformKind::Sinusoidal;
    double amplitude = 0.0;  // >= 0
    double frequency = 0.0;  // Hz, >= 0
    double phase = 0.0;      // s

    bool is_constant() const { return amplitude == 0.0 || frequency == 0.0; }
};

/// Closed-form displacement of a waveform at time t.
///
/// Sinusoidal:  A * sin(2*pi*f*(t + phase))
/// Breathing:   (exp(sin(2*pi*f*(t + phase))) - 1/e) * 2A / (e - 1/e), range [0, 2A]
inline double eval_waveform(const Waveform& w, double t) {
    if (w.is_constant()) {
        if (w.kind == WaveformKind::Breathing && w.amplitude > 0.0) {
            // frozen breathing wave, evaluated at its phase origin
            const double e = std::exp(1.0);
            return (std::exp(std::sin(2.0 * kPi * w.frequency * w.phase)) - 1.0 / e) *
                   2.0 * w.amplitude / (e - 1.0 / e);
        }
        return 0.0;
    }
    const double arg = 2.0 * kPi * w.frequency * (t + w.phase);
    if (w.kind == WaveformKind::Sinusoidal) return w.amplitude * std::sin(arg);
    const double e = std::exp(1.0);
    return (std::exp(std::sin(arg)) - 1.0 / e) * 2.0 * w.amplitude / (e - 1.0 / e);
}

/// Ground-truth 6-DOF periodic disturbance. All six axes share one frequency and
/// phase but have independent amplitudes and waveform kinds; axis order matches
/// Pose6 (tx, ty, tz, rx, ry, rz).
struct RhythmicMotion {
    std::array<Waveform, 6> axes{};

    /// Convenience: single-frequency motion with the given translational and
    /// rotational amplitudes.
    static RhythmicMotion sinusoidal(const std::array<double, 6>& amplitudes, double frequency,
                                     double phase = 0.0) {
        RhythmicMotion m;
        for (int i = 0; i < 6; ++i)
            m.axes[i] = Waveform{WaveformKind::Sinusoidal, amplitudes[i], frequency, phase};
        return m;
    }

    static RhythmicMotion x_only(double amplitude, double frequency, double phase = 0.0) {
        return sinusoidal({amplitude, 0, 0, 0, 0, 0}, frequency, phase);
    }

    bool is_static() const {
        for (const auto& w : axes)
            if (!w.is_constant()) return false;
        return true;
    }

    /// Shared frequency of the non-constant axes (0 if the motion is static).
    double frequency() const {
        for (const auto& w : axes)
            if (!w.is_constant()) return w.frequency;
        return 0.0;
    }
};

/// Platform pose at time t: each component evaluates its own waveform.
inline Pose6 motion_pose(const RhythmicMotion& m, double t) {
    Pose6 p;
    for (int i = 0; i < 6; ++i) set_component(p, i, eval_waveform(m.axes[i], t));
    return p;
}

/// Fundamental period 1/f. Throws NoMotionError for a constant motion.
inline double period(const RhythmicMotion& m) {
    if (m.is_static()) throw NoMotionError{};
    return 1.0 / m.frequency();
}

namespace detail {
inline constexpr int kAmplitudeSamples = 10000;
}

/// Peak translational displacement, max_t |(tx, ty, tz)(t)|. For pure shared-phase
/// sinusoidal translations this is the Euclidean norm of the three amplitudes; any
/// breathing axis triggers dense sampling over one period.
inline double amplitude(const RhythmicMotion& m) {
    bool all_sine = true;
    for (int i = 0; i < 3; ++i)
        if (m.axes[i].kind != WaveformKind::Sinusoidal && m.axes[i].amplitude > 0.0)
            all_sine = false;
    if (all_sine) {
        const double ax = m.axes[0].amplitude, ay = m.axes[1].amplitude, az = m.axes[2].amplitude;
        return std::sqrt(ax * ax + ay * ay + az * az);
    }
    if (m.is_static()) {
        // constant displacement still counts toward the peak
        const Pose6 p = motion_pose(m, 0.0);
        return p.translation().norm();
    }
    const double T = period(m);
    double best = 0.0;
    for (int i = 0; i < detail::kAmplitudeSamples; ++i) {
        const double t = T * i / detail::kAmplitudeSamples;
        const Pose6 p = motion_pose(m, t);
        best = std::max(best, p.translation().norm());
    }
    return best;
}

}  // namespace rsync_sim
