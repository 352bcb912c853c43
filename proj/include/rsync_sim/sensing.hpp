#pragma once

#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "rsync_sim/errors.hpp"
#include "rsync_sim/motion.hpp"
#include "rsync_sim/random.hpp"

namespace rsync_sim {

/// Marker-tracking camera surrogate: samples the true platform pose at a fixed
/// frame rate with i.i.d. Gaussian noise per component. The noise magnitude is a
/// calibration knob standing in for image noise and platform kinematic variation,
/// not a physical camera spec.
struct SensorModel {
    double fps = 15.0;
    double duration = 60.0;      // s
    double sigma_trans = 0.0;    // mm, per translational axis
    double sigma_rot = 0.0;      // deg, per rotational axis
    std::uint64_t seed = 0;
    double outlier_fraction = 0.0;  // reserved; must stay 0 for now
};

struct TrackSample {
    double t = 0.0;
    Pose6 pose;
};

/// Uniformly sampled pose observations; sample i is at t = i / fps.
struct TrackSeries {
    std::vector<TrackSample> samples;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }

    /// One component of every sample as a flat series.
    std::vector<double> axis_values(int axis) const {
        std::vector<double> v;
        v.reserve(samples.size());
        for (const auto& s : samples) v.push_back(component(s.pose, axis));
        return v;
    }

    std::vector<double> times() const {
        std::vector<double> v;
        v.reserve(samples.size());
        for (const auto& s : samples) v.push_back(s.t);
        return v;
    }
};

/// Observe a motion for sensor.duration seconds. Requires the sampling rate to
/// exceed twice the motion frequency and the record to cover at least four periods
/// when the motion is non-constant.
inline TrackSeries observe(const RhythmicMotion& m, const SensorModel& s) {
    if (s.fps <= 0.0) throw NyquistError("sensor.fps must be positive");
    const double f = m.frequency();
    if (!m.is_static()) {
        if (s.fps <= 2.0 * f)
            throw NyquistError("sensor.fps " + std::to_string(s.fps) +
                               " below twice the motion frequency " + std::to_string(f));
        if (s.duration * f < 4.0 - 1e-9)
            throw NoSamplesError("observation covers fewer than 4 motion periods");
    }
    const std::size_t n = static_cast<std::size_t>(s.fps * s.duration);
    if (n == 0) throw NoSamplesError("observation produces no samples");

    Rng rng(derive_seed(s.seed, 0x5e));
    TrackSeries out;
    out.samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / s.fps;
        Pose6 p = motion_pose(m, t);
        if (s.sigma_trans > 0.0) {
            p.tx += rng.gaussian(0.0, s.sigma_trans);
            p.ty += rng.gaussian(0.0, s.sigma_trans);
            p.tz += rng.gaussian(0.0, s.sigma_trans);
        }
        if (s.sigma_rot > 0.0) {
            p.rx += rng.gaussian(0.0, s.sigma_rot);
            p.ry += rng.gaussian(0.0, s.sigma_rot);
            p.rz += rng.gaussian(0.0, s.sigma_rot);
        }
        out.samples.push_back({t, p});
    }
    return out;
}

inline const char* kTrackHeader = "t,tx,ty,tz,rx,ry,rz";

/// Write a track as CSV (seconds, mm, degrees), 12 significant digits.
inline void write_track(const TrackSeries& ts, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << kTrackHeader << '\n';
    char buf[256];
    for (const auto& s : ts.samples) {
        std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", s.t,
                      s.pose.tx, s.pose.ty, s.pose.tz, s.pose.rx, s.pose.ry, s.pose.rz);
        out << buf;
    }
    if (!out) throw IoError("write failed: " + path);
}

inline TrackSeries read_track(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::string line;
    if (!std::getline(in, line)) throw MalformedRowError(1, "empty file");
    if (line != kTrackHeader)
        throw MalformedRowError(1, "expected header '" + std::string(kTrackHeader) + "'");
    TrackSeries out;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        double v[7];
        const int got = std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf", &v[0], &v[1],
                                    &v[2], &v[3], &v[4], &v[5], &v[6]);
        if (got != 7) throw MalformedRowError(row, "expected 7 comma-separated values");
        if (!out.samples.empty() && v[0] <= out.samples.back().t)
            throw MalformedRowError(row, "time stamps must strictly increase");
        out.samples.push_back({v[0], Pose6{v[1], v[2], v[3], v[4], v[5], v[6]}});
    }
    if (out.samples.empty()) throw NoSamplesError("track file has a header but no samples");
    return out;
}

}  // namespace rsync_sim
