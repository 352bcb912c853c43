#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "rsync_sim/control.hpp"

namespace rsync_sim {

/// Straight-line cut in the platform frame: the line runs along Y at x = z = 0,
/// waypoints every waypoint_spacing mm. A trial fails when the realized cut point
/// leaves the line by more than disengage_threshold (the scissors disengage).
struct CuttingTask {
    double line_length = 50.0;        // mm
    double line_thickness = 2.0;      // mm
    double waypoint_spacing = 2.5;    // mm
    double disengage_threshold = 6.0; // mm
};

/// Remove small inclusions from a moving phantom. Inclusion centers are uniform
/// over a square region with a minimum pairwise separation; each attempt targets
/// the estimated (registration-noised) center of the nearest remaining inclusion.
///
/// A grasp is modelled as a closing window: it succeeds when, at some instant of
/// the window, the seed sits inside the gripper capture zone, it is moving slowly
/// enough to hold, and the gripper-axis orientation error is within tolerance.
/// registration_sigma is the planar RMS error of the registration (per-axis
/// sigma = registration_sigma / sqrt(2)).
struct DebridementTask {
    int n_inclusions = 10;
    int max_attempts = 20;
    double grasp_tolerance = 2.5;       // mm, across the gripper jaws
    double registration_sigma = 2.25;   // mm, planar RMS
    double orientation_tolerance = 30;  // deg
    double region_size = 60.0;          // mm, square side
    double min_separation = 8.0;        // mm between inclusion centers
    double seed_half_length = 2.5;      // mm, extra capture slack along the jaws
    double grasp_window = 1.0;          // s, gripper closing window
    double capture_speed_max = 110.0;   // mm/s, above this a passing seed is lost
    double handling_time = 3.5;         // s per attempt (lift, drop, reposition)
};

/// Outcome of one task trial.
struct TrialReport {
    bool finished = false;
    std::optional<double> max_error;       // mm, cutting only
    double cumulative_error = 0.0;         // mm, summed per-decision control error
    double duration = 0.0;                 // s, execution span (observation excluded)
    std::optional<int> attempts;           // debridement only
    std::optional<int> successes;          // debridement only
    std::string policy;
    std::string scenario;
    std::uint64_t seed = 0;
    std::size_t decisions = 0;
    bool estimation_fallback = false;      // intermittent fell back to open loop
};

/// Attempted grasps per minute.
inline double grasp_rate(const TrialReport& r) {
    if (r.duration <= 0.0) throw ZeroDurationError{};
    return static_cast<double>(r.attempts.value_or(0)) * 60.0 / r.duration;
}

namespace detail {

struct FittedPolicy {
    std::array<SineFit, 6> fits{};
    bool fallback = false;
    double t_ready = 0.0;  // when the observation finished
};

/// Observe and fit for the policies that need a model; open loop skips sensing.
inline FittedPolicy prepare_fits(const RhythmicMotion& m, const SensorModel& sensor,
                                 PolicyKind kind, std::uint64_t trial_seed) {
    FittedPolicy fp;
    if (kind == PolicyKind::None) return fp;
    SensorModel s = sensor;
    s.seed = derive_seed(trial_seed, 0x0b5);
    const TrackSeries track = observe(m, s);
    fp.fits = fit_all(track);
    fp.t_ready = s.duration;
    bool all_flat = true;
    for (const auto& f : fp.fits) all_flat = all_flat && f.flat;
    fp.fallback = all_flat;
    return fp;
}

}  // namespace detail

/// Run one cutting trial. The cut starts when the observation ends (t = sensor
/// duration for the model-based policies, t = 0 for open loop); reported duration
/// covers execution only. Deviation is the distance from the realized cut point to
/// the line, measured in the platform frame at the realized time; max_error is the
/// largest excursion beyond the thickness band.
inline TrialReport run_cutting(const CuttingTask& task, const RhythmicMotion& m,
                               const SensorModel& sensor, PolicyKind kind,
                               const ActuationModel& act, std::uint64_t seed) {
    if (task.line_length <= 0 || task.line_thickness <= 0 ||
        task.waypoint_spacing > task.line_length)
        throw ConfigError("task: invalid cutting geometry");

    TrialReport report;
    report.policy = policy_name(kind);
    report.seed = seed;

    const auto fp = detail::prepare_fits(m, sensor, kind, seed);

    const int n_seg = static_cast<int>(std::round(task.line_length / task.waypoint_spacing));
    std::vector<Pose6> waypoints;
    waypoints.reserve(n_seg + 1);
    for (int i = 0; i <= n_seg; ++i) {
        const double y = -task.line_length / 2.0 + task.waypoint_spacing * i;
        waypoints.push_back(Pose6{0.0, y, 0.0, 0.0, 0.0, 0.0});
    }

    ActuationModel a = act;
    a.seed = derive_seed(seed, 0xace);
    auto planner = make_planner(kind, fp.fits, a);
    if (kind == PolicyKind::Intermittent) {
        report.estimation_fallback =
            static_cast<IntermittentPlanner*>(planner.get())->fell_back();
    }

    PolicyRunner runner(*planner, m, a, fp.t_ready, waypoints.front());

    const double band = task.line_thickness / 2.0;
    double max_err = 0.0;
    bool disengaged = false;
    for (std::size_t i = 0; i < waypoints.size(); ++i) {
        const auto& e = runner.step(waypoints[i], i);
        // cut point in the platform frame at the realized time
        const Vec3 p = to_platform_frame(motion_pose(m, e.tau_realized), e.u.translation());
        const double deviation = std::sqrt(p.x * p.x + p.z * p.z);
        max_err = std::max(max_err, std::max(0.0, deviation - band));
        if (deviation > task.disengage_threshold) {
            disengaged = true;
            break;
        }
    }
    report.finished = !disengaged;
    report.max_error = max_err;
    report.cumulative_error = cumulative_error(runner.log());
    report.duration = runner.log().duration();
    report.decisions = runner.log().decisions.size();
    return report;
}

namespace detail {

struct Inclusion {
    double x = 0.0, y = 0.0;  // platform frame, mm
    double yaw = 0.0;         // long-axis orientation, deg
    bool removed = false;
};

inline std::vector<Inclusion> place_inclusions(const DebridementTask& task, Rng& rng) {
    std::vector<Inclusion> seeds;
    const double half = task.region_size / 2.0;
    int guard = 0;
    while (static_cast<int>(seeds.size()) < task.n_inclusions && guard < 100000) {
        ++guard;
        Inclusion c{rng.uniform(-half, half), rng.uniform(-half, half), rng.uniform(0.0, 180.0)};
        bool ok = true;
        for (const auto& s : seeds) {
            const double d = std::hypot(c.x - s.x, c.y - s.y);
            if (d < task.min_separation) { ok = false; break; }
        }
        if (ok) seeds.push_back(c);
    }
    if (static_cast<int>(seeds.size()) < task.n_inclusions)
        throw ConfigError("task: could not place inclusions with the required separation");
    return seeds;
}

}  // namespace detail

/// Run one debridement trial: up to max_attempts grasps to clear n_inclusions.
/// Each attempt drives the policy to the registered center of the nearest
/// remaining inclusion and closes the gripper over grasp_window seconds.
inline TrialReport run_debridement(const DebridementTask& task, const RhythmicMotion& m,
                                   const SensorModel& sensor, PolicyKind kind,
                                   const ActuationModel& act, std::uint64_t seed) {
    if (task.max_attempts < task.n_inclusions)
        throw ConfigError("task: max_attempts must cover n_inclusions");
    if (task.grasp_tolerance <= 0 || task.orientation_tolerance <= 0)
        throw ConfigError("task: tolerances must be positive");

    TrialReport report;
    report.policy = policy_name(kind);
    report.seed = seed;
    report.attempts = 0;
    report.successes = 0;

    const auto fp = detail::prepare_fits(m, sensor, kind, seed);

    Rng layout_rng(derive_seed(seed, 0xdeb));
    auto seeds = detail::place_inclusions(task, layout_rng);
    Rng grasp_rng(derive_seed(seed, 0x96a));

    ActuationModel a = act;
    a.seed = derive_seed(seed, 0xace);
    auto planner = make_planner(kind, fp.fits, a);
    if (kind == PolicyKind::Intermittent) {
        report.estimation_fallback =
            static_cast<IntermittentPlanner*>(planner.get())->fell_back();
    }

    PolicyRunner runner(*planner, m, a, fp.t_ready, Pose6{});

    const double sigma_axis = task.registration_sigma / std::sqrt(2.0);
    int remaining = task.n_inclusions;
    std::size_t decision_index = 0;
    while (remaining > 0 && *report.attempts < task.max_attempts) {
        // nearest remaining inclusion to the tool, in nominal coordinates
        int target = -1;
        double best_d = 0.0;
        for (int i = 0; i < task.n_inclusions; ++i) {
            if (seeds[i].removed) continue;
            const double d =
                std::hypot(seeds[i].x - runner.pose().tx, seeds[i].y - runner.pose().ty);
            if (target < 0 || d < best_d) { target = i; best_d = d; }
        }
        const auto& seedpt = seeds[target];
        const double reg_x = grasp_rng.gaussian(0.0, sigma_axis);
        const double reg_y = grasp_rng.gaussian(0.0, sigma_axis);

        // gripper approaches orthogonal to the registered long axis
        Pose6 nominal{seedpt.x + reg_x, seedpt.y + reg_y, 0.0, 0.0, 0.0, seedpt.yaw};
        const auto& e = runner.step(nominal, decision_index++);
        ++*report.attempts;

        // scan the closing window for a capture opportunity
        const double dt = 0.01;
        bool in_zone_any = false;
        double best_speed = 0.0;
        bool orientation_ok_at_best = false;
        const int steps = static_cast<int>(task.grasp_window / dt);
        for (int k = 0; k <= steps; ++k) {
            const double tk = e.tau_realized + k * dt;
            const Pose6 mp = motion_pose(m, tk);
            const Pose6 world_seed = apply_motion(mp, Pose6{seedpt.x, seedpt.y, 0, 0, 0, 0});
            const double ex = world_seed.tx - e.u.tx;
            const double ey = world_seed.ty - e.u.ty;
            // capture zone: grasp_tolerance across the jaws, extra slack along the
            // seed's long axis
            const double yaw = deg_to_rad(seedpt.yaw);
            const double along = std::abs(std::cos(yaw) * ex + std::sin(yaw) * ey);
            const double across = std::abs(-std::sin(yaw) * ex + std::cos(yaw) * ey);
            if (across > task.grasp_tolerance ||
                along > task.grasp_tolerance + task.seed_half_length)
                continue;
            // seed velocity in the global frame (finite difference)
            const Pose6 mp2 = motion_pose(m, tk + 1e-4);
            const Pose6 ws2 = apply_motion(mp2, Pose6{seedpt.x, seedpt.y, 0, 0, 0, 0});
            const double speed =
                std::hypot(ws2.tx - world_seed.tx, ws2.ty - world_seed.ty) / 1e-4;
            // platform rotation shifts the seed's apparent yaw
            const double yaw_err = std::abs(wrap_deg((seedpt.yaw + mp.rz) - e.u.rz));
            const bool orient_ok = std::min(yaw_err, std::abs(180.0 - yaw_err)) <=
                                   task.orientation_tolerance;
            if (!in_zone_any || speed < best_speed) {
                in_zone_any = true;
                best_speed = speed;
                orientation_ok_at_best = orient_ok;
            }
        }
        bool captured = false;
        if (in_zone_any && orientation_ok_at_best) {
            const double p_capture =
                std::max(0.0, 1.0 - best_speed / task.capture_speed_max);
            captured = grasp_rng.uniform() < p_capture;
        }
        runner.dwell(task.grasp_window + task.handling_time);
        if (captured) {
            seeds[target].removed = true;
            --remaining;
            ++*report.successes;
        }
    }
    report.finished = (remaining == 0);
    report.cumulative_error = cumulative_error(runner.log());
    report.duration = runner.log().duration();
    report.decisions = runner.log().decisions.size();
    return report;
}

}  // namespace rsync_sim
