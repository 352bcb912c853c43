#pragma once

#include <array>
#include <memory>
#include <optional>
#include <vector>

#include "rsync_sim/errors.hpp"
#include "rsync_sim/estimation.hpp"
#include "rsync_sim/motion.hpp"
#include "rsync_sim/random.hpp"

namespace rsync_sim {

/// A positional command paired with its intended completion time. tau is empty for
/// open-loop decisions, which the executor completes as early as possible.
struct Decision {
    Pose6 u;
    std::optional<double> tau;
    std::size_t target_index = 0;
};

/// Translational speed cap plus a latency model. The controller knows only
/// latency_mean; the jitter is what it cannot predict.
struct ActuationModel {
    double speed = 20.0;         // mm/s
    double latency_mean = 0.3;   // s
    double latency_jitter = 0.0; // s, std of Gaussian jitter; realized latency >= 0
    std::uint64_t seed = 0;
};

enum class PolicyKind { None, Full, Intermittent };

inline const char* policy_name(PolicyKind k) {
    switch (k) {
        case PolicyKind::None: return "none";
        case PolicyKind::Full: return "full";
        default: return "intermittent";
    }
}

/// Translational fits below this fraction of the dominant amplitude are ignored
/// by the controllers: a near-noise fit contributes a junk compensation, not a
/// correction.
inline constexpr double kCompensationGate = 0.15;

namespace detail {

inline std::array<SineFit, 6> gate_fits(std::array<SineFit, 6> fits) {
    double dominant = 0.0;
    for (int i = 0; i < 3; ++i)
        if (!fits[i].flat) dominant = std::max(dominant, fits[i].alpha);
    for (int i = 0; i < 3; ++i) {
        if (fits[i].flat) continue;
        if (fits[i].alpha < kCompensationGate * dominant) {
            fits[i] = SineFit{};
            fits[i].flat = true;
        }
    }
    return fits;
}

/// Per-axis motion offset predicted by the fits at time t (DC removed).
inline Pose6 predicted_offset(const std::array<SineFit, 6>& fits, double t) {
    Pose6 p;
    for (int i = 0; i < 6; ++i) set_component(p, i, fits[i].displacement(t));
    return p;
}

inline Pose6 compensate(const Pose6& target, const std::array<SineFit, 6>& fits, double t) {
    const Pose6 off = predicted_offset(fits, t);
    Pose6 u = target;
    for (int i = 0; i < 6; ++i) set_component(u, i, component(target, i) + component(off, i));
    return u;
}

}  // namespace detail

/// Sequential decision source. Planners are driven either in batch (plan_* below)
/// or interactively by a task that only knows its next target after seeing the
/// previous outcome. `now`/`pose` describe the tool when planning starts for this
/// target; planners predict with latency_mean only.
class Planner {
public:
    virtual ~Planner() = default;
    virtual Decision next(const Pose6& target, std::size_t index, double now,
                          const Pose6& pose) = 0;
};

/// Open loop: command the nominal target, no timing constraint.
class NoSyncPlanner final : public Planner {
public:
    Decision next(const Pose6& target, std::size_t index, double, const Pose6&) override {
        return {target, std::nullopt, index};
    }
};

/// Tracking control: offset every command by the predicted motion at the predicted
/// completion time. Completion is estimated with a short fixed-point pass since the
/// commanded point itself moves the travel distance.
class FullSyncPlanner final : public Planner {
public:
    FullSyncPlanner(std::array<SineFit, 6> fits, const ActuationModel& act)
        : fits_(detail::gate_fits(std::move(fits))), act_(act) {}

    Decision next(const Pose6& target, std::size_t index, double now, const Pose6& pose) override {
        double tau = now + act_.latency_mean;
        Pose6 u = target;
        for (int it = 0; it < 8; ++it) {
            u = detail::compensate(target, fits_, tau);
            const double travel = translation_distance(u, pose) / act_.speed;
            const double next_tau = now + travel + act_.latency_mean;
            if (std::abs(next_tau - tau) < 1e-9) { tau = next_tau; break; }
            tau = next_tau;
        }
        return {u, tau, index};
    }

private:
    std::array<SineFit, 6> fits_;
    ActuationModel act_;
};

/// Extrema-synchronized control: each command is timed to complete at the next
/// reachable extremum of the dominant axis, compensated by the predicted offsets at
/// that instant. Targets that cannot be reached before an extremum defer to the
/// next one. Falls back to open loop when every axis is flat.
class IntermittentPlanner final : public Planner {
public:
    IntermittentPlanner(std::array<SineFit, 6> fits, const ActuationModel& act)
        : fits_(detail::gate_fits(std::move(fits))), act_(act) {
        try {
            dominant_ = dominant_axis(fits_);
        } catch (const AllFlatError&) {
            fallback_ = true;
        }
    }

    bool fell_back() const { return fallback_; }
    int dominant() const { return dominant_; }

    Decision next(const Pose6& target, std::size_t index, double now, const Pose6& pose) override {
        if (fallback_) return {target, std::nullopt, index};
        const SineFit& dom = fits_[dominant_];
        const double half = kPi / dom.omega;
        double s = extrema_schedule(dom, now, 1).times.front();
        for (int guard = 0; guard < 4096; ++guard) {
            const Pose6 u = detail::compensate(target, fits_, s);
            const double travel = translation_distance(u, pose) / act_.speed;
            if (now + travel + act_.latency_mean <= s + 1e-9) return {u, s, index};
            s += half;
        }
        throw SimError("intermittent planner could not reach any extremum");
    }

private:
    std::array<SineFit, 6> fits_;
    ActuationModel act_;
    int dominant_ = -1;
    bool fallback_ = false;
};

inline std::unique_ptr<Planner> make_planner(PolicyKind kind, const std::array<SineFit, 6>& fits,
                                             const ActuationModel& act) {
    switch (kind) {
        case PolicyKind::None: return std::make_unique<NoSyncPlanner>();
        case PolicyKind::Full: return std::make_unique<FullSyncPlanner>(fits, act);
        default: return std::make_unique<IntermittentPlanner>(fits, act);
    }
}

/// Batch planning: walk the targets along the expected timeline (latency_mean, no
/// jitter) and emit one decision per target.
inline std::vector<Decision> plan_with(Planner& planner, const std::vector<Pose6>& targets,
                                       const ActuationModel& act, double t_start,
                                       const Pose6& start_pose = {}) {
    if (targets.empty()) throw EmptyTargetsError{};
    std::vector<Decision> plan;
    plan.reserve(targets.size());
    double now = t_start;
    Pose6 pose = start_pose;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        Decision d = planner.next(targets[i], i, now, pose);
        const double travel = translation_distance(d.u, pose) / act.speed;
        const double expected_done = d.tau ? *d.tau : now + travel + act.latency_mean;
        now = std::max(expected_done, now + travel + act.latency_mean);
        pose = d.u;
        plan.push_back(std::move(d));
    }
    return plan;
}

inline std::vector<Decision> plan_no_sync(const std::vector<Pose6>& targets) {
    if (targets.empty()) throw EmptyTargetsError{};
    std::vector<Decision> plan;
    plan.reserve(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) plan.push_back({targets[i], std::nullopt, i});
    return plan;
}

inline std::vector<Decision> plan_full_sync(const std::vector<Pose6>& targets,
                                            const std::array<SineFit, 6>& fits,
                                            const ActuationModel& act, double t_start = 0.0,
                                            const Pose6& start_pose = {}) {
    FullSyncPlanner p(fits, act);
    return plan_with(p, targets, act, t_start, start_pose);
}

inline std::vector<Decision> plan_intermittent(const std::vector<Pose6>& targets,
                                               const std::array<SineFit, 6>& fits,
                                               const ActuationModel& act, double t_start = 0.0,
                                               const Pose6& start_pose = {}) {
    IntermittentPlanner p(fits, act);
    return plan_with(p, targets, act, t_start, start_pose);
}

struct ExecutedDecision {
    Pose6 u;
    std::optional<double> tau_intended;
    double tau_issue = 0.0;
    double tau_realized = 0.0;
    double latency_realized = 0.0;
    Pose6 true_target_pose;  // where the nominal target actually was at tau_realized
    double error = 0.0;      // mm, translational
    std::size_t target_index = 0;
};

struct ExecutionLog {
    std::vector<ExecutedDecision> decisions;
    double t_start = 0.0;
    double t_end = 0.0;

    double duration() const { return t_end - t_start; }
};

/// Simulate a plan against the true motion. For a timed decision the executor
/// waits so the move is predicted to land at its intended tau; an untimed decision
/// is issued immediately. Realized latency is max(0, latency_mean + jitter).
/// The per-decision error is the translational distance between the commanded pose
/// and the true (motion-composed) target pose at the realized completion time.
inline ExecutionLog execute(const std::vector<Decision>& plan,
                            const std::vector<Pose6>& nominal_targets, const RhythmicMotion& m,
                            const ActuationModel& act, double t_start = 0.0,
                            const Pose6& start_pose = {}) {
    Rng rng(derive_seed(act.seed, 0xac7));
    ExecutionLog log;
    log.t_start = t_start;
    double now = t_start;
    Pose6 pose = start_pose;
    for (const auto& d : plan) {
        ExecutedDecision e;
        e.u = d.u;
        e.tau_intended = d.tau;
        e.target_index = d.target_index;
        const double travel = translation_distance(d.u, pose) / act.speed;
        double issue = now;
        if (d.tau) issue = std::max(now, *d.tau - travel - act.latency_mean);
        e.latency_realized = std::max(0.0, act.latency_mean + rng.gaussian(0.0, act.latency_jitter));
        e.tau_issue = issue;
        e.tau_realized = issue + travel + e.latency_realized;
        const Pose6& nominal = nominal_targets.at(d.target_index);
        e.true_target_pose = apply_motion(motion_pose(m, e.tau_realized), nominal);
        e.error = translation_distance(e.true_target_pose, d.u);
        now = e.tau_realized;
        pose = d.u;
        log.decisions.push_back(e);
    }
    log.t_end = now;
    return log;
}

/// Online execution: the planner is consulted at each realized issue instant, so
/// its completion-time predictions start from the true clock rather than an
/// expected timeline. This is how the tasks drive the controllers; the batch
/// plan/execute pair above reproduces it exactly when jitter is zero.
class PolicyRunner {
public:
    PolicyRunner(Planner& planner, const RhythmicMotion& m, const ActuationModel& act,
                 double t_start = 0.0, const Pose6& start_pose = {})
        : planner_(planner),
          motion_(m),
          act_(act),
          rng_(derive_seed(act.seed, 0xac7)),
          now_(t_start),
          pose_(start_pose) {
        log_.t_start = t_start;
        log_.t_end = t_start;
    }

    /// Plan and simulate the move to one target; returns the executed record.
    const ExecutedDecision& step(const Pose6& nominal_target, std::size_t index) {
        const Decision d = planner_.next(nominal_target, index, now_, pose_);
        ExecutedDecision e;
        e.u = d.u;
        e.tau_intended = d.tau;
        e.target_index = index;
        const double travel = translation_distance(d.u, pose_) / act_.speed;
        double issue = now_;
        if (d.tau) issue = std::max(now_, *d.tau - travel - act_.latency_mean);
        e.latency_realized =
            std::max(0.0, act_.latency_mean + rng_.gaussian(0.0, act_.latency_jitter));
        e.tau_issue = issue;
        e.tau_realized = issue + travel + e.latency_realized;
        e.true_target_pose = apply_motion(motion_pose(motion_, e.tau_realized), nominal_target);
        e.error = translation_distance(e.true_target_pose, d.u);
        now_ = e.tau_realized;
        pose_ = d.u;
        log_.t_end = now_;
        log_.decisions.push_back(e);
        return log_.decisions.back();
    }

    /// Let the clock advance without moving (e.g. seed handling time in a task).
    void dwell(double seconds) {
        now_ += seconds;
        log_.t_end = now_;
    }

    double now() const { return now_; }
    const Pose6& pose() const { return pose_; }
    const ExecutionLog& log() const { return log_; }

private:
    Planner& planner_;
    const RhythmicMotion& motion_;
    ActuationModel act_;
    Rng rng_;
    double now_;
    Pose6 pose_;
    ExecutionLog log_;
};

inline ExecutionLog run_policy(Planner& planner, const std::vector<Pose6>& targets,
                               const RhythmicMotion& m, const ActuationModel& act,
                               double t_start = 0.0, const Pose6& start_pose = {}) {
    if (targets.empty()) throw EmptyTargetsError{};
    PolicyRunner runner(planner, m, act, t_start, start_pose);
    for (std::size_t i = 0; i < targets.size(); ++i) runner.step(targets[i], i);
    return runner.log();
}

/// Cumulative error: sum of per-decision translational errors.
inline double cumulative_error(const ExecutionLog& log) {
    double s = 0.0;
    for (const auto& d : log.decisions) s += d.error;
    return s;
}

}  // namespace rsync_sim
