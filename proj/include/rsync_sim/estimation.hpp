#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "rsync_sim/errors.hpp"
#include "rsync_sim/sensing.hpp"

namespace rsync_sim {

/// Per-axis sinusoid model C(t) = offset + alpha * sin(omega * (t + phi)).
/// `flat` marks axes whose record is indistinguishable from a constant; a flat fit
/// has alpha = 0 and carries only the offset.
struct SineFit {
    double alpha = 0.0;   // mm or deg, >= 0
    double omega = 0.0;   // rad/s
    double phi = 0.0;     // s, normalized into [0, 2*pi/omega)
    double offset = 0.0;  // mm or deg
    double rmse = 0.0;
    bool flat = false;

    double eval(double t) const {
        if (flat || alpha == 0.0 || omega == 0.0) return offset;
        return offset + alpha * std::sin(omega * (t + phi));
    }

    /// Oscillating part only (what a controller subtracts).
    double displacement(double t) const { return eval(t) - offset; }

    double derivative(double t) const {
        if (flat || alpha == 0.0 || omega == 0.0) return 0.0;
        return alpha * omega * std::cos(omega * (t + phi));
    }

    double period() const { return 2.0 * kPi / omega; }
};

namespace detail {

/// In-place iterative radix-2 FFT; size must be a power of two.
inline void fft_pow2(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * kPi / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const auto u = a[i + k];
                const auto v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

/// Solve a small dense system A x = b by Gaussian elimination with partial
/// pivoting. Returns false if A is singular to working precision.
template <int N>
inline bool solve_dense(std::array<std::array<double, N>, N> a, std::array<double, N> b,
                        std::array<double, N>& x) {
    for (int col = 0; col < N; ++col) {
        int piv = col;
        for (int r = col + 1; r < N; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < 1e-14) return false;
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (int r = col + 1; r < N; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < N; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    for (int r = N - 1; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < N; ++c) s -= a[r][c] * x[c];
        x[r] = s / a[r][r];
    }
    return true;
}

struct PeriodogramPeak {
    double omega = 0.0;  // rad/s, parabolic-interpolated
    double power = 0.0;  // |X|^2 at the peak bin
};

/// Zero-padded periodogram of the mean-removed series; returns up to `max_peaks`
/// local maxima, strongest first, plus the mean noise-bin power for detection.
struct Periodogram {
    std::vector<PeriodogramPeak> peaks;
    double mean_power = 0.0;  // average |X|^2 over non-DC bins
    std::size_t n_bins = 0;
};

inline Periodogram periodogram_peaks(const std::vector<double>& t, const std::vector<double>& x,
                                     int max_peaks) {
    const std::size_t n = x.size();
    const double dt = t[1] - t[0];
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);

    std::size_t m = 64;
    while (m < 8 * n) m <<= 1;
    std::vector<std::complex<double>> buf(m, 0.0);
    for (std::size_t i = 0; i < n; ++i) buf[i] = x[i] - mean;
    fft_pow2(buf);

    const std::size_t half = m / 2;
    std::vector<double> p(half);
    double total = 0.0;
    for (std::size_t k = 1; k < half; ++k) {
        p[k] = std::norm(buf[k]);
        total += p[k];
    }
    Periodogram out;
    out.n_bins = half - 1;
    out.mean_power = total / static_cast<double>(half - 1);

    // a peak below ~1.5 cycles over the record is indistinguishable from
    // baseline drift, and fitting it lets the amplitude diverge; skip that band
    const std::size_t k_min =
        std::max<std::size_t>(1, static_cast<std::size_t>(1.5 * static_cast<double>(m) /
                                                          static_cast<double>(n)));
    std::vector<std::size_t> order;
    for (std::size_t k = std::max<std::size_t>(k_min, 1); k + 1 < half; ++k)
        if (p[k] >= p[k - 1] && p[k] >= p[k + 1]) order.push_back(k);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] > p[b]; });

    const double bin_hz = 1.0 / (dt * static_cast<double>(m));
    for (std::size_t k : order) {
        if (static_cast<int>(out.peaks.size()) >= max_peaks) break;
        double dk = 0.0;
        const double denom = p[k - 1] - 2.0 * p[k] + p[k + 1];
        if (denom != 0.0) dk = 0.5 * (p[k - 1] - p[k + 1]) / denom;
        out.peaks.push_back({2.0 * kPi * (static_cast<double>(k) + dk) * bin_hz, p[k]});
    }
    return out;
}

struct GnResult {
    double alpha, omega, theta, offset, sse;
    bool converged;
};

/// Damped Gauss-Newton on (alpha, omega, theta, offset) for the model
/// offset + alpha * sin(omega * tc + theta) over centred time tc.
inline GnResult gauss_newton_sine(const std::vector<double>& tc, const std::vector<double>& x,
                                  double alpha, double omega, double theta, double offset,
                                  int max_iter) {
    const std::size_t n = x.size();
    auto sse_of = [&](double al, double om, double th, double of) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = x[i] - (of + al * std::sin(om * tc[i] + th));
            s += r * r;
        }
        return s;
    };
    double sse = sse_of(alpha, omega, theta, offset);
    bool converged = false;
    for (int it = 0; it < max_iter; ++it) {
        std::array<std::array<double, 4>, 4> h{};
        std::array<double, 4> g{};
        for (std::size_t i = 0; i < n; ++i) {
            const double s = std::sin(omega * tc[i] + theta);
            const double c = std::cos(omega * tc[i] + theta);
            const double r = x[i] - (offset + alpha * s);
            // d(model)/d(param); residual derivative is the negative
            const std::array<double, 4> j{s, alpha * c * tc[i], alpha * c, 1.0};
            for (int a = 0; a < 4; ++a) {
                g[a] += j[a] * r;
                for (int b = a; b < 4; ++b) h[a][b] += j[a] * j[b];
            }
        }
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < a; ++b) h[a][b] = h[b][a];
        std::array<double, 4> step{};
        if (!solve_dense<4>(h, g, step)) break;
        bool improved = false;
        double ns = sse;
        double na = alpha, no = omega, nt = theta, nf = offset;
        for (int damp = 0; damp < 25; ++damp) {
            const double al = alpha + step[0], om = omega + step[1];
            const double th = theta + step[2], of = offset + step[3];
            const double trial = sse_of(al, om, th, of);
            if (trial <= sse) {
                improved = true;
                na = al; no = om; nt = th; nf = of; ns = trial;
                break;
            }
            for (double& v : step) v *= 0.5;
        }
        if (!improved) {
            converged = true;  // stuck at a local optimum of the damped step
            break;
        }
        const bool small = (sse - ns) <= 1e-14 * std::max(sse, 1e-300);
        alpha = na; omega = no; theta = nt; offset = nf; sse = ns;
        if (small) {
            converged = true;
            break;
        }
    }
    return {alpha, omega, theta, offset, sse, converged};
}

}  // namespace detail

struct FitOptions {
    int max_refine_iter = 100;
    int n_starts = 3;           // periodogram peaks tried as refinement seeds
    double flat_rel_power = 1e-6;
    double detection_margin = 3.0;  // extra log-margin over the noise-peak level
};

/// Fit the sinusoid model to one axis of a uniformly sampled record.
///
/// Procedure: coarse frequency from the zero-padded periodogram peak, linear least
/// squares for (amplitude, phase, offset) at that frequency, then joint damped
/// Gauss-Newton refinement of all four parameters. The strongest few periodogram
/// peaks are each refined and the lowest-residual fit wins. A record whose peak is
/// indistinguishable from DC, or not separable from the noise-peak level, is
/// returned as a flat fit.
inline SineFit fit_axis(const std::vector<double>& t, const std::vector<double>& x,
                        const FitOptions& opt = {}) {
    const std::size_t n = x.size();
    if (n < 8) throw NoSamplesError("fit_axis needs at least 8 samples");

    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double msq = 0.0;
    for (double v : x) msq += v * v;
    msq /= static_cast<double>(n);

    SineFit flat;
    flat.flat = true;
    flat.offset = mean;
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    flat.rmse = std::sqrt(var);
    if (msq <= 0.0) return flat;

    const auto pg = detail::periodogram_peaks(t, x, std::max(1, opt.n_starts));
    if (pg.peaks.empty()) return flat;

    // peak power translated to an amplitude estimate: |X_peak| ~= n * a / 2
    const double a_hat = 2.0 * std::sqrt(pg.peaks[0].power) / static_cast<double>(n);
    if (0.5 * a_hat * a_hat / msq < opt.flat_rel_power) return flat;

    // reject records whose top peak is consistent with the extreme noise bin:
    // noise periodogram bins are ~exponential, so the max over the record's
    // independent bins (about n/2; zero-padding only correlates neighbours) sits
    // near mean_power * ln(n/2); require a margin above that.
    const double independent_bins = std::max(static_cast<double>(n) / 2.0, 2.0);
    const double noise_peak =
        pg.mean_power * (std::log(independent_bins) + opt.detection_margin);
    if (pg.peaks[0].power < noise_peak) return flat;

    double tmid = 0.0;
    for (double v : t) tmid += v;
    tmid /= static_cast<double>(n);
    std::vector<double> tc(n);
    for (std::size_t i = 0; i < n; ++i) tc[i] = t[i] - tmid;

    bool any_converged = false;
    detail::GnResult best{};
    bool have_best = false;
    for (const auto& peak : pg.peaks) {
        const double om = peak.omega;
        if (om <= 0.0) continue;
        // linear LS for a*sin(om*tc) + b*cos(om*tc) + c
        std::array<std::array<double, 3>, 3> h{};
        std::array<double, 3> g{};
        for (std::size_t i = 0; i < n; ++i) {
            const std::array<double, 3> j{std::sin(om * tc[i]), std::cos(om * tc[i]), 1.0};
            for (int a = 0; a < 3; ++a) {
                g[a] += j[a] * x[i];
                for (int b = a; b < 3; ++b) h[a][b] += j[a] * j[b];
            }
        }
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < a; ++b) h[a][b] = h[b][a];
        std::array<double, 3> coef{};
        if (!detail::solve_dense<3>(h, g, coef)) continue;
        const double alpha0 = std::hypot(coef[0], coef[1]);
        const double theta0 = std::atan2(coef[1], coef[0]);
        const auto r =
            detail::gauss_newton_sine(tc, x, alpha0, om, theta0, coef[2], opt.max_refine_iter);
        any_converged = any_converged || r.converged;
        if (!have_best || r.sse < best.sse) {
            best = r;
            have_best = true;
        }
    }
    if (!have_best) return flat;
    if (!any_converged)
        throw NonConvergenceError("sinusoid refinement did not converge within " +
                                  std::to_string(opt.max_refine_iter) + " iterations");

    // refinement can still slide into the drift-degenerate band; treat as flat
    const double t_span = t.back() - t.front();
    if (best.omega <= 0.0 || best.omega * t_span < 2.0 * kPi * 1.2) return flat;

    double alpha = best.alpha, theta = best.theta;
    if (alpha < 0.0) {
        alpha = -alpha;
        theta += kPi;
    }
    SineFit fit;
    fit.alpha = alpha;
    fit.omega = best.omega;
    fit.offset = best.offset;
    // model used sin(omega * (t - tmid) + theta); phi = theta/omega - tmid mod T
    const double T = 2.0 * kPi / best.omega;
    double phi = std::fmod(theta / best.omega - tmid, T);
    if (phi < 0.0) phi += T;
    fit.phi = phi;
    fit.rmse = std::sqrt(best.sse / static_cast<double>(n));
    return fit;
}

/// Fit every axis of a track independently. Per-axis failures are not fatal: an
/// axis that cannot be fit is reported flat.
inline std::array<SineFit, 6> fit_all(const TrackSeries& track, const FitOptions& opt = {}) {
    if (track.size() < 8) throw NoSamplesError("track too short to fit");
    const auto t = track.times();
    std::array<SineFit, 6> fits;
    for (int axis = 0; axis < 6; ++axis) {
        try {
            fits[axis] = fit_axis(t, track.axis_values(axis), opt);
        } catch (const SimError&) {
            fits[axis] = SineFit{};
            fits[axis].flat = true;
        }
    }
    return fits;
}

/// Index of the translational axis with the largest fitted amplitude. Rotational
/// axes are considered only when every translational axis is flat (mm and degrees
/// are not comparable). Ties break to the lowest index.
inline int dominant_axis(const std::array<SineFit, 6>& fits) {
    int best = -1;
    for (int i = 0; i < 3; ++i) {
        if (fits[i].flat) continue;
        if (best < 0 || fits[i].alpha > fits[best].alpha) best = i;
    }
    if (best >= 0) return best;
    for (int i = 3; i < 6; ++i) {
        if (fits[i].flat) continue;
        if (best < 0 || fits[i].alpha > fits[best].alpha) best = i;
    }
    if (best < 0) throw AllFlatError{};
    return best;
}

/// Times of the dominant-axis extrema (alternating maxima/minima).
struct ExtremaSchedule {
    std::vector<double> times;
    int dominant_axis = 0;
    SineFit fit;

    /// First scheduled time at or after `t`, advancing in half-period steps.
    double next_at_or_after(double t) const {
        const double half = kPi / fit.omega;
        if (times.empty()) throw FlatFitError{};
        if (t <= times.front()) return times.front();
        const double k = std::ceil((t - times.front()) / half - 1e-9);
        return times.front() + k * half;
    }
};

/// Schedule the first k extrema of a fitted sinusoid at or after t_start. The first
/// entry is the smallest t >= t_start with omega*(t + phi) = pi/2 (mod pi);
/// subsequent entries are spaced by exactly half a period.
inline ExtremaSchedule extrema_schedule(const SineFit& fit, double t_start, int k) {
    if (fit.flat || fit.alpha <= 0.0 || fit.omega <= 0.0) throw FlatFitError{};
    if (k < 1) throw SimError("extrema_schedule: k must be >= 1");
    const double half = kPi / fit.omega;
    const double first_peak = 0.5 * half - fit.phi;  // omega*(t+phi) = pi/2
    double idx = std::ceil((t_start - first_peak) / half - 1e-9);
    double t0 = first_peak + idx * half;
    while (t0 < t_start - 1e-9) t0 += half;
    while (t0 - half >= t_start - 1e-9) t0 -= half;
    ExtremaSchedule sched;
    sched.fit = fit;
    sched.times.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) sched.times.push_back(t0 + static_cast<double>(i) * half);
    return sched;
}

/// Half-width of the low-velocity window around an extremum within which the
/// displacement stays within eps of the extremal value (second-order bound):
/// dt = sqrt(2 * eps / (alpha * omega^2)).
inline double window_halfwidth(const SineFit& fit, double eps) {
    if (fit.flat || fit.alpha <= 0.0 || fit.omega <= 0.0) throw FlatFitError{};
    if (eps <= 0.0) throw SimError("window_halfwidth: eps must be positive");
    return std::sqrt(2.0 * eps / (fit.alpha * fit.omega * fit.omega));
}

/// Displacement incurred by a timing error dt at the worst point of the cycle
/// (peak velocity): alpha * omega * dt.
inline double worst_case_error(const SineFit& fit, double dt) {
    if (dt < 0.0) throw SimError("worst_case_error: dt must be >= 0");
    if (fit.flat) return 0.0;
    return fit.alpha * fit.omega * dt;
}

}  // namespace rsync_sim
