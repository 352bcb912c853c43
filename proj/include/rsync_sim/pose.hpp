#pragma once

#include <array>
#include <cmath>
#include <numbers>

namespace rsync_sim {

inline constexpr double kPi = std::numbers::pi;

inline double deg_to_rad(double d) { return d * kPi / 180.0; }
inline double rad_to_deg(double r) { return r * 180.0 / kPi; }

/// Wrap an angle in degrees into (-180, 180].
inline double wrap_deg(double d) {
    d = std::fmod(d, 360.0);
    if (d > 180.0) d -= 360.0;
    if (d <= -180.0) d += 360.0;
    return d;
}

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

/// Row-major 3x3 rotation matrix.
using Mat3 = std::array<std::array<double, 3>, 3>;

inline Vec3 mat_apply(const Mat3& m, const Vec3& v) {
    return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
}

inline Vec3 mat_apply_transposed(const Mat3& m, const Vec3& v) {
    return {m[0][0] * v.x + m[1][0] * v.y + m[2][0] * v.z,
            m[0][1] * v.x + m[1][1] * v.y + m[2][1] * v.z,
            m[0][2] * v.x + m[1][2] * v.y + m[2][2] * v.z};
}

inline Mat3 mat_mul(const Mat3& a, const Mat3& b) {
    Mat3 r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += a[i][k] * b[k][j];
            r[i][j] = s;
        }
    return r;
}

/// A rigid pose: translation in millimetres plus extrinsic Z-Y-X Euler angles in
/// degrees. Extrinsic Z-Y-X means rotations about the fixed Z, then Y, then X axes,
/// i.e. R = Rx(rx) * Ry(ry) * Rz(rz). Angles are stored unnormalized; comparisons
/// reduce modulo 360.
struct Pose6 {
    double tx = 0.0, ty = 0.0, tz = 0.0;  // mm
    double rx = 0.0, ry = 0.0, rz = 0.0;  // deg

    Vec3 translation() const { return {tx, ty, tz}; }

    static Pose6 identity() { return {}; }
    static Pose6 from_translation(const Vec3& v) { return {v.x, v.y, v.z, 0, 0, 0}; }
};

inline Mat3 rotation_matrix(const Pose6& p) {
    const double a = deg_to_rad(p.rx), b = deg_to_rad(p.ry), c = deg_to_rad(p.rz);
    const double ca = std::cos(a), sa = std::sin(a);
    const double cb = std::cos(b), sb = std::sin(b);
    const double cc = std::cos(c), sc = std::sin(c);
    // R = Rx(a) * Ry(b) * Rz(c)
    return Mat3{{{cb * cc, -cb * sc, sb},
                 {ca * sc + sa * sb * cc, ca * cc - sa * sb * sc, -sa * cb},
                 {sa * sc - ca * sb * cc, sa * cc + ca * sb * sc, ca * cb}}};
}

/// Recover extrinsic Z-Y-X angles (degrees) from a rotation matrix.
inline std::array<double, 3> euler_from_matrix(const Mat3& r) {
    double sb = r[0][2];
    if (sb > 1.0) sb = 1.0;
    if (sb < -1.0) sb = -1.0;
    const double b = std::asin(sb);
    double a, c;
    if (std::abs(sb) < 1.0 - 1e-12) {
        a = std::atan2(-r[1][2], r[2][2]);
        c = std::atan2(-r[0][1], r[0][0]);
    } else {
        // gimbal: fold the z rotation into x
        a = std::atan2(r[1][0], r[1][1]);
        c = 0.0;
    }
    return {rad_to_deg(a), rad_to_deg(b), rad_to_deg(c)};
}

/// Compose a disturbance pose with a target pose: the target's translation is
/// rotated about the platform origin by the disturbance rotation, then shifted by
/// the disturbance translation. Orientations compose in the same Z-Y-X convention.
inline Pose6 apply_motion(const Pose6& mpose, const Pose6& g) {
    const Mat3 rm = rotation_matrix(mpose);
    const Vec3 t = mat_apply(rm, g.translation()) + mpose.translation();
    const Mat3 rg = rotation_matrix(g);
    const auto ang = euler_from_matrix(mat_mul(rm, rg));
    return {t.x, t.y, t.z, ang[0], ang[1], ang[2]};
}

/// Map a point expressed in the global frame back into the platform frame given the
/// platform's current disturbance pose.
inline Vec3 to_platform_frame(const Pose6& mpose, const Vec3& global_point) {
    const Mat3 rm = rotation_matrix(mpose);
    return mat_apply_transposed(rm, global_point - mpose.translation());
}

inline double translation_distance(const Pose6& a, const Pose6& b) {
    return (a.translation() - b.translation()).norm();
}

/// Component-wise near-equality with rotation components compared modulo 360.
inline bool approx_equal(const Pose6& a, const Pose6& b, double tol = 1e-9) {
    return std::abs(a.tx - b.tx) <= tol && std::abs(a.ty - b.ty) <= tol &&
           std::abs(a.tz - b.tz) <= tol && std::abs(wrap_deg(a.rx - b.rx)) <= tol &&
           std::abs(wrap_deg(a.ry - b.ry)) <= tol && std::abs(wrap_deg(a.rz - b.rz)) <= tol;
}

inline double component(const Pose6& p, int axis) {
    switch (axis) {
        case 0: return p.tx;
        case 1: return p.ty;
        case 2: return p.tz;
        case 3: return p.rx;
        case 4: return p.ry;
        default: return p.rz;
    }
}

inline void set_component(Pose6& p, int axis, double v) {
    switch (axis) {
        case 0: p.tx = v; break;
        case 1: p.ty = v; break;
        case 2: p.tz = v; break;
        case 3: p.rx = v; break;
        case 4: p.ry = v; break;
        default: p.rz = v; break;
    }
}

}  // namespace rsync_sim
