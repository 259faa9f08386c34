#pragma once

// Rigid-body quadrotor equations of motion.
//
// Frame: world z points up, x forward, y left. Euler angles are applied
// yaw-pitch-roll. Positive roll puts the right side down, positive pitch puts
// the nose down (accelerates +x), positive yaw is counter-clockwise seen from
// above. Body rates are taken equal to the Euler-angle rates, as in the
// small-angle quadrotor model.
//
// Motor numbering: 1 front-left (CW), 2 front-right (CCW), 3 back-right (CW),
// 4 back-left (CCW).

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "quadsim/errors.hpp"
#include "quadsim/integrators.hpp"

namespace quadsim {

constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

struct Attitude {
    double roll = 0.0;   // φ
    double pitch = 0.0;  // θ
    double yaw = 0.0;    // ψ, unwrapped
};

struct EulerRates {
    double roll = 0.0;
    double pitch = 0.0;
    double yaw = 0.0;
};

struct RigidBodyState {
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
    Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
    Attitude attitude;
    EulerRates rates;

    bool is_finite() const {
        return position.allFinite() && velocity.allFinite() && std::isfinite(attitude.roll) &&
               std::isfinite(attitude.pitch) && std::isfinite(attitude.yaw) &&
               std::isfinite(rates.roll) && std::isfinite(rates.pitch) && std::isfinite(rates.yaw);
    }
};

struct AirframeParams {
    double mass = 1.5;          // kg
    double gravity = 9.81;      // m/s^2
    double half_length = 0.225; // m, centre to motor
    double inertia_roll = 0.01;   // I1, kg m^2
    double inertia_pitch = 0.01;  // I2
    double inertia_yaw = 0.02;    // I3
    double moment_factor = 0.05;  // C, m
    std::array<double, 3> translational_drag{0.0, 0.0, 0.0};  // K1..K3, kg/s
    std::array<double, 3> rotational_drag{0.0, 0.0, 0.0};     // K4..K6, kg m^2/s

    void validate() const {
        if (!(mass > 0) || !(gravity > 0) || !(half_length > 0)) {
            throw ValidationError("airframe: mass, gravity and half_length must be > 0");
        }
        if (!(inertia_roll > 0) || !(inertia_pitch > 0) || !(inertia_yaw > 0)) {
            throw ValidationError("airframe: inertias must be > 0");
        }
        if (!(moment_factor >= 0)) throw ValidationError("airframe: moment_factor must be >= 0");
        for (double k : translational_drag) {
            if (!(k >= 0)) throw ValidationError("airframe: drag coefficients must be >= 0");
        }
        for (double k : rotational_drag) {
            if (!(k >= 0)) throw ValidationError("airframe: drag coefficients must be >= 0");
        }
    }
};

/// Mass-normalised collective thrust (U1, m/s^2) and per-axis angular inputs
/// (U2 roll, U3 pitch, U4 yaw, rad/s^2).
struct ControlInputs {
    double u1 = 0.0;
    double u2 = 0.0;
    double u3 = 0.0;
    double u4 = 0.0;
};

/// Per-motor thrust in newtons, indexed 0..3 for motors 1..4.
using MotorThrusts = std::array<double, 4>;

enum class ModelVariant { kCorrected, kAsPrinted };

inline std::string_view to_string(ModelVariant v) {
    return v == ModelVariant::kCorrected ? "corrected" : "as-printed";
}

inline ModelVariant parse_variant(std::string_view s) {
    if (s == "corrected") return ModelVariant::kCorrected;
    if (s == "as-printed" || s == "as_printed") return ModelVariant::kAsPrinted;
    throw ValidationError("unknown model variant '" + std::string(s) + "'");
}

struct Waypoint {
    Eigen::Vector3d target = Eigen::Vector3d::Zero();
};

/// Body-to-world rotation used by the dynamics: Rz(yaw) * Ry(pitch) * Rx(roll).
inline Eigen::Matrix3d body_to_world(const Attitude& att) {
    return (Eigen::AngleAxisd(att.yaw, Eigen::Vector3d::UnitZ()) *
            Eigen::AngleAxisd(att.pitch, Eigen::Vector3d::UnitY()) *
            Eigen::AngleAxisd(att.roll, Eigen::Vector3d::UnitX()))
        .toRotationMatrix();
}

/// Rotation matrix in the printed composition, which places φ (roll) in the
/// outermost factor: Rz(φ) * Ry(θ) * Rx(ψ). Row 2 column 1 uses
/// sinφ·cosθ so the matrix is a proper rotation.
inline Eigen::Matrix3d rotation_matrix(const Attitude& att) {
    const double cf = std::cos(att.roll), sf = std::sin(att.roll);
    const double ct = std::cos(att.pitch), st = std::sin(att.pitch);
    const double cp = std::cos(att.yaw), sp = std::sin(att.yaw);
    Eigen::Matrix3d r;
    r << cf * ct, cf * st * sp - sf * cp, cf * st * cp + sf * sp,
         sf * ct, sf * st * sp + cf * cp, sf * st * cp - cf * sp,
         -st,     ct * sp,                ct * cp;
    return r;
}

inline ControlInputs control_inputs(const MotorThrusts& th, const AirframeParams& p, ModelVariant v) {
    const auto& [t1, t2, t3, t4] = th;
    const double l = p.half_length;
    ControlInputs u;
    u.u1 = (t1 + t2 + t3 + t4) / p.mass;
    if (v == ModelVariant::kAsPrinted) {
        u.u2 = l * (-t1 - t2 + t3 + t4) / p.inertia_roll;
        u.u3 = l * (-t1 + t2 + t3 - t4) / p.inertia_pitch;
        u.u4 = l * (t1 + t2 + t3 + t4) / p.inertia_yaw;
    } else {
        // left pair minus right pair rolls right side down; rear minus front
        // pitches nose down; CW rotors (1,3) react counter-clockwise.
        u.u2 = l * (t1 - t2 - t3 + t4) / p.inertia_roll;
        u.u3 = l * (-t1 - t2 + t3 + t4) / p.inertia_pitch;
        u.u4 = p.moment_factor * (t1 - t2 + t3 - t4) / p.inertia_yaw;
    }
    return u;
}

inline Eigen::Vector3d translational_accel(const RigidBodyState& s, double u1, const AirframeParams& p,
                                           ModelVariant v) {
    const double cf = std::cos(s.attitude.roll), sf = std::sin(s.attitude.roll);
    const double ct = std::cos(s.attitude.pitch), st = std::sin(s.attitude.pitch);
    const double cp = std::cos(s.attitude.yaw), sp = std::sin(s.attitude.yaw);
    const auto& k = p.translational_drag;
    const Eigen::Vector3d& vel = s.velocity;
    Eigen::Vector3d a;
    if (v == ModelVariant::kAsPrinted) {
        a.x() = u1 * (cf * st * cp + sf * st) - k[0] * vel.x() / p.mass;
        a.y() = u1 * (sf * st * cp + cf * st) - k[1] * vel.y() / p.mass;
        a.z() = u1 * (cf * cp) - p.gravity - k[2] * vel.z() / p.mass;
    } else {
        a.x() = u1 * (cf * st * cp + sf * sp) - k[0] * vel.x() / p.mass;
        a.y() = u1 * (cf * st * sp - sf * cp) - k[1] * vel.y() / p.mass;
        a.z() = u1 * (cf * ct) - p.gravity - k[2] * vel.z() / p.mass;
    }
    return a;
}

inline EulerRates angular_accel(const RigidBodyState& s, const ControlInputs& u, const AirframeParams& p) {
    const double l = p.half_length;
    const auto& k = p.rotational_drag;
    return {
        u.u2 - l * k[0] * s.rates.roll / p.inertia_roll,
        u.u3 - l * k[1] * s.rates.pitch / p.inertia_pitch,
        u.u4 - l * k[2] * s.rates.yaw / p.inertia_yaw,
    };
}

struct BearingAngles {
    double heading = 0.0;    // φ_d, azimuth in the horizontal plane
    double elevation = 0.0;  // ψ_d, angle above the horizontal
};

inline BearingAngles desired_angles(const RigidBodyState& current, const Waypoint& wp) {
    const Eigen::Vector3d d = wp.target - current.position;
    if (d.x() == 0.0 && d.y() == 0.0 && d.z() == 0.0) {
        throw std::domain_error("desired_angles: waypoint coincides with current position");
    }
    const double horizontal = std::hypot(d.x(), d.y());
    return {std::atan2(d.y(), d.x()), std::atan2(d.z(), horizontal)};
}

// Flat state used by the integrators:
// [x y z vx vy vz roll pitch yaw roll_rate pitch_rate yaw_rate]
using StateVector = integrate::Vec<12>;

inline StateVector to_vector(const RigidBodyState& s) {
    return {s.position.x(), s.position.y(), s.position.z(),
            s.velocity.x(), s.velocity.y(), s.velocity.z(),
            s.attitude.roll, s.attitude.pitch, s.attitude.yaw,
            s.rates.roll, s.rates.pitch, s.rates.yaw};
}

inline RigidBodyState from_vector(const StateVector& v) {
    RigidBodyState s;
    s.position = {v[0], v[1], v[2]};
    s.velocity = {v[3], v[4], v[5]};
    s.attitude = {v[6], v[7], v[8]};
    s.rates = {v[9], v[10], v[11]};
    return s;
}

inline StateVector derivative(const StateVector& x, const ControlInputs& u, const AirframeParams& p,
                              ModelVariant v) {
    const RigidBodyState s = from_vector(x);
    const Eigen::Vector3d a = translational_accel(s, u.u1, p, v);
    const EulerRates w = angular_accel(s, u, p);
    return {x[3], x[4], x[5], a.x(), a.y(), a.z(), x[9], x[10], x[11], w.roll, w.pitch, w.yaw};
}

enum class Integrator { kRk4, kEuler };

constexpr double kMaxStep = 0.05;

/// Advances the state by dt with thrusts held constant over the step.
inline RigidBodyState step(const RigidBodyState& s, const MotorThrusts& th, const AirframeParams& p,
                           ModelVariant v, double dt, Integrator method = Integrator::kRk4) {
    if (!(dt > 0.0) || dt > kMaxStep) throw ValidationError("step: dt must be in (0, 0.05] s");
    if (!s.is_finite()) throw ValidationError("step: non-finite state");
    for (double t : th) {
        if (!std::isfinite(t)) throw ValidationError("step: non-finite thrust");
    }
    const ControlInputs u = control_inputs(th, p, v);
    auto f = [&](const StateVector& x) { return derivative(x, u, p, v); };
    const StateVector x0 = to_vector(s);
    return from_vector(method == Integrator::kRk4 ? integrate::rk4(f, x0, dt) : integrate::euler(f, x0, dt));
}

}  // namespace quadsim
