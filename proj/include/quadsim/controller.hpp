#pragma once

// KK2-style flight controller: arming state machine, PI stabilisation
// (rate loop, optional self-level cascade), X-quad mixer and the misc.
// settings (stick scaling, servo filter, height dampening, min throttle).

#include <algorithm>
#include <array>
#include <cmath>
#include <string_view>

#include <Eigen/Dense>

#include "quadsim/controller_config.hpp"
#include "quadsim/dynamics.hpp"
#include "quadsim/propulsion.hpp"
#include "quadsim/radio.hpp"

namespace quadsim {

// Physical gain per 100 menu units.
constexpr double kRateP100 = 0.04;       // throttle fraction per rad/s
constexpr double kRateI100 = 0.08;       // throttle fraction per rad
constexpr double kSelfLevelP100 = 10.0;  // rad/s per rad
constexpr double kSelfLevelI100 = 2.0;   // rad/s per rad*s

constexpr double kMaxAngleCmd = 0.5235987755982988;  // 30 deg at full stick
constexpr double kMaxRateCmd = 3.5;                  // rad/s at full stick
constexpr double kAxisAuthority = 1.0;               // mixer input limit
constexpr double kHeightDampGain = 0.1;              // throttle fraction per m/s^2 at setting 100
constexpr double kGestureHoldS = 1.0;
constexpr double kAutoDisarmS = 600.0;
constexpr double kNeutralBand = 5.0;
constexpr double kComplementaryAlpha = 0.98;

enum class ArmMode { kSafe, kArmed };

enum class FlightMode { kSafe, kRate, kSelfLevel };

inline std::string_view to_string(FlightMode m) {
    switch (m) {
        case FlightMode::kRate: return "rate";
        case FlightMode::kSelfLevel: return "selflevel";
        default: return "safe";
    }
}

struct ArmState {
    ArmMode mode = ArmMode::kSafe;
    bool self_level_on = false;
    double hold_timer = 0.0;        // s the current gesture has been held
    double inactivity_timer = 0.0;  // s armed with sticks neutral
    ArmZone gesture = ArmZone::kSafeZone;
    bool gesture_consumed = false;  // current hold already acted on
};

struct SensorReading {
    Eigen::Vector3d gyro = Eigen::Vector3d::Zero();   // roll, pitch, yaw rate, rad/s
    Eigen::Vector3d accel = Eigen::Vector3d::Zero();  // body specific force, m/s^2

    bool is_finite() const { return gyro.allFinite() && accel.allFinite(); }
};

/// ESC pulses for motors 1..4, microseconds.
using MotorOutputs = std::array<double, 4>;

inline bool sticks_neutral(const ChannelSet& ch) {
    return throttle_idle(ch.throttle) && std::abs(ch.roll) <= kNeutralBand && std::abs(ch.pitch) <= kNeutralBand &&
           std::abs(ch.yaw) <= kNeutralBand;
}

/// Throttle-idle + full rudder gestures. Holding right (left) aileron while
/// the gesture completes turns self-level on (off) in STICK mode.
inline ArmState arm_step(const ArmState& state, const ChannelSet& ch, const ControllerConfig& cfg, double dt) {
    ArmState next = state;
    const ArmZone zone = arm_zone(ch);
    if (zone != ArmZone::kSafeZone && zone == state.gesture) {
        next.hold_timer = state.hold_timer + dt;
    } else {
        next.hold_timer = zone == ArmZone::kSafeZone ? 0.0 : dt;
        next.gesture_consumed = false;
    }
    next.gesture = zone;

    if (zone != ArmZone::kSafeZone && !next.gesture_consumed && next.hold_timer >= kGestureHoldS - 1e-9) {
        next.gesture_consumed = true;
        next.mode = zone == ArmZone::kArm ? ArmMode::kArmed : ArmMode::kSafe;
        next.inactivity_timer = 0.0;
        if (cfg.self_level_source == SelfLevelSource::kStick) {
            if (ch.roll >= kGestureThreshold) next.self_level_on = true;
            if (ch.roll <= -kGestureThreshold) next.self_level_on = false;
        }
    }

    if (cfg.self_level_source == SelfLevelSource::kAux) next.self_level_on = ch.aux1;

    if (next.mode == ArmMode::kArmed && cfg.auto_disarm && sticks_neutral(ch)) {
        next.inactivity_timer += dt;
        if (next.inactivity_timer >= kAutoDisarmS - 1e-9) {
            next.mode = ArmMode::kSafe;
            next.inactivity_timer = 0.0;
        }
    } else {
        next.inactivity_timer = 0.0;
    }
    return next;
}

struct PiGains {
    double kp = 0.0;
    double ki = 0.0;
    double integral_limit = 0.0;
};

inline PiGains rate_gains(int p, int i, double limit) {
    return {p / 100.0 * kRateP100, i / 100.0 * kRateI100, limit};
}

inline PiGains self_level_gains(int p, int i, double limit) {
    return {p / 100.0 * kSelfLevelP100, i / 100.0 * kSelfLevelI100, limit};
}

struct PiResult {
    double output = 0.0;
    double integrator = 0.0;
};

inline PiResult pi_step(double setpoint, double measured, const PiGains& g, double integrator, double dt) {
    const double error = setpoint - measured;
    const double integ = std::clamp(integrator + error * dt, -g.integral_limit, g.integral_limit);
    return {g.kp * error + g.ki * integ, integ};
}

/// Roll/pitch from the direction of the measured specific force.
inline Attitude accel_attitude(const Eigen::Vector3d& f) {
    return {std::atan2(f.y(), f.z()), std::atan2(-f.x(), std::hypot(f.y(), f.z())), 0.0};
}

/// Complementary filter: integrated gyro blended with the accelerometer's
/// gravity direction. Yaw is gyro-only.
inline Attitude attitude_estimate(const Attitude& prev, const SensorReading& s, double dt,
                                  double alpha = kComplementaryAlpha) {
    Attitude est;
    est.yaw = prev.yaw + s.gyro.z() * dt;
    est.roll = prev.roll + s.gyro.x() * dt;
    est.pitch = prev.pitch + s.gyro.y() * dt;
    if (alpha < 1.0) {
        const Attitude acc = accel_attitude(s.accel);
        est.roll = alpha * est.roll + (1 - alpha) * acc.roll;
        est.pitch = alpha * est.pitch + (1 - alpha) * acc.pitch;
    }
    return est;
}

/// X-quad mix before clamping. Pitch input raises the front pair (nose up);
/// yaw input raises the CCW pair (2,4), turning the craft clockwise.
inline std::array<double, 4> mix_raw(double throttle, double roll, double pitch, double yaw) {
    return {throttle + roll + pitch - yaw, throttle - roll + pitch + yaw, throttle - roll - pitch - yaw,
            throttle + roll - pitch + yaw};
}

inline std::array<double, 4> mixer(double throttle, double roll, double pitch, double yaw) {
    auto m = mix_raw(throttle, roll, pitch, yaw);
    for (double& v : m) v = std::clamp(v, 0.0, 1.0);
    return m;
}

/// First-order low-pass, time constant filter_ms; 0 passes through.
inline double servo_filter(double prev_out, double input, double dt, double filter_ms) {
    if (filter_ms <= 0.0) return input;
    const double tau = filter_ms / 1000.0;
    return prev_out + (1.0 - std::exp(-dt / tau)) * (input - prev_out);
}

inline double height_dampening(double accel_z, const ControllerConfig& cfg, double gravity = 9.81) {
    if (cfg.height_damp == 0) return 0.0;
    const double limit = cfg.height_damp_limit / 100.0;
    return std::clamp(-(cfg.height_damp / 100.0) * kHeightDampGain * (accel_z - gravity), -limit, limit);
}

inline double stick_scale(double value, int scaling) { return value * scaling / 100.0; }

struct ControllerState {
    ArmState arm;
    Attitude estimate;
    std::array<double, 3> rate_integrator{0, 0, 0};   // roll, pitch, yaw
    std::array<double, 2> level_integrator{0, 0};     // roll, pitch
    ChannelSet filtered;                              // servo-filtered sticks
    bool filter_primed = false;
    bool sensor_fault = false;
};

inline FlightMode flight_mode(const ControllerState& s) {
    if (s.arm.mode == ArmMode::kSafe) return FlightMode::kSafe;
    return s.arm.self_level_on ? FlightMode::kSelfLevel : FlightMode::kRate;
}

struct ControllerOutput {
    ControllerState state;
    MotorOutputs motors{kPulseMinUs, kPulseMinUs, kPulseMinUs, kPulseMinUs};
};

/// One pass of the control loop.
inline ControllerOutput controller_update(const ControllerState& state, const ControllerConfig& cfg,
                                          const ChannelSet& ch, const SensorReading& sensors, double dt,
                                          double gravity = 9.81) {
    ControllerOutput out;
    ControllerState& s = out.state;
    s = state;

    if (!sensors.is_finite()) {
        s.arm.mode = ArmMode::kSafe;
        s.arm.inactivity_timer = 0.0;
        s.sensor_fault = true;
        s.rate_integrator = {0, 0, 0};
        s.level_integrator = {0, 0};
        return out;
    }
    s.sensor_fault = false;

    s.arm = arm_step(state.arm, ch, cfg, dt);
    s.estimate = attitude_estimate(state.estimate, sensors, dt);

    if (!s.filter_primed) {
        s.filtered = ch;
        s.filter_primed = true;
    } else {
        const double f = cfg.servo_filter_ms;
        s.filtered.throttle = servo_filter(state.filtered.throttle, ch.throttle, dt, f);
        s.filtered.roll = servo_filter(state.filtered.roll, ch.roll, dt, f);
        s.filtered.pitch = servo_filter(state.filtered.pitch, ch.pitch, dt, f);
        s.filtered.yaw = servo_filter(state.filtered.yaw, ch.yaw, dt, f);
        s.filtered.aux1 = ch.aux1;
    }

    if (s.arm.mode == ArmMode::kSafe || throttle_idle(ch.throttle)) {
        s.rate_integrator = {0, 0, 0};
        s.level_integrator = {0, 0};
        return out;
    }

    const ChannelSet& st = s.filtered;
    const double throttle = std::clamp(stick_scale(st.throttle, cfg.stick_scaling_throttle) / 100.0, 0.0, 1.0);
    const double roll_stick = stick_scale(st.roll, cfg.stick_scaling_roll) / 100.0;
    const double pitch_stick = stick_scale(st.pitch, cfg.stick_scaling_pitch) / 100.0;
    const double yaw_stick = stick_scale(st.yaw, cfg.stick_scaling_yaw) / 100.0;

    double roll_rate_sp = roll_stick * kMaxRateCmd;
    double pitch_rate_sp = pitch_stick * kMaxRateCmd;
    // right rudder turns the nose clockwise, i.e. negative yaw rate
    const double yaw_rate_sp = -yaw_stick * kMaxRateCmd;

    if (s.arm.self_level_on) {
        const PiGains lg = self_level_gains(cfg.self_level_p, cfg.self_level_i, cfg.self_level_i_limit);
        const PiResult r = pi_step(roll_stick * kMaxAngleCmd, s.estimate.roll, lg, s.level_integrator[0], dt);
        const PiResult p = pi_step(pitch_stick * kMaxAngleCmd, s.estimate.pitch, lg, s.level_integrator[1], dt);
        s.level_integrator = {r.integrator, p.integrator};
        roll_rate_sp = std::clamp(r.output, -kMaxRateCmd, kMaxRateCmd);
        pitch_rate_sp = std::clamp(p.output, -kMaxRateCmd, kMaxRateCmd);
    } else {
        s.level_integrator = {0, 0};
    }

    const PiResult r = pi_step(roll_rate_sp, sensors.gyro.x(),
                               rate_gains(cfg.roll_p, cfg.roll_i, cfg.roll_i_limit), s.rate_integrator[0], dt);
    const PiResult p = pi_step(pitch_rate_sp, sensors.gyro.y(),
                               rate_gains(cfg.pitch_p, cfg.pitch_i, cfg.pitch_i_limit), s.rate_integrator[1], dt);
    const PiResult y = pi_step(yaw_rate_sp, sensors.gyro.z(),
                               rate_gains(cfg.yaw_p, cfg.yaw_i, cfg.yaw_i_limit), s.rate_integrator[2], dt);
    s.rate_integrator = {r.integrator, p.integrator, y.integrator};

    const double collective =
        std::clamp(throttle + height_dampening(sensors.accel.z(), cfg, gravity), 0.0, 1.0);
    // Mixer axes: pitch input is nose-up, yaw input is clockwise.
    const auto mix = mixer(collective, std::clamp(r.output, -kAxisAuthority, kAxisAuthority),
                           -std::clamp(p.output, -kAxisAuthority, kAxisAuthority),
                           -std::clamp(y.output, -kAxisAuthority, kAxisAuthority));
    const double floor = cfg.min_throttle / 100.0;
    for (std::size_t i = 0; i < 4; ++i) {
        out.motors[i] = throttle_to_pwm(std::max(mix[i], floor));
    }
    return out;
}

}  // namespace quadsim
