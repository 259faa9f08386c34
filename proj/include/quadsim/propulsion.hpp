#pragma once

// Motor/ESC thrust model, LiPo pack discharge and the low-voltage alarm.

#include <algorithm>
#include <cmath>

#include "quadsim/errors.hpp"

namespace quadsim {

constexpr double kPulseMinUs = 1000.0;
constexpr double kPulseMaxUs = 2000.0;
constexpr double kBrownoutVoltage = 7.5;

struct MotorSpec {
    double kv = 1000.0;              // rpm per volt
    double max_thrust = 8.0;         // N at nominal voltage, full throttle
    double nominal_voltage = 11.1;   // V

    void validate() const {
        if (!(kv > 0) || !(max_thrust > 0) || !(nominal_voltage > 0)) {
            throw ValidationError("motor: kv, max_thrust and nominal_voltage must be > 0");
        }
    }
};

/// ESC command pulse to throttle fraction, clamped to [0, 1].
inline double pwm_to_throttle(double pulse_us) {
    return std::clamp((pulse_us - kPulseMinUs) / (kPulseMaxUs - kPulseMinUs), 0.0, 1.0);
}

inline double throttle_to_pwm(double throttle) {
    return kPulseMinUs + std::clamp(throttle, 0.0, 1.0) * (kPulseMaxUs - kPulseMinUs);
}

/// Static thrust: quadratic in throttle and in supply voltage.
inline double throttle_to_thrust(double throttle, double voltage, const MotorSpec& spec) {
    const double t = std::clamp(throttle, 0.0, 1.0);
    const double v = std::max(voltage, 0.0) / spec.nominal_voltage;
    return spec.max_thrust * t * t * v * v;
}

/// Rotor speed proxy for vibration modelling.
inline double motor_rpm(double throttle, double voltage, const MotorSpec& spec) {
    return spec.kv * std::max(voltage, 0.0) * std::clamp(throttle, 0.0, 1.0);
}

inline double required_current(double power_w, double voltage_v) {
    if (!(voltage_v > 0)) throw ValidationError("required_current: voltage must be > 0");
    return power_w / voltage_v;
}

/// Peukert sizing, C = T * I^k / 60 with T in minutes; result in Ah.
inline double peukert_capacity(double duration_min, double current_a, double k) {
    return duration_min * std::pow(current_a, k) / 60.0;
}

struct BatteryState {
    int cells = 3;
    double capacity = 3.7;              // Ah
    double remaining = 3.7;             // Ah
    double peukert_k = 1.0;
    double voltage = 12.6;              // terminal, V
    double internal_resistance = 0.02;  // ohm

    double state_of_charge() const { return capacity > 0 ? remaining / capacity : 0.0; }

    void validate() const {
        if (cells < 1) throw ValidationError("battery: cells must be >= 1");
        if (!(capacity > 0)) throw ValidationError("battery: capacity must be > 0");
        if (!(remaining >= 0) || remaining > capacity) {
            throw ValidationError("battery: remaining must lie in [0, capacity]");
        }
        if (!(peukert_k >= 1)) throw ValidationError("battery: peukert_k must be >= 1");
        if (!(voltage >= 0)) throw ValidationError("battery: voltage must be >= 0");
        if (!(internal_resistance >= 0)) throw ValidationError("battery: internal_resistance must be >= 0");
    }
};

/// Open-circuit voltage, piecewise linear per cell:
/// 4.2 V full, 3.7 V at half charge, 3.0 V empty.
inline double open_circuit_voltage(double soc, int cells) {
    const double s = std::clamp(soc, 0.0, 1.0);
    const double per_cell = s >= 0.5 ? 3.7 + (s - 0.5) / 0.5 * (4.2 - 3.7)
                                     : 3.0 + s / 0.5 * (3.7 - 3.0);
    return per_cell * cells;
}

inline BatteryState make_battery(int cells, double capacity_ah, double remaining_ah, double peukert_k = 1.0,
                                 double internal_resistance = 0.02) {
    BatteryState b;
    b.cells = cells;
    b.capacity = capacity_ah;
    b.remaining = remaining_ah;
    b.peukert_k = peukert_k;
    b.internal_resistance = internal_resistance;
    b.voltage = open_circuit_voltage(b.state_of_charge(), cells);
    b.validate();
    return b;
}

inline BatteryState battery_step(const BatteryState& b, double current_a, double dt) {
    if (!(current_a >= 0)) throw ValidationError("battery_step: current must be >= 0");
    if (!(dt > 0)) throw ValidationError("battery_step: dt must be > 0");
    if (current_a == 0.0) return b;
    BatteryState next = b;
    next.remaining = std::max(0.0, b.remaining - std::pow(current_a, b.peukert_k) * dt / 3600.0);
    next.voltage = std::max(0.0, open_circuit_voltage(next.state_of_charge(), b.cells) -
                                     current_a * b.internal_resistance);
    return next;
}

/// Setpoint is in tenths of a volt; zero disables the alarm.
inline bool low_voltage_alarm(double voltage, int setpoint_tenths) {
    return setpoint_tenths > 0 && voltage <= setpoint_tenths / 10.0;
}

constexpr double kBeepIntervalFar = 2.0;
constexpr double kBeepIntervalAtSetpoint = 0.2;

/// Time between alarm beeps: 2.0 s at start_voltage (conventionally one volt
/// above the setpoint), shrinking linearly to 0.2 s at the setpoint.
inline double alarm_beep_interval(double voltage, double setpoint, double start_voltage) {
    if (!(start_voltage > setpoint)) {
        throw ValidationError("alarm_beep_interval: start_voltage must exceed setpoint");
    }
    const double frac = std::clamp((voltage - setpoint) / (start_voltage - setpoint), 0.0, 1.0);
    return kBeepIntervalAtSetpoint + frac * (kBeepIntervalFar - kBeepIntervalAtSetpoint);
}

}  // namespace quadsim
