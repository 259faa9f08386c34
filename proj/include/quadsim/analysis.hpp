#pragma once

// Post-flight checks on telemetry logs and constant-draw endurance.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "quadsim/controller_config.hpp"
#include "quadsim/dynamics.hpp"
#include "quadsim/propulsion.hpp"
#include "quadsim/telemetry.hpp"

namespace quadsim {

enum class MotionPrimitive { kTakeoff, kLand, kForward, kBackward, kLeft, kRight, kYawCw, kYawCcw, kHover };

inline std::string_view to_string(MotionPrimitive p) {
    switch (p) {
        case MotionPrimitive::kTakeoff: return "TAKEOFF";
        case MotionPrimitive::kLand: return "LAND";
        case MotionPrimitive::kForward: return "FORWARD";
        case MotionPrimitive::kBackward: return "BACKWARD";
        case MotionPrimitive::kLeft: return "LEFT";
        case MotionPrimitive::kRight: return "RIGHT";
        case MotionPrimitive::kYawCw: return "YAW_CW";
        case MotionPrimitive::kYawCcw: return "YAW_CCW";
        default: return "HOVER";
    }
}

struct PrimitiveThresholds {
    double min_vertical_change = 0.5;   // m, takeoff / land
    double min_translation = 0.2;       // m, forward/back/left/right
    double min_heading_change = 0.1;    // rad
    double max_hover_drift = 0.5;       // m, horizontal
    double max_hover_climb = 0.5;       // m, vertical
    double max_hover_tilt = deg_to_rad(2.0);
};

struct PrimitiveResult {
    bool passed = false;
    std::map<std::string, double> metrics;
    std::string violated;  // metric name when failed
};

/// Evaluates records with t in [t_begin, t_end]. Throws when the window
/// holds fewer than two records.
inline PrimitiveResult motion_primitive_check(const FlightLog& log, MotionPrimitive primitive, double t_begin = -1e300,
                                              double t_end = 1e300, const PrimitiveThresholds& th = {}) {
    std::vector<const TelemetryRecord*> w;
    for (const auto& r : log.records) {
        if (r.t >= t_begin && r.t <= t_end) w.push_back(&r);
    }
    if (w.size() < 2) throw ValidationError("motion_primitive_check: empty window");
    const TelemetryRecord& a = *w.front();
    const TelemetryRecord& b = *w.back();

    PrimitiveResult res;
    auto& m = res.metrics;
    const double dx = b.position[0] - a.position[0];
    const double dy = b.position[1] - a.position[1];
    const double dz = b.position[2] - a.position[2];
    const double dyaw = b.attitude[2] - a.attitude[2];
    double mean_roll = 0, mean_pitch = 0, max_tilt = 0, max_drift = 0, max_climb = 0;
    for (const auto* r : w) {
        mean_roll += r->attitude[0];
        mean_pitch += r->attitude[1];
        max_tilt = std::max({max_tilt, std::abs(r->attitude[0]), std::abs(r->attitude[1])});
        max_drift = std::max(max_drift, std::hypot(r->position[0] - a.position[0], r->position[1] - a.position[1]));
        max_climb = std::max(max_climb, std::abs(r->position[2] - a.position[2]));
    }
    mean_roll /= static_cast<double>(w.size());
    mean_pitch /= static_cast<double>(w.size());

    auto require = [&](const char* name, double value, bool ok) {
        m[name] = value;
        if (!ok && res.violated.empty()) res.violated = name;
    };

    switch (primitive) {
        case MotionPrimitive::kTakeoff:
            require("dz_m", dz, dz >= th.min_vertical_change);
            break;
        case MotionPrimitive::kLand:
            require("dz_m", dz, dz <= -th.min_vertical_change);
            break;
        case MotionPrimitive::kForward:
            require("mean_pitch_rad", mean_pitch, mean_pitch > 0);
            require("dx_m", dx, dx >= th.min_translation);
            break;
        case MotionPrimitive::kBackward:
            require("mean_pitch_rad", mean_pitch, mean_pitch < 0);
            require("dx_m", dx, dx <= -th.min_translation);
            break;
        case MotionPrimitive::kRight:  // right side down, +y is left
            require("mean_roll_rad", mean_roll, mean_roll > 0);
            require("dy_m", dy, dy <= -th.min_translation);
            break;
        case MotionPrimitive::kLeft:
            require("mean_roll_rad", mean_roll, mean_roll < 0);
            require("dy_m", dy, dy >= th.min_translation);
            break;
        case MotionPrimitive::kYawCw:
            require("dyaw_rad", dyaw, dyaw <= -th.min_heading_change);
            break;
        case MotionPrimitive::kYawCcw:
            require("dyaw_rad", dyaw, dyaw >= th.min_heading_change);
            break;
        case MotionPrimitive::kHover:
            require("max_horizontal_drift_m", max_drift, max_drift < th.max_hover_drift);
            require("max_vertical_drift_m", max_climb, max_climb < th.max_hover_climb);
            require("max_tilt_rad", max_tilt, max_tilt < th.max_hover_tilt);
            break;
    }
    res.passed = res.violated.empty();
    return res;
}

struct EnduranceResult {
    std::optional<double> alarm_min;  // terminal voltage reaches the alarm setpoint
    double depletion_min = 0.0;       // remaining charge reaches zero
    double brownout_min = 0.0;        // first of: terminal <= 7.5 V, depletion
};

/// Discharges a full pack at constant current until it is empty.
inline EnduranceResult endurance_sim(double capacity_ah, double current_a, double k = 1.0,
                                     int alarm_tenths = ControllerConfig{}.alarm_tenths, double dt = 0.1,
                                     int cells = 3, double internal_resistance = 0.02) {
    if (!(capacity_ah > 0)) throw ValidationError("endurance: capacity must be > 0");
    if (!(current_a > 0)) throw ValidationError("endurance: current must be > 0");
    if (!(k >= 1)) throw ValidationError("endurance: Peukert exponent must be >= 1");
    BatteryState b = make_battery(cells, capacity_ah, capacity_ah, k, internal_resistance);
    EnduranceResult res;
    std::optional<double> brownout;
    std::size_t n = 0;
    while (b.remaining > 0.0) {
        b = battery_step(b, current_a, dt);
        ++n;
        const double t = static_cast<double>(n) * dt;
        if (!res.alarm_min && low_voltage_alarm(b.voltage, alarm_tenths)) res.alarm_min = t / 60.0;
        if (!brownout && b.voltage <= kBrownoutVoltage) brownout = t / 60.0;
    }
    res.depletion_min = static_cast<double>(n) * dt / 60.0;
    res.brownout_min = brownout.value_or(res.depletion_min);
    return res;
}

}  // namespace quadsim
