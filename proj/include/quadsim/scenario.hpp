#pragma once

// Scenario description and its JSON file form. See docs/scenario.md for the
// schema. Unknown keys are rejected so typos do not silently fall back to
// defaults.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "quadsim/channel_trace.hpp"
#include "quadsim/controller_config.hpp"
#include "quadsim/dynamics.hpp"
#include "quadsim/propulsion.hpp"
#include "quadsim/sensors.hpp"

namespace quadsim {

/// Simulated pilot holding altitude with the throttle stick. Active while
/// the craft is armed and the scripted throttle is above idle.
struct AltitudePilot {
    double target_altitude = 2.0;     // m
    double climb_rate = 0.5;          // m/s, for both climb and descent
    std::optional<double> descend_at; // s, start of the landing descent
    double kp = 10.0;                 // stick units per m
    double kd = 10.0;                 // stick units per m/s
    double ki = 0.3;                  // stick units per m*s

    void validate() const {
        if (!(target_altitude > 0) || !(climb_rate > 0)) {
            throw ValidationError("input.pilot: target_altitude_m and climb_rate_mps must be > 0");
        }
        if (!(kp >= 0) || !(kd >= 0) || !(ki >= 0)) throw ValidationError("input.pilot: gains must be >= 0");
    }
};

enum class InputSource { kTrace, kLive };

struct InputSpec {
    InputSource source = InputSource::kTrace;
    ChannelTrace trace;
    std::optional<AltitudePilot> pilot;
};

struct Scenario {
    AirframeParams airframe;
    MotorSpec motor;
    BatteryState battery = make_battery(3, 3.7, 3.7);
    ControllerConfig controller;
    ModelVariant variant = ModelVariant::kCorrected;
    double dt = 0.002;
    double duration = 10.0;
    std::uint64_t seed = 1;
    SensorNoise sensors;
    int decimation = 10;
    InputSpec input;

    void validate() const {
        airframe.validate();
        motor.validate();
        battery.validate();
        sensors.validate();
        if (!(dt > 0) || dt > kMaxStep) throw ValidationError("dt_s must be in (0, 0.05]");
        if (!(duration > 0)) throw ValidationError("duration_s must be > 0");
        if (decimation < 1) throw ValidationError("decimation must be >= 1");
        if (input.pilot) input.pilot->validate();
    }
};

namespace scenario_detail {

using nlohmann::json;

inline void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ValidationError(where + ": expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!ok.count(it.key())) throw ValidationError(where + ": unknown key '" + it.key() + "'");
    }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError(where + "." + key + ": wrong type");
    }
}

inline void read3(const json& j, const char* key, std::array<double, 3>& out, const std::string& where) {
    if (!j.contains(key)) return;
    const json& a = j.at(key);
    if (!a.is_array() || a.size() != 3) throw ValidationError(where + "." + key + ": expected 3 numbers");
    for (std::size_t i = 0; i < 3; ++i) {
        if (!a[i].is_number()) throw ValidationError(where + "." + key + ": expected 3 numbers");
        out[i] = a[i].get<double>();
    }
}

inline std::string setting_text(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "yes" : "no";
    if (v.is_number()) return v.dump();
    throw ValidationError("controller setting values must be strings, numbers or booleans");
}

}  // namespace scenario_detail

/// Parses a scenario document. Relative file references resolve against
/// `base_dir`.
inline Scenario parse_scenario(const nlohmann::json& j, const std::filesystem::path& base_dir = ".") {
    using namespace scenario_detail;
    Scenario sc;
    check_keys(j, "scenario",
               {"airframe", "motor", "battery", "controller", "variant", "dt_s", "duration_s", "seed", "sensors",
                "input", "decimation", "description"});

    if (j.contains("airframe")) {
        const json& a = j["airframe"];
        check_keys(a, "airframe", {"mass_kg", "gravity_mps2", "half_length_m", "inertia_kgm2", "moment_factor_m",
                                   "translational_drag", "rotational_drag"});
        auto& p = sc.airframe;
        read(a, "mass_kg", p.mass, "airframe");
        read(a, "gravity_mps2", p.gravity, "airframe");
        read(a, "half_length_m", p.half_length, "airframe");
        std::array<double, 3> inertia{p.inertia_roll, p.inertia_pitch, p.inertia_yaw};
        read3(a, "inertia_kgm2", inertia, "airframe");
        p.inertia_roll = inertia[0];
        p.inertia_pitch = inertia[1];
        p.inertia_yaw = inertia[2];
        read(a, "moment_factor_m", p.moment_factor, "airframe");
        read3(a, "translational_drag", p.translational_drag, "airframe");
        read3(a, "rotational_drag", p.rotational_drag, "airframe");
    }
    if (j.contains("motor")) {
        const json& m = j["motor"];
        check_keys(m, "motor", {"kv", "max_thrust_n", "nominal_voltage_v"});
        read(m, "kv", sc.motor.kv, "motor");
        read(m, "max_thrust_n", sc.motor.max_thrust, "motor");
        read(m, "nominal_voltage_v", sc.motor.nominal_voltage, "motor");
    }
    if (j.contains("battery")) {
        const json& b = j["battery"];
        check_keys(b, "battery",
                   {"cells", "capacity_ah", "remaining_ah", "peukert_k", "internal_resistance_ohm", "voltage_v"});
        int cells = 3;
        double capacity = 3.7, k = 1.0, r = 0.02;
        read(b, "cells", cells, "battery");
        read(b, "capacity_ah", capacity, "battery");
        double remaining = capacity;
        read(b, "remaining_ah", remaining, "battery");
        read(b, "peukert_k", k, "battery");
        read(b, "internal_resistance_ohm", r, "battery");
        sc.battery = make_battery(cells, capacity, remaining, k, r);
        read(b, "voltage_v", sc.battery.voltage, "battery");
    }
    if (j.contains("controller")) {
        const json& c = j["controller"];
        check_keys(c, "controller", {"file", "settings"});
        if (c.contains("file")) {
            sc.controller = load_controller_config((base_dir / c["file"].get<std::string>()).string());
        }
        if (c.contains("settings")) {
            const json& s = c["settings"];
            if (!s.is_object()) throw ValidationError("controller.settings: expected an object");
            for (auto it = s.begin(); it != s.end(); ++it) {
                set_config_value(sc.controller, it.key(), setting_text(it.value()));
            }
        }
    }
    if (j.contains("variant")) sc.variant = parse_variant(j["variant"].get<std::string>());
    read(j, "dt_s", sc.dt, "scenario");
    read(j, "duration_s", sc.duration, "scenario");
    read(j, "seed", sc.seed, "scenario");
    read(j, "decimation", sc.decimation, "scenario");
    if (j.contains("sensors")) {
        const json& s = j["sensors"];
        check_keys(s, "sensors", {"gyro_noise_rads", "accel_noise_mps2", "vibration_mps2"});
        read(s, "gyro_noise_rads", sc.sensors.gyro_rms, "sensors");
        read(s, "accel_noise_mps2", sc.sensors.accel_rms, "sensors");
        read(s, "vibration_mps2", sc.sensors.vibration, "sensors");
    }
    if (j.contains("input")) {
        const json& in = j["input"];
        check_keys(in, "input", {"source", "trace_file", "trace", "pilot"});
        const std::string source = in.value("source", "trace");
        if (source == "trace") {
            sc.input.source = InputSource::kTrace;
        } else if (source == "live") {
            sc.input.source = InputSource::kLive;
        } else {
            throw ValidationError("input.source must be 'trace' or 'live'");
        }
        if (in.contains("trace_file")) {
            sc.input.trace = load_channel_trace((base_dir / in["trace_file"].get<std::string>()).string());
        } else if (in.contains("trace")) {
            std::vector<TraceRow> rows;
            for (const json& r : in["trace"]) {
                if (!r.is_array() || r.size() != 6) {
                    throw ValidationError("input.trace: rows are [t_s, throttle, roll, pitch, yaw, aux1]");
                }
                rows.push_back({r[0].get<double>(), r[1].get<double>(), r[2].get<double>(), r[3].get<double>(),
                                r[4].get<double>(), r[5].get<double>() > 0});
            }
            sc.input.trace = ChannelTrace(std::move(rows));
        }
        if (in.contains("pilot")) {
            const json& p = in["pilot"];
            check_keys(p, "input.pilot",
                       {"target_altitude_m", "climb_rate_mps", "descend_at_s", "kp", "kd", "ki"});
            AltitudePilot pilot;
            read(p, "target_altitude_m", pilot.target_altitude, "input.pilot");
            read(p, "climb_rate_mps", pilot.climb_rate, "input.pilot");
            if (p.contains("descend_at_s") && !p["descend_at_s"].is_null()) {
                pilot.descend_at = p["descend_at_s"].get<double>();
            }
            read(p, "kp", pilot.kp, "input.pilot");
            read(p, "kd", pilot.kd, "input.pilot");
            read(p, "ki", pilot.ki, "input.pilot");
            sc.input.pilot = pilot;
        }
    }
    sc.validate();
    return sc;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open scenario '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("scenario '" + path + "': " + e.what());
    }
    return parse_scenario(j, std::filesystem::path(path).parent_path());
}

/// Canonical JSON form (file references resolved inline), used for the
/// scenario digest.
inline nlohmann::json scenario_to_json(const Scenario& sc) {
    nlohmann::json j;
    const auto& a = sc.airframe;
    j["airframe"] = {{"mass_kg", a.mass},
                     {"gravity_mps2", a.gravity},
                     {"half_length_m", a.half_length},
                     {"inertia_kgm2", {a.inertia_roll, a.inertia_pitch, a.inertia_yaw}},
                     {"moment_factor_m", a.moment_factor},
                     {"translational_drag", a.translational_drag},
                     {"rotational_drag", a.rotational_drag}};
    j["motor"] = {{"kv", sc.motor.kv}, {"max_thrust_n", sc.motor.max_thrust},
                  {"nominal_voltage_v", sc.motor.nominal_voltage}};
    const auto& b = sc.battery;
    j["battery"] = {{"cells", b.cells},         {"capacity_ah", b.capacity},
                    {"remaining_ah", b.remaining}, {"peukert_k", b.peukert_k},
                    {"internal_resistance_ohm", b.internal_resistance}, {"voltage_v", b.voltage}};
    nlohmann::json settings = nlohmann::json::object();
    for (const auto& key : controller_config_keys()) settings[key] = get_config_value(sc.controller, key);
    j["controller"] = {{"settings", settings}};
    j["variant"] = std::string(to_string(sc.variant));
    j["dt_s"] = sc.dt;
    j["duration_s"] = sc.duration;
    j["seed"] = sc.seed;
    j["decimation"] = sc.decimation;
    j["sensors"] = {{"gyro_noise_rads", sc.sensors.gyro_rms},
                    {"accel_noise_mps2", sc.sensors.accel_rms},
                    {"vibration_mps2", sc.sensors.vibration}};
    nlohmann::json input;
    input["source"] = sc.input.source == InputSource::kTrace ? "trace" : "live";
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : sc.input.trace.rows()) rows.push_back({r.t, r.throttle, r.roll, r.pitch, r.yaw, r.aux1 ? 1 : 0});
    input["trace"] = rows;
    if (sc.input.pilot) {
        const auto& p = *sc.input.pilot;
        input["pilot"] = {{"target_altitude_m", p.target_altitude},
                          {"climb_rate_mps", p.climb_rate},
                          {"descend_at_s", p.descend_at ? nlohmann::json(*p.descend_at) : nlohmann::json()},
                          {"kp", p.kp},
                          {"kd", p.kd},
                          {"ki", p.ki}};
    }
    j["input"] = input;
    return j;
}

/// FNV-1a 64 over the canonical JSON dump.
inline std::uint64_t scenario_digest(const Scenario& sc) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : scenario_to_json(sc).dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace quadsim
