#pragma once

// Live link state machine, independent of the transport. The server feeds it
// connection changes and text frames and ships whatever it returns; the sim
// thread calls advance(). Callers serialize access (one mutex is enough), so
// commands always land between two simulation steps.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "quadsim/simulation.hpp"

namespace quadsim {

constexpr double kFailsafeTimeoutS = 0.5;
constexpr double kGestureShortcutS = kGestureHoldS + 0.2;

using ClientId = std::uint64_t;

struct Outgoing {
    std::optional<ClientId> to;  // empty: every connected client
    std::string text;
};

/// Telemetry record as a live-link JSON object.
inline nlohmann::json telemetry_json(const TelemetryRecord& r) {
    return {{"type", "telemetry"},
            {"t_s", r.t},
            {"x_m", r.position[0]},
            {"y_m", r.position[1]},
            {"z_m", r.position[2]},
            {"roll_rad", r.attitude[0]},
            {"pitch_rad", r.attitude[1]},
            {"yaw_rad", r.attitude[2]},
            {"p_rads", r.rates[0]},
            {"q_rads", r.rates[1]},
            {"r_rads", r.rates[2]},
            {"thr1_n", r.thrust[0]},
            {"thr2_n", r.thrust[1]},
            {"thr3_n", r.thrust[2]},
            {"thr4_n", r.thrust[3]},
            {"vbatt_v", r.vbatt},
            {"ibatt_a", r.ibatt},
            {"remaining_ah", r.remaining},
            {"armed", r.armed},
            {"mode", std::string(to_string(r.mode))}};
}

inline std::string error_message(std::string_view message, std::string_view field) {
    return nlohmann::json{{"type", "error"}, {"message", message}, {"field", field}}.dump();
}

class LiveSession {
public:
    explicit LiveSession(Scenario sc) : sim_(std::move(sc)) {}

    const Simulation& simulation() const { return sim_; }
    double time() const { return sim_.time(); }
    std::optional<ClientId> authority() const { return authority_; }
    bool failsafe() const { return !authority_ || sim_.time() - last_sticks_ > kFailsafeTimeoutS + 1e-9; }

    /// Sticks the controller sees on the next step.
    ChannelSet effective_sticks() const {
        if (gesture_until_ && sim_.time() < *gesture_until_) return gesture_;
        if (failsafe()) return {};  // neutral, throttle idle
        return sticks_;
    }

    std::vector<Outgoing> connect(ClientId id) {
        clients_.push_back(id);
        const bool granted = !authority_;
        if (granted) grant(id);
        auto e = event("authority");
        e["granted"] = granted;
        return {{id, e.dump()}};
    }

    std::vector<Outgoing> disconnect(ClientId id) {
        std::erase(clients_, id);
        if (authority_ == id) {
            authority_.reset();
            gesture_until_.reset();
        }
        return {};
    }

    /// One text frame from a client. Returns replies; the command itself
    /// takes effect on the next step.
    std::vector<Outgoing> handle(ClientId id, std::string_view text) {
        nlohmann::json msg = nlohmann::json::parse(text, nullptr, false);
        if (msg.is_discarded() || !msg.is_object()) return {{id, error_message("message is not a JSON object", "")}};
        if (!msg.contains("type") || !msg["type"].is_string()) return {{id, error_message("missing type", "type")}};
        const std::string type = msg["type"].get<std::string>();
        try {
            if (type == "config_get") return {{id, config_reply(msg)}};
            if (type == "sticks" || type == "set_gains" || type == "config_set" || type == "arm" || type == "disarm") {
                if (authority_ != id) return {{id, error_message("read-only client: command authority is held by another client", "authority")}};
                if (type == "sticks") return sticks(msg);
                if (type == "set_gains") return set_gains(id, msg);
                if (type == "config_set") {
                    const std::string key = string_field(msg, "key");
                    if (!msg.contains("value")) throw FieldError("missing value", "value");
                    const auto& v = msg["value"];
                    std::string text_value = v.is_string() ? v.get<std::string>() : v.dump();
                    try {
                        set_config_value(sim_.config(), key, text_value);
                    } catch (const ValidationError& e) {
                        throw FieldError(e.what(), "value");
                    }
                    return {{id, config_reply({{"key", key}})}};
                }
                return gesture(type == "arm", msg);
            }
            return {{id, error_message("unknown message type '" + type + "'", "type")}};
        } catch (const FieldError& e) {
            return {{id, error_message(e.what(), e.field)}};
        }
    }

    /// Runs n steps with the effective sticks; returns the events raised.
    std::vector<Outgoing> advance(std::size_t n = 1) {
        std::vector<Outgoing> out;
        for (std::size_t i = 0; i < n; ++i) {
            sim_.step(effective_sticks());
            const StepEvents& ev = sim_.events();
            if (ev.armed) out.push_back({std::nullopt, event("armed").dump()});
            if (ev.disarmed) out.push_back({std::nullopt, event("disarmed").dump()});
            if (ev.brownout) out.push_back({std::nullopt, event("brownout").dump()});
            if (ev.alarm_beep) {
                auto e = event("alarm");
                e["interval_s"] = *ev.alarm_beep;
                e["vbatt_v"] = sim_.battery().voltage;
                out.push_back({std::nullopt, e.dump()});
            }
        }
        return out;
    }

    Outgoing telemetry() const {
        auto j = telemetry_json(sim_.snapshot());
        j["failsafe"] = failsafe();
        return {std::nullopt, j.dump()};
    }

private:
    struct FieldError : std::runtime_error {
        FieldError(const std::string& m, std::string f) : std::runtime_error(m), field(std::move(f)) {}
        std::string field;
    };

    static nlohmann::json event(const char* name) { return {{"type", "event"}, {"event", name}}; }

    static std::string string_field(const nlohmann::json& msg, const char* name) {
        if (!msg.contains(name)) throw FieldError(std::string("missing ") + name, name);
        if (!msg[name].is_string()) throw FieldError(std::string(name) + " must be a string", name);
        return msg[name].get<std::string>();
    }

    static double number_field(const nlohmann::json& msg, const char* name, double lo, double hi) {
        if (!msg.contains(name)) throw FieldError(std::string("missing ") + name, name);
        if (!msg[name].is_number()) throw FieldError(std::string(name) + " must be a number", name);
        const double v = msg[name].get<double>();
        if (!std::isfinite(v) || v < lo || v > hi) throw FieldError(std::string(name) + " out of range", name);
        return v;
    }

    void grant(ClientId id) {
        authority_ = id;
        sticks_ = {};
        last_sticks_ = sim_.time();
    }

    std::string config_reply(const nlohmann::json& msg) const {
        const std::string key = string_field(msg, "key");
        try {
            return nlohmann::json{{"type", "config"}, {"key", key}, {"value", get_config_value(sim_.config(), key)}}.dump();
        } catch (const ValidationError& e) {
            throw FieldError(e.what(), "key");
        }
    }

    std::vector<Outgoing> sticks(const nlohmann::json& msg) {
        ChannelSet ch;
        ch.throttle = number_field(msg, "throttle", 0, kMaxStickTravel);
        ch.roll = number_field(msg, "roll", -kMaxStickTravel, kMaxStickTravel);
        ch.pitch = number_field(msg, "pitch", -kMaxStickTravel, kMaxStickTravel);
        ch.yaw = number_field(msg, "yaw", -kMaxStickTravel, kMaxStickTravel);
        if (msg.contains("aux")) {
            const auto& a = msg["aux"];
            if (a.is_boolean()) {
                ch.aux1 = a.get<bool>();
            } else if (a.is_number()) {
                ch.aux1 = a.get<double>() > 0;
            } else {
                throw FieldError("aux must be a boolean or number", "aux");
            }
        }
        sticks_ = ch;
        last_sticks_ = sim_.time();
        return {};
    }

    std::vector<Outgoing> set_gains(ClientId id, const nlohmann::json& msg) {
        const std::string axis = string_field(msg, "axis");
        if (axis != "roll" && axis != "pitch" && axis != "yaw" && axis != "self_level") {
            throw FieldError("axis must be roll, pitch, yaw or self_level", "axis");
        }
        const double p = number_field(msg, "p", 0, 200);
        const double i = number_field(msg, "i", 0, 200);
        ControllerConfig cfg = sim_.config();
        try {
            set_config_value(cfg, axis + "_p", std::to_string(std::lround(p)));
        } catch (const ValidationError& e) {
            throw FieldError(e.what(), "p");
        }
        try {
            set_config_value(cfg, axis + "_i", std::to_string(std::lround(i)));
        } catch (const ValidationError& e) {
            throw FieldError(e.what(), "i");
        }
        sim_.config() = cfg;
        return {{id, config_reply({{"key", axis + "_p"}})}, {id, config_reply({{"key", axis + "_i"}})}};
    }

    // Holds the throttle-idle + full rudder gesture long enough to register.
    std::vector<Outgoing> gesture(bool arm, const nlohmann::json& msg) {
        gesture_ = {};
        gesture_.yaw = arm ? 100 : -100;
        if (msg.contains("self_level")) {
            if (!msg["self_level"].is_boolean()) throw FieldError("self_level must be a boolean", "self_level");
            gesture_.roll = msg["self_level"].get<bool>() ? 100 : -100;
        }
        gesture_until_ = sim_.time() + kGestureShortcutS;
        sticks_ = {};
        last_sticks_ = *gesture_until_;
        return {};
    }

    Simulation sim_;
    std::vector<ClientId> clients_;
    std::optional<ClientId> authority_;
    ChannelSet sticks_;
    double last_sticks_ = 0.0;
    ChannelSet gesture_;
    std::optional<double> gesture_until_;
};

}  // namespace quadsim
