#pragma once

// Flight-controller menu settings and their key-value file form.
//
// File format: one `key = value` per line, `#` starts a comment, keys are the
// ControllerConfig member names. Unknown keys and out-of-range values are
// rejected. Booleans accept yes/no, true/false, on/off, 1/0.

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "quadsim/errors.hpp"

namespace quadsim {

enum class SelfLevelSource { kStick, kAux };

struct ControllerConfig {
    // PI editor, KK2 0..200 scale. Integral limits are in loop units
    // (rad for the rate loops, rad*s for self-level).
    int roll_p = 50;
    int roll_i = 25;
    double roll_i_limit = 2.0;
    int pitch_p = 50;
    int pitch_i = 25;
    double pitch_i_limit = 2.0;
    int yaw_p = 50;
    int yaw_i = 20;
    double yaw_i_limit = 2.0;
    int self_level_p = 60;
    int self_level_i = 0;
    double self_level_i_limit = 0.5;

    // Mode settings
    SelfLevelSource self_level_source = SelfLevelSource::kStick;
    bool auto_disarm = true;
    bool cppm_enabled = false;

    // Stick scaling, 0..200 (100 = unity)
    int stick_scaling_roll = 100;
    int stick_scaling_pitch = 100;
    int stick_scaling_yaw = 100;
    int stick_scaling_throttle = 100;

    // Misc. settings
    int min_throttle = 10;       // percent
    int height_damp = 30;        // 0..100
    int height_damp_limit = 10;  // percent of full throttle
    int alarm_tenths = 108;      // 1/10 V, 0 disables
    int servo_filter_ms = 50;

    bool operator==(const ControllerConfig&) const = default;
};

namespace config_detail {

using Member = std::variant<int ControllerConfig::*, double ControllerConfig::*, bool ControllerConfig::*,
                            SelfLevelSource ControllerConfig::*>;

struct Field {
    std::string_view key;
    Member member;
    double lo;
    double hi;
};

inline const std::vector<Field>& fields() {
    using C = ControllerConfig;
    static const std::vector<Field> table = {
        {"roll_p", &C::roll_p, 0, 200},
        {"roll_i", &C::roll_i, 0, 200},
        {"roll_i_limit", &C::roll_i_limit, 0, 100},
        {"pitch_p", &C::pitch_p, 0, 200},
        {"pitch_i", &C::pitch_i, 0, 200},
        {"pitch_i_limit", &C::pitch_i_limit, 0, 100},
        {"yaw_p", &C::yaw_p, 0, 200},
        {"yaw_i", &C::yaw_i, 0, 200},
        {"yaw_i_limit", &C::yaw_i_limit, 0, 100},
        {"self_level_p", &C::self_level_p, 0, 200},
        {"self_level_i", &C::self_level_i, 0, 200},
        {"self_level_i_limit", &C::self_level_i_limit, 0, 100},
        {"self_level_source", &C::self_level_source, 0, 0},
        {"auto_disarm", &C::auto_disarm, 0, 0},
        {"cppm_enabled", &C::cppm_enabled, 0, 0},
        {"stick_scaling_roll", &C::stick_scaling_roll, 0, 200},
        {"stick_scaling_pitch", &C::stick_scaling_pitch, 0, 200},
        {"stick_scaling_yaw", &C::stick_scaling_yaw, 0, 200},
        {"stick_scaling_throttle", &C::stick_scaling_throttle, 0, 200},
        {"min_throttle", &C::min_throttle, 0, 100},
        {"height_damp", &C::height_damp, 0, 100},
        {"height_damp_limit", &C::height_damp_limit, 0, 100},
        {"alarm_tenths", &C::alarm_tenths, 0, 255},
        {"servo_filter_ms", &C::servo_filter_ms, 0, 1000},
    };
    return table;
}

inline const Field& find(std::string_view key) {
    for (const auto& f : fields()) {
        if (f.key == key) return f;
    }
    throw ValidationError("unknown controller setting '" + std::string(key) + "'");
}

inline std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

inline double parse_number(std::string_view key, std::string_view text) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ValidationError("setting '" + std::string(key) + "': '" + std::string(text) + "' is not a number");
    }
    return v;
}

inline std::string format_number(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace config_detail

inline std::vector<std::string> controller_config_keys() {
    std::vector<std::string> keys;
    for (const auto& f : config_detail::fields()) keys.emplace_back(f.key);
    return keys;
}

/// Sets one field from its text form, enforcing the menu range.
inline void set_config_value(ControllerConfig& cfg, std::string_view key, std::string_view text) {
    using namespace config_detail;
    const Field& f = find(key);
    const std::string value = lower(trim(text));
    std::visit(
        [&](auto member) {
            using T = std::remove_cvref_t<decltype(cfg.*member)>;
            if constexpr (std::is_same_v<T, bool>) {
                if (value == "yes" || value == "true" || value == "on" || value == "1") {
                    cfg.*member = true;
                } else if (value == "no" || value == "false" || value == "off" || value == "0") {
                    cfg.*member = false;
                } else {
                    throw ValidationError("setting '" + std::string(key) + "' expects yes/no");
                }
            } else if constexpr (std::is_same_v<T, SelfLevelSource>) {
                if (value == "stick") {
                    cfg.*member = SelfLevelSource::kStick;
                } else if (value == "aux") {
                    cfg.*member = SelfLevelSource::kAux;
                } else {
                    throw ValidationError("setting '" + std::string(key) + "' expects stick or aux");
                }
            } else {
                const double v = parse_number(key, value);
                if (v < f.lo || v > f.hi) {
                    throw ValidationError("setting '" + std::string(key) + "' out of range [" + format_number(f.lo) +
                                          ", " + format_number(f.hi) + "]");
                }
                if constexpr (std::is_same_v<T, int>) {
                    if (v != static_cast<int>(v)) {
                        throw ValidationError("setting '" + std::string(key) + "' must be an integer");
                    }
                    cfg.*member = static_cast<int>(v);
                } else {
                    cfg.*member = v;
                }
            }
        },
        f.member);
}

inline std::string get_config_value(const ControllerConfig& cfg, std::string_view key) {
    using namespace config_detail;
    const Field& f = find(key);
    return std::visit(
        [&](auto member) -> std::string {
            using T = std::remove_cvref_t<decltype(cfg.*member)>;
            if constexpr (std::is_same_v<T, bool>) {
                return cfg.*member ? "yes" : "no";
            } else if constexpr (std::is_same_v<T, SelfLevelSource>) {
                return cfg.*member == SelfLevelSource::kStick ? "stick" : "aux";
            } else if constexpr (std::is_same_v<T, int>) {
                return std::to_string(cfg.*member);
            } else {
                return format_number(cfg.*member);
            }
        },
        f.member);
}

/// Applies `key = value` lines on top of `base`.
inline ControllerConfig parse_controller_config(std::istream& in, ControllerConfig base = {}) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        const std::string body = config_detail::trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("controller config line " + std::to_string(lineno) + ": expected key = value");
        }
        set_config_value(base, config_detail::trim(body.substr(0, eq)), config_detail::trim(body.substr(eq + 1)));
    }
    return base;
}

inline ControllerConfig load_controller_config(const std::string& path, ControllerConfig base = {}) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open controller config '" + path + "'");
    return parse_controller_config(in, base);
}

inline void write_controller_config(std::ostream& os, const ControllerConfig& cfg) {
    for (const auto& f : config_detail::fields()) {
        os << f.key << " = " << get_config_value(cfg, f.key) << '\n';
    }
}

}  // namespace quadsim
