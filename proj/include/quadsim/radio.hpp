#pragma once

// RC link: pulse-width to channel-unit normalisation, CPPM framing and the
// receiver-test screen.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "quadsim/errors.hpp"

namespace quadsim {

constexpr int kCppmFramePeriodUs = 20000;
constexpr int kCppmMaxChannels = 8;
constexpr int kPulseCenterUs = 1520;
constexpr int kPulseLowUs = 1000;
constexpr int kPulseHighUs = 2000;
constexpr double kUsPerUnitSymmetric = 5.2;   // 520 us per 100 units
constexpr double kUsPerUnitThrottle = 10.0;   // 1000 us per 100 units
constexpr double kIdleThreshold = 5.0;
constexpr double kFullThreshold = 90.0;
constexpr double kGestureThreshold = 90.0;
constexpr double kMaxStickTravel = 110.0;
constexpr double kSignalTimeoutS = 0.1;

/// Normalised stick positions. Throttle 0..100, axes -100..100 with
/// transient excursions to +-110 tolerated.
struct ChannelSet {
    double throttle = 0.0;
    double roll = 0.0;
    double pitch = 0.0;  // positive: stick forward (nose down)
    double yaw = 0.0;    // positive: right rudder (nose right)
    bool aux1 = false;
    std::vector<double> extra;  // optional channels 6..8

    bool within_limits() const {
        auto ok = [](double v) { return std::isfinite(v) && std::abs(v) <= kMaxStickTravel; };
        return std::isfinite(throttle) && throttle >= 0 && throttle <= kMaxStickTravel && ok(roll) && ok(pitch) &&
               ok(yaw) && extra.size() <= 3 && std::all_of(extra.begin(), extra.end(), ok);
    }

    bool operator==(const ChannelSet&) const = default;
};

/// Logical channels in receiver order: aileron, elevator, throttle, rudder, AUX.
enum class Channel : int { kAileron = 0, kElevator, kThrottle, kRudder, kAux, kCh6, kCh7, kCh8 };
constexpr int kLogicalChannels = 8;

inline const char* channel_name(Channel c) {
    static constexpr const char* names[] = {"aileron", "elevator", "throttle", "rudder", "aux", "ch6", "ch7", "ch8"};
    return names[static_cast<int>(c)];
}

struct ChannelCalibration {
    bool reversed = false;
    double trim = 0.0;      // channel units, additive
    double endpoint = 1.0;  // multiplicative, > 0
};

struct RadioConfig {
    std::array<ChannelCalibration, kLogicalChannels> calibration{};
    // order[slot] = logical channel carried in receiver/frame slot `slot`.
    std::vector<Channel> order{Channel::kAileron, Channel::kElevator, Channel::kThrottle, Channel::kRudder,
                               Channel::kAux};

    const ChannelCalibration& cal(Channel c) const { return calibration[static_cast<int>(c)]; }
    ChannelCalibration& cal(Channel c) { return calibration[static_cast<int>(c)]; }

    void validate() const {
        for (const auto& c : calibration) {
            if (!(c.endpoint > 0)) throw ValidationError("radio: endpoint scale must be > 0");
            if (!std::isfinite(c.trim)) throw ValidationError("radio: trim must be finite");
        }
        if (order.empty() || order.size() > kCppmMaxChannels) {
            throw ValidationError("radio: channel order must list 1..8 channels");
        }
        std::array<bool, kLogicalChannels> seen{};
        for (Channel c : order) {
            auto& s = seen[static_cast<int>(c)];
            if (s) throw ValidationError(std::string("radio: channel mapped twice: ") + channel_name(c));
            s = true;
        }
    }
};

namespace detail {

inline bool is_throttle(Channel c) { return c == Channel::kThrottle; }

inline double pulse_to_units(double pulse_us, Channel c) {
    return is_throttle(c) ? (pulse_us - kPulseLowUs) / kUsPerUnitThrottle
                          : (pulse_us - kPulseCenterUs) / kUsPerUnitSymmetric;
}

inline double units_to_pulse(double units, Channel c) {
    return is_throttle(c) ? kPulseLowUs + units * kUsPerUnitThrottle : kPulseCenterUs + units * kUsPerUnitSymmetric;
}

inline double apply_calibration(double units, const ChannelCalibration& cal) {
    return ((cal.reversed ? -units : units) + cal.trim) * cal.endpoint;
}

inline double remove_calibration(double value, const ChannelCalibration& cal) {
    const double u = value / cal.endpoint - cal.trim;
    return cal.reversed ? -u : u;
}

inline void assign(ChannelSet& ch, Channel c, double value) {
    switch (c) {
        case Channel::kAileron: ch.roll = value; break;
        case Channel::kElevator: ch.pitch = value; break;
        case Channel::kThrottle: ch.throttle = value; break;
        case Channel::kRudder: ch.yaw = value; break;
        case Channel::kAux: ch.aux1 = value > 0; break;
        default: {
            const auto idx = static_cast<std::size_t>(static_cast<int>(c) - static_cast<int>(Channel::kCh6));
            if (ch.extra.size() <= idx) ch.extra.resize(idx + 1, 0.0);
            ch.extra[idx] = value;
        }
    }
}

inline double value_of(const ChannelSet& ch, Channel c) {
    switch (c) {
        case Channel::kAileron: return ch.roll;
        case Channel::kElevator: return ch.pitch;
        case Channel::kThrottle: return ch.throttle;
        case Channel::kRudder: return ch.yaw;
        case Channel::kAux: return ch.aux1 ? 100.0 : -100.0;
        default: {
            const auto idx = static_cast<std::size_t>(static_cast<int>(c) - static_cast<int>(Channel::kCh6));
            return idx < ch.extra.size() ? ch.extra[idx] : 0.0;
        }
    }
}

}  // namespace detail

/// Per-slot pulse widths (receiver order) to channel units. Each channel is
/// mapped linearly, then reversed, trimmed and endpoint-scaled.
inline ChannelSet normalize(std::span<const double> pulses_us, const RadioConfig& cfg) {
    if (pulses_us.size() > cfg.order.size()) {
        throw ValidationError("normalize: more pulses than configured channels");
    }
    ChannelSet ch;
    for (std::size_t slot = 0; slot < pulses_us.size(); ++slot) {
        if (!std::isfinite(pulses_us[slot])) throw ValidationError("normalize: non-finite pulse");
        const Channel c = cfg.order[slot];
        detail::assign(ch, c, detail::apply_calibration(detail::pulse_to_units(pulses_us[slot], c), cfg.cal(c)));
    }
    return ch;
}

struct CppmFrame {
    std::vector<int> pulses_us;
    int period_us = kCppmFramePeriodUs;

    int sync_gap_us() const {
        int sum = 0;
        for (int p : pulses_us) sum += p;
        return period_us - sum;
    }

    bool operator==(const CppmFrame&) const = default;
};

/// Packs a ChannelSet into 1 us pulses in the configured slot order.
inline CppmFrame cppm_encode(const ChannelSet& ch, const RadioConfig& cfg) {
    CppmFrame frame;
    frame.pulses_us.reserve(cfg.order.size());
    for (Channel c : cfg.order) {
        double pulse;
        if (c == Channel::kAux) {
            const bool on_wire = cfg.cal(c).reversed ? !ch.aux1 : ch.aux1;
            pulse = on_wire ? kPulseHighUs : kPulseLowUs;
        } else {
            pulse = detail::units_to_pulse(detail::remove_calibration(detail::value_of(ch, c), cfg.cal(c)), c);
        }
        frame.pulses_us.push_back(static_cast<int>(std::clamp<long>(std::lround(pulse), kPulseLowUs, kPulseHighUs)));
    }
    return frame;
}

/// Out-of-range pulses are clamped to [1000, 2000] before mapping. Channels
/// not present in a short frame keep their neutral value.
inline ChannelSet cppm_decode(const CppmFrame& frame, const RadioConfig& cfg) {
    const std::size_t n = frame.pulses_us.size();
    if (n == 0 || n > kCppmMaxChannels) {
        throw ValidationError("cppm_decode: frame carries " + std::to_string(n) + " pulses (expected 1..8)");
    }
    if (n > cfg.order.size()) throw ValidationError("cppm_decode: frame longer than configured channel map");
    std::vector<double> pulses(n);
    for (std::size_t i = 0; i < n; ++i) {
        pulses[i] = std::clamp(frame.pulses_us[i], kPulseLowUs, kPulseHighUs);
    }
    return normalize(pulses, cfg);
}

// ---- receiver test ---------------------------------------------------------

enum class ArmZone { kSafeZone, kArm, kDisarm };

inline const char* to_string(ArmZone z) {
    switch (z) {
        case ArmZone::kArm: return "Arm";
        case ArmZone::kDisarm: return "Disarm";
        default: return "Safe Zone";
    }
}

inline bool throttle_idle(double throttle) { return throttle <= kIdleThreshold; }

inline ArmZone arm_zone(const ChannelSet& ch) {
    if (throttle_idle(ch.throttle)) {
        if (ch.yaw >= kGestureThreshold) return ArmZone::kArm;
        if (ch.yaw <= -kGestureThreshold) return ArmZone::kDisarm;
    }
    return ArmZone::kSafeZone;
}

struct AxisReading {
    std::string name;
    double value = 0.0;
    std::string direction;  // "Left"/"Right", "Forward"/"Back" or "Center"
    bool exceeds_limit = false;
};

struct ReceiverReport {
    bool signal = true;
    std::string throttle_label;
    std::array<AxisReading, 3> axes;  // roll, pitch, yaw
    std::string aux_label;
    ArmZone zone = ArmZone::kSafeZone;

    bool any_axis_exceeded() const {
        return std::any_of(axes.begin(), axes.end(), [](const AxisReading& a) { return a.exceeds_limit; });
    }
    std::string zone_label() const { return signal ? to_string(zone) : "No signal"; }
};

inline std::string throttle_label(double throttle) {
    if (throttle_idle(throttle)) return "Idle";
    if (throttle > kFullThreshold) return "Full";
    return std::to_string(static_cast<int>(std::lround(throttle)));
}

inline ReceiverReport receiver_test(const ChannelSet& ch, double seconds_since_frame = 0.0) {
    ReceiverReport r;
    r.signal = seconds_since_frame <= kSignalTimeoutS;
    r.throttle_label = throttle_label(ch.throttle);
    auto axis = [](const char* name, double v, const char* neg, const char* pos) {
        AxisReading a;
        a.name = name;
        a.value = v;
        a.direction = std::abs(v) < kIdleThreshold ? "Center" : (v > 0 ? pos : neg);
        a.exceeds_limit = std::abs(v) > kMaxStickTravel;
        return a;
    };
    r.axes = {axis("roll", ch.roll, "Left", "Right"), axis("pitch", ch.pitch, "Back", "Forward"),
              axis("yaw", ch.yaw, "Left", "Right")};
    r.aux_label = ch.aux1 ? "ON" : "OFF";
    r.zone = arm_zone(ch);
    return r;
}

/// Stick-travel bookkeeping over a recorded session: full deflection should
/// read between 90 and 100 each way and never exceed 110.
class TravelCheck {
public:
    enum class Status { kOk, kLowTravel, kHighTravel, kExceeded };

    void add(const ChannelSet& ch) {
        const std::array<double, 3> v{ch.roll, ch.pitch, ch.yaw};
        for (std::size_t i = 0; i < 3; ++i) {
            lo_[i] = std::min(lo_[i], v[i]);
            hi_[i] = std::max(hi_[i], v[i]);
        }
        throttle_hi_ = std::max(throttle_hi_, ch.throttle);
        throttle_lo_ = std::min(throttle_lo_, ch.throttle);
    }

    Status status(std::size_t axis) const {
        const double worst = std::max(-lo_[axis], hi_[axis]);
        const double least = std::min(-lo_[axis], hi_[axis]);
        if (worst > kMaxStickTravel) return Status::kExceeded;
        if (worst > 100.0) return Status::kHighTravel;
        if (least < kFullThreshold) return Status::kLowTravel;
        return Status::kOk;
    }

    double min(std::size_t axis) const { return lo_[axis]; }
    double max(std::size_t axis) const { return hi_[axis]; }
    double throttle_min() const { return throttle_lo_; }
    double throttle_max() const { return throttle_hi_; }

private:
    std::array<double, 3> lo_{0, 0, 0};
    std::array<double, 3> hi_{0, 0, 0};
    double throttle_lo_ = std::numeric_limits<double>::infinity();
    double throttle_hi_ = 0.0;
};

inline const char* to_string(TravelCheck::Status s) {
    switch (s) {
        case TravelCheck::Status::kOk: return "ok";
        case TravelCheck::Status::kLowTravel: return "low travel (<90)";
        case TravelCheck::Status::kHighTravel: return "high travel (>100)";
        default: return "EXCEEDS 110";
    }
}

}  // namespace quadsim
