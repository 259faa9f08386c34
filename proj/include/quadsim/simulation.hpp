#pragma once

// Closed loop: sticks -> controller -> ESC pulses -> thrust (battery aware)
// -> rigid body -> battery -> IMU. Single-threaded and deterministic for a
// given scenario and seed.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "quadsim/controller.hpp"
#include "quadsim/dynamics.hpp"
#include "quadsim/propulsion.hpp"
#include "quadsim/scenario.hpp"
#include "quadsim/sensors.hpp"
#include "quadsim/telemetry.hpp"

namespace quadsim {

// Pack current at hover throttle with the default airframe.
constexpr double kHoverCurrent = 22.2;
constexpr double kCurrentExponent = 1.5;

/// Throttle fraction per motor that holds the airframe at nominal voltage.
inline double hover_throttle(const AirframeParams& a, const MotorSpec& m) {
    return std::sqrt(a.mass * a.gravity / (4 * m.max_thrust));
}

/// Pack current for the given motor throttles, scaled from the hover draw.
inline double pack_current(const std::array<double, 4>& throttles, double hover_fraction) {
    const double sum = throttles[0] + throttles[1] + throttles[2] + throttles[3];
    if (sum <= 0) return 0.0;
    return kHoverCurrent * std::pow(sum / (4 * hover_fraction), kCurrentExponent);
}

class PilotModel {
public:
    explicit PilotModel(AltitudePilot cfg) : cfg_(cfg) {}

    /// Throttle stick (0..100) the pilot holds. `scripted` is the trace
    /// throttle; the pilot flies only while it is above idle and armed.
    double throttle(double t, double scripted, bool armed, const RigidBodyState& s, double hover_stick, double dt) {
        if (!armed || throttle_idle(scripted)) return scripted;
        if (!engaged_) {
            engaged_ = true;
            t_engage_ = t;
            z_start_ = s.position.z();
        }
        if (landed_) return 0.0;
        const auto [z_ref, v_ref] = reference(t);
        const double err = z_ref - s.position.z();
        integral_ = std::clamp(integral_ + err * dt, -20.0, 20.0);
        if (cfg_.descend_at && t >= *cfg_.descend_at && z_ref <= 0.0 && s.position.z() < 0.05) {
            landed_ = true;
            return 0.0;
        }
        const double stick =
            hover_stick + cfg_.kp * err + cfg_.kd * (v_ref - s.velocity.z()) + cfg_.ki * integral_;
        return std::clamp(stick, kIdleThreshold + 1.0, 100.0);
    }

    bool engaged() const { return engaged_; }

private:
    std::pair<double, double> reference(double t) const {
        const double climb_time = std::max(0.0, cfg_.target_altitude - z_start_) / cfg_.climb_rate;
        auto climb = [&](double tt) {
            const double dt = tt - t_engage_;
            return dt >= climb_time ? std::pair{cfg_.target_altitude, 0.0}
                                    : std::pair{z_start_ + cfg_.climb_rate * dt, cfg_.climb_rate};
        };
        if (cfg_.descend_at && t >= *cfg_.descend_at) {
            const double z0 = climb(*cfg_.descend_at).first;
            const double z = z0 - cfg_.climb_rate * (t - *cfg_.descend_at);
            return z > 0 ? std::pair{z, -cfg_.climb_rate} : std::pair{0.0, 0.0};
        }
        return climb(t);
    }

    AltitudePilot cfg_;
    bool engaged_ = false;
    bool landed_ = false;
    double t_engage_ = 0.0;
    double z_start_ = 0.0;
    double integral_ = 0.0;
};

struct StepEvents {
    bool armed = false;
    bool disarmed = false;
    bool brownout = false;
    std::optional<double> alarm_beep;  // beep interval, s
};

class Simulation {
public:
    explicit Simulation(Scenario sc)
        : sc_(std::move(sc)), battery_(sc_.battery), sensors_(sc_.sensors, sc_.seed),
          hover_fraction_(hover_throttle(sc_.airframe, sc_.motor)) {
        sc_.validate();
        if (sc_.input.pilot) pilot_.emplace(*sc_.input.pilot);
        brownout_ = battery_.voltage <= kBrownoutVoltage;
    }

    const Scenario& scenario() const { return sc_; }
    ControllerConfig& config() { return sc_.controller; }
    const ControllerConfig& config() const { return sc_.controller; }
    const RigidBodyState& body() const { return body_; }
    const BatteryState& battery() const { return battery_; }
    const ControllerState& controller() const { return ctrl_; }
    std::size_t steps() const { return steps_; }
    double time() const { return static_cast<double>(steps_) * sc_.dt; }
    bool brownout() const { return brownout_; }
    const StepEvents& events() const { return events_; }

    /// Trace sticks at the current time with the pilot model applied.
    ChannelSet scripted_sticks() {
        ChannelSet ch = sc_.input.trace.at(time());
        if (pilot_) {
            const double hover_stick = 100.0 * hover_fraction_ * sc_.motor.nominal_voltage /
                                       std::max(battery_.voltage, 1.0) * 100.0 /
                                       std::max(sc_.controller.stick_scaling_throttle, 1);
            ch.throttle = pilot_->throttle(time(), ch.throttle, ctrl_.arm.mode == ArmMode::kArmed, body_, hover_stick,
                                           sc_.dt);
        }
        return ch;
    }

    /// Advances one dt with the given sticks.
    void step(const ChannelSet& sticks) {
        const double dt = sc_.dt;
        const AirframeParams& air = sc_.airframe;
        const bool was_armed = ctrl_.arm.mode == ArmMode::kArmed;
        events_ = {};

        const Eigen::Vector3d accel =
            on_ground_ ? Eigen::Vector3d::Zero()
                       : translational_accel(body_, control_inputs(thrust_, air, sc_.variant).u1, air, sc_.variant);
        const double mean_throttle = (throttle_[0] + throttle_[1] + throttle_[2] + throttle_[3]) / 4;
        const SensorReading imu =
            sensors_.read(body_, accel, air.gravity, motor_rpm(mean_throttle, battery_.voltage, sc_.motor), dt);

        const ControllerOutput out = controller_update(ctrl_, sc_.controller, sticks, imu, dt, air.gravity);
        ctrl_ = out.state;

        for (std::size_t i = 0; i < 4; ++i) {
            throttle_[i] = brownout_ ? 0.0 : pwm_to_throttle(out.motors[i]);
            thrust_[i] = throttle_to_thrust(throttle_[i], battery_.voltage, sc_.motor);
        }

        body_ = quadsim::step(body_, thrust_, air, sc_.variant, dt);
        apply_ground_contact();
        ++steps_;
        if (!body_.is_finite()) {
            throw NumericalError("simulation diverged at t = " + std::to_string(time()) + " s",
                                 steps_ / static_cast<std::size_t>(sc_.decimation));
        }

        current_ = pack_current(throttle_, hover_fraction_);
        if (current_ > 0) battery_ = battery_step(battery_, current_, dt);
        if (!brownout_ && battery_.voltage <= kBrownoutVoltage) {
            brownout_ = true;
            events_.brownout = true;
        }

        const bool armed = ctrl_.arm.mode == ArmMode::kArmed;
        events_.armed = armed && !was_armed;
        events_.disarmed = !armed && was_armed;
        update_alarm();
    }

    TelemetryRecord snapshot() const {
        TelemetryRecord r;
        r.t = time();
        r.position = {body_.position.x(), body_.position.y(), body_.position.z()};
        r.attitude = {body_.attitude.roll, body_.attitude.pitch, body_.attitude.yaw};
        r.rates = {body_.rates.roll, body_.rates.pitch, body_.rates.yaw};
        r.thrust = thrust_;
        r.vbatt = battery_.voltage;
        r.ibatt = current_;
        r.remaining = battery_.remaining;
        r.armed = ctrl_.arm.mode == ArmMode::kArmed;
        r.mode = flight_mode(ctrl_);
        return r;
    }

private:
    void apply_ground_contact() {
        if (body_.position.z() > 0.0) {
            on_ground_ = false;
            return;
        }
        body_.position.z() = 0.0;
        body_.velocity.setZero();
        body_.attitude.roll = 0.0;
        body_.attitude.pitch = 0.0;
        body_.rates = {};
        on_ground_ = true;
    }

    void update_alarm() {
        const int tenths = sc_.controller.alarm_tenths;
        if (tenths <= 0) return;
        const double setpoint = tenths / 10.0;
        if (battery_.voltage >= setpoint + 1.0) {
            next_beep_ = -1.0;
            return;
        }
        const double t = time();
        if (next_beep_ < 0.0 || t >= next_beep_ - 1e-9) {
            const double interval = alarm_beep_interval(battery_.voltage, setpoint, setpoint + 1.0);
            events_.alarm_beep = interval;
            next_beep_ = t + interval;
        }
    }

    Scenario sc_;
    RigidBodyState body_;
    ControllerState ctrl_;
    BatteryState battery_;
    SensorModel sensors_;
    std::optional<PilotModel> pilot_;
    MotorThrusts thrust_{0, 0, 0, 0};
    std::array<double, 4> throttle_{0, 0, 0, 0};
    double hover_fraction_;
    double current_ = 0.0;
    double next_beep_ = -1.0;
    bool brownout_ = false;
    bool on_ground_ = true;
    std::size_t steps_ = 0;
    StepEvents events_;
};

/// Runs a trace-driven scenario to completion.
inline FlightLog run_scenario(const Scenario& sc) {
    if (sc.input.source != InputSource::kTrace) {
        throw ValidationError("run_scenario: input source must be a channel trace");
    }
    Simulation sim(sc);
    FlightLog log;
    log.record_interval = sc.dt * sc.decimation;
    log.scenario_digest = scenario_digest(sc);
    const auto total = static_cast<std::size_t>(std::llround(sc.duration / sc.dt));
    log.records.reserve(total / sc.decimation + 1);
    log.records.push_back(sim.snapshot());
    const auto dec = static_cast<std::size_t>(sc.decimation);
    for (std::size_t k = 1; k <= total; ++k) {
        sim.step(sim.scripted_sticks());
        if (k % dec == 0) {
            TelemetryRecord r = sim.snapshot();
            r.t = static_cast<double>(k / dec) * log.record_interval;
            log.records.push_back(r);
        }
    }
    return log;
}

}  // namespace quadsim
