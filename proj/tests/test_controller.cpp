#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "quadsim/controller.hpp"
#include "quadsim/dynamics.hpp"
#include "quadsim/propulsion.hpp"

using namespace quadsim;

namespace {

constexpr double kDt = 0.002;
constexpr double kG = 9.81;

SensorReading level() {
    SensorReading s;
    s.accel = {0, 0, kG};
    return s;
}

ChannelSet sticks(double throttle, double roll = 0, double pitch = 0, double yaw = 0) {
    ChannelSet ch;
    ch.throttle = throttle;
    ch.roll = roll;
    ch.pitch = pitch;
    ch.yaw = yaw;
    return ch;
}

ArmState hold(ArmState s, const ChannelSet& ch, double seconds, const ControllerConfig& cfg = {}) {
    const int n = static_cast<int>(std::llround(seconds / kDt));
    for (int i = 0; i < n; ++i) s = arm_step(s, ch, cfg, kDt);
    return s;
}

ControllerState armed_state(bool self_level) {
    ControllerState s;
    s.arm.mode = ArmMode::kArmed;
    s.arm.self_level_on = self_level;
    return s;
}

}  // namespace

TEST(ArmStep, MidSticksStaySafe) {
    const ArmState s = hold({}, sticks(50), 3.0);
    EXPECT_EQ(s.mode, ArmMode::kSafe);
    EXPECT_EQ(receiver_test(sticks(50)).zone_label(), "Safe Zone");
}

TEST(ArmStep, ArmAfterOneSecondHold) {
    ArmState s = hold({}, sticks(0, 0, 0, 100), 0.99);
    EXPECT_EQ(s.mode, ArmMode::kSafe);
    s = hold(s, sticks(0, 0, 0, 100), 0.51);
    EXPECT_EQ(s.mode, ArmMode::kArmed);
}

TEST(ArmStep, ReleasingEarlyResetsTheHold) {
    ArmState s = hold({}, sticks(0, 0, 0, 100), 0.8);
    s = hold(s, sticks(0), 0.1);
    s = hold(s, sticks(0, 0, 0, 100), 0.8);
    EXPECT_EQ(s.mode, ArmMode::kSafe);
}

TEST(ArmStep, DisarmGesture) {
    ArmState s = hold({}, sticks(0, 0, 0, 100), 1.5);
    s = hold(s, sticks(0), 0.5);
    s = hold(s, sticks(0, 0, 0, -100), 1.5);
    EXPECT_EQ(s.mode, ArmMode::kSafe);
}

TEST(ArmStep, StickSelfLevelToggle) {
    ArmState s = hold({}, sticks(0, 100, 0, 100), 1.5);
    EXPECT_EQ(s.mode, ArmMode::kArmed);
    EXPECT_TRUE(s.self_level_on);
    s = hold(s, sticks(0), 0.2);
    s = hold(s, sticks(0, -100, 0, -100), 1.5);
    EXPECT_EQ(s.mode, ArmMode::kSafe);
    EXPECT_FALSE(s.self_level_on);
    s = hold(s, sticks(0, 0, 0, 100), 1.5);
    EXPECT_FALSE(s.self_level_on);
}

TEST(ArmStep, AuxSelfLevel) {
    ControllerConfig cfg;
    cfg.self_level_source = SelfLevelSource::kAux;
    ChannelSet ch = sticks(30);
    ch.aux1 = true;
    EXPECT_TRUE(arm_step({}, ch, cfg, kDt).self_level_on);
    ch.aux1 = false;
    EXPECT_FALSE(arm_step({}, ch, cfg, kDt).self_level_on);
}

TEST(ArmStep, AutoDisarmAfterTenMinutes) {
    ArmState s = hold({}, sticks(0, 0, 0, 100), 1.5);
    s = hold(s, sticks(0), 0.1);
    ASSERT_EQ(s.mode, ArmMode::kArmed);
    const ArmState start = s;
    long steps = 0;
    while (s.mode == ArmMode::kArmed && steps < 400000) {
        s = arm_step(s, sticks(0, 2, -3, 1), ControllerConfig{}, kDt);
        ++steps;
    }
    EXPECT_NEAR(steps * kDt, 600.0 - start.inactivity_timer, kDt + 1e-9);
}

TEST(ArmStep, NoAutoDisarmWhenDisabledOrFlying) {
    ControllerConfig off;
    off.auto_disarm = false;
    ArmState s;
    s.mode = ArmMode::kArmed;
    EXPECT_EQ(hold(s, sticks(0), 700, off).mode, ArmMode::kArmed);
    // Stick activity keeps resetting the inactivity timer.
    for (int k = 0; k < 70; ++k) {
        s = hold(s, sticks(0), 9.0);
        s = hold(s, sticks(0, 40), 1.0);
    }
    EXPECT_EQ(s.mode, ArmMode::kArmed);
}

TEST(ArmStep, ModeOnlyChangesAtIdleThrottle) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> thr(5.01, 110), axis(-110, 110);
    for (int trial = 0; trial < 20; ++trial) {
        ArmState s;
        s.mode = trial % 2 ? ArmMode::kArmed : ArmMode::kSafe;
        const ArmMode m0 = s.mode;
        for (int i = 0; i < 5000; ++i) {
            s = arm_step(s, sticks(thr(rng), axis(rng), axis(rng), (i / 1000) % 2 ? 100 : -100), {}, kDt);
            ASSERT_EQ(s.mode, m0);
        }
    }
}

TEST(PiStep, Basics) {
    const PiGains g{0.5, 0.2, 1.0};
    EXPECT_EQ(pi_step(0, 0, g, 0, kDt).output, 0.0);
    const PiGains p_only{0.5, 0.0, 1.0};
    EXPECT_DOUBLE_EQ(pi_step(2.0, 0.5, p_only, 0, kDt).output, 0.75);
}

TEST(PiStep, StepResponseMatchesRecurrence) {
    // Closed form for a constant error e with an unsaturated integrator:
    // I_n = n e dt, u_n = kp e + ki n e dt.
    const PiGains g = rate_gains(50, 25, 100.0);
    double integ = 0;
    const double e = 0.3;
    for (int n = 1; n <= 100; ++n) {
        const PiResult r = pi_step(e, 0.0, g, integ, kDt);
        integ = r.integrator;
        EXPECT_NEAR(r.output, g.kp * e + g.ki * n * e * kDt, 1e-9);
    }
}

TEST(PiStep, IntegratorClamped) {
    const PiGains g{1, 1, 0.05};
    double integ = 0;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> err(-50, 50);
    for (int i = 0; i < 10000; ++i) {
        integ = pi_step(err(rng), 0, g, integ, 0.01).integrator;
        ASSERT_LE(std::abs(integ), 0.05);
    }
}

TEST(GainMap, LinearInMenuValue) {
    EXPECT_DOUBLE_EQ(rate_gains(100, 100, 1).kp, kRateP100);
    EXPECT_DOUBLE_EQ(rate_gains(200, 0, 1).kp, 2 * kRateP100);
    EXPECT_DOUBLE_EQ(rate_gains(50, 50, 1).ki, kRateI100 / 2);
    EXPECT_DOUBLE_EQ(self_level_gains(100, 100, 1).kp, kSelfLevelP100);
    EXPECT_EQ(rate_gains(0, 0, 1).kp, 0.0);
}

TEST(Mixer, HoverMix) {
    for (double t : {0.0, 0.3, 0.55, 1.0}) {
        for (double m : mixer(t, 0, 0, 0)) EXPECT_EQ(m, t);
    }
}

TEST(Mixer, SumPreserved) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> t(0, 1), a(-1, 1);
    for (int i = 0; i < 10000; ++i) {
        const double th = t(rng);
        const auto m = mix_raw(th, a(rng), a(rng), a(rng));
        EXPECT_NEAR(m[0] + m[1] + m[2] + m[3], 4 * th, 1e-12);
    }
}

TEST(Mixer, ForwardRaisesRearPair) {
    // Forward is nose down: negative on the mixer's nose-up pitch axis.
    const auto m = mixer(0.5, 0, -0.1, 0);
    EXPECT_GT(m[2], m[0]);
    EXPECT_GT(m[2], m[1]);
    EXPECT_GT(m[3], m[0]);
    EXPECT_GT(m[3], m[1]);
}

TEST(Mixer, YawDifferentialBetweenRotorPairs) {
    const auto m = mix_raw(0.5, 0, 0, 0.1);
    EXPECT_EQ(m[0], m[2]);
    EXPECT_EQ(m[1], m[3]);
    EXPECT_LT(m[0], 0.5);
    EXPECT_GT(m[1], 0.5);
    EXPECT_DOUBLE_EQ(m[0] + m[1] + m[2] + m[3], 2.0);
}

TEST(Mixer, OutputsClamped) {
    for (double m : mixer(0.95, 1, 1, 1)) {
        EXPECT_GE(m, 0.0);
        EXPECT_LE(m, 1.0);
    }
}

TEST(Mixer, ControlInputsAgreeWithMixerSemantics) {
    // Thrusts from the mixer fed to the corrected dynamics give the expected torque signs.
    const AirframeParams p;
    auto torque = [&](double r, double pt, double y) {
        const auto m = mixer(0.5, r, pt, y);
        return control_inputs({m[0] * 8, m[1] * 8, m[2] * 8, m[3] * 8}, p, ModelVariant::kCorrected);
    };
    EXPECT_GT(torque(0.1, 0, 0).u2, 0);   // roll right
    EXPECT_LT(torque(0, 0.1, 0).u3, 0);   // nose up
    EXPECT_LT(torque(0, 0, 0.1).u4, 0);   // clockwise
    const auto hover = torque(0, 0, 0);
    EXPECT_EQ(hover.u2, 0.0);
    EXPECT_EQ(hover.u3, 0.0);
    EXPECT_EQ(hover.u4, 0.0);
}

TEST(ServoFilter, ZeroIsPassthrough) {
    EXPECT_EQ(servo_filter(0.3, 0.8, kDt, 0), 0.8);
}

TEST(ServoFilter, StepResponseAtTau) {
    double y = 0;
    const int n = static_cast<int>(std::llround(0.050 / kDt));
    for (int i = 0; i < n; ++i) y = servo_filter(y, 1.0, kDt, 50);
    EXPECT_NEAR(y, 0.632, 0.01);
}

TEST(ServoFilter, ConvergesToInput) {
    double y = -3;
    for (int i = 0; i < 5000; ++i) y = servo_filter(y, 2.5, kDt, 50);
    EXPECT_NEAR(y, 2.5, 1e-12);
}

TEST(HeightDampening, Cases) {
    const ControllerConfig cfg;
    EXPECT_EQ(height_dampening(kG, cfg, kG), 0.0);
    EXPECT_DOUBLE_EQ(height_dampening(kG + 100, cfg, kG), -0.10);
    EXPECT_DOUBLE_EQ(height_dampening(kG - 100, cfg, kG), 0.10);
    EXPECT_NEAR(height_dampening(kG + 1, cfg, kG), -0.3 * kHeightDampGain, 1e-15);
    ControllerConfig off;
    off.height_damp = 0;
    EXPECT_EQ(height_dampening(50, off, kG), 0.0);
}

TEST(StickScale, Cases) {
    EXPECT_EQ(stick_scale(37.5, 100), 37.5);
    EXPECT_EQ(stick_scale(50, 200), 100);
    double prev = 0;
    for (int s = 1; s <= 200; ++s) {
        EXPECT_GT(stick_scale(40, s), prev);
        prev = stick_scale(40, s);
    }
}

TEST(AttitudeEstimate, ConvergesWhenLevel) {
    Attitude est{0.2, -0.15, 0};
    for (int i = 0; i < 1000; ++i) est = attitude_estimate(est, level(), kDt);
    EXPECT_LT(std::abs(est.roll), 1e-6);
    EXPECT_LT(std::abs(est.pitch), 1e-6);
}

TEST(AttitudeEstimate, AlphaOneIsPureGyro) {
    SensorReading s = level();
    s.gyro = {0.1, -0.2, 0.3};
    Attitude est;
    for (int i = 0; i < 500; ++i) est = attitude_estimate(est, s, kDt, 1.0);
    EXPECT_NEAR(est.roll, 0.1, 1e-12);
    EXPECT_NEAR(est.pitch, -0.2, 1e-12);
    EXPECT_NEAR(est.yaw, 0.3, 1e-12);
}

TEST(AttitudeEstimate, GyroBiasErrorBounded) {
    // Fixed point of e = a (e + b dt): e* = a b dt / (1 - a).
    const double b = 0.05;
    SensorReading s = level();
    s.gyro.x() = b;
    Attitude est;
    double worst = 0;
    for (int i = 0; i < 20000; ++i) {
        est = attitude_estimate(est, s, kDt);
        worst = std::max(worst, std::abs(est.roll));
    }
    const double fixed = kComplementaryAlpha * b * kDt / (1 - kComplementaryAlpha);
    EXPECT_NEAR(est.roll, fixed, 1e-9);
    EXPECT_LE(worst, fixed + 1e-9);
}

TEST(AttitudeEstimate, AccelAttitudeSigns) {
    // Right side down: gravity reaction shows on +y of the body.
    const Attitude a = accel_attitude(Eigen::Vector3d(0, kG * std::sin(0.2), kG * std::cos(0.2)));
    EXPECT_NEAR(a.roll, 0.2, 1e-12);
    const Attitude b = accel_attitude(Eigen::Vector3d(-kG * std::sin(0.1), 0, kG * std::cos(0.1)));
    EXPECT_NEAR(b.pitch, 0.1, 1e-12);
}

TEST(ControllerUpdate, SafeOutputsIdle) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> thr(10, 100), axis(-100, 100);
    ControllerState s;
    for (int i = 0; i < 1000; ++i) {
        const ControllerOutput out = controller_update(s, {}, sticks(thr(rng), axis(rng), axis(rng), axis(rng)),
                                                       level(), kDt);
        for (double m : out.motors) EXPECT_EQ(m, 1000.0);
        s = out.state;
        ASSERT_EQ(s.arm.mode, ArmMode::kSafe);
    }
}

TEST(ControllerUpdate, ArmedIdleThrottleStaysAtIdle) {
    const ControllerOutput out = controller_update(armed_state(false), {}, sticks(0), level(), kDt);
    for (double m : out.motors) EXPECT_EQ(m, 1000.0);
}

TEST(ControllerUpdate, MinThrottleFloor) {
    ControllerConfig cfg;
    cfg.height_damp = 0;
    const ControllerOutput out = controller_update(armed_state(false), cfg, sticks(6), level(), kDt);
    for (double m : out.motors) EXPECT_DOUBLE_EQ(m, 1100.0);
}

TEST(ControllerUpdate, HoverGivesEqualOutputs) {
    ControllerState s = armed_state(true);
    for (int i = 0; i < 100; ++i) {
        const ControllerOutput out = controller_update(s, {}, sticks(55), level(), kDt);
        EXPECT_EQ(out.motors[0], out.motors[1]);
        EXPECT_EQ(out.motors[0], out.motors[2]);
        EXPECT_EQ(out.motors[0], out.motors[3]);
        EXPECT_DOUBLE_EQ(out.motors[0], 1550.0);
        s = out.state;
    }
}

TEST(ControllerUpdate, OutputsWithinPulseRange) {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> thr(0, 110), axis(-110, 110), rate(-20, 20), acc(-30, 30);
    ControllerState s = armed_state(false);
    for (int i = 0; i < 20000; ++i) {
        SensorReading r;
        r.gyro = {rate(rng), rate(rng), rate(rng)};
        r.accel = {acc(rng), acc(rng), acc(rng)};
        const ControllerOutput out =
            controller_update(s, {}, sticks(thr(rng), axis(rng), axis(rng), axis(rng)), r, kDt);
        for (double m : out.motors) {
            ASSERT_GE(m, 1000.0);
            ASSERT_LE(m, 2000.0);
        }
        s = out.state;
        if (s.arm.mode == ArmMode::kSafe) s.arm.mode = ArmMode::kArmed;
    }
}

TEST(ControllerUpdate, SensorFaultForcesSafe) {
    SensorReading bad = level();
    bad.gyro.y() = std::numeric_limits<double>::quiet_NaN();
    const ControllerOutput out = controller_update(armed_state(true), {}, sticks(60), bad, kDt);
    EXPECT_EQ(out.state.arm.mode, ArmMode::kSafe);
    EXPECT_TRUE(out.state.sensor_fault);
    for (double m : out.motors) EXPECT_EQ(m, 1000.0);
}

TEST(ControllerUpdate, RollDisturbanceOpposedInSelfLevel) {
    ControllerState s = armed_state(true);
    s.estimate.roll = 0.1;  // right side down
    SensorReading r;
    r.accel = {0, kG * std::sin(0.1), kG * std::cos(0.1)};
    const ControllerOutput out = controller_update(s, {}, sticks(55), r, kDt);
    // Roll back left: right-side motors (2, 3) spin up.
    EXPECT_GT(out.motors[1], out.motors[0]);
    EXPECT_GT(out.motors[2], out.motors[3]);
}

TEST(ControllerUpdate, ClosedLoopRecoversFromRollDisturbance) {
    const AirframeParams air;
    const MotorSpec motor;
    ControllerConfig cfg;
    cfg.height_damp = 0;
    ControllerState s = armed_state(true);
    RigidBodyState body;
    body.position.z() = 10;
    body.attitude.roll = 0.15;
    s.estimate.roll = 0.15;
    s.filter_primed = true;
    s.filtered = sticks(55);
    const double hover_pct = 100 * std::sqrt(air.mass * air.gravity / (4 * motor.max_thrust));
    double peak_late = 0;
    for (int i = 0; i < 2000; ++i) {
        SensorReading r;
        r.gyro = {body.rates.roll, body.rates.pitch, body.rates.yaw};
        const Eigen::Matrix3d rb = body_to_world(body.attitude);
        r.accel = rb.transpose() * Eigen::Vector3d(0, 0, kG);
        const ControllerOutput out = controller_update(s, cfg, sticks(hover_pct), r, kDt);
        s = out.state;
        MotorThrusts th;
        for (int k = 0; k < 4; ++k) th[k] = throttle_to_thrust(pwm_to_throttle(out.motors[k]), 11.1, motor);
        body = step(body, th, air, ModelVariant::kCorrected, kDt);
        if (i > 1000) peak_late = std::max(peak_late, std::abs(body.attitude.roll));
    }
    EXPECT_LT(peak_late, deg_to_rad(1.0));
}

TEST(ControllerUpdate, DisabledStagesAreIdentity) {
    ControllerConfig plain;
    plain.servo_filter_ms = 0;
    plain.height_damp = 0;
    ControllerState s = armed_state(false);
    s.filter_primed = true;
    const ControllerOutput a = controller_update(s, plain, sticks(40, 10, 0, 0), level(), kDt);
    EXPECT_EQ(a.state.filtered.roll, 10.0);
    SensorReading bumped = level();
    bumped.accel.z() += 3;
    const ControllerOutput b = controller_update(s, plain, sticks(40, 10, 0, 0), bumped, kDt);
    EXPECT_EQ(a.motors, b.motors);
}

TEST(ControllerUpdate, Deterministic) {
    ControllerState s = armed_state(true);
    SensorReading r = level();
    r.gyro = {0.01, -0.02, 0.003};
    const auto a = controller_update(s, {}, sticks(50, 5, -7, 3), r, kDt);
    const auto b = controller_update(s, {}, sticks(50, 5, -7, 3), r, kDt);
    EXPECT_EQ(a.motors, b.motors);
    EXPECT_EQ(a.state.rate_integrator, b.state.rate_integrator);
}

TEST(FlightMode, Labels) {
    EXPECT_EQ(to_string(flight_mode(ControllerState{})), "safe");
    EXPECT_EQ(to_string(flight_mode(armed_state(false))), "rate");
    EXPECT_EQ(to_string(flight_mode(armed_state(true))), "selflevel");
}
