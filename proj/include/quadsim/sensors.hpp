#pragma once

// IMU model: true body rates and specific force plus white noise and a
// motor-synchronous vibration sinusoid.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "quadsim/controller.hpp"
#include "quadsim/dynamics.hpp"

namespace quadsim {

struct SensorNoise {
    double gyro_rms = 0.005;   // rad/s
    double accel_rms = 0.05;   // m/s^2
    double vibration = 0.5;    // m/s^2 amplitude at the accelerometer

    static SensorNoise none() { return {0.0, 0.0, 0.0}; }

    void validate() const {
        if (!(gyro_rms >= 0) || !(accel_rms >= 0) || !(vibration >= 0)) {
            throw ValidationError("sensors: noise levels and vibration amplitude must be >= 0");
        }
    }
};

// Gyro pickup per unit of accelerometer vibration, rad/s per m/s^2.
constexpr double kGyroVibrationCoupling = 0.02;

/// Specific force in body axes for a given world-frame acceleration.
inline Eigen::Vector3d specific_force(const Attitude& att, const Eigen::Vector3d& world_accel, double gravity) {
    return body_to_world(att).transpose() * (world_accel + Eigen::Vector3d(0, 0, gravity));
}

class SensorModel {
public:
    SensorModel(SensorNoise noise, std::uint64_t seed) : noise_(noise), rng_(seed) { noise_.validate(); }

    /// `rpm` drives the vibration frequency; the vibration phase advances by
    /// dt after the sample is taken.
    SensorReading read(const RigidBodyState& s, const Eigen::Vector3d& world_accel, double gravity, double rpm,
                       double dt) {
        SensorReading r;
        r.gyro = {s.rates.roll, s.rates.pitch, s.rates.yaw};
        r.accel = specific_force(s.attitude, world_accel, gravity);

        const double vib = noise_.vibration * std::sin(phase_);
        r.accel += vib * Eigen::Vector3d(0.3, 0.3, 1.0);
        r.gyro += vib * kGyroVibrationCoupling * Eigen::Vector3d(1.0, 0.8, 0.3);
        for (int i = 0; i < 3; ++i) {
            r.gyro[i] += noise_.gyro_rms * normal_(rng_);
            r.accel[i] += noise_.accel_rms * normal_(rng_);
        }
        phase_ = std::fmod(phase_ + 2 * std::numbers::pi * rpm / 60.0 * dt, 2 * std::numbers::pi);
        return r;
    }

    const SensorNoise& noise() const { return noise_; }

private:
    SensorNoise noise_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    double phase_ = 0.0;
};

}  // namespace quadsim
