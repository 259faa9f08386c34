#pragma once

// Resultant blade-section velocity over a rotor disc in forward flight,
// U = omega * r + V * sin(azimuth), in feet per second.

#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <vector>

#include "quadsim/errors.hpp"

namespace quadsim {

constexpr double kMphPerKnot = 1.15077;
constexpr double kKnotsPerFtPerS = 0.5925;
constexpr double kScriptPi = 3.14;

struct BladeFieldSpec {
    double rpm = 1000.0;
    double forward_mph = 28.0;
    double radius_ft = 4.0 / 12.0;
    int grid_n = 100;
    // Reproduce the reference script: pi ~ 3.14 in omega, span and azimuth
    // advanced by repeated addition.
    bool appendix_pi = false;

    void validate() const {
        if (!(rpm >= 0)) throw ValidationError("bladefield: rpm must be >= 0");
        if (!(radius_ft > 0)) throw ValidationError("bladefield: radius must be > 0");
        if (grid_n < 2) throw ValidationError("bladefield: grid_n must be >= 2");
        if (!std::isfinite(forward_mph)) throw ValidationError("bladefield: forward speed must be finite");
    }
};

inline double rotor_omega(double rpm, bool appendix_pi) {
    return rpm * 2 * (appendix_pi ? kScriptPi : std::numbers::pi) / 60;
}

inline double forward_speed_ftps(double mph) { return mph / kMphPerKnot / kKnotsPerFtPerS; }

inline double blade_velocity(double y_ft, double azimuth, double rpm, double forward_mph, bool appendix_pi = false) {
    if (!(y_ft >= 0)) throw ValidationError("blade_velocity: span position must be >= 0");
    return rotor_omega(rpm, appendix_pi) * y_ft + forward_speed_ftps(forward_mph) * std::sin(azimuth);
}

struct BladeFieldPoint {
    double span_ft;
    double azimuth;
    double x_ft;
    double y_ft;
    double u_ftps;
};

/// Polar grid over span (0, R] x azimuth (0, 2pi]; span is the outer index.
inline std::vector<BladeFieldPoint> blade_velocity_field(const BladeFieldSpec& spec) {
    spec.validate();
    const int n = spec.grid_n;
    std::vector<BladeFieldPoint> out;
    out.reserve(static_cast<std::size_t>(n) * n);
    const double omega = rotor_omega(spec.rpm, spec.appendix_pi);
    const double v = forward_speed_ftps(spec.forward_mph);
    const double dspan = spec.radius_ft / n;
    const double dpsi = 2 * std::numbers::pi / n;
    double span = 0.0;
    double psi = 0.0;  // never reset between rows, as in the reference script
    for (int i = 1; i <= n; ++i) {
        span = spec.appendix_pi ? span + dspan : spec.radius_ft * i / n;
        for (int j = 1; j <= n; ++j) {
            psi = spec.appendix_pi ? psi + dpsi : 2 * std::numbers::pi * j / n;
            out.push_back({span, psi, span * std::cos(psi), span * std::sin(psi), omega * span + v * std::sin(psi)});
        }
    }
    return out;
}

/// Writes `x_ft,y_ft,u_ftps` rows; returns the number of data rows.
inline std::size_t write_blade_field_csv(std::ostream& os, const std::vector<BladeFieldPoint>& field) {
    os << "x_ft,y_ft,u_ftps\n";
    char buf[96];
    for (const auto& p : field) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p.x_ft, p.y_ft, p.u_ftps);
        os << buf;
    }
    return field.size();
}

}  // namespace quadsim
