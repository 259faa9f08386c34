#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "quadsim/controller.hpp"
#include "quadsim/errors.hpp"

namespace quadsim {

inline constexpr const char* kTelemetryHeader =
    "t_s,x_m,y_m,z_m,roll_rad,pitch_rad,yaw_rad,p_rads,q_rads,r_rads,thr1_n,thr2_n,thr3_n,thr4_n,vbatt_v,ibatt_a,"
    "remaining_ah,armed,mode";

struct TelemetryRecord {
    double t = 0.0;
    std::array<double, 3> position{};
    std::array<double, 3> attitude{};  // roll, pitch, yaw
    std::array<double, 3> rates{};
    std::array<double, 4> thrust{};
    double vbatt = 0.0;
    double ibatt = 0.0;
    double remaining = 0.0;
    bool armed = false;
    FlightMode mode = FlightMode::kSafe;

    bool operator==(const TelemetryRecord&) const = default;
};

struct FlightLog {
    double record_interval = 0.0;  // dt * decimation
    std::uint64_t scenario_digest = 0;
    std::vector<TelemetryRecord> records;
};

namespace telemetry_detail {

inline void put(std::string& out, double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, ptr);
}

inline double take(std::string_view s, int lineno) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ValidationError("telemetry csv line " + std::to_string(lineno) + ": bad number '" + std::string(s) + "'");
    }
    return v;
}

inline FlightMode parse_mode(std::string_view s, int lineno) {
    if (s == "safe") return FlightMode::kSafe;
    if (s == "rate") return FlightMode::kRate;
    if (s == "selflevel") return FlightMode::kSelfLevel;
    throw ValidationError("telemetry csv line " + std::to_string(lineno) + ": unknown mode");
}

}  // namespace telemetry_detail

/// One CSV row, no trailing newline. Numbers use the shortest form that
/// reads back to the same double.
inline std::string format_record(const TelemetryRecord& r) {
    using telemetry_detail::put;
    std::string line;
    line.reserve(320);
    put(line, r.t);
    for (double v : r.position) line += ',', put(line, v);
    for (double v : r.attitude) line += ',', put(line, v);
    for (double v : r.rates) line += ',', put(line, v);
    for (double v : r.thrust) line += ',', put(line, v);
    line += ',', put(line, r.vbatt);
    line += ',', put(line, r.ibatt);
    line += ',', put(line, r.remaining);
    line += r.armed ? ",1," : ",0,";
    line += to_string(r.mode);
    return line;
}

/// Writes the telemetry CSV; returns the number of bytes written.
inline std::size_t csv_export(const FlightLog& log, std::ostream& os) {
    std::size_t bytes = 0;
    auto emit = [&](const std::string& s) {
        os << s << '\n';
        bytes += s.size() + 1;
    };
    emit(kTelemetryHeader);
    for (const auto& r : log.records) emit(format_record(r));
    if (!os) throw std::runtime_error("telemetry csv: write failed");
    return bytes;
}

inline std::size_t csv_export(const FlightLog& log, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ValidationError("cannot write telemetry csv '" + path + "'");
    return csv_export(log, os);
}

inline FlightLog csv_import(std::istream& in) {
    using telemetry_detail::take;
    std::string line;
    if (!std::getline(in, line) || line != kTelemetryHeader) {
        throw ValidationError("telemetry csv: missing or wrong header");
    }
    FlightLog log;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string_view> cols;
        std::string_view rest(line);
        while (true) {
            auto comma = rest.find(',');
            cols.push_back(rest.substr(0, comma));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (cols.size() != 19) {
            throw ValidationError("telemetry csv line " + std::to_string(lineno) + ": expected 19 columns");
        }
        TelemetryRecord r;
        std::size_t c = 0;
        r.t = take(cols[c++], lineno);
        for (double& v : r.position) v = take(cols[c++], lineno);
        for (double& v : r.attitude) v = take(cols[c++], lineno);
        for (double& v : r.rates) v = take(cols[c++], lineno);
        for (double& v : r.thrust) v = take(cols[c++], lineno);
        r.vbatt = take(cols[c++], lineno);
        r.ibatt = take(cols[c++], lineno);
        r.remaining = take(cols[c++], lineno);
        r.armed = cols[c++] == "1";
        r.mode = telemetry_detail::parse_mode(cols[c++], lineno);
        log.records.push_back(r);
    }
    if (log.records.size() >= 2) log.record_interval = log.records[1].t - log.records[0].t;
    return log;
}

}  // namespace quadsim
