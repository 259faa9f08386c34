#pragma once

// Scripted stick input: CSV `t_s,throttle,roll,pitch,yaw,aux1`, channel
// units, non-decreasing time. Sticks are interpolated linearly between rows;
// aux1 holds the value of the most recent row.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "quadsim/errors.hpp"
#include "quadsim/radio.hpp"

namespace quadsim {

inline constexpr const char* kTraceHeader = "t_s,throttle,roll,pitch,yaw,aux1";

struct TraceRow {
    double t = 0.0;
    double throttle = 0.0;
    double roll = 0.0;
    double pitch = 0.0;
    double yaw = 0.0;
    bool aux1 = false;

    bool operator==(const TraceRow&) const = default;
};

class ChannelTrace {
public:
    ChannelTrace() = default;

    explicit ChannelTrace(std::vector<TraceRow> rows) : rows_(std::move(rows)) {
        for (std::size_t i = 1; i < rows_.size(); ++i) {
            if (rows_[i].t < rows_[i - 1].t) throw ValidationError("channel trace: t_s must be non-decreasing");
        }
    }

    bool empty() const { return rows_.empty(); }
    const std::vector<TraceRow>& rows() const { return rows_; }

    ChannelSet at(double t) const {
        ChannelSet ch;
        if (rows_.empty()) return ch;
        auto to_set = [](const TraceRow& r) {
            ChannelSet c;
            c.throttle = r.throttle;
            c.roll = r.roll;
            c.pitch = r.pitch;
            c.yaw = r.yaw;
            c.aux1 = r.aux1;
            return c;
        };
        if (t <= rows_.front().t) return to_set(rows_.front());
        if (t >= rows_.back().t) return to_set(rows_.back());
        auto hi = std::upper_bound(rows_.begin(), rows_.end(), t, [](double v, const TraceRow& r) { return v < r.t; });
        const TraceRow& b = *hi;
        const TraceRow& a = *(hi - 1);
        const double span = b.t - a.t;
        const double w = span > 0 ? (t - a.t) / span : 1.0;
        auto lerp = [w](double x, double y) { return x + w * (y - x); };
        ch.throttle = lerp(a.throttle, b.throttle);
        ch.roll = lerp(a.roll, b.roll);
        ch.pitch = lerp(a.pitch, b.pitch);
        ch.yaw = lerp(a.yaw, b.yaw);
        ch.aux1 = a.aux1;
        return ch;
    }

private:
    std::vector<TraceRow> rows_;
};

namespace trace_detail {

inline double parse_field(const std::string& text, int lineno) {
    double v = 0;
    const char* b = text.data();
    const char* e = b + text.size();
    while (b < e && *b == ' ') ++b;
    while (e > b && (e[-1] == ' ' || e[-1] == '\r')) --e;
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc{} || ptr != e) {
        throw ValidationError("channel trace line " + std::to_string(lineno) + ": bad number '" + text + "'");
    }
    return v;
}

inline bool parse_aux(const std::string& text, int lineno) {
    std::string t;
    for (char c : text) {
        if (c != ' ' && c != '\r') t += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    if (t == "ON") return true;
    if (t == "OFF") return false;
    return parse_field(text, lineno) > 0;
}

}  // namespace trace_detail

inline ChannelTrace parse_channel_trace(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("channel trace: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kTraceHeader) {
        throw ValidationError(std::string("channel trace: header must be '") + kTraceHeader + "'");
    }
    std::vector<TraceRow> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cols.push_back(cell);
        if (cols.size() != 6) {
            throw ValidationError("channel trace line " + std::to_string(lineno) + ": expected 6 columns");
        }
        TraceRow r;
        r.t = trace_detail::parse_field(cols[0], lineno);
        r.throttle = trace_detail::parse_field(cols[1], lineno);
        r.roll = trace_detail::parse_field(cols[2], lineno);
        r.pitch = trace_detail::parse_field(cols[3], lineno);
        r.yaw = trace_detail::parse_field(cols[4], lineno);
        r.aux1 = trace_detail::parse_aux(cols[5], lineno);
        rows.push_back(r);
    }
    return ChannelTrace(std::move(rows));
}

inline ChannelTrace load_channel_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open channel trace '" + path + "'");
    return parse_channel_trace(in);
}

}  // namespace quadsim
