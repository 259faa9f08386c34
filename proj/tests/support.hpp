#pragma once

#include <sstream>
#include <string>

#include "quadsim/scenario.hpp"
#include "quadsim/simulation.hpp"
#include "quadsim/telemetry.hpp"

namespace quadsim::fixtures {

inline std::string source_path(const std::string& rel) { return std::string(QUADSIM_SOURCE_DIR) + "/" + rel; }

inline Scenario hover_scenario() { return load_scenario(source_path("scenarios/hover.json")); }

// Hover scenario plus a forward (or backward) pitch input between 15 s and 18 s.
inline Scenario pitch_scenario(double pitch) {
    Scenario sc = hover_scenario();
    std::vector<TraceRow> rows;
    for (const TraceRow& r : sc.input.trace.rows()) {
        if (r.t > 15.0 && rows.back().t < 15.0) {
            rows.push_back({14.9, 50, 0, 0, 0, false});
            rows.push_back({15.0, 50, 0, pitch, 0, false});
            rows.push_back({18.0, 50, 0, pitch, 0, false});
            rows.push_back({18.1, 50, 0, 0, 0, false});
        }
        rows.push_back(r);
    }
    sc.input.trace = ChannelTrace(std::move(rows));
    return sc;
}

inline std::string to_csv(const FlightLog& log) {
    std::ostringstream os;
    csv_export(log, os);
    return os.str();
}

}  // namespace quadsim::fixtures
