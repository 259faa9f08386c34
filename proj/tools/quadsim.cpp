// quadsim command line: scenario runs, live server, blade field, receiver
// test and endurance estimate.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "quadsim/analysis.hpp"
#include "quadsim/blade_field.hpp"
#include "quadsim/channel_trace.hpp"
#include "quadsim/simulation.hpp"
#include "quadsim/ws_server.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitValidation = 2;

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

int cmd_run(const std::string& scenario_path, const std::string& out, std::optional<long long> seed,
            std::optional<std::string> variant) {
    quadsim::Scenario sc = quadsim::load_scenario(scenario_path);
    if (seed) sc.seed = static_cast<std::uint64_t>(*seed);
    if (variant) sc.variant = quadsim::parse_variant(*variant);
    const auto t0 = std::chrono::steady_clock::now();
    const quadsim::FlightLog log = quadsim::run_scenario(sc);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const std::size_t bytes = quadsim::csv_export(log, out);
    const auto& last = log.records.back();
    std::printf("%zu records, %zu bytes -> %s (%.2f s wall)\n", log.records.size(), bytes, out.c_str(), wall);
    std::printf("final: z %.3f m  vbatt %.3f V  remaining %.4f Ah  %s\n", last.position[2], last.vbatt, last.remaining,
                last.armed ? "armed" : "disarmed");
    return kExitOk;
}

int cmd_serve(const std::string& scenario_path, int port, double rate_hz, const std::string& host) {
    if (port < 0 || port > 65535) throw quadsim::ValidationError("serve: port must be in [0, 65535]");
    quadsim::LiveSession session(quadsim::load_scenario(scenario_path));
    quadsim::WsServer server(session, static_cast<unsigned short>(port), rate_hz, host);
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    server.start();
    std::printf("serving ws://%s:%u at %.0f Hz (Ctrl-C to stop)\n", host.c_str(), server.port(), rate_hz);
    std::fflush(stdout);
    while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    server.stop();
    return kExitOk;
}

int cmd_bladefield(double rpm, double vmph, double radius_ft, int n, const std::string& out, bool appendix_pi) {
    quadsim::BladeFieldSpec spec;
    spec.rpm = rpm;
    spec.forward_mph = vmph;
    spec.radius_ft = radius_ft;
    spec.grid_n = n;
    spec.appendix_pi = appendix_pi;
    const auto field = quadsim::blade_velocity_field(spec);
    std::ofstream os(out, std::ios::binary);
    if (!os) throw quadsim::ValidationError("cannot write '" + out + "'");
    quadsim::write_blade_field_csv(os, field);
    double lo = field.front().u_ftps, hi = lo;
    for (const auto& p : field) {
        lo = std::min(lo, p.u_ftps);
        hi = std::max(hi, p.u_ftps);
    }
    std::printf("%zu points -> %s, U in [%.3f, %.3f] ft/s\n", field.size(), out.c_str(), lo, hi);
    return kExitOk;
}

int cmd_receiver_test(const std::string& trace_path) {
    const quadsim::ChannelTrace trace = quadsim::load_channel_trace(trace_path);
    quadsim::TravelCheck travel;
    bool exceeded = false;
    std::printf("%8s  %-8s %-16s %-16s %-16s %-4s %s\n", "t_s", "throttle", "roll", "pitch", "yaw", "aux", "zone");
    for (const auto& row : trace.rows()) {
        const quadsim::ChannelSet ch = trace.at(row.t);
        travel.add(ch);
        const quadsim::ReceiverReport rep = quadsim::receiver_test(ch);
        char axes[3][32];
        for (std::size_t i = 0; i < 3; ++i) {
            const auto& a = rep.axes[i];
            std::snprintf(axes[i], sizeof axes[i], "%7.1f %s%s", a.value, a.direction.c_str(),
                          a.exceeds_limit ? " !" : "");
        }
        std::printf("%8.3f  %-8s %-16s %-16s %-16s %-4s %s\n", row.t, rep.throttle_label.c_str(), axes[0], axes[1],
                    axes[2], rep.aux_label.c_str(), rep.zone_label().c_str());
        exceeded = exceeded || rep.any_axis_exceeded();
    }
    const char* names[] = {"roll", "pitch", "yaw"};
    for (std::size_t i = 0; i < 3; ++i) {
        std::printf("%-5s travel [%.1f, %.1f]: %s\n", names[i], travel.min(i), travel.max(i),
                    quadsim::to_string(travel.status(i)));
    }
    if (exceeded) std::printf("WARNING: stick travel beyond 110; reduce transmitter endpoints\n");
    return kExitOk;
}

int cmd_endurance(double capacity_ah, double current_a, double k) {
    const quadsim::EnduranceResult r = quadsim::endurance_sim(capacity_ah, current_a, k);
    if (r.alarm_min) {
        std::printf("low-voltage alarm: %.2f min\n", *r.alarm_min);
    } else {
        std::printf("low-voltage alarm: never\n");
    }
    std::printf("brownout:          %.2f min\n", r.brownout_min);
    std::printf("depletion:         %.2f min\n", r.depletion_min);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quadcopter flight simulator with KK2-style controller emulation"};
    app.require_subcommand(1);

    std::string scenario, out, trace, host = "127.0.0.1";
    std::optional<long long> seed;
    std::optional<std::string> variant;
    int port = 8765, grid_n = 100;
    double rate_hz = 20, rpm = 1000, vmph = 28, radius_ft = 4.0 / 12.0, capacity = 0, current = 0, k = 1;
    bool appendix_pi = false;

    auto* run = app.add_subcommand("run", "run a trace-driven scenario and write the telemetry CSV");
    run->add_option("--scenario", scenario, "scenario JSON")->required();
    run->add_option("--out", out, "telemetry CSV")->required();
    run->add_option("--seed", seed, "override the scenario seed");
    run->add_option("--variant", variant, "model variant")->check(CLI::IsMember({"corrected", "as-printed"}));

    auto* serve = app.add_subcommand("serve", "run the live WebSocket session");
    serve->add_option("--scenario", scenario, "scenario JSON")->required();
    serve->add_option("--port", port, "TCP port (0 picks one)");
    serve->add_option("--rate-hz", rate_hz, "telemetry rate, 1..100");
    serve->add_option("--host", host, "listen address");

    auto* blade = app.add_subcommand("bladefield", "rotor blade velocity field CSV");
    blade->add_option("--rpm", rpm);
    blade->add_option("--vmph", vmph, "forward speed, mph");
    blade->add_option("--radius-ft", radius_ft);
    blade->add_option("--n", grid_n, "grid points per axis");
    blade->add_option("--out", out)->required();
    blade->add_flag("--appendix-pi", appendix_pi, "reproduce the reference script (pi = 3.14, accumulated grid)");

    auto* rx = app.add_subcommand("receiver-test", "replay a channel trace through the receiver test screen");
    rx->add_option("--trace", trace, "channel trace CSV")->required();

    auto* endurance = app.add_subcommand("endurance", "constant-draw flight time");
    endurance->add_option("--capacity-ah", capacity)->required();
    endurance->add_option("--current-a", current)->required();
    endurance->add_option("--k", k, "Peukert exponent");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (*run) return cmd_run(scenario, out, seed, variant);
        if (*serve) return cmd_serve(scenario, port, rate_hz, host);
        if (*blade) return cmd_bladefield(rpm, vmph, radius_ft, grid_n, out, appendix_pi);
        if (*rx) return cmd_receiver_test(trace);
        if (*endurance) return cmd_endurance(capacity, current, k);
    } catch (const quadsim::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitValidation;
    } catch (const quadsim::NumericalError& e) {
        std::fprintf(stderr, "error: %s (record %zu)\n", e.what(), e.record_index());
        return kExitFailure;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitFailure;
    }
    return kExitFailure;
}
