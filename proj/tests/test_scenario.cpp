#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "quadsim/scenario.hpp"
#include "support.hpp"

using namespace quadsim;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("quadsim_" + name + "_" + std::to_string(::getpid()));
    fs::create_directories(d / "sub");
    return d;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream os(p);
    os << text;
}

}  // namespace

TEST(Scenario, EmptyDocumentGivesDefaults) {
    const Scenario sc = parse_scenario(json::object());
    EXPECT_EQ(sc.dt, 0.002);
    EXPECT_EQ(sc.decimation, 10);
    EXPECT_EQ(sc.variant, ModelVariant::kCorrected);
    EXPECT_EQ(sc.controller, ControllerConfig{});
    EXPECT_EQ(sc.battery.cells, 3);
    EXPECT_EQ(sc.airframe.mass, 1.5);
    EXPECT_TRUE(sc.input.trace.empty());
}

TEST(Scenario, ShippedHoverLoads) {
    const Scenario sc = fixtures::hover_scenario();
    EXPECT_EQ(sc.duration, 50);
    EXPECT_EQ(sc.sensors.gyro_rms, 0.0);
    EXPECT_EQ(sc.sensors.vibration, 0.0);
    ASSERT_TRUE(sc.input.pilot);
    EXPECT_EQ(sc.input.pilot->target_altitude, 2.0);
    EXPECT_EQ(*sc.input.pilot->descend_at, 41.0);
    EXPECT_FALSE(sc.input.trace.empty());
    EXPECT_EQ(sc.controller, ControllerConfig{});
}

TEST(Scenario, UnknownKeysRejected) {
    EXPECT_THROW(parse_scenario(json{{"dt", 0.01}}), ValidationError);
    EXPECT_THROW(parse_scenario(json{{"airframe", {{"mass", 1.0}}}}), ValidationError);
    EXPECT_THROW(parse_scenario(json{{"input", {{"pilot", {{"height", 1}}}}}}), ValidationError);
    EXPECT_THROW(parse_scenario(json{{"controller", {{"settings", {{"roll_pp", 1}}}}}}), ValidationError);
}

TEST(Scenario, InvalidValuesRejected) {
    EXPECT_THROW(parse_scenario(json{{"dt_s", 0}}), ValidationError);
    EXPECT_THROW(parse_scenario(json{{"dt_s", 0.1}}), ValidationError);
    EXPECT_THROW(parse_scenario(json{{"duration_s", -1}}), ValidationError);
    EXPECT_THROW(parse_scenario(json{{"decimation", 0}}), ValidationError);
    EXPECT_THROW(parse_scenario(json{{"dt_s", "fast"}}), ValidationError);
    EXPECT_THROW(parse_scenario(json{{"variant", "exact"}}), ValidationError);
    EXPECT_THROW(parse_scenario(json{{"sensors", {{"vibration_mps2", -1}}}}), ValidationError);
    EXPECT_THROW(parse_scenario(json{{"airframe", {{"inertia_kgm2", {1, 2}}}}}), ValidationError);
    EXPECT_THROW(parse_scenario(json{{"input", {{"source", "joystick"}}}}), ValidationError);
    EXPECT_THROW(parse_scenario(json{{"input", {{"trace", {{0, 1, 2}}}}}}), ValidationError);
    EXPECT_THROW(parse_scenario(json{{"controller", {{"settings", {{"roll_p", 500}}}}}}), ValidationError);
}

TEST(Scenario, SettingsOverrideFileAndAcceptMixedTypes) {
    const json j = {{"controller",
                     {{"file", "config/controller_defaults.cfg"},
                      {"settings", {{"roll_p", 70}, {"auto_disarm", false}, {"self_level_source", "aux"}}}}},
                    {"variant", "as-printed"}};
    const Scenario sc = parse_scenario(j, QUADSIM_SOURCE_DIR);
    EXPECT_EQ(sc.controller.roll_p, 70);
    EXPECT_FALSE(sc.controller.auto_disarm);
    EXPECT_EQ(sc.controller.self_level_source, SelfLevelSource::kAux);
    EXPECT_EQ(sc.variant, ModelVariant::kAsPrinted);
}

TEST(Scenario, RelativePathsResolveAgainstScenarioFile) {
    const fs::path d = scratch_dir("paths");
    write_file(d / "sub" / "trace.csv", "t_s,throttle,roll,pitch,yaw,aux1\n0,0,0,0,0,0\n1,40,0,0,0,1\n");
    write_file(d / "gains.cfg", "yaw_p = 90\n");
    write_file(d / "sub" / "s.json",
               R"({"controller": {"file": "../gains.cfg"}, "input": {"trace_file": "trace.csv"}})");
    const Scenario sc = load_scenario((d / "sub" / "s.json").string());
    EXPECT_EQ(sc.controller.yaw_p, 90);
    ASSERT_EQ(sc.input.trace.rows().size(), 2u);
    EXPECT_EQ(sc.input.trace.at(0.5).throttle, 20.0);
    EXPECT_TRUE(sc.input.trace.at(1.0).aux1);
    fs::remove_all(d);
}

TEST(Scenario, FileErrors) {
    EXPECT_THROW(load_scenario("/nonexistent/scenario.json"), ValidationError);
    const fs::path d = scratch_dir("broken");
    write_file(d / "bad.json", "{\"dt_s\": ");
    EXPECT_THROW(load_scenario((d / "bad.json").string()), ValidationError);
    write_file(d / "missing_trace.json", R"({"input": {"trace_file": "nope.csv"}})");
    EXPECT_THROW(load_scenario((d / "missing_trace.json").string()), ValidationError);
    fs::remove_all(d);
}

TEST(Scenario, InlineTraceMatchesFileTrace) {
    json rows = json::array();
    rows.push_back({0, 0, 0, 0, 0, 0});
    rows.push_back({2, 50, 10, -10, 5, 1});
    json j;
    j["input"]["trace"] = rows;
    const Scenario sc = parse_scenario(j);
    const ChannelSet mid = sc.input.trace.at(1.0);
    EXPECT_EQ(mid.throttle, 25.0);
    EXPECT_EQ(mid.pitch, -5.0);
    EXPECT_FALSE(mid.aux1);
}

TEST(Scenario, ShippedLiveLoads) {
    const Scenario sc = load_scenario(fixtures::source_path("scenarios/live.json"));
    EXPECT_EQ(sc.input.source, InputSource::kLive);
    EXPECT_FALSE(sc.input.pilot);
    EXPECT_EQ(sc.sensors.gyro_rms, SensorNoise{}.gyro_rms);
}

TEST(Scenario, LiveSource) {
    const Scenario sc = parse_scenario(json{{"input", {{"source", "live"}}}});
    EXPECT_EQ(sc.input.source, InputSource::kLive);
}

TEST(Scenario, BatteryVoltageOverride) {
    const Scenario sc = parse_scenario(json{{"battery", {{"voltage_v", 7.4}}}});
    EXPECT_EQ(sc.battery.voltage, 7.4);
    EXPECT_EQ(sc.battery.remaining, 3.7);
}

TEST(Scenario, DigestStableAndSensitive) {
    const Scenario a = fixtures::hover_scenario();
    const Scenario b = fixtures::hover_scenario();
    EXPECT_EQ(scenario_digest(a), scenario_digest(b));
    Scenario c = a;
    c.seed = 2;
    EXPECT_NE(scenario_digest(a), scenario_digest(c));
    Scenario d = a;
    d.controller.roll_p = 51;
    EXPECT_NE(scenario_digest(a), scenario_digest(d));
}

TEST(Scenario, CanonicalJsonReparses) {
    const Scenario a = fixtures::hover_scenario();
    json j = scenario_to_json(a);
    j["battery"].erase("voltage_v");
    j["controller"] = {{"settings", j["controller"]["settings"]}};
    const Scenario b = parse_scenario(j);
    EXPECT_EQ(scenario_digest(a), scenario_digest(b));
}
