#include "cli.hpp"

#include "ipnv/error.hpp"
#include "ipnv/generator.hpp"

#include "fixtures.hpp"

#include <gtest/gtest.h>
#include <httplib.h>
#include <json.hpp>

#include <sstream>
#include <thread>

using namespace ipnv;
using ipnv::testing::demo_definition;
using ipnv::testing::temp_dir;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int code = 0;
    std::string out;
    std::string err;
};

RunResult ipnv_run(std::vector<std::string> args)
{
    args.insert(args.begin(), "ipnv");
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

bool contains(const std::string& haystack, const std::string& needle)
{
    return haystack.find(needle) != std::string::npos;
}

/// Mars with two orbiters on opposite sides of the planet at the start.
std::string two_node_definition(double end = 3600, double step = 60, double orbiter_a = 9000)
{
    return R"({
  "Time": {"SimulationStartTime": 0, "SimulationEndTime": )" +
           std::to_string(end) + R"(, "Step": )" + std::to_string(step) + R"(},
  "Star": {"Name": "Sun", "Radius": 695700, "Mu": 132712440018},
  "Planets": [{
    "Name": "Mars", "Radius": 3389.5, "Mu": 42828.37,
    "Orbit": {"SemiMajorAxis": 227943822.4, "Eccentricity": 0.0934, "Inclination": 1.85, "RAAN": 49.56,
              "ArgPeriapsis": 286.5, "MeanAnomaly": 19.39, "Epoch": 0},
    "Rotation": {"Period": 88642.663, "Obliquity": 25.19, "NodeLongitude": 0, "RotationAtEpoch": 0, "Epoch": 0},
    "Nodes": [
      {"ID": "node_1", "Name": "Orbiter A",
       "Orbiter": {"SemiMajorAxis": )" +
           std::to_string(orbiter_a) + R"(, "Eccentricity": 0, "Inclination": 0, "RAAN": 0,
                   "ArgPeriapsis": 0, "MeanAnomaly": 0, "Epoch": 0}},
      {"ID": "node_2", "Name": "Orbiter B",
       "Orbiter": {"SemiMajorAxis": 20000, "Eccentricity": 0, "Inclination": 0, "RAAN": 0,
                   "ArgPeriapsis": 0, "MeanAnomaly": 180, "Epoch": 0}}
    ]
  }]
})";
}

fs::path generate_two_node(const std::string& name)
{
    const auto dir = temp_dir(name);
    write_file_atomic(dir / "definition.json", two_node_definition());
    const auto r = ipnv_run({"generate", (dir / "definition.json").string(), (dir / "bundle").string()});
    EXPECT_EQ(r.code, 0) << r.err;
    return dir / "bundle";
}

TEST(Generate, DemoFileCensus)
{
    const auto dir = temp_dir("cli_demo");
    const auto r = ipnv_run({"generate", demo_definition().string(), dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* name : {"config.json", "contactPlan.json", "Earth.json", "Mars.json", "dss14.json", "dss63.json",
                             "msl.json", "mro.json", "run_manifest.json"}) {
        EXPECT_TRUE(fs::exists(dir / name)) << name;
    }
    std::size_t json_files = 0;
    for (const auto& entry : fs::directory_iterator(dir)) {
        json_files += entry.path().extension() == ".json";
    }
    EXPECT_EQ(json_files, 9u);
    EXPECT_TRUE(contains(r.out, "bodies: 3 (1 star, 2 planets)"));
    EXPECT_TRUE(contains(r.out, "nodes: 4"));
    EXPECT_TRUE(contains(r.out, "steps: 1441"));

    const auto manifest = nlohmann::json::parse(read_file(dir / "run_manifest.json"));
    EXPECT_EQ(manifest["command"], "generate");
    EXPECT_EQ(manifest["inputs"][0]["sha256"], cli::sha256_hex(read_file(demo_definition())));
    EXPECT_EQ(manifest["outputs"].size(), 8u);
}

TEST(Generate, StepLargerThanSpanWarns)
{
    const auto dir = temp_dir("cli_bigstep");
    write_file_atomic(dir / "def.json", two_node_definition(100, 600));
    const auto r = ipnv_run({"generate", (dir / "def.json").string(), (dir / "b").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(contains(r.err, "warning"));
    const auto bundle = load_bundle(dir / "b");
    EXPECT_EQ(bundle.node_tables.at("node_1").size(), 2u);
    EXPECT_TRUE(bundle.contact_plan.empty());
}

TEST(Generate, OrbiterInsideHostRejected)
{
    const auto dir = temp_dir("cli_loworbit");
    write_file_atomic(dir / "def.json", two_node_definition(3600, 60, 3000));
    const auto r = ipnv_run({"generate", (dir / "def.json").string(), (dir / "b").string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_TRUE(contains(r.err, "node_1")) << r.err;
    EXPECT_FALSE(fs::exists(dir / "b" / "config.json"));
}

TEST(Generate, MissingDefinitionIsIoError)
{
    const auto dir = temp_dir("cli_nodef");
    EXPECT_EQ(ipnv_run({"generate", (dir / "nope.json").string(), (dir / "b").string()}).code, 2);
}

TEST(Generate, RefineAndLightTimeFlags)
{
    const auto dir = temp_dir("cli_flags");
    write_file_atomic(dir / "def.json", two_node_definition());
    ASSERT_EQ(ipnv_run({"generate", (dir / "def.json").string(), (dir / "plain").string()}).code, 0);
    ASSERT_EQ(ipnv_run({"generate", (dir / "def.json").string(), (dir / "fine").string(), "--refine", "0.5",
                        "--light-time"})
                  .code,
              0);
    const auto plain = load_bundle(dir / "plain");
    const auto fine = load_bundle(dir / "fine");
    ASSERT_FALSE(plain.contact_plan.empty());
    EXPECT_NE(plain.contact_plan, fine.contact_plan);
    EXPECT_EQ(ipnv_run({"contacts", (dir / "fine").string(), "--refine", "0.5", "--light-time", "--diff"}).code, 0);
}

TEST(Contacts, RerunGivesZeroDiff)
{
    const auto bundle = generate_two_node("cli_rerun");
    const auto r = ipnv_run({"contacts", bundle.string(), "--diff"});
    EXPECT_EQ(r.code, 0);
    EXPECT_TRUE(contains(r.out, "0 differences"));
}

TEST(Contacts, DeletedWindowReportedMissing)
{
    const auto dir = generate_two_node("cli_deleted");
    auto plan = read_contact_plan(read_file(dir / "contactPlan.json"));
    ASSERT_FALSE(plan.empty());
    plan.erase(plan.begin());
    write_file_atomic(dir / "contactPlan.json", write_contact_plan(plan));
    const auto r = ipnv_run({"contacts", dir.string(), "--diff"});
    EXPECT_EQ(r.code, 1);
    std::size_t missing = 0;
    std::istringstream lines(r.out);
    for (std::string line; std::getline(lines, line);) {
        missing += line.rfind("missing ", 0) == 0;
        EXPECT_NE(line.rfind("extra ", 0), 0u);
    }
    EXPECT_EQ(missing, 1u);

    EXPECT_EQ(ipnv_run({"contacts", dir.string()}).code, 0);
    EXPECT_EQ(ipnv_run({"contacts", dir.string(), "--diff"}).code, 0);
}

TEST(Contacts, CorruptNodeFileNamed)
{
    const auto dir = generate_two_node("cli_corrupt");
    write_file_atomic(dir / "node_2.json", "{\"Positions\": 7}");
    const auto r = ipnv_run({"contacts", dir.string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_TRUE(contains(r.err, "node_2.json")) << r.err;
}

TEST(Export, WritesBothFormats)
{
    const auto dir = generate_two_node("cli_export");
    const auto plan = read_contact_plan(read_file(dir / "contactPlan.json"));
    auto r = ipnv_run({"export", dir.string(), "--format", "ion"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(contains(r.out, "exported " + std::to_string(plan.size()) + " contacts"));
    const auto ion = read_file(dir / "contactPlan.ionrc");
    std::size_t contact_lines = 0;
    std::istringstream lines(ion);
    for (std::string line; std::getline(lines, line);) {
        contact_lines += line.rfind("a contact ", 0) == 0;
    }
    EXPECT_EQ(contact_lines, plan.size());

    r = ipnv_run({"export", dir.string(), "--format", "hdtn", "-o", (dir / "out.json").string(), "--rate", "2048",
                  "--node-number", "node_1=42"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(read_file(dir / "out.json"));
    EXPECT_EQ(j["contacts"].size(), plan.size());
    EXPECT_EQ(j["contacts"][0]["rate"], 2048);
    EXPECT_TRUE(j["contacts"][0]["source"] == 42 || j["contacts"][0]["dest"] == 42);
}

TEST(Export, UsageErrors)
{
    const auto dir = generate_two_node("cli_export_bad");
    EXPECT_EQ(ipnv_run({"export", dir.string(), "--format", "xml"}).code, 1);
    EXPECT_EQ(ipnv_run({"export", dir.string()}).code, 1);
    EXPECT_EQ(ipnv_run({"export", dir.string(), "--format", "ion", "--node-number", "node_1"}).code, 1);
    EXPECT_EQ(ipnv_run({"export", dir.string(), "--format", "ion", "--node-number", "node_1=0"}).code, 1);
    EXPECT_EQ(ipnv_run({"export", dir.string(), "--format", "ion", "--rate", "-5"}).code, 1);
    EXPECT_EQ(ipnv_run({"export", dir.string(), "--format", "ion", "--epoch", "1e9"}).code, 1);
    EXPECT_EQ(ipnv_run({"frobnicate"}).code, 1);
    EXPECT_EQ(ipnv_run({}).code, 1);
    EXPECT_EQ(ipnv_run({"--help"}).code, 0);
}

TEST(Export, EmptyPlan)
{
    const auto dir = generate_two_node("cli_export_empty");
    write_file_atomic(dir / "contactPlan.json", write_contact_plan({}));
    ASSERT_EQ(ipnv_run({"export", dir.string(), "--format", "ion"}).code, 0);
    EXPECT_EQ(read_file(dir / "contactPlan.ionrc"), "");
    ASSERT_EQ(ipnv_run({"export", dir.string(), "--format", "hdtn"}).code, 0);
    EXPECT_EQ(read_file(dir / "contactPlan.hdtn.json"), "{\n  \"contacts\": []\n}\n");
}

TEST(Validate, Outcomes)
{
    const auto dir = generate_two_node("cli_validate");
    auto r = ipnv_run({"validate", dir.string()});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "OK\n");

    const auto original_plan = read_file(dir / "contactPlan.json");
    auto plan = read_contact_plan(original_plan);
    ASSERT_FALSE(plan.empty());
    ContactWindow overlap = plan.front();
    overlap.start = overlap.start + 1;
    overlap.end = overlap.end + 1;
    plan.insert(plan.begin() + 1, overlap);
    write_file_atomic(dir / "contactPlan.json", write_contact_plan(plan));
    r = ipnv_run({"validate", dir.string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_TRUE(contains(r.err, "overlapping")) << r.err;
    write_file_atomic(dir / "contactPlan.json", original_plan);

    const auto node = read_file(dir / "node_1.json");
    std::string rotated = node;
    rotated.replace(rotated.find("\"PositionZ\""), 0, "\"RotationX\": 1, ");
    write_file_atomic(dir / "node_1.json", rotated);
    r = ipnv_run({"validate", dir.string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_TRUE(contains(r.err, "node_1.json")) << r.err;
    EXPECT_TRUE(contains(r.err, "rotation present on node file")) << r.err;

    fs::remove(dir / "node_1.json");
    EXPECT_EQ(ipnv_run({"validate", dir.string()}).code, 2);
}

TEST(Validate, ReportsEachBadFile)
{
    const auto dir = generate_two_node("cli_validate_multi");
    write_file_atomic(dir / "node_1.json", "[]");
    write_file_atomic(dir / "node_2.json", "[]");
    const auto r = ipnv_run({"validate", dir.string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_TRUE(contains(r.err, "node_1.json"));
    EXPECT_TRUE(contains(r.err, "node_2.json"));
}

ScenarioBundle stats_bundle(const ContactPlan& plan)
{
    std::mt19937_64 rng(1);
    auto def = ipnv::testing::random_definition(rng, 1, 2, 20);
    def.start = Epoch{0};
    def.step = 60;
    def.end = Epoch{1200};
    auto bundle = generate_bundle(def, {});
    bundle.contact_plan = plan;
    for (auto& w : bundle.contact_plan) {
        w.source_id = w.source_id == "a" ? "node_1" : "node_2";
        w.destination_id = w.destination_id == "a" ? "node_1" : "node_2";
    }
    return bundle;
}

TEST(Stats, SingleWindow)
{
    const auto s = cli::compute_stats(stats_bundle({{"a", "b", Epoch{0}, Epoch{600}, {}}}));
    EXPECT_EQ(s.windows, 1u);
    EXPECT_EQ(s.total_duration, 600.0);
    EXPECT_EQ(s.peak_simultaneous, 1u);
    EXPECT_EQ(s.per_pair.size(), 1u);
}

TEST(Stats, OverlapPeak)
{
    const ContactPlan plan = {{"a", "b", Epoch{0}, Epoch{600}, {}}, {"b", "a", Epoch{300}, Epoch{900}, {}}};
    EXPECT_EQ(cli::peak_simultaneous(plan), 2u);
    const ContactPlan touching = {{"a", "b", Epoch{0}, Epoch{600}, {}}, {"b", "a", Epoch{600}, Epoch{900}, {}}};
    EXPECT_EQ(cli::peak_simultaneous(touching), 2u);
    const ContactPlan apart = {{"a", "b", Epoch{0}, Epoch{600}, {}}, {"b", "a", Epoch{601}, Epoch{900}, {}}};
    EXPECT_EQ(cli::peak_simultaneous(apart), 1u);
    EXPECT_EQ(cli::peak_simultaneous({}), 0u);
}

TEST(Stats, CommandPrintsSummary)
{
    const auto dir = generate_two_node("cli_stats");
    const auto r = ipnv_run({"stats", dir.string()});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(contains(r.out, "windows: "));
    EXPECT_TRUE(contains(r.out, "peak simultaneous windows: "));
}

TEST(Manifest, Sha256KnownVector)
{
    EXPECT_EQ(cli::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

struct RunningServer {
    cli::BundleServer server;
    int port = 0;
    std::thread thread;

    explicit RunningServer(const fs::path& dir) : server(dir)
    {
        port = server.bind("127.0.0.1", 0);
        thread = std::thread([this] { server.listen(); });
    }
    ~RunningServer()
    {
        server.stop();
        thread.join();
    }
};

TEST(Serve, ServesExactBytesAndManifest)
{
    const auto dir = generate_two_node("cli_serve");
    RunningServer srv(dir);
    httplib::Client client("127.0.0.1", srv.port);

    const auto config = client.Get("/config.json");
    ASSERT_TRUE(config);
    EXPECT_EQ(config->status, 200);
    EXPECT_EQ(config->body, read_file(dir / "config.json"));
    EXPECT_EQ(config->get_header_value("Access-Control-Allow-Origin"), "*");

    const auto node = client.Get("/node_2.json");
    ASSERT_TRUE(node);
    EXPECT_EQ(node->body, read_file(dir / "node_2.json"));

    const auto api = client.Get("/api/bundle");
    ASSERT_TRUE(api);
    const auto manifest = nlohmann::json::parse(api->body);
    EXPECT_EQ(manifest["files"], nlohmann::json::parse(
                                     R"(["config.json", "contactPlan.json", "Mars.json", "node_1.json", "node_2.json"])"));
    EXPECT_EQ(manifest["config"], nlohmann::json::parse(read_file(dir / "config.json")));

    const auto other = client.Get("/run_manifest.json");
    ASSERT_TRUE(other);
    EXPECT_EQ(other->status, 404);
    const auto escape = client.Get("/..%2Fdefinition.json");
    ASSERT_TRUE(escape);
    EXPECT_EQ(escape->status, 404);
}

TEST(Serve, InvalidBundleRefusesToStart)
{
    const auto dir = generate_two_node("cli_serve_bad");
    write_file_atomic(dir / "Mars.json", "{}");
    EXPECT_THROW(cli::BundleServer server(dir), ValidationError);
    EXPECT_EQ(ipnv_run({"serve", dir.string(), "--port", "0"}).code, 1);
}

TEST(Serve, PortInUseIsError)
{
    const auto dir = generate_two_node("cli_serve_busy");
    RunningServer first(dir);
    cli::BundleServer second(dir);
    EXPECT_THROW(second.bind("127.0.0.1", first.port), IoError);
    EXPECT_EQ(ipnv_run({"serve", dir.string(), "--port", std::to_string(first.port)}).code, 2);
}

} // namespace
