#pragma once

#include "ipnv/scenario_io.hpp"

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ipnv::cli {

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitIo = 2 };

/// Parses argv (argv[0] is the program name) and runs one subcommand.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct PairStats {
    std::size_t count = 0;
    double total_duration = 0.0;
};

struct PlanStats {
    std::map<std::pair<std::string, std::string>, PairStats> per_pair;
    std::size_t windows = 0;
    double total_duration = 0.0;
    double mean_duration = 0.0;
    double max_duration = 0.0;
    std::vector<double> midpoint_owlts; ///< plan order
    double min_owlt = 0.0;
    double mean_owlt = 0.0;
    double max_owlt = 0.0;
    std::size_t peak_simultaneous = 0;
};

PlanStats compute_stats(const ScenarioBundle& bundle);

/// Largest number of windows whose closed intervals share an instant.
std::size_t peak_simultaneous(const ContactPlan& plan);

struct ManifestRecord {
    std::string command;
    std::map<std::string, std::string> parameters;
    std::vector<std::filesystem::path> inputs;
    std::vector<std::filesystem::path> outputs;
    std::chrono::duration<double> duration{};
};

inline constexpr const char* kManifestFile = "run_manifest.json";
inline constexpr const char* kToolVersion = "0.1.0";

/// Writes run_manifest.json into `directory` with SHA-256 digests of every input.
void write_run_manifest(const std::filesystem::path& directory, const ManifestRecord& record);

std::string sha256_hex(std::string_view bytes);

/// Static bundle files plus GET /api/bundle, for the browser viewer.
class BundleServer {
public:
    /// Throws if the bundle does not load and validate.
    explicit BundleServer(std::filesystem::path bundle_dir, std::optional<std::filesystem::path> assets_dir = {});
    ~BundleServer();
    BundleServer(const BundleServer&) = delete;
    BundleServer& operator=(const BundleServer&) = delete;

    /// Binds the listening socket; port 0 picks a free port. Returns the bound
    /// port. Throws IoError when the port is unavailable.
    int bind(const std::string& host, int port);
    /// Blocks serving requests until stop() is called.
    void listen();
    void stop();

    /// Manifest served at /api/bundle.
    std::string manifest_json() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace ipnv::cli
