#pragma once

#include "ipnv/astro.hpp"
#include "ipnv/contacts.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ipnv {

struct NodeInfo {
    std::string id;
    std::string name;

    bool operator==(const NodeInfo&) const = default;
};

struct PlanetInfo {
    std::string name;
    double radius = 0.0;
    std::vector<NodeInfo> nodes;

    bool operator==(const PlanetInfo&) const = default;
};

struct StarInfo {
    std::string name;
    double radius = 0.0;

    bool operator==(const StarInfo&) const = default;
};

/// Contents of config.json.
struct ScenarioConfig {
    Epoch start{};
    Epoch end{};
    double step = 0.0;
    StarInfo star;
    std::vector<PlanetInfo> planets;

    bool operator==(const ScenarioConfig&) const = default;

    /// Throws ValidationError naming the first violated invariant.
    void validate() const;
    /// Node ids in declaration order (planet by planet).
    std::vector<std::string> node_ids() const;
    /// Name of the planet hosting `node_id`, if any.
    std::optional<std::string> host_of(const std::string& node_id) const;
};

enum class EphemerisKind { planet, node };

/// Allowed drift between consecutive sample deltas and the declared step.
inline constexpr double kStepTolerance = 1e-6;

ScenarioConfig read_config(std::string_view bytes);
std::string write_config(const ScenarioConfig& config);

/// Entry-level validation only; see check_plan for per-pair ordering.
ContactPlan read_contact_plan(std::string_view bytes);
std::string write_contact_plan(const ContactPlan& plan);

/// When `step` is given, every interval but the last must equal it and the
/// last may be shorter. Otherwise the step is taken from the first interval.
EphemerisTable read_ephemeris(std::string_view bytes, EphemerisKind kind, std::optional<double> step = {});
std::string write_ephemeris(const EphemerisTable& table, EphemerisKind kind);

inline constexpr std::string_view kConfigFile = "config.json";
inline constexpr std::string_view kContactPlanFile = "contactPlan.json";

std::string planet_file_name(const std::string& planet);
std::string node_file_name(const std::string& node_id);

struct ScenarioBundle {
    ScenarioConfig config;
    ContactPlan contact_plan;
    std::map<std::string, EphemerisTable> planet_tables;
    std::map<std::string, EphemerisTable> node_tables;

    bool operator==(const ScenarioBundle&) const = default;
};

/// Bundle file names: config, contact plan, then planets and nodes in
/// declaration order.
std::vector<std::string> bundle_file_names(const ScenarioConfig& config);

/// Cross-checks: tables for every body, tables spanning [start, end] on the
/// configured step, a shared time grid, known contact ids and a well-formed plan.
void check_bundle(const ScenarioBundle& bundle);

/// Reads and fully validates a scenario directory. Missing files raise
/// IoError; content problems raise ValidationError prefixed by the file name.
/// With `with_contact_plan` false, contactPlan.json is neither read nor
/// required and the returned plan is empty.
ScenarioBundle load_bundle(const std::filesystem::path& directory, bool with_contact_plan = true);

/// Writes every bundle file; each file is replaced atomically.
void store_bundle(const ScenarioBundle& bundle, const std::filesystem::path& directory);

/// Writes only contactPlan.json into an existing bundle directory.
void store_contact_plan(const ContactPlan& plan, const std::filesystem::path& directory);

/// Scene for contact detection built from the bundle's tables.
ContactScene make_scene(const ScenarioBundle& bundle);

std::string read_file(const std::filesystem::path& path);
/// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

} // namespace ipnv
