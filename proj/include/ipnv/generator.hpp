#pragma once

#include "ipnv/astro.hpp"
#include "ipnv/contacts.hpp"
#include "ipnv/scenario_io.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ipnv {

struct NodeDefinition {
    std::string id;
    std::string name;
    /// Orbiter elements relative to the host (mu = host mu), or a surface site.
    std::variant<KeplerianElements, GeodeticSite> placement;
};

struct PlanetDefinition {
    std::string name;
    double radius = 0.0;
    double mu = 0.0;
    KeplerianElements orbit; ///< heliocentric, mu = star mu
    RotationModel rotation;
    std::vector<NodeDefinition> nodes;
};

/// Generator input: the config plus everything needed to propagate bodies.
struct ScenarioDefinition {
    Epoch start{};
    Epoch end{};
    double step = 0.0;
    std::string star_name;
    double star_radius = 0.0;
    double star_mu = 0.0;
    std::vector<PlanetDefinition> planets;

    ScenarioConfig config() const;
    /// Config invariants plus element validity; orbiters must have a
    /// semi-major axis above their host radius.
    void validate() const;
};

/// Parses the scenario-definition JSON documented in docs/scenario-definition.md.
/// Angles in the file are degrees.
ScenarioDefinition read_definition(std::string_view bytes);

struct GenerateOptions {
    std::optional<double> refine_tolerance;
    bool light_time = false;
    double light_time_tolerance = kDefaultBisectionTolerance;
};

/// Recomputes the contact plan from the bundle's tables.
ContactPlan compute_plan(const ScenarioBundle& bundle, const GenerateOptions& options);

/// Samples every body on the scenario grid and detects contacts on the
/// resulting tables.
ScenarioBundle generate_bundle(const ScenarioDefinition& definition, const GenerateOptions& options);

} // namespace ipnv
