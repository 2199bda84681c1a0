#include "ipnv/generator.hpp"

#include "ipnv/error.hpp"
#include "json_util.hpp"
#include "parallel.hpp"

#include <cmath>
#include <memory>

namespace ipnv {

using detail::child_path;
using detail::json;

namespace {

double optional_number(const json& obj, std::string_view key, const std::string& path, double fallback)
{
    return obj.contains(key) ? detail::require_number(obj, key, path) : fallback;
}

KeplerianElements read_orbit(const json& obj, const std::string& path, double mu)
{
    detail::expect_object(obj, path);
    KeplerianElements el;
    el.semi_major_axis = detail::require_number(obj, "SemiMajorAxis", path);
    el.eccentricity = detail::require_number(obj, "Eccentricity", path);
    el.inclination = optional_number(obj, "Inclination", path, 0.0) * kRadPerDeg;
    el.raan = optional_number(obj, "RAAN", path, 0.0) * kRadPerDeg;
    el.arg_periapsis = optional_number(obj, "ArgPeriapsis", path, 0.0) * kRadPerDeg;
    el.mean_anomaly_at_epoch = optional_number(obj, "MeanAnomaly", path, 0.0) * kRadPerDeg;
    el.epoch = Epoch{optional_number(obj, "Epoch", path, 0.0)};
    el.mu = mu;
    return el.normalized();
}

RotationModel read_rotation(const json& obj, const std::string& path)
{
    detail::expect_object(obj, path);
    RotationModel r;
    r.period = detail::require_number(obj, "Period", path);
    r.obliquity = optional_number(obj, "Obliquity", path, 0.0) * kRadPerDeg;
    r.node_longitude = optional_number(obj, "NodeLongitude", path, 0.0) * kRadPerDeg;
    r.rotation_at_epoch = optional_number(obj, "RotationAtEpoch", path, 0.0) * kRadPerDeg;
    r.epoch = Epoch{optional_number(obj, "Epoch", path, 0.0)};
    return r;
}

GeodeticSite read_site(const json& obj, const std::string& path)
{
    detail::expect_object(obj, path);
    GeodeticSite site;
    site.latitude = detail::require_number(obj, "Latitude", path) * kRadPerDeg;
    double lon = wrap_two_pi(detail::require_number(obj, "Longitude", path) * kRadPerDeg);
    if (lon > std::numbers::pi) {
        lon -= kTwoPi;
    }
    site.longitude = lon;
    site.altitude = optional_number(obj, "Altitude", path, 0.0);
    return site;
}

template <typename Fn>
void at_path(const std::string& path, Fn&& fn)
{
    try {
        fn();
    } catch (const DomainError& e) {
        throw ValidationError(path, e.what());
    }
}

} // namespace

ScenarioConfig ScenarioDefinition::config() const
{
    ScenarioConfig c;
    c.start = start;
    c.end = end;
    c.step = step;
    c.star = {star_name, star_radius};
    for (const auto& p : planets) {
        PlanetInfo info{p.name, p.radius, {}};
        for (const auto& n : p.nodes) {
            info.nodes.push_back({n.id, n.name});
        }
        c.planets.push_back(std::move(info));
    }
    return c;
}

void ScenarioDefinition::validate() const
{
    config().validate();
    if (!(std::isfinite(star_mu) && star_mu > 0.0)) {
        throw ValidationError("/Star/Mu", "Mu must be positive");
    }
    for (std::size_t p = 0; p < planets.size(); ++p) {
        const auto& planet = planets[p];
        const std::string path = child_path("/Planets", p);
        if (!(std::isfinite(planet.mu) && planet.mu > 0.0)) {
            throw ValidationError(path + "/Mu", "Mu must be positive");
        }
        at_path(path + "/Orbit", [&] { planet.orbit.validate(); });
        at_path(path + "/Rotation", [&] { planet.rotation.validate(); });
        for (std::size_t n = 0; n < planet.nodes.size(); ++n) {
            const auto& node = planet.nodes[n];
            const std::string npath = child_path(path + "/Nodes", n) + " (" + node.id + ")";
            if (const auto* orbit = std::get_if<KeplerianElements>(&node.placement)) {
                at_path(npath, [&] { orbit->validate(); });
                if (!(orbit->semi_major_axis > planet.radius)) {
                    throw ValidationError(npath, "orbiter semi-major axis " + std::to_string(orbit->semi_major_axis) +
                                                     " km is not above host radius " +
                                                     std::to_string(planet.radius) + " km");
                }
            } else {
                at_path(npath, [&] { std::get<GeodeticSite>(node.placement).validate(); });
            }
        }
    }
}

ScenarioDefinition read_definition(std::string_view bytes)
{
    const json root = detail::parse_json(bytes);
    ScenarioDefinition def;

    const json& time = detail::require_object(root, "Time", "");
    def.start = Epoch{detail::require_number(time, "SimulationStartTime", "/Time")};
    def.end = Epoch{detail::require_number(time, "SimulationEndTime", "/Time")};
    def.step = detail::require_number(time, "Step", "/Time");

    const json& star = detail::require_object(root, "Star", "");
    def.star_name = detail::require_string(star, "Name", "/Star");
    def.star_radius = detail::require_number(star, "Radius", "/Star");
    def.star_mu = detail::require_number(star, "Mu", "/Star");

    const json& planets = detail::require_array(root, "Planets", "");
    for (std::size_t p = 0; p < planets.size(); ++p) {
        const std::string path = child_path("/Planets", p);
        const json& pj = planets[p];
        PlanetDefinition planet;
        planet.name = detail::require_string(pj, "Name", path);
        planet.radius = detail::require_number(pj, "Radius", path);
        planet.mu = detail::require_number(pj, "Mu", path);
        planet.orbit = read_orbit(detail::require(pj, "Orbit", path), path + "/Orbit", def.star_mu);
        planet.rotation = read_rotation(detail::require(pj, "Rotation", path), path + "/Rotation");

        const json& nodes = detail::require_array(pj, "Nodes", path);
        for (std::size_t n = 0; n < nodes.size(); ++n) {
            const std::string npath = child_path(path + "/Nodes", n);
            const json& nj = nodes[n];
            NodeDefinition node;
            node.id = detail::require_string(nj, "ID", npath);
            node.name = detail::require_string(nj, "Name", npath);
            const bool orbiter = nj.contains("Orbiter");
            const bool lander = nj.contains("Lander");
            if (orbiter == lander) {
                throw ValidationError(npath, "node needs exactly one of \"Orbiter\" or \"Lander\"");
            }
            if (orbiter) {
                node.placement = read_orbit(nj["Orbiter"], npath + "/Orbiter", planet.mu);
            } else {
                node.placement = read_site(nj["Lander"], npath + "/Lander");
            }
            planet.nodes.push_back(std::move(node));
        }
        def.planets.push_back(std::move(planet));
    }

    def.validate();
    return def;
}

ContactPlan compute_plan(const ScenarioBundle& bundle, const GenerateOptions& options)
{
    const ContactScene scene = make_scene(bundle);
    ContactPlan plan = detect_contacts(scene, DetectOptions{options.refine_tolerance});
    if (options.light_time) {
        plan = filter_plan_light_time(plan, scene, options.light_time_tolerance);
    }
    return plan;
}

ScenarioBundle generate_bundle(const ScenarioDefinition& definition, const GenerateOptions& options)
{
    definition.validate();

    struct Job {
        std::string key;
        bool planet;
        BodyModel model;
    };
    std::vector<Job> jobs;
    for (const auto& p : definition.planets) {
        jobs.push_back({p.name, true, PlanetBody{p.orbit, p.rotation}});
        for (const auto& n : p.nodes) {
            if (const auto* orbit = std::get_if<KeplerianElements>(&n.placement)) {
                jobs.push_back({n.id, false, OrbiterBody{*orbit}});
            } else {
                jobs.push_back({n.id, false, LanderBody{std::get<GeodeticSite>(n.placement), p.radius, p.rotation}});
            }
        }
    }

    std::vector<EphemerisTable> tables(jobs.size());
    detail::parallel_for(jobs.size(), [&](std::size_t i) {
        tables[i] = sample_trajectory(jobs[i].model, definition.start, definition.end, definition.step);
    });

    ScenarioBundle bundle;
    bundle.config = definition.config();
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        auto& target = jobs[i].planet ? bundle.planet_tables : bundle.node_tables;
        target.emplace(jobs[i].key, std::move(tables[i]));
    }
    bundle.contact_plan = compute_plan(bundle, options);
    return bundle;
}

} // namespace ipnv
