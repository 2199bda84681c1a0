#pragma once

#include "ipnv/generator.hpp"
#include "ipnv/scenario_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <random>
#include <string>

namespace ipnv::testing {

inline constexpr double kAu = 149597870.7;
inline constexpr double kSunMu = 132712440018.0;
inline constexpr double kEarthMu = 398600.4418;

inline std::filesystem::path source_dir()
{
    return IPNV_SOURCE_DIR;
}

inline std::filesystem::path demo_definition()
{
    return source_dir() / "scenarios" / "earth_mars_demo.json";
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("ipnv_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

/// Two-sample table moving linearly from p0 at t0 to p1 at t1.
inline EphemerisTable linear_table(double t0, Vec3 p0, double t1, Vec3 p1, bool rotation = false)
{
    std::vector<StateSample> s = {{Epoch{t0}, p0, {}}, {Epoch{t1}, p1, {}}};
    if (rotation) {
        s[0].rotation = EulerDeg{};
        s[1].rotation = EulerDeg{};
    }
    return EphemerisTable(std::move(s), t1 - t0);
}

inline double uniform(std::mt19937_64& rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi)
{
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline KeplerianElements random_orbit(std::mt19937_64& rng, double a_lo, double a_hi, double e_hi, double mu)
{
    KeplerianElements el;
    el.semi_major_axis = uniform(rng, a_lo, a_hi);
    el.eccentricity = uniform(rng, 0.0, e_hi);
    el.inclination = uniform(rng, 0.0, std::numbers::pi);
    el.raan = uniform(rng, 0.0, kTwoPi);
    el.arg_periapsis = uniform(rng, 0.0, kTwoPi);
    el.mean_anomaly_at_epoch = uniform(rng, 0.0, kTwoPi);
    el.epoch = Epoch{uniform(rng, -1e7, 1e7)};
    el.mu = mu;
    return el;
}

/// Random star system with up to `max_planets` planets, `max_nodes` nodes and
/// `max_steps` samples, mixing orbiters and landers.
inline ScenarioDefinition random_definition(std::mt19937_64& rng, int max_planets = 2, int max_nodes = 4,
                                            int max_steps = 200)
{
    ScenarioDefinition def;
    def.star_name = "Star";
    def.star_radius = uniform(rng, 3e5, 9e5);
    def.star_mu = kSunMu;
    def.step = uniform(rng, 30.0, 600.0);
    const int steps = uniform_int(rng, 2, max_steps);
    def.start = Epoch{uniform(rng, -1e8, 1e8)};
    def.end = def.start + def.step * (steps - 1);

    const int planets = uniform_int(rng, 1, max_planets);
    for (int p = 0; p < planets; ++p) {
        PlanetDefinition planet;
        planet.name = "Planet" + std::to_string(p);
        planet.radius = uniform(rng, 2000.0, 70000.0);
        planet.mu = uniform(rng, 1e4, 1e8);
        planet.orbit = random_orbit(rng, 0.3 * kAu, 5.0 * kAu, 0.3, def.star_mu);
        planet.rotation.period = uniform(rng, 3 * 3600.0, 30 * 3600.0) * (uniform(rng, 0, 1) < 0.2 ? -1 : 1);
        planet.rotation.obliquity = uniform(rng, 0.0, 1.0);
        planet.rotation.node_longitude = uniform(rng, 0.0, kTwoPi);
        planet.rotation.rotation_at_epoch = uniform(rng, 0.0, kTwoPi);
        def.planets.push_back(std::move(planet));
    }
    const int nodes = uniform_int(rng, 2, max_nodes);
    for (int n = 0; n < nodes; ++n) {
        auto& host = def.planets[static_cast<std::size_t>(uniform_int(rng, 0, planets - 1))];
        NodeDefinition node;
        node.id = "node_" + std::to_string(n + 1);
        node.name = "Node " + std::to_string(n + 1);
        if (uniform(rng, 0, 1) < 0.5) {
            node.placement = random_orbit(rng, 1.05 * host.radius, 4.0 * host.radius, 0.2, host.mu);
        } else {
            GeodeticSite site;
            site.latitude = uniform(rng, -1.5, 1.5);
            site.longitude = uniform(rng, -3.1, 3.1);
            site.altitude = uniform(rng, 0.0, 2.0);
            node.placement = site;
        }
        host.nodes.push_back(std::move(node));
    }
    return def;
}

/// Key paths of a JSON document in first-seen order, one per line, with
/// array indices collapsed to "[]".
inline std::string key_paths(const std::string& json_text)
{
    std::vector<std::string> seen;
    const auto walk = [&](const auto& self, const nlohmann::ordered_json& j, const std::string& path) -> void {
        if (j.is_object()) {
            for (const auto& [key, value] : j.items()) {
                const std::string child = path + "/" + key;
                if (std::find(seen.begin(), seen.end(), child) == seen.end()) {
                    seen.push_back(child);
                }
                self(self, value, child);
            }
        } else if (j.is_array()) {
            for (const auto& value : j) {
                if (value.is_object() || value.is_array()) {
                    self(self, value, path + "/[]");
                }
            }
        }
    };
    walk(walk, nlohmann::ordered_json::parse(json_text), "");
    std::string out;
    for (const auto& p : seen) {
        out += p + "\n";
    }
    return out;
}

/// Generated bundle with colors sprinkled over part of its plan.
inline ScenarioBundle random_bundle(std::mt19937_64& rng)
{
    auto bundle = generate_bundle(random_definition(rng), {});
    for (auto& w : bundle.contact_plan) {
        if (uniform(rng, 0, 1) < 0.5) {
            w.color = Rgb{uniform_int(rng, 0, 255), uniform_int(rng, 0, 255), uniform_int(rng, 0, 255)};
        }
    }
    return bundle;
}

} // namespace ipnv::testing
