#include "ipnv/scenario_io.hpp"

#include "ipnv/error.hpp"
#include "json_util.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <system_error>

namespace ipnv {

using detail::child_path;
using detail::json;
using detail::ordered_json;

namespace {

constexpr std::array<std::string_view, 3> kPositionKeys = {"PositionX", "PositionY", "PositionZ"};
constexpr std::array<std::string_view, 3> kRotationKeys = {"RotationX", "RotationY", "RotationZ"};

void check_file_stem(const std::string& stem, const std::string& path)
{
    if (stem.empty()) {
        throw ValidationError(path, "name must not be empty");
    }
    if (stem == "." || stem == ".." || stem.find_first_of("/\\") != std::string::npos) {
        throw ValidationError(path, "\"" + stem + "\" cannot be used as a file name");
    }
}

// Every interval but the last must equal `step`; the last may be shorter.
void check_spacing(std::span<const StateSample> samples, double step, const std::string& path)
{
    for (std::size_t i = 1; i < samples.size(); ++i) {
        const double delta = samples[i].time - samples[i - 1].time;
        const bool last = i + 1 == samples.size();
        const bool ok = last ? delta <= step + kStepTolerance : std::abs(delta - step) <= kStepTolerance;
        if (!ok) {
            throw ValidationError(child_path(path, i) + "/Time", "sample spacing " + std::to_string(delta) +
                                                                     " s does not match step " +
                                                                     std::to_string(step) + " s");
        }
    }
}

// Rethrows a validation error with the file name in front of its location.
template <typename Fn>
auto in_file(const std::string& file, Fn&& fn)
{
    try {
        return fn();
    } catch (const ValidationError& e) {
        throw ValidationError(file, e.what());
    }
}

} // namespace

// --- config.json ------------------------------------------------------------

void ScenarioConfig::validate() const
{
    if (!std::isfinite(start.seconds)) {
        throw ValidationError("/Time/SimulationStartTime", "not finite");
    }
    if (!std::isfinite(end.seconds)) {
        throw ValidationError("/Time/SimulationEndTime", "not finite");
    }
    if (end < start) {
        throw ValidationError("/Time", "SimulationEndTime before SimulationStartTime");
    }
    if (end == start) {
        throw ValidationError("/Time", "SimulationEndTime equals SimulationStartTime");
    }
    if (!(std::isfinite(step) && step > 0.0)) {
        throw ValidationError("/Time/Step", "Step must be positive");
    }
    if (star.name.empty()) {
        throw ValidationError("/Star/Name", "name must not be empty");
    }
    if (!(std::isfinite(star.radius) && star.radius > 0.0)) {
        throw ValidationError("/Star/Radius", "Radius must be positive");
    }

    // Planet names and node ids share one directory as file stems.
    std::set<std::string> stems = {"config", "contactPlan"};
    std::set<std::string> planet_names;
    std::set<std::string> ids;
    for (std::size_t p = 0; p < planets.size(); ++p) {
        const auto& planet = planets[p];
        const std::string path = "/Planets/" + std::to_string(p);
        check_file_stem(planet.name, path + "/Name");
        if (!planet_names.insert(planet.name).second) {
            throw ValidationError(path + "/Name", "duplicate planet name \"" + planet.name + "\"");
        }
        if (!stems.insert(planet.name).second) {
            throw ValidationError(path + "/Name", "planet name \"" + planet.name + "\" collides with another file");
        }
        if (!(std::isfinite(planet.radius) && planet.radius > 0.0)) {
            throw ValidationError(path + "/Radius", "Radius must be positive");
        }
        for (std::size_t n = 0; n < planet.nodes.size(); ++n) {
            const auto& node = planet.nodes[n];
            const std::string npath = path + "/Nodes/" + std::to_string(n);
            check_file_stem(node.id, npath + "/ID");
            if (!ids.insert(node.id).second) {
                throw ValidationError(npath + "/ID", "duplicate node ID \"" + node.id + "\"");
            }
            if (!stems.insert(node.id).second) {
                throw ValidationError(npath + "/ID", "node ID \"" + node.id + "\" collides with another file");
            }
        }
    }
}

std::vector<std::string> ScenarioConfig::node_ids() const
{
    std::vector<std::string> out;
    for (const auto& p : planets) {
        for (const auto& n : p.nodes) {
            out.push_back(n.id);
        }
    }
    return out;
}

std::optional<std::string> ScenarioConfig::host_of(const std::string& node_id) const
{
    for (const auto& p : planets) {
        for (const auto& n : p.nodes) {
            if (n.id == node_id) {
                return p.name;
            }
        }
    }
    return std::nullopt;
}

ScenarioConfig read_config(std::string_view bytes)
{
    const json root = detail::parse_json(bytes);
    ScenarioConfig config;

    const json& time = detail::require_object(root, "Time", "");
    config.start = Epoch{detail::require_number(time, "SimulationStartTime", "/Time")};
    config.end = Epoch{detail::require_number(time, "SimulationEndTime", "/Time")};
    config.step = detail::require_number(time, "Step", "/Time");

    const json& star = detail::require_object(root, "Star", "");
    config.star.name = detail::require_string(star, "Name", "/Star");
    config.star.radius = detail::require_number(star, "Radius", "/Star");

    const json& planets = detail::require_array(root, "Planets", "");
    for (std::size_t p = 0; p < planets.size(); ++p) {
        const std::string path = child_path("/Planets", p);
        const json& pj = planets[p];
        PlanetInfo planet;
        planet.name = detail::require_string(pj, "Name", path);
        planet.radius = detail::require_number(pj, "Radius", path);
        const json& nodes = detail::require_array(pj, "Nodes", path);
        for (std::size_t n = 0; n < nodes.size(); ++n) {
            const std::string npath = child_path(path + "/Nodes", n);
            planet.nodes.push_back(
                {detail::require_string(nodes[n], "ID", npath), detail::require_string(nodes[n], "Name", npath)});
        }
        config.planets.push_back(std::move(planet));
    }

    config.validate();
    return config;
}

std::string write_config(const ScenarioConfig& config)
{
    ordered_json root;
    root["Time"] = {{"SimulationStartTime", config.start.seconds},
                    {"SimulationEndTime", config.end.seconds},
                    {"Step", config.step}};
    root["Star"] = {{"Name", config.star.name}, {"Radius", config.star.radius}};
    ordered_json planets = ordered_json::array();
    for (const auto& p : config.planets) {
        ordered_json nodes = ordered_json::array();
        for (const auto& n : p.nodes) {
            nodes.push_back({{"ID", n.id}, {"Name", n.name}});
        }
        planets.push_back({{"Name", p.name}, {"Radius", p.radius}, {"Nodes", std::move(nodes)}});
    }
    root["Planets"] = std::move(planets);
    return detail::dump(root);
}

// --- contactPlan.json -------------------------------------------------------

ContactPlan read_contact_plan(std::string_view bytes)
{
    const json root = detail::parse_json(bytes);
    const json& entries = detail::require_array(root, "ContactPlan", "");
    ContactPlan plan;
    plan.reserve(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const std::string path = child_path("/ContactPlan", i);
        const json& e = entries[i];
        ContactWindow w;
        w.source_id = detail::require_string(e, "SourceID", path);
        w.destination_id = detail::require_string(e, "DestinationID", path);
        w.start = Epoch{detail::require_number(e, "StartTime", path)};
        w.end = Epoch{detail::require_number(e, "EndTime", path)};
        if (const auto it = e.find("Color"); it != e.end()) {
            const std::string cpath = path + "/Color";
            if (!it->is_array() || it->size() != 3) {
                throw ValidationError(cpath, "Color must be an array of 3 integers");
            }
            std::array<int, 3> rgb{};
            for (std::size_t c = 0; c < 3; ++c) {
                const json& v = (*it)[c];
                if (!v.is_number_integer()) {
                    throw ValidationError(cpath, "Color must be an array of 3 integers");
                }
                const auto value = v.get<std::int64_t>();
                if (value < 0 || value > 255) {
                    throw ValidationError(cpath, "Color component outside 0-255");
                }
                rgb[c] = static_cast<int>(value);
            }
            w.color = Rgb{rgb[0], rgb[1], rgb[2]};
        }
        try {
            w.validate();
        } catch (const ValidationError& err) {
            throw ValidationError(path, err.what());
        }
        plan.push_back(std::move(w));
    }
    return plan;
}

std::string write_contact_plan(const ContactPlan& plan)
{
    ordered_json entries = ordered_json::array();
    for (const auto& w : plan) {
        ordered_json e = {{"SourceID", w.source_id},
                          {"DestinationID", w.destination_id},
                          {"StartTime", w.start.seconds},
                          {"EndTime", w.end.seconds}};
        if (w.color) {
            e["Color"] = {w.color->r, w.color->g, w.color->b};
        }
        entries.push_back(std::move(e));
    }
    ordered_json root;
    root["ContactPlan"] = std::move(entries);
    return detail::dump(root);
}

// --- planet and node files --------------------------------------------------

EphemerisTable read_ephemeris(std::string_view bytes, EphemerisKind kind, std::optional<double> step)
{
    const json root = detail::parse_json(bytes);
    const json& entries = detail::require_array(root, "Positions", "");
    if (entries.empty()) {
        throw ValidationError("/Positions", "no position entries");
    }

    std::vector<StateSample> samples;
    samples.reserve(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const std::string path = child_path("/Positions", i);
        const json& e = entries[i];
        StateSample s;
        s.time = Epoch{detail::require_number(e, "Time", path)};
        s.position = {detail::require_number(e, kPositionKeys[0], path),
                      detail::require_number(e, kPositionKeys[1], path),
                      detail::require_number(e, kPositionKeys[2], path)};
        if (kind == EphemerisKind::planet) {
            for (const auto key : kRotationKeys) {
                if (!e.contains(key)) {
                    throw ValidationError(path, "rotation missing on planet file");
                }
            }
            s.rotation = EulerDeg{detail::require_number(e, kRotationKeys[0], path),
                                  detail::require_number(e, kRotationKeys[1], path),
                                  detail::require_number(e, kRotationKeys[2], path)};
        } else {
            for (const auto key : kRotationKeys) {
                if (e.contains(key)) {
                    throw ValidationError(path, "rotation present on node file");
                }
            }
        }
        if (i > 0 && !(samples.back().time < s.time)) {
            throw ValidationError(path + "/Time", "non-monotone time");
        }
        samples.push_back(std::move(s));
    }

    const double declared = step.value_or(samples.size() > 1 ? samples[1].time - samples[0].time : 0.0);
    check_spacing(samples, declared, "/Positions");
    return EphemerisTable(std::move(samples), declared);
}

std::string write_ephemeris(const EphemerisTable& table, EphemerisKind kind)
{
    ordered_json entries = ordered_json::array();
    for (const auto& s : table.samples()) {
        ordered_json e = {{"Time", s.time.seconds},
                          {kPositionKeys[0], s.position.x},
                          {kPositionKeys[1], s.position.y},
                          {kPositionKeys[2], s.position.z}};
        if (kind == EphemerisKind::planet) {
            if (!s.rotation) {
                throw ValidationError("", "rotation missing on planet file");
            }
            e[kRotationKeys[0]] = s.rotation->x;
            e[kRotationKeys[1]] = s.rotation->y;
            e[kRotationKeys[2]] = s.rotation->z;
        } else if (s.rotation) {
            throw ValidationError("", "rotation present on node file");
        }
        entries.push_back(std::move(e));
    }
    ordered_json root;
    root["Positions"] = std::move(entries);
    return detail::dump(root);
}

// --- bundles ----------------------------------------------------------------

std::string planet_file_name(const std::string& planet)
{
    return planet + ".json";
}

std::string node_file_name(const std::string& node_id)
{
    return node_id + ".json";
}

std::vector<std::string> bundle_file_names(const ScenarioConfig& config)
{
    std::vector<std::string> out = {std::string(kConfigFile), std::string(kContactPlanFile)};
    for (const auto& p : config.planets) {
        out.push_back(planet_file_name(p.name));
    }
    for (const auto& id : config.node_ids()) {
        out.push_back(node_file_name(id));
    }
    return out;
}

void check_bundle(const ScenarioBundle& bundle)
{
    const auto& config = bundle.config;
    config.validate();

    const EphemerisTable* reference = nullptr;
    const auto check_table = [&](const EphemerisTable& table, const std::string& file) {
        if (std::abs(table.start() - config.start) > kStepTolerance) {
            throw ValidationError(file, "table starts at " + std::to_string(table.start().seconds) +
                                            ", not at SimulationStartTime");
        }
        if (std::abs(table.end() - config.end) > kStepTolerance) {
            throw ValidationError(file, table.end() < config.end ? "table ends before SimulationEndTime"
                                                                 : "table ends after SimulationEndTime");
        }
        in_file(file, [&] { check_spacing(table.samples(), config.step, "/Positions"); });
        if (reference == nullptr) {
            reference = &table;
            return;
        }
        const auto a = reference->samples();
        const auto b = table.samples();
        const bool same = a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(),
                                                             [](const auto& x, const auto& y) {
                                                                 return x.time == y.time;
                                                             });
        if (!same) {
            throw ValidationError(file, "sample times differ from the other tables");
        }
    };

    for (const auto& p : config.planets) {
        const auto file = planet_file_name(p.name);
        const auto it = bundle.planet_tables.find(p.name);
        if (it == bundle.planet_tables.end()) {
            throw ValidationError(file, "no table for planet \"" + p.name + "\"");
        }
        if (!it->second.has_rotation()) {
            throw ValidationError(file, "rotation missing on planet file");
        }
        check_table(it->second, file);
    }
    for (const auto& id : config.node_ids()) {
        const auto file = node_file_name(id);
        const auto it = bundle.node_tables.find(id);
        if (it == bundle.node_tables.end()) {
            throw ValidationError(file, "no table for node \"" + id + "\"");
        }
        if (it->second.has_rotation()) {
            throw ValidationError(file, "rotation present on node file");
        }
        check_table(it->second, file);
    }

    const auto ids = config.node_ids();
    const std::set<std::string> known(ids.begin(), ids.end());
    for (std::size_t i = 0; i < bundle.contact_plan.size(); ++i) {
        const auto& w = bundle.contact_plan[i];
        for (const auto* id : {&w.source_id, &w.destination_id}) {
            if (!known.contains(*id)) {
                throw ValidationError(std::string(kContactPlanFile) + ": /ContactPlan/" + std::to_string(i),
                                      "unknown node \"" + *id + "\"");
            }
        }
    }
    in_file(std::string(kContactPlanFile), [&] { check_plan(bundle.contact_plan); });
}

ScenarioBundle load_bundle(const std::filesystem::path& directory, bool with_contact_plan)
{
    ScenarioBundle bundle;
    const std::string config_file(kConfigFile);
    bundle.config = in_file(config_file, [&] { return read_config(read_file(directory / config_file)); });

    const std::string plan_file(kContactPlanFile);
    if (with_contact_plan) {
        bundle.contact_plan =
            in_file(plan_file, [&] { return read_contact_plan(read_file(directory / plan_file)); });
    }

    for (const auto& p : bundle.config.planets) {
        const auto file = planet_file_name(p.name);
        bundle.planet_tables.emplace(p.name, in_file(file, [&] {
                                         return read_ephemeris(read_file(directory / file), EphemerisKind::planet,
                                                               bundle.config.step);
                                     }));
    }
    for (const auto& id : bundle.config.node_ids()) {
        const auto file = node_file_name(id);
        bundle.node_tables.emplace(id, in_file(file, [&] {
                                       return read_ephemeris(read_file(directory / file), EphemerisKind::node,
                                                             bundle.config.step);
                                   }));
    }
    check_bundle(bundle);
    return bundle;
}

void store_bundle(const ScenarioBundle& bundle, const std::filesystem::path& directory)
{
    check_bundle(bundle);

    // Serialize everything first so a failure leaves the directory untouched.
    std::vector<std::pair<std::string, std::string>> files;
    files.emplace_back(kConfigFile, write_config(bundle.config));
    files.emplace_back(kContactPlanFile, write_contact_plan(bundle.contact_plan));
    for (const auto& p : bundle.config.planets) {
        files.emplace_back(planet_file_name(p.name),
                           write_ephemeris(bundle.planet_tables.at(p.name), EphemerisKind::planet));
    }
    for (const auto& id : bundle.config.node_ids()) {
        files.emplace_back(node_file_name(id), write_ephemeris(bundle.node_tables.at(id), EphemerisKind::node));
    }

    std::error_code ec;
    std::filesystem::create_directories(directory, ec);
    if (ec) {
        throw IoError("cannot create directory " + directory.string() + ": " + ec.message());
    }
    for (const auto& [name, bytes] : files) {
        write_file_atomic(directory / name, bytes);
    }
}

void store_contact_plan(const ContactPlan& plan, const std::filesystem::path& directory)
{
    write_file_atomic(directory / std::string(kContactPlanFile), write_contact_plan(plan));
}

ContactScene make_scene(const ScenarioBundle& bundle)
{
    const auto& config = bundle.config;
    std::vector<ScenePlanet> planets;
    std::vector<SceneNode> nodes;
    for (std::size_t p = 0; p < config.planets.size(); ++p) {
        const auto& info = config.planets[p];
        planets.push_back(
            {info.name, info.radius, std::make_shared<const EphemerisTable>(bundle.planet_tables.at(info.name))});
        for (const auto& n : info.nodes) {
            nodes.push_back({n.id, p, std::make_shared<const EphemerisTable>(bundle.node_tables.at(n.id))});
        }
    }
    return ContactScene(config.star.name, config.star.radius, std::move(planets), std::move(nodes));
}

// --- file helpers -----------------------------------------------------------

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) {
        throw IoError("error reading " + path.string());
    }
    return buffer.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot write " + tmp.string());
        }
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) {
            std::filesystem::remove(tmp);
            throw IoError("error writing " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw IoError("cannot replace " + path.string() + ": " + ec.message());
    }
}

} // namespace ipnv
