#include "ipnv/exporters.hpp"

#include "ipnv/error.hpp"
#include "json_util.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

namespace ipnv {

namespace {

struct ExportRecord {
    std::int64_t start = 0;
    std::int64_t end = 0;
    std::uint64_t source = 0;
    std::uint64_t dest = 0;
    double owlt = 0.0;

    auto key() const { return std::tie(start, source, dest, end); }
};

std::uint64_t lookup(const NodeNumberMap& map, const std::string& id)
{
    const auto it = map.find(id);
    if (it == map.end()) {
        throw ValidationError(id, "node has no export number");
    }
    return it->second;
}

std::vector<ExportRecord> make_records(const ContactPlan& plan, std::span<const double> owlts,
                                       const NodeNumberMap& map, const ExportOptions& options)
{
    options.validate();
    if (owlts.size() != plan.size()) {
        throw ValidationError("", "one OWLT per contact window is required");
    }
    std::vector<ExportRecord> records;
    records.reserve(plan.size());
    for (std::size_t i = 0; i < plan.size(); ++i) {
        const auto& w = plan[i];
        w.validate();
        ExportRecord r;
        r.source = lookup(map, w.source_id);
        r.dest = lookup(map, w.destination_id);
        const double rel_start = std::floor(w.start - options.reference_epoch);
        const double rel_end = std::ceil(w.end - options.reference_epoch);
        if (rel_start < 0.0) {
            throw ValidationError(w.source_id + " -> " + w.destination_id,
                                  "contact starts before the reference epoch");
        }
        r.start = static_cast<std::int64_t>(rel_start);
        r.end = static_cast<std::int64_t>(rel_end);
        r.owlt = owlts[i];
        records.push_back(r);
    }
    std::stable_sort(records.begin(), records.end(),
                     [](const ExportRecord& a, const ExportRecord& b) { return a.key() < b.key(); });
    return records;
}

std::string format_rate(double rate)
{
    return fmt::format("{}", rate);
}

bool integral(double v)
{
    return std::floor(v) == v && std::abs(v) < 9.0e15;
}

} // namespace

void ExportOptions::validate() const
{
    if (!(std::isfinite(data_rate) && data_rate > 0.0)) {
        throw ValidationError("rate", "data rate must be positive");
    }
    if (!std::isfinite(reference_epoch.seconds)) {
        throw ValidationError("epoch", "reference epoch must be finite");
    }
}

NodeNumberMap build_node_map(const ScenarioConfig& config, const std::map<std::string, std::uint64_t>& overrides)
{
    const auto ids = config.node_ids();
    NodeNumberMap map;
    std::set<std::uint64_t> used;
    for (const auto& [id, number] : overrides) {
        if (std::find(ids.begin(), ids.end(), id) == ids.end()) {
            throw ValidationError(id, "override for unknown node");
        }
        if (number == 0) {
            throw ValidationError(id, "node numbers must be positive");
        }
        if (!used.insert(number).second) {
            throw ValidationError(id, "duplicate override target " + std::to_string(number));
        }
        map[id] = number;
    }
    std::uint64_t next = 1;
    for (const auto& id : ids) {
        if (map.contains(id)) {
            continue;
        }
        while (used.contains(next)) {
            ++next;
        }
        map[id] = next;
        used.insert(next);
    }
    return map;
}

std::string export_ion(const ContactPlan& plan, std::span<const double> owlts, const NodeNumberMap& map,
                       const ExportOptions& options)
{
    const auto records = make_records(plan, owlts, map, options);
    const std::string rate = format_rate(options.data_rate);

    std::string out;
    for (const auto& r : records) {
        out += fmt::format("a contact +{} +{} {} {} {}\n", r.start, r.end, r.source, r.dest, rate);
    }
    if (options.emit_ranges) {
        // Ranges are symmetric: one line per unordered pair and span, lower number first.
        std::map<std::tuple<std::int64_t, std::uint64_t, std::uint64_t, std::int64_t>, double> ranges;
        for (const auto& r : records) {
            const auto key = std::make_tuple(r.start, std::min(r.source, r.dest), std::max(r.source, r.dest), r.end);
            auto [it, inserted] = ranges.try_emplace(key, r.owlt);
            if (!inserted) {
                it->second = std::max(it->second, r.owlt);
            }
        }
        for (const auto& [key, owlt] : ranges) {
            const auto& [start, a, b, end] = key;
            out += fmt::format("a range +{} +{} {} {} {}\n", start, end, a, b,
                               static_cast<std::int64_t>(std::ceil(owlt)));
        }
    }
    return out;
}

std::string export_hdtn(const ContactPlan& plan, std::span<const double> owlts, const NodeNumberMap& map,
                        const ExportOptions& options)
{
    const auto records = make_records(plan, owlts, map, options);
    detail::ordered_json contacts = detail::ordered_json::array();
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        detail::ordered_json entry = {{"contact", i},        {"source", r.source}, {"dest", r.dest},
                                      {"startTime", r.start}, {"endTime", r.end}};
        if (integral(options.data_rate)) {
            entry["rate"] = static_cast<std::int64_t>(options.data_rate);
        } else {
            entry["rate"] = options.data_rate;
        }
        entry["owlt"] = std::round(r.owlt * 1000.0) / 1000.0;
        contacts.push_back(std::move(entry));
    }
    detail::ordered_json root;
    root["contacts"] = std::move(contacts);
    return detail::dump(root);
}

std::vector<double> plan_owlts(const ScenarioBundle& bundle)
{
    const ContactScene scene = make_scene(bundle);
    std::vector<double> out;
    out.reserve(bundle.contact_plan.size());
    for (const auto& w : bundle.contact_plan) {
        const auto src = scene.find_node(w.source_id);
        const auto dst = scene.find_node(w.destination_id);
        if (!src || !dst) {
            throw ValidationError(w.source_id + " -> " + w.destination_id, "contact references an unknown node");
        }
        out.push_back(max_owlt(w, scene.track(*src), scene.track(*dst)));
    }
    return out;
}

} // namespace ipnv
