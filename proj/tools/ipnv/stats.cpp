#include "cli.hpp"

#include "ipnv/error.hpp"

#include <algorithm>
#include <limits>

namespace ipnv::cli {

std::size_t peak_simultaneous(const ContactPlan& plan)
{
    // Closed intervals: at equal times, openings are counted before closings.
    std::vector<std::pair<double, int>> events;
    events.reserve(2 * plan.size());
    for (const auto& w : plan) {
        events.emplace_back(w.start.seconds, 0);
        events.emplace_back(w.end.seconds, 1);
    }
    std::sort(events.begin(), events.end());
    std::size_t active = 0;
    std::size_t peak = 0;
    for (const auto& [t, kind] : events) {
        if (kind == 0) {
            peak = std::max(peak, ++active);
        } else {
            --active;
        }
    }
    return peak;
}

PlanStats compute_stats(const ScenarioBundle& bundle)
{
    PlanStats stats;
    const ContactScene scene = make_scene(bundle);
    const auto& plan = bundle.contact_plan;
    stats.windows = plan.size();
    stats.min_owlt = std::numeric_limits<double>::infinity();

    for (const auto& w : plan) {
        const double duration = w.end - w.start;
        auto& pair = stats.per_pair[{w.source_id, w.destination_id}];
        ++pair.count;
        pair.total_duration += duration;
        stats.total_duration += duration;
        stats.max_duration = std::max(stats.max_duration, duration);

        const auto src = scene.find_node(w.source_id);
        const auto dst = scene.find_node(w.destination_id);
        if (!src || !dst) {
            throw ValidationError(w.source_id + " -> " + w.destination_id, "contact references an unknown node");
        }
        const Epoch mid{w.start.seconds + 0.5 * (w.end - w.start)};
        const double delay = owlt(scene.track(*src).position(mid), scene.track(*dst).position(mid));
        stats.midpoint_owlts.push_back(delay);
        stats.min_owlt = std::min(stats.min_owlt, delay);
        stats.max_owlt = std::max(stats.max_owlt, delay);
        stats.mean_owlt += delay;
    }
    if (!plan.empty()) {
        stats.mean_duration = stats.total_duration / static_cast<double>(plan.size());
        stats.mean_owlt /= static_cast<double>(plan.size());
    } else {
        stats.min_owlt = 0.0;
    }
    stats.peak_simultaneous = peak_simultaneous(plan);
    return stats;
}

} // namespace ipnv::cli
