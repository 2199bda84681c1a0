#include "ipnv/contacts.hpp"

#include "ipnv/error.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>
#include <utility>

namespace ipnv {

namespace {

std::string pair_label(const ContactWindow& w)
{
    return w.source_id + " -> " + w.destination_id;
}

bool lexicographically_less(const Vec3& a, const Vec3& b)
{
    return std::tie(a.x, a.y, a.z) < std::tie(b.x, b.y, b.z);
}

bool visible_between(const Vec3& a, const Vec3& b, std::span<const Occluder> occluders)
{
    return a == b || los_visible(a, b, occluders);
}

} // namespace

void ContactWindow::validate() const
{
    if (source_id.empty() || destination_id.empty()) {
        throw ValidationError("", "contact node id is empty");
    }
    if (source_id == destination_id) {
        throw ValidationError("", "contact source equals destination (" + source_id + ")");
    }
    if (!std::isfinite(start.seconds) || !std::isfinite(end.seconds)) {
        throw ValidationError("", "contact time is not finite");
    }
    if (!(start < end)) {
        throw ValidationError("", "contact StartTime must be before EndTime");
    }
    if (color) {
        for (const int c : {color->r, color->g, color->b}) {
            if (c < 0 || c > 255) {
                throw ValidationError("", "Color component outside 0-255");
            }
        }
    }
}

void sort_plan(ContactPlan& plan)
{
    std::sort(plan.begin(), plan.end(), [](const ContactWindow& a, const ContactWindow& b) {
        return std::tie(a.source_id, a.destination_id, a.start, a.end) <
               std::tie(b.source_id, b.destination_id, b.start, b.end);
    });
}

void check_plan(const ContactPlan& plan)
{
    std::map<std::pair<std::string, std::string>, const ContactWindow*> last;
    for (std::size_t i = 0; i < plan.size(); ++i) {
        const auto& w = plan[i];
        const std::string where = "ContactPlan[" + std::to_string(i) + "]";
        try {
            w.validate();
        } catch (const ValidationError& e) {
            throw ValidationError(where, e.what());
        }
        auto [it, inserted] = last.try_emplace({w.source_id, w.destination_id}, &w);
        if (inserted) {
            continue;
        }
        const ContactWindow& prev = *it->second;
        if (!(prev.start < w.start)) {
            throw ValidationError(where, "windows of " + pair_label(w) + " not sorted by StartTime");
        }
        if (!(prev.end < w.start)) {
            throw ValidationError(where, "overlapping windows for " + pair_label(w));
        }
        it->second = &w;
    }
}

bool los_visible(const Vec3& a, const Vec3& b, std::span<const Occluder> occluders)
{
    if (a == b) {
        throw DomainError("line-of-sight endpoints coincide");
    }
    // Canonical endpoint order makes the float result independent of argument order.
    const Vec3& p = lexicographically_less(b, a) ? b : a;
    const Vec3& q = lexicographically_less(b, a) ? a : b;

    const Vec3 d = q - p;
    const double len2 = d.dot(d);
    for (const auto& occ : occluders) {
        const double r = occ.radius * (1.0 - kOcclusionShrink);
        const double s = std::clamp((occ.center - p).dot(d) / len2, 0.0, 1.0);
        const Vec3 off = occ.center - (p + d * s);
        if (off.dot(off) < r * r) {
            return false;
        }
    }
    return true;
}

double owlt(const Vec3& a, const Vec3& b)
{
    return (a - b).norm() / kSpeedOfLight;
}

Trajectory::Trajectory(std::shared_ptr<const EphemerisTable> local, std::shared_ptr<const EphemerisTable> host)
    : local_(std::move(local)), host_(std::move(host))
{
    if (!local_ || local_->empty() || (host_ && host_->empty())) {
        throw ValidationError("", "trajectory needs non-empty tables");
    }
}

Epoch Trajectory::start() const
{
    return host_ ? std::max(local_->start(), host_->start()) : local_->start();
}

Epoch Trajectory::end() const
{
    return host_ ? std::min(local_->end(), host_->end()) : local_->end();
}

Vec3 Trajectory::position(Epoch t) const
{
    const Vec3 local = interpolate(*local_, t).position;
    return host_ ? interpolate(*host_, t).position + local : local;
}

Vec3 Trajectory::position_at(std::size_t k) const
{
    const Vec3& local = local_->samples()[k].position;
    return host_ ? host_->samples()[k].position + local : local;
}

ContactScene::ContactScene(std::string star_name, double star_radius, std::vector<ScenePlanet> planets,
                           std::vector<SceneNode> nodes)
    : star_name_(std::move(star_name)), star_radius_(star_radius), planets_(std::move(planets)),
      nodes_(std::move(nodes))
{
    const auto check_grid = [this](const EphemerisTable& table, const std::string& who) {
        if (grid_.empty()) {
            for (const auto& s : table.samples()) {
                grid_.push_back(s.time);
            }
            return;
        }
        const auto samples = table.samples();
        const bool same = samples.size() == grid_.size() &&
                          std::equal(samples.begin(), samples.end(), grid_.begin(),
                                     [](const StateSample& s, Epoch t) { return s.time == t; });
        if (!same) {
            throw ValidationError(who, "time grid differs from the scenario grid");
        }
    };

    for (const auto& p : planets_) {
        if (!p.table || p.table->empty()) {
            throw ValidationError(p.name, "planet has no samples");
        }
        check_grid(*p.table, p.name);
    }
    tracks_.reserve(nodes_.size());
    for (const auto& n : nodes_) {
        if (n.host >= planets_.size()) {
            throw ValidationError(n.id, "node host planet index out of range");
        }
        if (!n.table || n.table->empty()) {
            throw ValidationError(n.id, "node has no samples");
        }
        check_grid(*n.table, n.id);
        tracks_.emplace_back(n.table, planets_[n.host].table);
    }
}

std::optional<std::size_t> ContactScene::find_node(const std::string& id) const
{
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].id == id) {
            return i;
        }
    }
    return std::nullopt;
}

std::vector<Occluder> ContactScene::occluders(Epoch t) const
{
    std::vector<Occluder> out;
    out.reserve(planets_.size() + 1);
    out.push_back({Vec3{}, star_radius_, star_name_});
    for (const auto& p : planets_) {
        out.push_back({interpolate(*p.table, t).position, p.radius, p.name});
    }
    return out;
}

std::vector<Occluder> ContactScene::occluders_at(std::size_t k) const
{
    std::vector<Occluder> out;
    out.reserve(planets_.size() + 1);
    out.push_back({Vec3{}, star_radius_, star_name_});
    for (const auto& p : planets_) {
        out.push_back({p.table->samples()[k].position, p.radius, p.name});
    }
    return out;
}

bool pair_visible(const ContactScene& scene, std::size_t a, std::size_t b, Epoch t)
{
    const auto occ = scene.occluders(t);
    return visible_between(scene.track(a).position(t), scene.track(b).position(t), occ);
}

Epoch refine_boundary(const ContactScene& scene, std::size_t a, std::size_t b, Epoch lo, Epoch hi,
                      double tolerance)
{
    if (!(tolerance > 0.0)) {
        throw DomainError("refinement tolerance must be positive");
    }
    const bool vis_lo = pair_visible(scene, a, b, lo);
    if (vis_lo == pair_visible(scene, a, b, hi)) {
        throw DomainError("refinement bracket does not contain a visibility change");
    }
    while (hi - lo >= tolerance) {
        const Epoch mid{lo.seconds + 0.5 * (hi - lo)};
        if (!(lo < mid && mid < hi)) {
            break;
        }
        (pair_visible(scene, a, b, mid) == vis_lo ? lo : hi) = mid;
    }
    return Epoch{lo.seconds + 0.5 * (hi - lo)};
}

ContactPlan detect_contacts(const ContactScene& scene, const DetectOptions& options)
{
    const auto grid = scene.grid();
    const std::size_t steps = grid.size();
    const std::size_t n = scene.node_count();

    std::vector<std::vector<Vec3>> positions(n, std::vector<Vec3>(steps));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < steps; ++k) {
            positions[i][k] = scene.track(i).position_at(k);
        }
    }
    std::vector<std::vector<Occluder>> occluders(steps);
    for (std::size_t k = 0; k < steps; ++k) {
        occluders[k] = scene.occluders_at(k);
    }

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            pairs.emplace_back(i, j);
        }
    }

    std::vector<ContactPlan> per_pair(pairs.size());
    detail::parallel_for(pairs.size(), [&](std::size_t p) {
        const auto [i, j] = pairs[p];
        const auto& id_i = scene.node(i).id;
        const auto& id_j = scene.node(j).id;
        auto& out = per_pair[p];

        std::size_t k = 0;
        while (k < steps) {
            if (!visible_between(positions[i][k], positions[j][k], occluders[k])) {
                ++k;
                continue;
            }
            const std::size_t first = k;
            while (k + 1 < steps && visible_between(positions[i][k + 1], positions[j][k + 1], occluders[k + 1])) {
                ++k;
            }
            const std::size_t last = k++;

            Epoch start = grid[first];
            Epoch end = grid[last];
            if (options.refine_tolerance) {
                const double tol = *options.refine_tolerance;
                if (first > 0) {
                    start = refine_boundary(scene, i, j, grid[first - 1], grid[first], tol);
                }
                if (last + 1 < steps) {
                    end = refine_boundary(scene, i, j, grid[last], grid[last + 1], tol);
                }
            }
            if (!(start < end)) {
                continue;
            }
            out.push_back({id_i, id_j, start, end, std::nullopt});
            out.push_back({id_j, id_i, start, end, std::nullopt});
        }
    });

    ContactPlan plan;
    for (auto& windows : per_pair) {
        std::move(windows.begin(), windows.end(), std::back_inserter(plan));
    }
    sort_plan(plan);
    return plan;
}

double light_time(const Trajectory& src, const Trajectory& dst, Epoch t)
{
    const Vec3 from = src.position(t);
    const double first_guess = owlt(from, dst.position(t));
    const Epoch arrival = std::min(t + first_guess, dst.end());
    return owlt(from, dst.position(arrival));
}

std::optional<ContactWindow> filter_light_time(const ContactWindow& window, const Trajectory& src,
                                               const Trajectory& dst, double tolerance)
{
    window.validate();
    if (!(tolerance > 0.0)) {
        throw DomainError("light-time tolerance must be positive");
    }
    for (const Trajectory* tr : {&src, &dst}) {
        if (window.start < tr->start() || window.end > tr->end()) {
            throw RangeError("trajectory does not cover contact " + pair_label(window));
        }
    }

    // g(t) = t + owlt(t) - end is increasing because relative speeds are far below c.
    const auto late = [&](Epoch t) { return (t + light_time(src, dst, t)) > window.end; };
    if (late(window.start)) {
        return std::nullopt;
    }
    if (!late(window.end)) {
        return window;
    }
    Epoch lo = window.start;
    Epoch hi = window.end;
    while (hi - lo >= tolerance) {
        const Epoch mid{lo.seconds + 0.5 * (hi - lo)};
        if (!(lo < mid && mid < hi)) {
            break;
        }
        (late(mid) ? hi : lo) = mid;
    }
    if (!(lo > window.start)) {
        return std::nullopt;
    }
    ContactWindow out = window;
    out.end = lo;
    return out;
}

ContactPlan filter_plan_light_time(const ContactPlan& plan, const ContactScene& scene, double tolerance)
{
    ContactPlan out;
    out.reserve(plan.size());
    for (const auto& w : plan) {
        const auto src = scene.find_node(w.source_id);
        const auto dst = scene.find_node(w.destination_id);
        if (!src || !dst) {
            throw ValidationError(pair_label(w), "contact references an unknown node");
        }
        if (auto filtered = filter_light_time(w, scene.track(*src), scene.track(*dst), tolerance)) {
            out.push_back(std::move(*filtered));
        }
    }
    return out;
}

double max_owlt(const ContactWindow& window, const Trajectory& src, const Trajectory& dst)
{
    double best = std::max(owlt(src.position(window.start), dst.position(window.start)),
                           owlt(src.position(window.end), dst.position(window.end)));
    for (const auto& s : src.local().samples()) {
        if (s.time > window.start && s.time < window.end) {
            best = std::max(best, owlt(src.position(s.time), dst.position(s.time)));
        }
    }
    return best;
}

} // namespace ipnv
