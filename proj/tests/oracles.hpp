#pragma once

// Independent reference implementations used only by tests. Nothing here
// calls into the code paths it checks.

#include "ipnv/scenario_io.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace ipnv::oracle {

/// Bisection on the monotone function E - e sin E - M over [0, 2 pi].
inline double kepler_bisection(double mean_anomaly, double e)
{
    double lo = 0.0;
    double hi = 2.0 * std::numbers::pi;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid - e * std::sin(mid) - mean_anomaly < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

struct P3 {
    double x, y, z;
};

/// Segment/ball intersection via the ray-sphere quadratic |p + s d - c|^2 = r^2.
/// The ray starts at the endpoint nearer the centre so the constant term stays
/// small and exact for nodes sitting just above a planet surface.
inline bool segment_hits_ball(P3 p, P3 q, const P3& c, double r)
{
    const auto dist2 = [&](const P3& x) {
        return (x.x - c.x) * (x.x - c.x) + (x.y - c.y) * (x.y - c.y) + (x.z - c.z) * (x.z - c.z);
    };
    if (dist2(q) < dist2(p)) {
        std::swap(p, q);
    }
    const double dx = q.x - p.x, dy = q.y - p.y, dz = q.z - p.z;
    const double fx = p.x - c.x, fy = p.y - c.y, fz = p.z - c.z;
    const double a = dx * dx + dy * dy + dz * dz;
    const double b = 2.0 * (dx * fx + dy * fy + dz * fz);
    const double k = fx * fx + fy * fy + fz * fz - r * r;
    const double s = std::clamp(-b / (2.0 * a), 0.0, 1.0);
    return a * s * s + b * s + k < 0.0;
}

struct Window {
    std::string src, dst;
    double start, end;
    bool operator==(const Window&) const = default;
    bool operator<(const Window& o) const { return std::tie(src, dst, start, end) < std::tie(o.src, o.dst, o.start, o.end); }
};

/// Per-step scan of every node pair straight from the bundle's samples.
inline std::vector<Window> brute_force_plan(const ScenarioBundle& bundle)
{
    const auto& cfg = bundle.config;
    struct NodeRef {
        std::string id;
        const EphemerisTable* local;
        const EphemerisTable* host;
    };
    std::vector<NodeRef> nodes;
    for (const auto& p : cfg.planets) {
        for (const auto& n : p.nodes) {
            nodes.push_back({n.id, &bundle.node_tables.at(n.id), &bundle.planet_tables.at(p.name)});
        }
    }
    const double shrink = 1.0 - 1e-6;
    const std::size_t steps = nodes.empty() ? 0 : nodes.front().local->size();

    const auto absolute = [&](const NodeRef& n, std::size_t k) {
        const auto& l = n.local->samples()[k].position;
        const auto& h = n.host->samples()[k].position;
        return P3{h.x + l.x, h.y + l.y, h.z + l.z};
    };
    const auto visible = [&](std::size_t i, std::size_t j, std::size_t k) {
        const P3 a = absolute(nodes[i], k);
        const P3 b = absolute(nodes[j], k);
        if (a.x == b.x && a.y == b.y && a.z == b.z) {
            return true;
        }
        if (segment_hits_ball(a, b, P3{0, 0, 0}, cfg.star.radius * shrink)) {
            return false;
        }
        for (const auto& p : cfg.planets) {
            const auto& c = bundle.planet_tables.at(p.name).samples()[k].position;
            if (segment_hits_ball(a, b, P3{c.x, c.y, c.z}, p.radius * shrink)) {
                return false;
            }
        }
        return true;
    };

    std::vector<Window> out;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        for (std::size_t j = i + 1; j < nodes.size(); ++j) {
            std::vector<bool> vis(steps);
            for (std::size_t k = 0; k < steps; ++k) {
                vis[k] = visible(i, j, k);
            }
            std::size_t k = 0;
            while (k < steps) {
                if (!vis[k]) {
                    ++k;
                    continue;
                }
                std::size_t e = k;
                while (e + 1 < steps && vis[e + 1]) {
                    ++e;
                }
                if (e > k) {
                    const double t0 = nodes[i].local->samples()[k].time.seconds;
                    const double t1 = nodes[i].local->samples()[e].time.seconds;
                    out.push_back({nodes[i].id, nodes[j].id, t0, t1});
                    out.push_back({nodes[j].id, nodes[i].id, t0, t1});
                }
                k = e + 1;
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<Window> as_windows(const ContactPlan& plan)
{
    std::vector<Window> out;
    for (const auto& w : plan) {
        out.push_back({w.source_id, w.destination_id, w.start.seconds, w.end.seconds});
    }
    return out;
}

} // namespace ipnv::oracle
