#pragma once

#include "ipnv/astro.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ipnv {

/// Speed of light in km/s.
inline constexpr double kSpeedOfLight = 299792.458;
/// Relative sphere shrink applied before occlusion tests, so a lander sitting
/// exactly on its planet's surface is not hidden by that planet.
inline constexpr double kOcclusionShrink = 1e-6;
/// Default bisection width for boundary refinement and light-time filtering.
inline constexpr double kDefaultBisectionTolerance = 1.0;

struct Rgb {
    int r = 255;
    int g = 255;
    int b = 255;

    bool operator==(const Rgb&) const = default;
};

/// Directed visibility interval between two nodes.
struct ContactWindow {
    std::string source_id;
    std::string destination_id;
    Epoch start{};
    Epoch end{};
    std::optional<Rgb> color;

    bool operator==(const ContactWindow&) const = default;

    /// Throws ValidationError unless start < end, ids differ and the color
    /// (when present) has components in 0..255.
    void validate() const;
};

using ContactPlan = std::vector<ContactWindow>;

/// Orders windows by (source, destination, start, end).
void sort_plan(ContactPlan& plan);

/// Validates every window and checks that, per directed pair, windows are
/// sorted by start and pairwise disjoint. `plan` must be in file order.
void check_plan(const ContactPlan& plan);

struct Occluder {
    Vec3 center;
    double radius = 0.0;
    std::string name;
};

/// False iff the segment (a, b) passes through any occluder shrunk by
/// kOcclusionShrink. Symmetric in a and b bit-for-bit. Throws DomainError if a == b.
bool los_visible(const Vec3& a, const Vec3& b, std::span<const Occluder> occluders);

/// One-way light time |a - b| / c in seconds.
double owlt(const Vec3& a, const Vec3& b);

/// Absolute (star-centred) position of a body over time: its own table,
/// offset by the host planet's table when it has one.
class Trajectory {
public:
    Trajectory() = default;
    explicit Trajectory(std::shared_ptr<const EphemerisTable> local,
                        std::shared_ptr<const EphemerisTable> host = nullptr);

    /// Throws RangeError outside [start(), end()].
    Vec3 position(Epoch t) const;
    /// Position at sample index k; only valid when host and local share a grid.
    Vec3 position_at(std::size_t k) const;

    Epoch start() const;
    Epoch end() const;
    const EphemerisTable& local() const { return *local_; }
    const EphemerisTable* host() const { return host_.get(); }

private:
    std::shared_ptr<const EphemerisTable> local_;
    std::shared_ptr<const EphemerisTable> host_;
};

struct ScenePlanet {
    std::string name;
    double radius = 0.0;
    std::shared_ptr<const EphemerisTable> table;
};

struct SceneNode {
    std::string id;
    std::size_t host = 0; ///< index into the planet list
    std::shared_ptr<const EphemerisTable> table;
};

/// Bodies and nodes sampled on one shared time grid. The star sits at the origin.
class ContactScene {
public:
    /// Throws ValidationError if any table's sample times differ from the
    /// first planet's, or a node references a missing planet.
    ContactScene(std::string star_name, double star_radius, std::vector<ScenePlanet> planets,
                 std::vector<SceneNode> nodes);

    std::span<const Epoch> grid() const { return grid_; }
    std::size_t node_count() const { return nodes_.size(); }
    const SceneNode& node(std::size_t i) const { return nodes_[i]; }
    const Trajectory& track(std::size_t node) const { return tracks_[node]; }
    std::optional<std::size_t> find_node(const std::string& id) const;

    /// Star and planets as spheres at time t (interpolated).
    std::vector<Occluder> occluders(Epoch t) const;
    std::vector<Occluder> occluders_at(std::size_t k) const;

private:
    std::string star_name_;
    double star_radius_;
    std::vector<ScenePlanet> planets_;
    std::vector<SceneNode> nodes_;
    std::vector<Trajectory> tracks_;
    std::vector<Epoch> grid_;
};

struct DetectOptions {
    /// Enables boundary refinement at this bisection width (seconds).
    std::optional<double> refine_tolerance;
};

/// Stitches per-step visibility of every node pair into windows, emitted in
/// both directions and sorted by (source, destination, start).
/// Single-sample runs are dropped unless refinement is enabled.
ContactPlan detect_contacts(const ContactScene& scene, const DetectOptions& options = {});

/// Visibility of nodes a and b at time t. Coincident nodes count as visible.
bool pair_visible(const ContactScene& scene, std::size_t a, std::size_t b, Epoch t);

/// Bisects [lo, hi] until narrower than `tolerance` and returns the midpoint
/// of the final bracket. Throws DomainError if visibility at lo and hi agree.
Epoch refine_boundary(const ContactScene& scene, std::size_t a, std::size_t b, Epoch lo, Epoch hi,
                      double tolerance = kDefaultBisectionTolerance);

/// One-way light time from `src` at t to `dst`, with the arrival instant
/// refined once. Arrival queries past the end of `dst` hold its last sample.
double light_time(const Trajectory& src, const Trajectory& dst, Epoch t);

/// Shrinks a window to the interval during which a bit sent by the source
/// still reaches the destination before the window closes. Returns nothing
/// when no transmission instant qualifies. Throws RangeError if either
/// trajectory does not cover the window.
std::optional<ContactWindow> filter_light_time(const ContactWindow& window, const Trajectory& src,
                                               const Trajectory& dst,
                                               double tolerance = kDefaultBisectionTolerance);

/// Applies filter_light_time to every window of the plan.
ContactPlan filter_plan_light_time(const ContactPlan& plan, const ContactScene& scene,
                                   double tolerance = kDefaultBisectionTolerance);

/// Largest geometric OWLT over the window. Evaluated at the window ends and at
/// every knot of the source table inside it; exact for piecewise-linear tracks.
double max_owlt(const ContactWindow& window, const Trajectory& src, const Trajectory& dst);

} // namespace ipnv
