#pragma once

#include <cmath>
#include <compare>
#include <numbers>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace ipnv {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kDegPerRad = 180.0 / std::numbers::pi;
inline constexpr double kRadPerDeg = std::numbers::pi / 180.0;

/// Absolute time in seconds since J2000 (2000-01-01 11:58:55.816 UTC).
struct Epoch {
    double seconds = 0.0;

    constexpr Epoch() = default;
    constexpr explicit Epoch(double s) : seconds(s) {}

    constexpr auto operator<=>(const Epoch&) const = default;

    constexpr Epoch operator+(double dt) const { return Epoch{seconds + dt}; }
    constexpr Epoch operator-(double dt) const { return Epoch{seconds - dt}; }
    constexpr double operator-(Epoch other) const { return seconds - other.seconds; }
};

/// Cartesian vector in kilometres.
struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr bool operator==(const Vec3&) const = default;

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }

    constexpr double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    constexpr Vec3 cross(const Vec3& o) const
    {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(dot(*this)); }
    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

/// X/Y/Z Euler angles in degrees. The rotation they describe is
/// Rz(z) * Ry(y) * Rx(x): rotate about the fixed X axis first, then Y, then Z.
struct EulerDeg {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr bool operator==(const EulerDeg&) const = default;
};

struct Mat3 {
    double m[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};

    Vec3 operator*(const Vec3& v) const
    {
        return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
                m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
                m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
    }
    Mat3 operator*(const Mat3& o) const;

    static Mat3 rot_x(double rad);
    static Mat3 rot_y(double rad);
    static Mat3 rot_z(double rad);
    static Mat3 from_euler(const EulerDeg& e);
};

/// Classical element set. Angles in radians, distances in km, mu in km^3/s^2.
struct KeplerianElements {
    double semi_major_axis = 0.0;
    double eccentricity = 0.0;
    double inclination = 0.0;
    double raan = 0.0;
    double arg_periapsis = 0.0;
    double mean_anomaly_at_epoch = 0.0;
    Epoch epoch{};
    double mu = 0.0;

    /// Throws DomainError unless a > 0, 0 <= e < 1, mu > 0 and all fields finite.
    void validate() const;
    /// Copy with every angle wrapped into [0, 2*pi).
    KeplerianElements normalized() const;
    double mean_motion() const { return std::sqrt(mu / (semi_major_axis * semi_major_axis * semi_major_axis)); }
    double period() const { return kTwoPi / mean_motion(); }
};

/// Uniform spin about an axis tilted by `obliquity` towards `node_longitude`.
struct RotationModel {
    double period = 0.0; ///< seconds, negative for retrograde spin
    double obliquity = 0.0;
    double node_longitude = 0.0;
    double rotation_at_epoch = 0.0;
    Epoch epoch{};

    void validate() const;
};

struct GeodeticSite {
    double latitude = 0.0;  ///< radians, |lat| <= pi/2
    double longitude = 0.0; ///< radians, normalized to (-pi, pi]
    double altitude = 0.0;  ///< km above the planet radius

    void validate() const;
};

struct StateSample {
    Epoch time{};
    Vec3 position{};
    std::optional<EulerDeg> rotation; ///< planets only

    bool operator==(const StateSample&) const = default;
};

/// Immutable list of samples with strictly increasing times.
class EphemerisTable {
public:
    EphemerisTable() = default;
    /// Throws ValidationError if times are not strictly increasing or the
    /// samples mix rotation-bearing and rotation-free entries.
    EphemerisTable(std::vector<StateSample> samples, double step);

    std::span<const StateSample> samples() const { return samples_; }
    double step() const { return step_; }
    bool empty() const { return samples_.empty(); }
    std::size_t size() const { return samples_.size(); }
    bool has_rotation() const { return !samples_.empty() && samples_.front().rotation.has_value(); }
    Epoch start() const { return samples_.front().time; }
    Epoch end() const { return samples_.back().time; }

    bool operator==(const EphemerisTable&) const = default;

private:
    std::vector<StateSample> samples_;
    double step_ = 0.0;
};

/// Wraps an angle into [0, 2*pi).
double wrap_two_pi(double rad);
/// Wraps degrees into [0, 360); -0 maps to +0.
double wrap_degrees(double deg);

/// Solves E - e*sin(E) = M for the eccentric anomaly, E in [0, 2*pi).
/// Throws DomainError if e is outside [0, 1) or M is not finite.
double solve_kepler(double mean_anomaly, double eccentricity);

/// Position relative to the central body at time t.
Vec3 elements_to_position(const KeplerianElements& elements, Epoch t);

EulerDeg planet_rotation(const RotationModel& model, Epoch t);

/// Surface point at (radius + altitude), turned by the planet's current rotation.
Vec3 lander_position(const GeodeticSite& site, double planet_radius, const EulerDeg& rotation);

/// Throws RangeError if t lies outside the table.
StateSample interpolate(const EphemerisTable& table, Epoch t);

/// Sample times start, start+step, ... plus `end` when it is off the grid.
/// Throws DomainError unless start < end and step > 0.
std::vector<Epoch> make_time_grid(Epoch start, Epoch end, double step);

struct PlanetBody {
    KeplerianElements orbit; ///< heliocentric
    RotationModel rotation;
};

struct OrbiterBody {
    KeplerianElements orbit; ///< relative to the host planet
};

struct LanderBody {
    GeodeticSite site;
    double host_radius = 0.0;
    RotationModel host_rotation;
};

using BodyModel = std::variant<PlanetBody, OrbiterBody, LanderBody>;

/// Planets carry rotations; orbiters and landers do not.
EphemerisTable sample_trajectory(const BodyModel& body, Epoch start, Epoch end, double step);

} // namespace ipnv
