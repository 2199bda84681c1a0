#include "ipnv/astro.hpp"

#include "ipnv/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ipnv {

namespace {

constexpr double kKeplerTolerance = 1e-13;
constexpr int kNewtonIterations = 50;
constexpr int kBisectionIterations = 200;
// Grid points closer than this to the range end collapse onto the end.
constexpr double kGridSnap = 1e-6;

double shortest_arc(double from_deg, double to_deg, double f)
{
    double delta = std::fmod(to_deg - from_deg, 360.0);
    if (delta > 180.0) {
        delta -= 360.0;
    } else if (delta < -180.0) {
        delta += 360.0;
    }
    return wrap_degrees(from_deg + delta * f);
}

} // namespace

Mat3 Mat3::operator*(const Mat3& o) const
{
    Mat3 r;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            r.m[i][j] = m[i][0] * o.m[0][j] + m[i][1] * o.m[1][j] + m[i][2] * o.m[2][j];
        }
    }
    return r;
}

Mat3 Mat3::rot_x(double rad)
{
    const double c = std::cos(rad);
    const double s = std::sin(rad);
    Mat3 r;
    r.m[1][1] = c;
    r.m[1][2] = -s;
    r.m[2][1] = s;
    r.m[2][2] = c;
    return r;
}

Mat3 Mat3::rot_y(double rad)
{
    const double c = std::cos(rad);
    const double s = std::sin(rad);
    Mat3 r;
    r.m[0][0] = c;
    r.m[0][2] = s;
    r.m[2][0] = -s;
    r.m[2][2] = c;
    return r;
}

Mat3 Mat3::rot_z(double rad)
{
    const double c = std::cos(rad);
    const double s = std::sin(rad);
    Mat3 r;
    r.m[0][0] = c;
    r.m[0][1] = -s;
    r.m[1][0] = s;
    r.m[1][1] = c;
    return r;
}

Mat3 Mat3::from_euler(const EulerDeg& e)
{
    return rot_z(e.z * kRadPerDeg) * rot_y(e.y * kRadPerDeg) * rot_x(e.x * kRadPerDeg);
}

double wrap_two_pi(double rad)
{
    double r = std::fmod(rad, kTwoPi);
    if (r < 0.0) {
        r += kTwoPi;
    }
    if (r >= kTwoPi) {
        r = 0.0;
    }
    return r + 0.0;
}

double wrap_degrees(double deg)
{
    double r = std::fmod(deg, 360.0);
    if (r < 0.0) {
        r += 360.0;
    }
    if (r >= 360.0) {
        r = 0.0;
    }
    return r + 0.0;
}

void KeplerianElements::validate() const
{
    if (!(std::isfinite(semi_major_axis) && semi_major_axis > 0.0)) {
        throw DomainError("semi-major axis must be positive, got " + std::to_string(semi_major_axis));
    }
    if (!(eccentricity >= 0.0 && eccentricity < 1.0)) {
        throw DomainError("eccentricity must lie in [0, 1), got " + std::to_string(eccentricity));
    }
    if (!(std::isfinite(mu) && mu > 0.0)) {
        throw DomainError("gravitational parameter must be positive");
    }
    if (!(std::isfinite(inclination) && std::isfinite(raan) && std::isfinite(arg_periapsis) &&
          std::isfinite(mean_anomaly_at_epoch) && std::isfinite(epoch.seconds))) {
        throw DomainError("orbital elements must be finite");
    }
}

KeplerianElements KeplerianElements::normalized() const
{
    KeplerianElements out = *this;
    out.inclination = wrap_two_pi(inclination);
    out.raan = wrap_two_pi(raan);
    out.arg_periapsis = wrap_two_pi(arg_periapsis);
    out.mean_anomaly_at_epoch = wrap_two_pi(mean_anomaly_at_epoch);
    return out;
}

void RotationModel::validate() const
{
    if (!std::isfinite(period) || period == 0.0) {
        throw DomainError("rotation period must be finite and nonzero");
    }
    if (!(std::isfinite(obliquity) && std::isfinite(node_longitude) && std::isfinite(rotation_at_epoch) &&
          std::isfinite(epoch.seconds))) {
        throw DomainError("rotation model must be finite");
    }
}

void GeodeticSite::validate() const
{
    if (!(std::isfinite(latitude) && std::abs(latitude) <= std::numbers::pi / 2.0)) {
        throw DomainError("latitude must lie in [-pi/2, pi/2]");
    }
    if (!(std::isfinite(longitude) && longitude > -std::numbers::pi && longitude <= std::numbers::pi)) {
        throw DomainError("longitude must lie in (-pi, pi]");
    }
    if (!std::isfinite(altitude)) {
        throw DomainError("altitude must be finite");
    }
}

EphemerisTable::EphemerisTable(std::vector<StateSample> samples, double step)
    : samples_(std::move(samples)), step_(step)
{
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        const auto& s = samples_[i];
        const std::string where = "sample " + std::to_string(i);
        if (!std::isfinite(s.time.seconds) || !s.position.finite()) {
            throw ValidationError(where, "non-finite value");
        }
        if (s.rotation.has_value() != samples_.front().rotation.has_value()) {
            throw ValidationError(where, "rotation present on some samples only");
        }
        if (i > 0 && !(samples_[i - 1].time < s.time)) {
            throw ValidationError(where, "sample times not strictly increasing");
        }
    }
}

double solve_kepler(double mean_anomaly, double eccentricity)
{
    if (!(eccentricity >= 0.0 && eccentricity < 1.0)) {
        throw DomainError("eccentricity must lie in [0, 1), got " + std::to_string(eccentricity));
    }
    if (!std::isfinite(mean_anomaly)) {
        throw DomainError("mean anomaly must be finite");
    }
    const double m = wrap_two_pi(mean_anomaly);
    if (eccentricity == 0.0) {
        return m;
    }

    const auto residual = [&](double e_anom) { return e_anom - eccentricity * std::sin(e_anom) - m; };
    const double upper = std::nextafter(kTwoPi, 0.0);

    double e_anom = eccentricity > 0.8 ? std::numbers::pi : m;
    for (int i = 0; i < kNewtonIterations; ++i) {
        const double f = residual(e_anom);
        if (std::abs(f) < kKeplerTolerance) {
            return std::clamp(e_anom, 0.0, upper);
        }
        e_anom -= f / (1.0 - eccentricity * std::cos(e_anom));
        e_anom = std::clamp(e_anom, 0.0, kTwoPi);
    }

    // f(0) = -m <= 0 and f(2 pi) = 2 pi - m > 0, so [0, 2 pi] always brackets the root.
    double lo = 0.0;
    double hi = kTwoPi;
    double mid = m;
    for (int i = 0; i < kBisectionIterations; ++i) {
        mid = 0.5 * (lo + hi);
        const double f = residual(mid);
        if (std::abs(f) < kKeplerTolerance || mid == lo || mid == hi) {
            break;
        }
        (f < 0.0 ? lo : hi) = mid;
    }
    return std::clamp(mid, 0.0, upper);
}

Vec3 elements_to_position(const KeplerianElements& elements, Epoch t)
{
    elements.validate();
    const double a = elements.semi_major_axis;
    const double e = elements.eccentricity;
    const double mean_anomaly = elements.mean_anomaly_at_epoch + elements.mean_motion() * (t - elements.epoch);
    const double ecc_anomaly = solve_kepler(mean_anomaly, e);

    const Vec3 perifocal{a * (std::cos(ecc_anomaly) - e), a * std::sqrt(1.0 - e * e) * std::sin(ecc_anomaly), 0.0};
    const Mat3 to_frame = Mat3::rot_z(elements.raan) * Mat3::rot_x(elements.inclination) *
                          Mat3::rot_z(elements.arg_periapsis);
    return to_frame * perifocal;
}

EulerDeg planet_rotation(const RotationModel& model, Epoch t)
{
    model.validate();
    const double spin = wrap_two_pi(model.rotation_at_epoch + kTwoPi * (t - model.epoch) / model.period);
    if (model.obliquity == 0.0) {
        return {0.0, 0.0, wrap_degrees(spin * kDegPerRad)};
    }

    // Spin about Z, then tilt the spin axis by the obliquity about the
    // in-plane axis at node_longitude.
    const Mat3 tilt = Mat3::rot_z(model.node_longitude) * Mat3::rot_x(model.obliquity) *
                      Mat3::rot_z(-model.node_longitude);
    const Mat3 r = tilt * Mat3::rot_z(spin);

    double ax = 0.0;
    double ay = 0.0;
    double az = 0.0;
    const double sin_y = -r.m[2][0];
    if (std::abs(sin_y) >= 1.0 - 1e-12) {
        // Gimbal lock: fold the X rotation into Z.
        ay = std::copysign(std::numbers::pi / 2.0, sin_y);
        az = std::atan2(-r.m[0][1], r.m[1][1]);
    } else {
        ay = std::asin(sin_y);
        ax = std::atan2(r.m[2][1], r.m[2][2]);
        az = std::atan2(r.m[1][0], r.m[0][0]);
    }
    return {wrap_degrees(ax * kDegPerRad), wrap_degrees(ay * kDegPerRad), wrap_degrees(az * kDegPerRad)};
}

Vec3 lander_position(const GeodeticSite& site, double planet_radius, const EulerDeg& rotation)
{
    const double r = planet_radius + site.altitude;
    const double cos_lat = std::cos(site.latitude);
    const Vec3 body_fixed{r * cos_lat * std::cos(site.longitude), r * cos_lat * std::sin(site.longitude),
                          r * std::sin(site.latitude)};
    return Mat3::from_euler(rotation) * body_fixed;
}

StateSample interpolate(const EphemerisTable& table, Epoch t)
{
    if (table.empty()) {
        throw RangeError("interpolation on an empty table");
    }
    if (!(t >= table.start() && t <= table.end())) {
        throw RangeError("time " + std::to_string(t.seconds) + " outside table span [" +
                         std::to_string(table.start().seconds) + ", " + std::to_string(table.end().seconds) + "]");
    }
    const auto samples = table.samples();
    const auto after = std::upper_bound(samples.begin(), samples.end(), t,
                                        [](Epoch value, const StateSample& s) { return value < s.time; });
    const auto& s0 = *(after - 1);
    if (s0.time == t || after == samples.end()) {
        return s0;
    }
    const auto& s1 = *after;
    const double f = (t - s0.time) / (s1.time - s0.time);
    const double g = 1.0 - f;

    StateSample out;
    out.time = t;
    out.position = {g * s0.position.x + f * s1.position.x, g * s0.position.y + f * s1.position.y,
                    g * s0.position.z + f * s1.position.z};
    if (s0.rotation && s1.rotation) {
        out.rotation = EulerDeg{shortest_arc(s0.rotation->x, s1.rotation->x, f),
                                shortest_arc(s0.rotation->y, s1.rotation->y, f),
                                shortest_arc(s0.rotation->z, s1.rotation->z, f)};
    }
    return out;
}

std::vector<Epoch> make_time_grid(Epoch start, Epoch end, double step)
{
    if (!(std::isfinite(start.seconds) && std::isfinite(end.seconds) && start < end)) {
        throw DomainError("time range must satisfy start < end");
    }
    if (!(std::isfinite(step) && step > 0.0)) {
        throw DomainError("step must be positive");
    }
    std::vector<Epoch> grid;
    grid.reserve(static_cast<std::size_t>((end - start) / step) + 2);
    for (std::size_t k = 0;; ++k) {
        const Epoch t = start + static_cast<double>(k) * step;
        if (end - t <= kGridSnap) {
            break;
        }
        grid.push_back(t);
    }
    grid.push_back(end);
    return grid;
}

EphemerisTable sample_trajectory(const BodyModel& body, Epoch start, Epoch end, double step)
{
    const auto grid = make_time_grid(start, end, step);
    std::vector<StateSample> samples;
    samples.reserve(grid.size());

    struct Sampler {
        Epoch t;
        StateSample operator()(const PlanetBody& p) const
        {
            return {t, elements_to_position(p.orbit, t), planet_rotation(p.rotation, t)};
        }
        StateSample operator()(const OrbiterBody& o) const { return {t, elements_to_position(o.orbit, t), {}}; }
        StateSample operator()(const LanderBody& l) const
        {
            return {t, lander_position(l.site, l.host_radius, planet_rotation(l.host_rotation, t)), {}};
        }
    };

    std::visit(
        [](const auto& b) {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, LanderBody>) {
                b.site.validate();
                if (!(b.host_radius > 0.0)) {
                    throw DomainError("host radius must be positive");
                }
            } else {
                b.orbit.validate();
            }
        },
        body);

    for (const Epoch t : grid) {
        samples.push_back(std::visit(Sampler{t}, body));
    }
    return EphemerisTable(std::move(samples), step);
}

} // namespace ipnv
