#pragma once

// Geodesy and vessel-pair kinematics: great-circle distance/bearing,
// closest-point-of-approach quantities and the collision risk index.

#include <cmath>
#include <stdexcept>
#include <string>

namespace aisllm {

inline constexpr double kEarthRadiusNm = 3440.065; // mean earth radius, nautical miles
inline constexpr double kMinOwnSogKn = 0.1;        // floor for speed-ratio denominator
inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

/// Normalize an angle in degrees to [0, 360).
inline double wrap360(double deg) {
    double a = std::fmod(deg, 360.0);
    if (a < 0.0) a += 360.0;
    return a;
}

/// Shortest signed angular difference a - b in degrees, range (-180, 180].
inline double angle_diff_deg(double a, double b) {
    double d = std::fmod(a - b, 360.0);
    if (d > 180.0) d -= 360.0;
    if (d <= -180.0) d += 360.0;
    return d;
}

struct InvalidCoordinate : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct InvalidKinematics : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct CoincidentPoints : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct InvalidWeights : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Geographic position in degrees. Ranges enforced at construction.
struct GeoPoint {
    double lat = 0.0;
    double lon = 0.0;

    GeoPoint() = default;
    GeoPoint(double lat_deg, double lon_deg);
};

/// Position plus speed over ground (knots) and course over ground
/// (degrees clockwise from true north, normalized to [0, 360)).
struct KinematicState {
    GeoPoint position;
    double sog = 0.0;
    double cog = 0.0;

    KinematicState() = default;
    KinematicState(GeoPoint pos, double sog_kn, double cog_deg);
};

/// Relative position/velocity of a vessel pair in a local tangent plane
/// centered on own ship. East/north components in NM and knots.
struct EncounterGeometry {
    double rel_east = 0.0;  // NM
    double rel_north = 0.0; // NM
    double vel_east = 0.0;  // kn
    double vel_north = 0.0; // kn
    double range = 0.0;     // NM
    double rel_bearing = 0.0; // degrees [0, 360), relative to own course
    double speed_ratio = 0.0; // target sog / max(own sog, 0.1 kn)
};

/// Weights for the collision risk index. Must be non-negative and sum to 1.
struct CriWeights {
    double w_dcpa = 0.40;
    double w_tcpa = 0.30;
    double w_range = 0.15;
    double w_bearing = 0.10;
    double w_speed = 0.05;
    double d_safe_nm = 0.5;
    double t_horizon_min = 30.0;

    void validate() const;
};

/// Membership values in [0,1] for each CRI factor.
struct CriFactors {
    double u_dcpa = 0.0;
    double u_tcpa = 0.0;
    double u_range = 0.0;
    double u_bearing = 0.0;
    double u_speed = 0.0;
};

struct CpaResult {
    double dcpa_nm = 0.0;
    double tcpa_min = 0.0; // negative when diverging
};

/// Great-circle distance in nautical miles (haversine, mean-radius sphere).
double haversine_nm(const GeoPoint& a, const GeoPoint& b);

/// Forward azimuth from a to b in degrees [0, 360). Throws CoincidentPoints
/// when a and b are the same point.
double initial_bearing(const GeoPoint& a, const GeoPoint& b);

/// Relative geometry of a vessel pair in the equirectangular tangent plane
/// centered at own.position (east = dlon * cos(lat) * 60, north = dlat * 60).
EncounterGeometry encounter_geometry(const KinematicState& own, const KinematicState& target);

/// Analytic DCPA/TCPA under constant velocity. A relative speed below
/// 1e-6 kn yields tcpa = 0 and dcpa = current range. Negative tcpa
/// (diverging pair) is returned as-is.
CpaResult dcpa_tcpa(const EncounterGeometry& g);

/// Memberships for given kinematic factors; each value lies in [0, 1].
CriFactors cri_factors(double dcpa_nm, double tcpa_min, double range_nm,
                       double rel_bearing_deg, double speed_ratio, const CriWeights& w);

/// Collision risk index in [0, 1]: weighted sum of the factor memberships.
double cri(const EncounterGeometry& g, const CriWeights& w);

/// Distance in NM from a point to the great-circle chord [a, b], evaluated
/// in the tangent plane centered at p. Used by the coastline filter.
double point_segment_distance_nm(const GeoPoint& p, const GeoPoint& a, const GeoPoint& b);

/// Advance a position by dead reckoning: travel sog knots on course cog
/// for dt_min minutes in the local tangent plane.
GeoPoint dead_reckon(const GeoPoint& from, double sog_kn, double cog_deg, double dt_min);

} // namespace aisllm
