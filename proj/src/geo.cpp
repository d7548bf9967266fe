#include "aisllm/geo.hpp"

#include <algorithm>

namespace aisllm {

GeoPoint::GeoPoint(double lat_deg, double lon_deg) : lat(lat_deg), lon(lon_deg) {
    if (!std::isfinite(lat) || lat < -90.0 || lat > 90.0)
        throw InvalidCoordinate("latitude out of range: " + std::to_string(lat_deg));
    if (!std::isfinite(lon) || lon < -180.0 || lon > 180.0)
        throw InvalidCoordinate("longitude out of range: " + std::to_string(lon_deg));
}

KinematicState::KinematicState(GeoPoint pos, double sog_kn, double cog_deg)
    : position(pos), sog(sog_kn), cog(wrap360(cog_deg)) {
    if (!std::isfinite(sog) || sog < 0.0)
        throw InvalidKinematics("sog must be finite and >= 0, got " + std::to_string(sog_kn));
    if (!std::isfinite(cog_deg))
        throw InvalidKinematics("cog must be finite");
}

void CriWeights::validate() const {
    const double ws[] = {w_dcpa, w_tcpa, w_range, w_bearing, w_speed};
    double sum = 0.0;
    for (double w : ws) {
        if (!(w >= 0.0)) throw InvalidWeights("cri weights must be non-negative");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw InvalidWeights("cri weights must sum to 1, got " + std::to_string(sum));
    if (!(d_safe_nm > 0.0)) throw InvalidWeights("d_safe must be positive");
    if (!(t_horizon_min > 0.0)) throw InvalidWeights("t_horizon must be positive");
}

double haversine_nm(const GeoPoint& a, const GeoPoint& b) {
    const double dlat = deg2rad(b.lat - a.lat);
    const double dlon = deg2rad(b.lon - a.lon);
    const double s1 = std::sin(dlat / 2.0);
    const double s2 = std::sin(dlon / 2.0);
    const double h = s1 * s1 + std::cos(deg2rad(a.lat)) * std::cos(deg2rad(b.lat)) * s2 * s2;
    const double c = 2.0 * std::atan2(std::sqrt(h), std::sqrt(std::max(0.0, 1.0 - h)));
    return kEarthRadiusNm * c;
}

double initial_bearing(const GeoPoint& a, const GeoPoint& b) {
    if (a.lat == b.lat && a.lon == b.lon)
        throw CoincidentPoints("bearing undefined for coincident points");
    const double lat1 = deg2rad(a.lat);
    const double lat2 = deg2rad(b.lat);
    const double dlon = deg2rad(b.lon - a.lon);
    const double y = std::sin(dlon) * std::cos(lat2);
    const double x = std::cos(lat1) * std::sin(lat2) - std::sin(lat1) * std::cos(lat2) * std::cos(dlon);
    return wrap360(rad2deg(std::atan2(y, x)));
}

namespace {

// Tangent-plane offset of q relative to center, in NM.
void tangent_offset_nm(const GeoPoint& center, const GeoPoint& q, double& east, double& north) {
    double dlon = q.lon - center.lon;
    if (dlon > 180.0) dlon -= 360.0;
    if (dlon < -180.0) dlon += 360.0;
    east = dlon * std::cos(deg2rad(center.lat)) * 60.0;
    north = (q.lat - center.lat) * 60.0;
}

} // namespace

EncounterGeometry encounter_geometry(const KinematicState& own, const KinematicState& target) {
    EncounterGeometry g;
    tangent_offset_nm(own.position, target.position, g.rel_east, g.rel_north);

    // cog measured clockwise from north: east = sin, north = cos
    g.vel_east = target.sog * std::sin(deg2rad(target.cog)) - own.sog * std::sin(deg2rad(own.cog));
    g.vel_north = target.sog * std::cos(deg2rad(target.cog)) - own.sog * std::cos(deg2rad(own.cog));

    g.range = std::hypot(g.rel_east, g.rel_north);
    const double abs_bearing = wrap360(rad2deg(std::atan2(g.rel_east, g.rel_north)));
    g.rel_bearing = wrap360(abs_bearing - own.cog);
    g.speed_ratio = target.sog / std::max(own.sog, kMinOwnSogKn);
    return g;
}

CpaResult dcpa_tcpa(const EncounterGeometry& g) {
    CpaResult r;
    const double v2 = g.vel_east * g.vel_east + g.vel_north * g.vel_north;
    if (std::sqrt(v2) < 1e-6) {
        r.tcpa_min = 0.0;
        r.dcpa_nm = g.range;
        return r;
    }
    const double t_hours = -(g.rel_east * g.vel_east + g.rel_north * g.vel_north) / v2;
    r.tcpa_min = t_hours * 60.0;
    const double ce = g.rel_east + g.vel_east * t_hours;
    const double cn = g.rel_north + g.vel_north * t_hours;
    r.dcpa_nm = std::hypot(ce, cn);
    return r;
}

CriFactors cri_factors(double dcpa_nm, double tcpa_min, double range_nm,
                       double rel_bearing_deg, double speed_ratio, const CriWeights& w) {
    CriFactors f;
    const double dd = dcpa_nm / w.d_safe_nm;
    f.u_dcpa = std::exp(-dd * dd);
    f.u_tcpa = tcpa_min < 0.0 ? 0.0 : std::clamp(1.0 - tcpa_min / w.t_horizon_min, 0.0, 1.0);
    const double rr = range_nm / (4.0 * w.d_safe_nm);
    f.u_range = std::exp(-rr * rr);
    // peaks near dead-ahead (19 degrees off the bow)
    f.u_bearing = (1.0 + std::cos(deg2rad(rel_bearing_deg - 19.0))) / 2.0;
    f.u_speed = speed_ratio / (1.0 + speed_ratio);
    return f;
}

double cri(const EncounterGeometry& g, const CriWeights& w) {
    w.validate();
    const CpaResult cpa = dcpa_tcpa(g);
    const CriFactors f =
        cri_factors(cpa.dcpa_nm, cpa.tcpa_min, g.range, g.rel_bearing, g.speed_ratio, w);
    const double risk = w.w_dcpa * f.u_dcpa + w.w_tcpa * f.u_tcpa + w.w_range * f.u_range +
                        w.w_bearing * f.u_bearing + w.w_speed * f.u_speed;
    return std::clamp(risk, 0.0, 1.0);
}

double point_segment_distance_nm(const GeoPoint& p, const GeoPoint& a, const GeoPoint& b) {
    double ae, an, be, bn;
    tangent_offset_nm(p, a, ae, an);
    tangent_offset_nm(p, b, be, bn);
    const double de = be - ae;
    const double dn = bn - an;
    const double len2 = de * de + dn * dn;
    double t = 0.0;
    if (len2 > 0.0) t = std::clamp(-(ae * de + an * dn) / len2, 0.0, 1.0);
    return std::hypot(ae + t * de, an + t * dn);
}

GeoPoint dead_reckon(const GeoPoint& from, double sog_kn, double cog_deg, double dt_min) {
    const double dist_nm = sog_kn * dt_min / 60.0;
    const double north_nm = dist_nm * std::cos(deg2rad(cog_deg));
    const double east_nm = dist_nm * std::sin(deg2rad(cog_deg));
    const double lat = from.lat + north_nm / 60.0;
    const double lon = from.lon + east_nm / (60.0 * std::cos(deg2rad(from.lat)));
    return GeoPoint(lat, lon);
}

} // namespace aisllm
