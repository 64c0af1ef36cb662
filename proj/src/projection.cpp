#include "decamin/projection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/geometry/formulas/karney_direct.hpp>
#include <boost/geometry/formulas/karney_inverse.hpp>
#include <boost/geometry/srs/spheroid.hpp>

#include "decamin/error.hpp"

namespace decamin {

namespace {

namespace bg = boost::geometry;

constexpr double kDeg = std::numbers::pi / 180.0;

const bg::srs::spheroid<double>& wgs84() {
  static const bg::srs::spheroid<double> s;  // default parameters are WGS84
  return s;
}

}  // namespace

void check_lonlat(LonLat p) {
  if (!std::isfinite(p.lon) || !std::isfinite(p.lat) || std::abs(p.lat) >= 85.0 || std::abs(p.lon) > 180.0) {
    std::ostringstream msg;
    msg << "coordinate out of range: lon=" << p.lon << " lat=" << p.lat;
    throw InputError(msg.str());
  }
}

Projection::Projection(LonLat origin) : origin_(origin) { check_lonlat(origin); }

Projection Projection::centered_on(std::span<const LonLat> points) {
  if (points.empty()) throw InputError("cannot center a projection on an empty dataset");
  double min_lon = points[0].lon, max_lon = points[0].lon;
  double min_lat = points[0].lat, max_lat = points[0].lat;
  for (const LonLat& p : points) {
    min_lon = std::min(min_lon, p.lon);
    max_lon = std::max(max_lon, p.lon);
    min_lat = std::min(min_lat, p.lat);
    max_lat = std::max(max_lat, p.lat);
  }
  return Projection(LonLat{(min_lon + max_lon) / 2.0, (min_lat + max_lat) / 2.0});
}

geo::Point Projection::forward(LonLat p) const {
  check_lonlat(p);
  if (p.lon == origin_.lon && p.lat == origin_.lat) return geo::Point(0.0, 0.0);
  // Boost's Karney formulas take and return degrees.
  const auto r = bg::formula::karney_inverse<double, true, true>::apply(origin_.lon, origin_.lat, p.lon, p.lat, wgs84());
  const double az = r.azimuth * kDeg;
  return geo::Point(r.distance * std::sin(az), r.distance * std::cos(az));
}

LonLat Projection::inverse(const geo::Point& p) const {
  const double s = std::hypot(p.x(), p.y());
  if (s == 0.0) return origin_;
  const double az = std::atan2(p.x(), p.y()) / kDeg;
  const auto r = bg::formula::karney_direct<double, true>::apply(origin_.lon, origin_.lat, s, az, wgs84());
  return LonLat{r.lon2, r.lat2};
}

}  // namespace decamin
