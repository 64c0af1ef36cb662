#pragma once

#include <span>

#include "decamin/geometry.hpp"

namespace decamin {

/// WGS84 longitude/latitude in degrees.
struct LonLat {
  double lon = 0.0;
  double lat = 0.0;
};

/// Ellipsoidal azimuthal-equidistant projection about a fixed origin.
/// Forward maps a point to (s sin az, s cos az) where s and az are the
/// geodesic distance and azimuth from the origin, so x grows east and y
/// north in meters.
class Projection {
 public:
  explicit Projection(LonLat origin);

  /// Origin at the center of the bounding box of `points`.
  static Projection centered_on(std::span<const LonLat> points);

  LonLat origin() const { return origin_; }

  /// Throws InputError for |lat| >= 85 or |lon| > 180.
  geo::Point forward(LonLat p) const;
  LonLat inverse(const geo::Point& p) const;

 private:
  LonLat origin_;
};

/// Throws InputError when the coordinate is outside the projectable range.
void check_lonlat(LonLat p);

}  // namespace decamin
