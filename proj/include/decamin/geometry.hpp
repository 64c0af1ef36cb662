#pragma once

#include <span>
#include <vector>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>

namespace decamin::geo {

namespace bg = boost::geometry;

// Planar coordinates in meters after projection. Polygons are closed and
// counter-clockwise, matching GeoJSON ring orientation.
using Point = bg::model::d2::point_xy<double>;
using Polyline = bg::model::linestring<Point>;
using Ring = bg::model::ring<Point, false>;
using Polygon = bg::model::polygon<Point, false>;
using MultiPolygon = bg::model::multi_polygon<Polygon>;
using Box = bg::model::box<Point>;

// Snap tolerance for boundary-inclusive predicates.
inline constexpr double kSnapTolerance = 1e-9;

/// Builds a polygon from an outer ring (closing and orienting it).
Polygon make_polygon(std::vector<Point> outer, std::vector<std::vector<Point>> holes = {});

/// Corrects orientation/closure and throws GeometryError when the polygon is
/// still not valid (self-intersection, zero area, spikes).
void require_valid(Polygon& poly);

double area(const Polygon& poly);
double area(const MultiPolygon& poly);

/// Area-weighted centroid. Throws GeometryError for zero-area polygons.
Point polygon_centroid(const Polygon& poly);

/// Area of a ∩ b in m². Both inputs are validated.
double intersection_area(const Polygon& a, const Polygon& b);
/// Same, for callers that already hold valid geometry.
double intersection_area_unchecked(const Polygon& a, const Polygon& b);

/// Boundary-inclusive point in polygon (holes excluded, their rings included).
bool contains(const Polygon& poly, const Point& p);

/// Union of round-capped buffers around every polyline. A polyline whose
/// points all coincide contributes a disc. Throws GeometryError for empty
/// input or radius <= 0.
///
/// Segments are deduplicated and chained into maximal polylines before
/// buffering, so the result depends only on the set of segments.
MultiPolygon buffer_union(std::span<const Polyline> lines, double radius, int points_per_circle = 32);

}  // namespace decamin::geo
