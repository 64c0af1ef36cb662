#include "decamin/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <string>
#include <utility>

#include <spdlog/spdlog.h>

#include "decamin/error.hpp"

namespace decamin::geo {

Polygon make_polygon(std::vector<Point> outer, std::vector<std::vector<Point>> holes) {
  Polygon poly;
  poly.outer().assign(outer.begin(), outer.end());
  for (auto& hole : holes) {
    poly.inners().emplace_back(hole.begin(), hole.end());
  }
  bg::correct(poly);
  return poly;
}

void require_valid(Polygon& poly) {
  bg::correct(poly);
  std::string reason;
  if (!bg::is_valid(poly, reason)) throw GeometryError("invalid polygon: " + reason);
  if (!(bg::area(poly) > 0.0)) throw GeometryError("invalid polygon: zero area");
}

double area(const Polygon& poly) { return bg::area(poly); }
double area(const MultiPolygon& poly) { return bg::area(poly); }

Point polygon_centroid(const Polygon& poly) {
  // Shoelace centroid over every ring; holes are clockwise so their signed
  // contributions subtract.
  // Coordinates are taken relative to the first outer vertex for precision.
  if (poly.outer().empty()) throw GeometryError("centroid of an empty polygon");
  const Point origin = poly.outer().front();
  double a2 = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  auto accumulate = [&](const auto& ring) {
    for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
      const double x0 = ring[i].x() - origin.x();
      const double y0 = ring[i].y() - origin.y();
      const double x1 = ring[i + 1].x() - origin.x();
      const double y1 = ring[i + 1].y() - origin.y();
      const double cross = x0 * y1 - x1 * y0;
      a2 += cross;
      cx += (x0 + x1) * cross;
      cy += (y0 + y1) * cross;
    }
  };
  accumulate(poly.outer());
  for (const auto& inner : poly.inners()) accumulate(inner);
  if (a2 == 0.0 || !std::isfinite(a2)) throw GeometryError("centroid of a zero-area polygon");
  return Point(origin.x() + cx / (3.0 * a2), origin.y() + cy / (3.0 * a2));
}

double intersection_area_unchecked(const Polygon& a, const Polygon& b) {
  if (bg::disjoint(bg::return_envelope<Box>(a), bg::return_envelope<Box>(b))) return 0.0;
  MultiPolygon out;
  bg::intersection(a, b, out);
  return bg::area(out);
}

double intersection_area(const Polygon& a, const Polygon& b) {
  Polygon va = a;
  Polygon vb = b;
  require_valid(va);
  require_valid(vb);
  return intersection_area_unchecked(va, vb);
}

bool contains(const Polygon& poly, const Point& p) {
  if (bg::covered_by(p, poly)) return true;
  const Box env = bg::return_envelope<Box>(poly);
  if (p.x() < env.min_corner().x() - kSnapTolerance || p.x() > env.max_corner().x() + kSnapTolerance ||
      p.y() < env.min_corner().y() - kSnapTolerance || p.y() > env.max_corner().y() + kSnapTolerance)
    return false;
  return bg::distance(p, poly) <= kSnapTolerance;
}

namespace {

struct Segment {
  Point a;
  Point b;
};

bool point_less(const Point& p, const Point& q) {
  return p.x() < q.x() || (p.x() == q.x() && p.y() < q.y());
}

bool point_equal(const Point& p, const Point& q) { return p.x() == q.x() && p.y() == q.y(); }

// Joins deduplicated segments into polylines that pass straight through
// nodes wherever possible. Buffering a handful of long polylines is an order
// of magnitude cheaper than buffering the same segments one by one.
std::vector<Polyline> chain_segments(std::vector<Segment> segs) {
  std::vector<Point> nodes;
  nodes.reserve(segs.size() * 2);
  for (const Segment& s : segs) {
    nodes.push_back(s.a);
    nodes.push_back(s.b);
  }
  std::sort(nodes.begin(), nodes.end(), point_less);
  nodes.erase(std::unique(nodes.begin(), nodes.end(), point_equal), nodes.end());
  auto node_of = [&](const Point& p) {
    return static_cast<std::size_t>(std::lower_bound(nodes.begin(), nodes.end(), p, point_less) - nodes.begin());
  };

  const std::size_t n_seg = segs.size();
  std::vector<std::size_t> end_node(2 * n_seg);
  std::vector<std::vector<std::size_t>> incident(nodes.size());  // half-edge ids: 2*seg + end
  for (std::size_t i = 0; i < n_seg; ++i) {
    end_node[2 * i] = node_of(segs[i].a);
    end_node[2 * i + 1] = node_of(segs[i].b);
    incident[end_node[2 * i]].push_back(2 * i);
    incident[end_node[2 * i + 1]].push_back(2 * i + 1);
  }

  // Pair the segment ends meeting at each node, straightest pairs first.
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> partner(2 * n_seg, kNone);
  for (std::size_t v = 0; v < nodes.size(); ++v) {
    const auto& ends = incident[v];
    if (ends.size() < 2) continue;
    auto direction = [&](std::size_t half) {
      const Segment& s = segs[half / 2];
      const Point& from = (half % 2 == 0) ? s.a : s.b;
      const Point& to = (half % 2 == 0) ? s.b : s.a;
      const double dx = to.x() - from.x();
      const double dy = to.y() - from.y();
      const double len = std::hypot(dx, dy);
      return std::pair<double, double>{dx / len, dy / len};
    };
    std::vector<std::tuple<double, std::size_t, std::size_t>> candidates;
    for (std::size_t i = 0; i < ends.size(); ++i) {
      for (std::size_t j = i + 1; j < ends.size(); ++j) {
        if (ends[i] / 2 == ends[j] / 2) continue;
        auto [ux, uy] = direction(ends[i]);
        auto [wx, wy] = direction(ends[j]);
        candidates.emplace_back(ux * wx + uy * wy, ends[i], ends[j]);
      }
    }
    std::sort(candidates.begin(), candidates.end());
    for (const auto& [dot, h1, h2] : candidates) {
      if (partner[h1] == kNone && partner[h2] == kNone) {
        partner[h1] = h2;
        partner[h2] = h1;
      }
    }
  }

  std::vector<bool> used(n_seg, false);
  std::vector<Polyline> chains;
  for (std::size_t start = 0; start < n_seg; ++start) {
    if (used[start]) continue;
    used[start] = true;
    std::deque<std::size_t> chain_nodes{end_node[2 * start], end_node[2 * start + 1]};
    // Grow the chain through `half` (the end of the current tail segment).
    auto extend = [&](std::size_t half, bool at_back) {
      while (true) {
        const std::size_t next = partner[half];
        if (next == kNone || used[next / 2]) return;
        const std::size_t far = end_node[next ^ 1];
        const std::size_t other_end = at_back ? chain_nodes.front() : chain_nodes.back();
        if (far == other_end) return;  // would close the loop
        used[next / 2] = true;
        if (at_back)
          chain_nodes.push_back(far);
        else
          chain_nodes.push_front(far);
        half = next ^ 1;
      }
    };
    extend(2 * start + 1, true);
    extend(2 * start, false);
    Polyline line;
    line.reserve(chain_nodes.size());
    for (std::size_t v : chain_nodes) line.push_back(nodes[v]);
    chains.push_back(std::move(line));
  }
  return chains;
}

template <typename Geometry>
MultiPolygon round_buffer(const Geometry& geometry, double radius, int points) {
  namespace sb = bg::strategy::buffer;
  MultiPolygon out;
  bg::buffer(geometry, out, sb::distance_symmetric<double>(radius), sb::side_straight(), sb::join_round(points),
             sb::end_round(points), sb::point_circle(points));
  return out;
}

MultiPolygon merge(const MultiPolygon& a, const MultiPolygon& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  MultiPolygon out;
  bg::union_(a, b, out);
  return out;
}

// Pairwise union of individually buffered pieces. Slower, used only when the
// single-pass buffer reports an invalid result.
MultiPolygon cascaded_buffer(const std::vector<Polyline>& lines, const bg::model::multi_point<Point>& points,
                             double radius, int n) {
  std::vector<MultiPolygon> parts;
  for (const Polyline& line : lines) {
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
      Polyline seg{line[i], line[i + 1]};
      parts.push_back(round_buffer(seg, radius, n));
    }
  }
  for (const Point& p : points) parts.push_back(round_buffer(p, radius, n));
  while (parts.size() > 1) {
    std::vector<MultiPolygon> next;
    for (std::size_t i = 0; i + 1 < parts.size(); i += 2) next.push_back(merge(parts[i], parts[i + 1]));
    if (parts.size() % 2 == 1) next.push_back(std::move(parts.back()));
    parts = std::move(next);
  }
  return parts.empty() ? MultiPolygon{} : parts.front();
}

}  // namespace

MultiPolygon buffer_union(std::span<const Polyline> lines, double radius, int points_per_circle) {
  if (!(radius > 0.0)) throw GeometryError("buffer radius must be positive");
  if (points_per_circle < 8) throw GeometryError("buffer needs at least 8 points per circle");

  std::vector<Segment> segs;
  bg::model::multi_point<Point> points;
  for (const Polyline& line : lines) {
    bool any_segment = false;
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
      Point a = line[i];
      Point b = line[i + 1];
      if (point_equal(a, b)) continue;
      if (point_less(b, a)) std::swap(a, b);
      segs.push_back({a, b});
      any_segment = true;
    }
    if (!any_segment && !line.empty()) points.push_back(line.front());
  }
  if (segs.empty() && points.empty()) throw GeometryError("buffer_union of empty input");

  auto seg_less = [](const Segment& s, const Segment& t) {
    if (!point_equal(s.a, t.a)) return point_less(s.a, t.a);
    return point_less(s.b, t.b);
  };
  std::sort(segs.begin(), segs.end(), seg_less);
  segs.erase(std::unique(segs.begin(), segs.end(),
                         [](const Segment& s, const Segment& t) { return point_equal(s.a, t.a) && point_equal(s.b, t.b); }),
             segs.end());
  std::sort(points.begin(), points.end(), point_less);
  points.erase(std::unique(points.begin(), points.end(), point_equal), points.end());

  const std::vector<Polyline> chains = segs.empty() ? std::vector<Polyline>{} : chain_segments(std::move(segs));
  bg::model::multi_linestring<Polyline> multi;
  multi.assign(chains.begin(), chains.end());

  MultiPolygon result;
  if (!multi.empty()) result = round_buffer(multi, radius, points_per_circle);
  if (!points.empty()) result = merge(result, round_buffer(points, radius, points_per_circle));

  if (result.empty() || !bg::is_valid(result)) {
    spdlog::debug("buffer_union: single-pass buffer invalid, using cascaded union");
    result = cascaded_buffer(chains, points, radius, points_per_circle);
    bg::correct(result);
  }
  return result;
}

}  // namespace decamin::geo
