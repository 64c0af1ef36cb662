#include "decamin/walk_graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include <boost/geometry/index/rtree.hpp>
#include <spdlog/spdlog.h>

#include "decamin/error.hpp"

namespace decamin {

namespace bgi = boost::geometry::index;

using IndexedPiece = std::pair<geo::bg::model::segment<geo::Point>, std::pair<std::uint32_t, std::uint32_t>>;

struct WalkGraph::SpatialIndex {
  bgi::rtree<IndexedPiece, bgi::rstar<16>> tree;
};

WalkGraph::WalkGraph() = default;
WalkGraph::WalkGraph(WalkGraph&&) noexcept = default;
WalkGraph& WalkGraph::operator=(WalkGraph&&) noexcept = default;
WalkGraph::~WalkGraph() = default;

namespace {

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

}  // namespace

WalkGraph WalkGraph::build(const WalkNetworkSource& source, const Projection& proj) {
  if (source.nodes.empty() || source.edges.empty()) throw InputError("cannot build a walk graph from an empty network");
  WalkGraph g;
  g.positions_.reserve(source.nodes.size());
  for (const NetworkNode& n : source.nodes) g.positions_.push_back(proj.forward(n.location));

  g.edges_.reserve(source.edges.size());
  for (const NetworkEdge& se : source.edges) {
    if (se.from >= source.nodes.size() || se.to >= source.nodes.size())
      throw InputError("dangling edge reference in walk network");
    Edge e;
    e.from = static_cast<std::uint32_t>(se.from);
    e.to = static_cast<std::uint32_t>(se.to);
    if (se.geometry.size() >= 2) {
      for (const LonLat& p : se.geometry) e.geometry.push_back(proj.forward(p));
      // Endpoints follow the node table so adjacent edges share vertices.
      e.geometry.front() = g.positions_[se.from];
      e.geometry.back() = g.positions_[se.to];
    } else {
      e.geometry = {g.positions_[se.from], g.positions_[se.to]};
    }
    e.cumulative.resize(e.geometry.size(), 0.0);
    for (std::size_t i = 1; i < e.geometry.size(); ++i)
      e.cumulative[i] = e.cumulative[i - 1] + geo::bg::distance(e.geometry[i - 1], e.geometry[i]);
    if (se.length) {
      e.length = *se.length;
    } else {
      e.length = e.cumulative.back();
    }
    if (!(e.length > 0.0)) throw InputError("walk edge with non-positive length");
    g.edges_.push_back(std::move(e));
  }

  const std::size_t n = g.positions_.size();
  std::vector<std::size_t> degree(n, 0);
  for (const Edge& e : g.edges_) {
    ++degree[e.from];
    if (e.to != e.from) ++degree[e.to];
  }
  g.offsets_.assign(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) g.offsets_[v + 1] = g.offsets_[v] + degree[v];
  g.incident_.resize(g.offsets_[n]);
  std::vector<std::size_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
  for (std::size_t i = 0; i < g.edges_.size(); ++i) {
    const Edge& e = g.edges_[i];
    g.incident_[fill[e.from]++] = static_cast<std::uint32_t>(i);
    if (e.to != e.from) g.incident_[fill[e.to]++] = static_cast<std::uint32_t>(i);
  }

  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  for (const Edge& e : g.edges_) {
    const std::size_t a = find_root(parent, e.from);
    const std::size_t b = find_root(parent, e.to);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  // Components over nodes that carry at least one edge.
  g.component_.assign(n, static_cast<std::size_t>(-1));
  std::vector<std::size_t> label(n, static_cast<std::size_t>(-1));
  for (std::size_t v = 0; v < n; ++v) {
    if (degree[v] == 0) continue;
    const std::size_t r = find_root(parent, v);
    if (label[r] == static_cast<std::size_t>(-1)) label[r] = g.component_count_++;
    g.component_[v] = label[r];
  }

  std::vector<IndexedPiece> pieces;
  for (std::size_t i = 0; i < g.edges_.size(); ++i) {
    const auto& geom = g.edges_[i].geometry;
    for (std::size_t k = 0; k + 1 < geom.size(); ++k)
      pieces.push_back({{geom[k], geom[k + 1]}, {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(k)}});
  }
  g.index_ = std::make_unique<SpatialIndex>();
  g.index_->tree = decltype(g.index_->tree)(pieces.begin(), pieces.end());
  spdlog::debug("walk graph: {} nodes, {} edges, {} components", n, g.edges_.size(), g.component_count_);
  return g;
}

std::optional<WalkGraph::Snap> WalkGraph::snap(const geo::Point& p, double max_distance) const {
  std::vector<IndexedPiece> hits;
  index_->tree.query(bgi::nearest(p, 4), std::back_inserter(hits));
  std::optional<Snap> best;
  std::pair<std::uint32_t, std::uint32_t> best_key{};
  for (const auto& [seg, key] : hits) {
    const geo::Point& a = seg.first;
    const geo::Point& b = seg.second;
    const double dx = b.x() - a.x();
    const double dy = b.y() - a.y();
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0.0 ? ((p.x() - a.x()) * dx + (p.y() - a.y()) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const geo::Point q(a.x() + t * dx, a.y() + t * dy);
    const double d = std::hypot(p.x() - q.x(), p.y() - q.y());
    if (!best || d < best->distance || (d == best->distance && key < best_key)) {
      const Edge& e = edges_[key.first];
      const double geom_len = e.cumulative.back();
      const double along = e.cumulative[key.second] + t * std::sqrt(len2);
      Snap s;
      s.edge = key.first;
      s.offset = geom_len > 0.0 ? std::clamp(along / geom_len, 0.0, 1.0) * e.length : 0.0;
      s.point = q;
      s.distance = d;
      best = s;
      best_key = key;
    }
  }
  if (!best || best->distance > max_distance) return std::nullopt;
  return best;
}

namespace {

// Per-thread Dijkstra scratch, reset through the touched list after each run.
struct Scratch {
  std::vector<double> dist;
  std::vector<std::uint32_t> touched;
  std::vector<char> edge_seen;
  std::vector<std::uint32_t> edges_touched;

  void prepare(std::size_t nodes, std::size_t edges) {
    if (dist.size() < nodes) dist.resize(nodes, std::numeric_limits<double>::infinity());
    if (edge_seen.size() < edges) edge_seen.resize(edges, 0);
  }
  void reset() {
    for (std::uint32_t v : touched) dist[v] = std::numeric_limits<double>::infinity();
    touched.clear();
    for (std::uint32_t e : edges_touched) edge_seen[e] = 0;
    edges_touched.clear();
  }
};

Scratch& scratch() {
  thread_local Scratch s;
  return s;
}

// Part of `geom` between geometric distances [from, to].
geo::Polyline clip(const WalkGraph::Edge& e, double from, double to) {
  const auto& geom = e.geometry;
  const auto& cum = e.cumulative;
  auto point_at = [&](double d) {
    auto it = std::upper_bound(cum.begin(), cum.end(), d);
    std::size_t k = it == cum.begin() ? 0 : static_cast<std::size_t>(it - cum.begin()) - 1;
    if (k + 1 >= geom.size()) return geom.back();
    const double span = cum[k + 1] - cum[k];
    const double t = span > 0.0 ? (d - cum[k]) / span : 0.0;
    return geo::Point(geom[k].x() + t * (geom[k + 1].x() - geom[k].x()),
                      geom[k].y() + t * (geom[k + 1].y() - geom[k].y()));
  };
  geo::Polyline out;
  out.push_back(point_at(from));
  for (std::size_t k = 0; k < geom.size(); ++k)
    if (cum[k] > from && cum[k] < to) out.push_back(geom[k]);
  out.push_back(point_at(to));
  return out;
}

}  // namespace

Reach reachable_set(const WalkGraph& g, const WalkGraph::Snap& origin, double budget_m) {
  if (!(budget_m > 0.0)) throw Error("reachable_set needs a positive budget");
  Scratch& s = scratch();
  s.prepare(g.node_count(), g.edge_count());

  using Item = std::pair<double, std::uint32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  auto relax = [&](std::uint32_t v, double d) {
    if (d > budget_m || !(d < s.dist[v])) return;
    if (std::isinf(s.dist[v])) s.touched.push_back(v);
    s.dist[v] = d;
    heap.emplace(d, v);
  };

  const WalkGraph::Edge& start = g.edge(origin.edge);
  relax(start.from, origin.offset);
  relax(start.to, start.length - origin.offset);
  while (!heap.empty()) {
    const auto [d, v] = heap.top();
    heap.pop();
    if (d > s.dist[v]) continue;
    for (std::uint32_t ei : g.incident(v)) {
      const WalkGraph::Edge& e = g.edge(ei);
      relax(e.from == v ? e.to : e.from, d + e.length);
    }
  }

  Reach reach;
  reach.origin = origin;
  reach.budget_m = budget_m;
  for (std::uint32_t v : s.touched) reach.nodes.push_back({v, s.dist[v]});
  std::sort(reach.nodes.begin(), reach.nodes.end(), [](const auto& a, const auto& b) { return a.node < b.node; });

  auto mark = [&](std::uint32_t e) {
    if (!s.edge_seen[e]) {
      s.edge_seen[e] = 1;
      s.edges_touched.push_back(e);
    }
  };
  mark(static_cast<std::uint32_t>(origin.edge));
  for (std::uint32_t v : s.touched)
    for (std::uint32_t e : g.incident(v)) mark(e);
  std::vector<std::uint32_t> edges = s.edges_touched;
  std::sort(edges.begin(), edges.end());

  for (std::uint32_t ei : edges) {
    const WalkGraph::Edge& e = g.edge(ei);
    const double len = e.length;
    std::vector<std::pair<double, double>> spans;  // routing distance along the edge
    const double df = s.dist[e.from];
    const double dt = s.dist[e.to];
    if (df <= budget_m) spans.emplace_back(0.0, std::min(len, budget_m - df));
    if (dt <= budget_m) spans.emplace_back(std::max(0.0, len - (budget_m - dt)), len);
    if (ei == origin.edge)
      spans.emplace_back(std::max(0.0, origin.offset - budget_m), std::min(len, origin.offset + budget_m));
    std::sort(spans.begin(), spans.end());
    std::vector<std::pair<double, double>> merged;
    for (const auto& sp : spans) {
      if (!merged.empty() && sp.first <= merged.back().second)
        merged.back().second = std::max(merged.back().second, sp.second);
      else
        merged.push_back(sp);
    }
    const double scale = e.cumulative.back() / len;
    for (const auto& [a, b] : merged) {
      if (b <= a) continue;
      reach.segments.push_back(clip(e, a * scale, b * scale));
    }
  }
  if (reach.segments.empty()) reach.segments.push_back(geo::Polyline{origin.point});
  s.reset();
  return reach;
}

std::optional<Reach> reachable_set(const WalkGraph& g, const geo::Point& origin, double budget_s, double speed_m_s,
                                   double snap_limit_m) {
  if (!(budget_s > 0.0) || !(speed_m_s > 0.0)) throw Error("budget and speed must be positive");
  auto snapped = g.snap(origin, snap_limit_m);
  if (!snapped) return std::nullopt;
  return reachable_set(g, *snapped, budget_distance(budget_s, speed_m_s));
}

}  // namespace decamin
