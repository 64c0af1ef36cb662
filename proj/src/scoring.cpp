#include "decamin/scoring.hpp"

#include <algorithm>
#include <cmath>

#include <boost/geometry/index/rtree.hpp>

#include "decamin/error.hpp"

namespace decamin {

namespace bgi = boost::geometry::index;

std::size_t AccessSet::distinct_types() const {
  return static_cast<std::size_t>(std::count_if(type_counts.begin(), type_counts.end(), [](std::size_t c) { return c > 0; }));
}

AccessSet make_access_set(std::string building_id, std::vector<std::size_t> services,
                          std::span<const ServicePoint> all, std::size_t type_count, double green_overlap_m2) {
  AccessSet a;
  a.building_id = std::move(building_id);
  std::sort(services.begin(), services.end());
  services.erase(std::unique(services.begin(), services.end()), services.end());
  a.type_counts.assign(type_count, 0);
  for (std::size_t s : services) {
    if (s >= all.size()) throw InputError("access set of " + a.building_id + " references unknown service index");
    if (all[s].type >= type_count) throw InputError("service " + all[s].id + " has a type outside the taxonomy");
    ++a.type_counts[all[s].type];
  }
  a.services = std::move(services);
  a.green_overlap_m2 = green_overlap_m2;
  return a;
}

struct PoiIndex::Tree {
  bgi::rtree<std::pair<geo::Point, std::size_t>, bgi::rstar<16>> tree;
};

PoiIndex::PoiIndex(std::span<const ServicePoint> services) : services_(services), tree_(std::make_unique<Tree>()) {
  std::vector<std::pair<geo::Point, std::size_t>> entries;
  entries.reserve(services.size());
  for (std::size_t i = 0; i < services.size(); ++i) entries.emplace_back(services[i].position, i);
  tree_->tree = decltype(tree_->tree)(entries.begin(), entries.end());
}

PoiIndex::~PoiIndex() = default;
PoiIndex::PoiIndex(PoiIndex&&) noexcept = default;
PoiIndex& PoiIndex::operator=(PoiIndex&&) noexcept = default;

std::vector<std::size_t> PoiIndex::query(const geo::Polygon& poly) const {
  std::vector<std::size_t> out;
  if (poly.outer().empty()) return out;
  geo::Box box = geo::bg::return_envelope<geo::Box>(poly);
  box.min_corner().x(box.min_corner().x() - geo::kSnapTolerance);
  box.min_corner().y(box.min_corner().y() - geo::kSnapTolerance);
  box.max_corner().x(box.max_corner().x() + geo::kSnapTolerance);
  box.max_corner().y(box.max_corner().y() + geo::kSnapTolerance);
  std::vector<std::pair<geo::Point, std::size_t>> hits;
  tree_->tree.query(bgi::intersects(box), std::back_inserter(hits));
  for (const auto& [p, i] : hits)
    if (geo::contains(poly, p)) out.push_back(i);
  std::sort(out.begin(), out.end());
  return out;
}

AccessSet overlay(const Isochrone& iso, const PoiIndex& pois, std::span<const ServicePoint> services,
                  std::span<const GreenArea> greens, const ServiceTaxonomy& taxonomy) {
  double green = 0.0;
  for (const GreenArea& g : greens) green += geo::intersection_area_unchecked(iso.polygon, g.polygon);
  return make_access_set(iso.building_id, pois.query(iso.polygon), services, taxonomy.type_count(), green);
}

int type_access(const AccessSet& a, const ServiceTaxonomy& taxonomy, std::size_t type) {
  if (type >= taxonomy.type_count()) throw TaxonomyError("type index out of range");
  if (taxonomy.is_green_type(type)) throw TaxonomyError("green area access is scored by area, not by type");
  return a.count(type) > 0 ? 1 : 0;
}

double green_score(const AccessSet& a, double threshold_m2) {
  if (!(threshold_m2 > 0.0)) throw Error("green threshold must be positive");
  return std::min(1.0, a.green_overlap_m2 / threshold_m2);
}

double category_score(const AccessSet& a, const ServiceTaxonomy& taxonomy, std::size_t category, double threshold_m2) {
  const Category& c = taxonomy.categories().at(category);
  if (c.is_green) return green_score(a, threshold_m2);
  double sum = 0.0;
  for (const Subcategory& sub : c.subcategories) {
    std::size_t reached = 0;
    for (const std::string& t : sub.types) reached += type_access(a, taxonomy, taxonomy.type_index(t));
    sum += static_cast<double>(reached) / static_cast<double>(sub.types.size());
  }
  return sum / static_cast<double>(c.subcategories.size());
}

BuildingScores ten_minute_index(const AccessSet& a, const ServiceTaxonomy& taxonomy, double threshold_m2) {
  BuildingScores s;
  s.building_id = a.building_id;
  s.category_scores.reserve(taxonomy.category_count());
  double sum = 0.0;
  for (std::size_t j = 0; j < taxonomy.category_count(); ++j) {
    s.category_scores.push_back(category_score(a, taxonomy, j, threshold_m2));
    sum += s.category_scores.back();
  }
  s.index = sum / static_cast<double>(taxonomy.category_count());
  return s;
}

double weighted_index(const BuildingScores& scores, std::span<const double> weights) {
  if (weights.size() != scores.category_scores.size())
    throw Error("expected " + std::to_string(scores.category_scores.size()) + " category weights");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw Error("category weights must be non-negative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error("category weights must sum to 1");
  double out = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) out += weights[j] * scores.category_scores[j];
  return out;
}

}  // namespace decamin
