#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "decamin/geometry.hpp"
#include "decamin/isochrone.hpp"
#include "decamin/model.hpp"
#include "decamin/taxonomy.hpp"

namespace decamin {

inline constexpr double kDefaultGreenThresholdM2 = 80'000.0;

/// Services and green area reachable from one building.
struct AccessSet {
  std::string building_id;
  std::vector<std::size_t> services;       // indices into the service list, ascending
  std::vector<std::size_t> type_counts;    // per taxonomy type
  double green_overlap_m2 = 0.0;

  std::size_t count(std::size_t type) const { return type < type_counts.size() ? type_counts[type] : 0; }
  std::size_t distinct_types() const;
};

/// Builds an access set from explicit service indices (sorted and
/// deduplicated here). Throws InputError on an index past the service list.
AccessSet make_access_set(std::string building_id, std::vector<std::size_t> services,
                          std::span<const ServicePoint> all, std::size_t type_count, double green_overlap_m2 = 0.0);

/// R-tree over service positions.
class PoiIndex {
 public:
  explicit PoiIndex(std::span<const ServicePoint> services);
  ~PoiIndex();
  PoiIndex(PoiIndex&&) noexcept;
  PoiIndex& operator=(PoiIndex&&) noexcept;

  /// Indices of the services inside `poly` (boundary-inclusive), ascending.
  std::vector<std::size_t> query(const geo::Polygon& poly) const;

 private:
  struct Tree;
  std::span<const ServicePoint> services_;
  std::unique_ptr<Tree> tree_;
};

AccessSet overlay(const Isochrone& iso, const PoiIndex& pois, std::span<const ServicePoint> services,
                  std::span<const GreenArea> greens, const ServiceTaxonomy& taxonomy);

/// 1 when at least one service of `type` is reachable. Throws TaxonomyError
/// for the green type.
int type_access(const AccessSet& a, const ServiceTaxonomy& taxonomy, std::size_t type);

/// min(1, overlap / threshold). Throws Error for a non-positive threshold.
double green_score(const AccessSet& a, double threshold_m2 = kDefaultGreenThresholdM2);

/// Mean over the category's subcategories of (reachable types / types).
/// The green category scores through green_score.
double category_score(const AccessSet& a, const ServiceTaxonomy& taxonomy, std::size_t category,
                      double threshold_m2 = kDefaultGreenThresholdM2);

/// All category scores and their mean.
BuildingScores ten_minute_index(const AccessSet& a, const ServiceTaxonomy& taxonomy,
                                double threshold_m2 = kDefaultGreenThresholdM2);

/// Sum of weight * category score. Weights must be >= 0 and sum to 1
/// (within 1e-9); otherwise Error.
double weighted_index(const BuildingScores& scores, std::span<const double> weights);

}  // namespace decamin
