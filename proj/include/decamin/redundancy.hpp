#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "decamin/model.hpp"
#include "decamin/scoring.hpp"
#include "decamin/taxonomy.hpp"

namespace decamin {

struct RedundancyOptions {
  /// Count the green category in n when weighting types. Turning this off
  /// requires green_in_index off as well.
  bool green_in_weights = true;
  /// Divide by the full index (green score included) rather than the mean of
  /// the non-green category scores.
  bool green_in_index = true;
};

struct TypeRedundancy {
  std::size_t type = 0;
  double weight = 0.0;
  std::size_t providers = 0;
  double contribution = 0.0;
};

struct RedundancyResult {
  std::string building_id;
  std::optional<double> value;  // nullopt when the index is 0
  std::vector<TypeRedundancy> detail;  // every non-green type, taxonomy order
};

/// Sum over reachable non-green types of weight / (index * providers).
/// Throws Error for green_in_weights without green_in_index.
RedundancyResult redundancy_index(const AccessSet& a, const BuildingScores& scores, const ServiceTaxonomy& taxonomy,
                                  const RedundancyOptions& options = {});

/// Per service: total population of the buildings for which it is the only
/// reachable provider of its type. `population[k]` belongs to `access[k]`.
std::vector<double> exclusive_populations(std::span<const AccessSet> access, std::span<const double> population,
                                          std::span<const ServicePoint> services);

}  // namespace decamin
