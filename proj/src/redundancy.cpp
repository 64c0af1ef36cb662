#include "decamin/redundancy.hpp"

#include "decamin/error.hpp"

namespace decamin {

RedundancyResult redundancy_index(const AccessSet& a, const BuildingScores& scores, const ServiceTaxonomy& taxonomy,
                                  const RedundancyOptions& options) {
  // weights summing to 1 over point types against an index that still holds
  // green would let R exceed 1
  if (!options.green_in_weights && options.green_in_index)
    throw Error("redundancy: green outside the weights needs green outside the index too");
  RedundancyResult r;
  r.building_id = a.building_id;
  const auto green = taxonomy.green_category();
  double index = scores.index;
  if (!options.green_in_index && green) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t j = 0; j < scores.category_scores.size(); ++j)
      if (j != *green) sum += scores.category_scores[j], ++n;
    index = n ? sum / static_cast<double>(n) : 0.0;
  }
  double total = 0.0;
  for (std::size_t t = 0; t < taxonomy.type_count(); ++t) {
    if (taxonomy.is_green_type(t)) continue;
    TypeRedundancy d;
    d.type = t;
    if (options.green_in_weights || !green) {
      d.weight = taxonomy.type_weight(t);
    } else {
      const TypeInfo& info = taxonomy.types()[t];
      const Category& c = taxonomy.categories()[info.category];
      d.weight = 1.0 / (static_cast<double>(taxonomy.category_count() - 1) * static_cast<double>(c.subcategories.size()) *
                        static_cast<double>(c.subcategories[info.subcategory].types.size()));
    }
    d.providers = a.count(t);
    if (d.providers > 0 && index > 0.0) d.contribution = d.weight / (index * static_cast<double>(d.providers));
    total += d.contribution;
    r.detail.push_back(d);
  }
  if (index > 0.0) r.value = total;
  return r;
}

std::vector<double> exclusive_populations(std::span<const AccessSet> access, std::span<const double> population,
                                          std::span<const ServicePoint> services) {
  if (population.size() != access.size()) throw InputError("one population value per access set is required");
  std::vector<double> out(services.size(), 0.0);
  for (std::size_t b = 0; b < access.size(); ++b) {
    const AccessSet& a = access[b];
    for (std::size_t s : a.services) {
      if (s >= services.size()) throw InputError("building " + a.building_id + " references unknown service index");
      if (a.count(services[s].type) == 1) out[s] += population[b];
    }
  }
  return out;
}

}  // namespace decamin
