#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace decamin {

struct Subcategory {
  std::string name;
  std::vector<std::string> types;
};

struct Category {
  std::string name;
  std::vector<Subcategory> subcategories;
  bool is_green = false;
};

/// Position of a service type in the category -> subcategory -> type tree.
struct TypeInfo {
  std::string name;
  std::size_t category = 0;
  std::size_t subcategory = 0;
};

/// Three-level service taxonomy. Types are numbered in tree order; that
/// index is what the rest of the pipeline stores.
///
/// Immutable once constructed; the constructor enforces every structural
/// invariant and throws TaxonomyError otherwise.
class ServiceTaxonomy {
 public:
  explicit ServiceTaxonomy(std::vector<Category> categories);

  const std::vector<Category>& categories() const { return categories_; }
  std::size_t category_count() const { return categories_.size(); }

  const std::vector<TypeInfo>& types() const { return types_; }
  std::size_t type_count() const { return types_.size(); }

  std::optional<std::size_t> find_type(std::string_view name) const;
  /// Throws TaxonomyError naming the type when it is not part of the tree.
  std::size_t type_index(std::string_view name) const;

  /// K = 1 / (n * p_j * m_jh): the share of the index carried by one type.
  double type_weight(std::size_t type) const;
  double type_weight(std::string_view name) const;

  std::optional<std::size_t> green_category() const { return green_; }
  bool is_green_type(std::size_t type) const;

 private:
  std::vector<Category> categories_;
  std::vector<TypeInfo> types_;
  std::unordered_map<std::string, std::size_t> by_name_;
  std::optional<std::size_t> green_;
};

/// Parses a TOML taxonomy document (see data/taxonomy.toml for the schema).
ServiceTaxonomy load_taxonomy(std::string_view document);
ServiceTaxonomy load_taxonomy_file(const std::filesystem::path& path);

std::string_view default_taxonomy_document();
const ServiceTaxonomy& default_taxonomy();

/// Lower-case, underscore-separated form of a category name, used for
/// export property keys ("Primary services" -> "primary_services").
std::string category_slug(std::string_view name);

}  // namespace decamin
