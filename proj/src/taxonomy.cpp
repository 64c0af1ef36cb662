#include "decamin/taxonomy.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include <toml.hpp>

#include "decamin/error.hpp"

namespace decamin {

ServiceTaxonomy::ServiceTaxonomy(std::vector<Category> categories)
    : categories_(std::move(categories)) {
  if (categories_.empty()) throw TaxonomyError("taxonomy has no categories");

  for (std::size_t c = 0; c < categories_.size(); ++c) {
    const Category& cat = categories_[c];
    if (cat.subcategories.empty())
      throw TaxonomyError("category '" + cat.name + "' has no subcategories");
    if (cat.is_green) {
      if (green_)
        throw TaxonomyError("more than one green category ('" + categories_[*green_].name +
                            "', '" + cat.name + "')");
      if (cat.subcategories.size() != 1 || cat.subcategories[0].types.size() != 1)
        throw TaxonomyError("green category '" + cat.name +
                            "' must have exactly one subcategory with one type");
      green_ = c;
    }
    for (std::size_t s = 0; s < cat.subcategories.size(); ++s) {
      const Subcategory& sub = cat.subcategories[s];
      if (sub.types.empty())
        throw TaxonomyError("subcategory '" + sub.name + "' of '" + cat.name + "' has no types");
      for (const std::string& type : sub.types) {
        if (type.empty()) throw TaxonomyError("empty type name in '" + sub.name + "'");
        auto [it, inserted] = by_name_.emplace(type, types_.size());
        if (!inserted) throw TaxonomyError("duplicate type name '" + type + "'");
        types_.push_back(TypeInfo{type, c, s});
      }
    }
  }
}

std::optional<std::size_t> ServiceTaxonomy::find_type(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::size_t ServiceTaxonomy::type_index(std::string_view name) const {
  if (auto t = find_type(name)) return *t;
  throw TaxonomyError("unknown service type '" + std::string(name) + "'");
}

double ServiceTaxonomy::type_weight(std::size_t type) const {
  const TypeInfo& info = types_.at(type);
  const Category& cat = categories_[info.category];
  const double n = static_cast<double>(categories_.size());
  const double p = static_cast<double>(cat.subcategories.size());
  const double m = static_cast<double>(cat.subcategories[info.subcategory].types.size());
  return 1.0 / (n * p * m);
}

double ServiceTaxonomy::type_weight(std::string_view name) const {
  return type_weight(type_index(name));
}

bool ServiceTaxonomy::is_green_type(std::size_t type) const {
  return green_ && types_.at(type).category == *green_;
}

namespace {

std::string require_string(const toml::node_view<const toml::node>& node, const std::string& what) {
  auto value = node.value<std::string>();
  if (!value) throw TaxonomyError(what + " must be a string");
  return *value;
}

}  // namespace

ServiceTaxonomy load_taxonomy(std::string_view document) {
  toml::table root;
  try {
    root = toml::parse(document);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "taxonomy document: " << e.description() << " (line " << e.source().begin.line << ")";
    throw TaxonomyError(msg.str());
  }

  const toml::array* cats = root["category"].as_array();
  if (!cats) throw TaxonomyError("taxonomy document has no [[category]] entries");

  std::vector<Category> categories;
  for (const toml::node& cat_node : *cats) {
    const toml::table* cat_table = cat_node.as_table();
    if (!cat_table) throw TaxonomyError("[[category]] entries must be tables");
    const toml::node_view<const toml::node> cat_view{cat_table};
    Category cat;
    cat.name = require_string(cat_view["name"], "category name");
    cat.is_green = cat_view["green"].value_or(false);

    const toml::array* subs = cat_view["subcategory"].as_array();
    if (subs) {
      for (const toml::node& sub_node : *subs) {
        const toml::table* sub_table = sub_node.as_table();
        if (!sub_table) throw TaxonomyError("subcategory entries must be tables");
        const toml::node_view<const toml::node> sub_view{sub_table};
        Subcategory sub;
        sub.name = require_string(sub_view["name"], "subcategory name in '" + cat.name + "'");
        if (const toml::array* types = sub_view["types"].as_array()) {
          for (const toml::node& t : *types) {
            auto name = t.value<std::string>();
            if (!name) throw TaxonomyError("type names in '" + sub.name + "' must be strings");
            sub.types.push_back(*name);
          }
        }
        cat.subcategories.push_back(std::move(sub));
      }
    }
    categories.push_back(std::move(cat));
  }
  return ServiceTaxonomy(std::move(categories));
}

ServiceTaxonomy load_taxonomy_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TaxonomyError("cannot open taxonomy file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return load_taxonomy(text.str());
}

const ServiceTaxonomy& default_taxonomy() {
  static const ServiceTaxonomy taxonomy = load_taxonomy(default_taxonomy_document());
  return taxonomy;
}

std::string category_slug(std::string_view name) {
  std::string slug;
  bool pending_sep = false;
  for (char ch : name) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      if (pending_sep && !slug.empty()) slug.push_back('_');
      slug.push_back(static_cast<char>(std::tolower(c)));
      pending_sep = false;
    } else {
      pending_sep = true;
    }
  }
  return slug;
}

}  // namespace decamin
