#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tripletbench {

class TaxonomyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TripletComponents {
  std::size_t instrument = 0;
  std::size_t verb = 0;
  std::size_t target = 0;

  friend auto operator<=>(const TripletComponents&,
                          const TripletComponents&) = default;
};

struct TaxonomyRow {
  std::size_t triplet_id = 0;
  TripletComponents components;
  std::string instrument_name;
  std::string verb_name;
  std::string target_name;
  // Explicit null flag from an optional `null` column; takes precedence over
  // name matching when present.
  std::optional<bool> null_flag;
};

struct ComponentCounts {
  std::size_t instruments = 0;
  std::size_t verbs = 0;
  std::size_t targets = 0;
};

// Names that mark the idle (null) verb and target. Compared case-insensitively
// with '-' and '_' treated as equal.
struct NullNames {
  std::string verb = "null_verb";
  std::string target = "null_target";
};

// Maps each triplet class id to its (instrument, verb, target) composition.
// Immutable once constructed.
class TripletTaxonomy {
 public:
  // Rows may arrive in any order; ids must cover [0, rows.size()) exactly.
  // When `counts` is omitted each component count is max id + 1.
  TripletTaxonomy(std::vector<TaxonomyRow> rows,
                  std::optional<ComponentCounts> counts = std::nullopt,
                  const NullNames& null_names = {});

  std::size_t num_triplets() const { return compositions_.size(); }
  std::size_t num_instruments() const { return counts_.instruments; }
  std::size_t num_verbs() const { return counts_.verbs; }
  std::size_t num_targets() const { return counts_.targets; }

  const TripletComponents& components_of(std::size_t triplet_id) const;

  // false exactly for the null triplet ids.
  std::vector<bool> valid_mask() const;
  const std::set<std::size_t>& null_triplet_ids() const { return null_ids_; }
  bool is_null(std::size_t triplet_id) const {
    return null_ids_.contains(triplet_id);
  }

  // Human-readable labels; fall back to the numeric id when unnamed.
  std::string instrument_name(std::size_t id) const;
  std::string verb_name(std::size_t id) const;
  std::string target_name(std::size_t id) const;
  std::string triplet_name(std::size_t id) const;

 private:
  std::vector<TripletComponents> compositions_;
  ComponentCounts counts_;
  std::vector<std::string> instrument_names_;
  std::vector<std::string> verb_names_;
  std::vector<std::string> target_names_;
  std::set<std::size_t> null_ids_;
};

TripletTaxonomy parse_taxonomy_csv(std::string_view text,
                                   std::optional<ComponentCounts> counts = std::nullopt,
                                   const NullNames& null_names = {});

TripletTaxonomy load_taxonomy(const std::filesystem::path& path,
                              std::optional<ComponentCounts> counts = std::nullopt,
                              const NullNames& null_names = {});

}  // namespace tripletbench
