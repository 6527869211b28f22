#include "tripletbench/taxonomy.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "tripletbench/csv.hpp"

namespace tripletbench {
namespace {

std::string normalize_name(std::string_view name) {
  std::string out;
  out.reserve(name.size());
  for (char c : csv::trim(name)) {
    out.push_back(c == '-' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

void record_name(std::vector<std::string>& names, std::size_t id,
                 const std::string& name, const char* space) {
  if (name.empty()) return;
  if (names.size() <= id) names.resize(id + 1);
  if (names[id].empty()) {
    names[id] = name;
  } else if (names[id] != name) {
    throw TaxonomyError(std::string("inconsistent ") + space + " name for id " +
                        std::to_string(id) + ": '" + names[id] + "' vs '" + name + "'");
  }
}

std::string name_or_id(const std::vector<std::string>& names, std::size_t id) {
  if (id < names.size() && !names[id].empty()) return names[id];
  return std::to_string(id);
}

}  // namespace

TripletTaxonomy::TripletTaxonomy(std::vector<TaxonomyRow> rows,
                                 std::optional<ComponentCounts> counts,
                                 const NullNames& null_names) {
  if (rows.empty()) throw TaxonomyError("taxonomy is empty");
  const std::size_t n = rows.size();

  std::vector<const TaxonomyRow*> by_id(n, nullptr);
  for (const auto& row : rows) {
    if (row.triplet_id >= n) {
      throw TaxonomyError("triplet id " + std::to_string(row.triplet_id) +
                          " outside [0, " + std::to_string(n) + ")");
    }
    if (by_id[row.triplet_id] != nullptr) {
      throw TaxonomyError("duplicate triplet id " + std::to_string(row.triplet_id));
    }
    by_id[row.triplet_id] = &row;
  }

  ComponentCounts derived;
  for (const auto& row : rows) {
    derived.instruments = std::max(derived.instruments, row.components.instrument + 1);
    derived.verbs = std::max(derived.verbs, row.components.verb + 1);
    derived.targets = std::max(derived.targets, row.components.target + 1);
  }
  counts_ = counts.value_or(derived);
  if (derived.instruments > counts_.instruments || derived.verbs > counts_.verbs ||
      derived.targets > counts_.targets) {
    throw TaxonomyError("component id out of range for the configured counts");
  }

  const std::string null_verb = normalize_name(null_names.verb);
  const std::string null_target = normalize_name(null_names.target);
  std::map<TripletComponents, std::size_t> seen;
  compositions_.reserve(n);
  for (std::size_t id = 0; id < n; ++id) {
    const TaxonomyRow& row = *by_id[id];
    const auto [it, inserted] = seen.emplace(row.components, id);
    if (!inserted) {
      throw TaxonomyError("duplicate composition for triplet ids " +
                          std::to_string(it->second) + " and " + std::to_string(id));
    }
    compositions_.push_back(row.components);
    record_name(instrument_names_, row.components.instrument, row.instrument_name, "instrument");
    record_name(verb_names_, row.components.verb, row.verb_name, "verb");
    record_name(target_names_, row.components.target, row.target_name, "target");

    const bool by_name = normalize_name(row.verb_name) == null_verb &&
                         normalize_name(row.target_name) == null_target;
    if (row.null_flag.value_or(by_name)) null_ids_.insert(id);
  }
}

const TripletComponents& TripletTaxonomy::components_of(std::size_t triplet_id) const {
  if (triplet_id >= compositions_.size()) {
    throw std::out_of_range("triplet id " + std::to_string(triplet_id) +
                            " out of range for " + std::to_string(compositions_.size()) +
                            " classes");
  }
  return compositions_[triplet_id];
}

std::vector<bool> TripletTaxonomy::valid_mask() const {
  std::vector<bool> mask(compositions_.size(), true);
  for (std::size_t id : null_ids_) mask[id] = false;
  return mask;
}

std::string TripletTaxonomy::instrument_name(std::size_t id) const {
  return name_or_id(instrument_names_, id);
}
std::string TripletTaxonomy::verb_name(std::size_t id) const {
  return name_or_id(verb_names_, id);
}
std::string TripletTaxonomy::target_name(std::size_t id) const {
  return name_or_id(target_names_, id);
}

std::string TripletTaxonomy::triplet_name(std::size_t id) const {
  const auto& c = components_of(id);
  return instrument_name(c.instrument) + ":" + verb_name(c.verb) + ":" +
         target_name(c.target);
}

TripletTaxonomy parse_taxonomy_csv(std::string_view text,
                                   std::optional<ComponentCounts> counts,
                                   const NullNames& null_names) {
  const auto all_lines = csv::lines(text);
  std::size_t line_no = 0;
  while (line_no < all_lines.size() && csv::trim(all_lines[line_no]).empty()) ++line_no;
  if (line_no == all_lines.size()) throw TaxonomyError("taxonomy document is empty");

  const auto header = csv::split(all_lines[line_no]);
  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < header.size(); ++i) {
    column[normalize_name(header[i])] = i;
  }
  for (const char* required : {"triplet_id", "instrument_id", "verb_id", "target_id"}) {
    if (!column.contains(required)) {
      throw TaxonomyError(std::string("taxonomy header lacks column ") + required);
    }
  }
  auto optional_column = [&](const char* name) -> std::optional<std::size_t> {
    auto it = column.find(name);
    if (it == column.end()) return std::nullopt;
    return it->second;
  };
  const auto instrument_col = optional_column("instrument");
  const auto verb_col = optional_column("verb");
  const auto target_col = optional_column("target");
  const auto null_col = optional_column("null");

  std::vector<TaxonomyRow> rows;
  for (++line_no; line_no < all_lines.size(); ++line_no) {
    if (csv::trim(all_lines[line_no]).empty()) continue;
    const auto cells = csv::split(all_lines[line_no]);
    const std::string where = "taxonomy line " + std::to_string(line_no + 1);
    if (cells.size() != header.size()) {
      throw TaxonomyError(where + ": expected " + std::to_string(header.size()) +
                          " cells, got " + std::to_string(cells.size()));
    }
    auto id_cell = [&](const char* name) {
      std::size_t value = 0;
      if (!csv::parse_size(cells[column.at(name)], value)) {
        throw TaxonomyError(where + ": invalid " + name);
      }
      return value;
    };
    auto text_cell = [&](std::optional<std::size_t> col) {
      return col ? std::string(csv::trim(cells[*col])) : std::string();
    };
    TaxonomyRow row;
    row.triplet_id = id_cell("triplet_id");
    row.components = {id_cell("instrument_id"), id_cell("verb_id"), id_cell("target_id")};
    row.instrument_name = text_cell(instrument_col);
    row.verb_name = text_cell(verb_col);
    row.target_name = text_cell(target_col);
    if (null_col) {
      const std::string flag = normalize_name(cells[*null_col]);
      if (flag == "1" || flag == "true") {
        row.null_flag = true;
      } else if (flag == "0" || flag == "false") {
        row.null_flag = false;
      } else if (!flag.empty()) {
        throw TaxonomyError(where + ": invalid null flag '" + flag + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw TaxonomyError("taxonomy document has no rows");
  return TripletTaxonomy(std::move(rows), counts, null_names);
}

TripletTaxonomy load_taxonomy(const std::filesystem::path& path,
                              std::optional<ComponentCounts> counts,
                              const NullNames& null_names) {
  return parse_taxonomy_csv(csv::read_file(path), counts, null_names);
}

}  // namespace tripletbench
