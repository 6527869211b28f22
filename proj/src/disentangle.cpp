#include "tripletbench/disentangle.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace tripletbench {
namespace {

void check_length(std::size_t got, std::size_t expected) {
  if (got != expected) {
    throw std::invalid_argument("triplet vector has " + std::to_string(got) +
                                " entries, taxonomy has " + std::to_string(expected));
  }
}

template <typename T>
std::vector<T> pool_max(const TaskSpace& space, std::span<const T> values) {
  std::vector<T> out(space.num_classes, T{});
  for (std::size_t t = 0; t < values.size(); ++t) {
    T& slot = out[space.class_of_triplet[t]];
    slot = std::max(slot, values[t]);
  }
  return out;
}

}  // namespace

std::string_view task_name(Task task) {
  switch (task) {
    case Task::kI: return "I";
    case Task::kV: return "V";
    case Task::kT: return "T";
    case Task::kIV: return "IV";
    case Task::kIT: return "IT";
    case Task::kIVT: return "IVT";
  }
  return "?";
}

std::optional<Task> parse_task(std::string_view name) {
  for (Task t : kAllTasks) {
    if (task_name(t) == name) return t;
  }
  return std::nullopt;
}

const std::vector<double>& ComponentViews::view(Task task) const {
  switch (task) {
    case Task::kI: return instrument;
    case Task::kV: return verb;
    case Task::kT: return target;
    case Task::kIV: return instrument_verb;
    case Task::kIT: return instrument_target;
    case Task::kIVT: break;
  }
  throw std::invalid_argument("component views do not hold triplet scores");
}

Disentangler::Disentangler(const TripletTaxonomy& taxonomy)
    : num_triplets_(taxonomy.num_triplets()) {
  const std::size_t n = num_triplets_;

  auto single = [&](Task task, std::size_t count, auto component, auto name) {
    TaskSpace s;
    s.task = task;
    s.num_classes = count;
    s.class_of_triplet.resize(n);
    s.covered.assign(count, false);
    s.ranking_mask.assign(count, false);
    for (std::size_t id = 0; id < count; ++id) {
      s.labels.push_back(name(id));
      s.keys.push_back({id});
    }
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t k = component(taxonomy.components_of(t));
      s.class_of_triplet[t] = k;
      s.covered[k] = true;
    }
    // Component tasks are never masked.
    s.ranking_mask = s.covered;
    return s;
  };
  spaces_[task_index(Task::kI)] =
      single(Task::kI, taxonomy.num_instruments(),
             [](const TripletComponents& c) { return c.instrument; },
             [&](std::size_t id) { return taxonomy.instrument_name(id); });
  spaces_[task_index(Task::kV)] =
      single(Task::kV, taxonomy.num_verbs(), [](const TripletComponents& c) { return c.verb; },
             [&](std::size_t id) { return taxonomy.verb_name(id); });
  spaces_[task_index(Task::kT)] =
      single(Task::kT, taxonomy.num_targets(),
             [](const TripletComponents& c) { return c.target; },
             [&](std::size_t id) { return taxonomy.target_name(id); });

  // Pair spaces hold only the pairs the taxonomy composes, ordered by
  // (instrument, second component).
  auto pairs = [&](Task task, auto second, auto second_name) {
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> index;
    for (std::size_t t = 0; t < n; ++t) {
      const auto& c = taxonomy.components_of(t);
      index.emplace(std::make_pair(c.instrument, second(c)), 0);
    }
    TaskSpace s;
    s.task = task;
    s.num_classes = index.size();
    std::size_t k = 0;
    for (auto& [key, slot] : index) {
      slot = k++;
      s.labels.push_back(taxonomy.instrument_name(key.first) + ":" + second_name(key.second));
      s.keys.push_back({key.first, key.second});
    }
    s.class_of_triplet.resize(n);
    s.covered.assign(s.num_classes, true);
    s.ranking_mask.assign(s.num_classes, false);
    for (std::size_t t = 0; t < n; ++t) {
      const auto& c = taxonomy.components_of(t);
      const std::size_t cls = index.at({c.instrument, second(c)});
      s.class_of_triplet[t] = cls;
      if (!taxonomy.is_null(t)) s.ranking_mask[cls] = true;
    }
    return s;
  };
  spaces_[task_index(Task::kIV)] =
      pairs(Task::kIV, [](const TripletComponents& c) { return c.verb; },
            [&](std::size_t id) { return taxonomy.verb_name(id); });
  spaces_[task_index(Task::kIT)] =
      pairs(Task::kIT, [](const TripletComponents& c) { return c.target; },
            [&](std::size_t id) { return taxonomy.target_name(id); });

  TaskSpace& ivt = spaces_[task_index(Task::kIVT)];
  ivt.task = Task::kIVT;
  ivt.num_classes = n;
  ivt.covered.assign(n, true);
  ivt.ranking_mask = taxonomy.valid_mask();
  for (std::size_t t = 0; t < n; ++t) {
    const auto& c = taxonomy.components_of(t);
    ivt.class_of_triplet.push_back(t);
    ivt.labels.push_back(taxonomy.triplet_name(t));
    ivt.keys.push_back({c.instrument, c.verb, c.target});
  }
}

std::optional<std::size_t> Disentangler::instrument_verb_index(std::size_t instrument,
                                                               std::size_t verb) const {
  const auto& keys = space(Task::kIV).keys;
  const std::vector<std::size_t> key{instrument, verb};
  const auto it = std::lower_bound(keys.begin(), keys.end(), key);
  if (it == keys.end() || *it != key) return std::nullopt;
  return static_cast<std::size_t>(it - keys.begin());
}

std::optional<std::size_t> Disentangler::instrument_target_index(std::size_t instrument,
                                                                 std::size_t target) const {
  const auto& keys = space(Task::kIT).keys;
  const std::vector<std::size_t> key{instrument, target};
  const auto it = std::lower_bound(keys.begin(), keys.end(), key);
  if (it == keys.end() || *it != key) return std::nullopt;
  return static_cast<std::size_t>(it - keys.begin());
}

ComponentViews Disentangler::probs(std::span<const double> triplet_probs) const {
  check_length(triplet_probs.size(), num_triplets_);
  return {pool_max(space(Task::kI), triplet_probs), pool_max(space(Task::kV), triplet_probs),
          pool_max(space(Task::kT), triplet_probs), pool_max(space(Task::kIV), triplet_probs),
          pool_max(space(Task::kIT), triplet_probs)};
}

ComponentViews Disentangler::labels(std::span<const std::uint8_t> triplet_labels) const {
  check_length(triplet_labels.size(), num_triplets_);
  for (std::uint8_t g : triplet_labels) {
    if (g > 1) throw std::invalid_argument("labels must be binary");
  }
  auto as_double = [&](Task task) {
    const auto pooled = pool_max(space(task), triplet_labels);
    return std::vector<double>(pooled.begin(), pooled.end());
  };
  return {as_double(Task::kI), as_double(Task::kV), as_double(Task::kT), as_double(Task::kIV),
          as_double(Task::kIT)};
}

ScoreMatrix Disentangler::project(const ScoreMatrix& triplet_probs, Task task) const {
  check_length(triplet_probs.cols(), num_triplets_);
  if (task == Task::kIVT) return triplet_probs;
  const TaskSpace& s = space(task);
  ScoreMatrix out(triplet_probs.rows(), s.num_classes, 0.0);
  for (std::size_t f = 0; f < triplet_probs.rows(); ++f) {
    const auto pooled = pool_max(s, triplet_probs.row(f));
    std::copy(pooled.begin(), pooled.end(), out.row(f).begin());
  }
  return out;
}

LabelMatrix Disentangler::project(const LabelMatrix& triplet_labels, Task task) const {
  check_length(triplet_labels.cols(), num_triplets_);
  if (task == Task::kIVT) return triplet_labels;
  const TaskSpace& s = space(task);
  LabelMatrix out(triplet_labels.rows(), s.num_classes, 0);
  for (std::size_t f = 0; f < triplet_labels.rows(); ++f) {
    const auto pooled = pool_max(s, triplet_labels.row(f));
    std::copy(pooled.begin(), pooled.end(), out.row(f).begin());
  }
  return out;
}

ComponentViews disentangle_probs(const TripletTaxonomy& taxonomy,
                                 std::span<const double> triplet_probs) {
  return Disentangler(taxonomy).probs(triplet_probs);
}

ComponentViews disentangle_labels(const TripletTaxonomy& taxonomy,
                                  std::span<const std::uint8_t> triplet_labels) {
  return Disentangler(taxonomy).labels(triplet_labels);
}

}  // namespace tripletbench
