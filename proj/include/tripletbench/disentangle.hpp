#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tripletbench/matrix.hpp"
#include "tripletbench/taxonomy.hpp"

namespace tripletbench {

// The six recognition tasks. Order matches report and table layouts.
enum class Task { kI, kV, kT, kIV, kIT, kIVT };

inline constexpr std::array<Task, 6> kAllTasks = {Task::kI,  Task::kV,  Task::kT,
                                                 Task::kIV, Task::kIT, Task::kIVT};

std::string_view task_name(Task task);
std::optional<Task> parse_task(std::string_view name);
inline constexpr std::size_t task_index(Task task) { return static_cast<std::size_t>(task); }

// Class space of one task: how triplet ids map onto the task's classes.
struct TaskSpace {
  Task task = Task::kIVT;
  std::size_t num_classes = 0;
  // triplet id -> class index in this space.
  std::vector<std::size_t> class_of_triplet;
  // false for component ids no triplet uses; such classes never score.
  std::vector<bool> covered;
  // Classes ranked when null masking is on: covered and reachable from at
  // least one non-null triplet.
  std::vector<bool> ranking_mask;
  std::vector<std::string> labels;
  // Component ids of each class: one id for I/V/T, two for IV/IT, three for IVT.
  std::vector<std::vector<std::size_t>> keys;
};

// Component and pair level views of one frame's triplet vector.
struct ComponentViews {
  std::vector<double> instrument;
  std::vector<double> verb;
  std::vector<double> target;
  std::vector<double> instrument_verb;
  std::vector<double> instrument_target;

  const std::vector<double>& view(Task task) const;

  friend bool operator==(const ComponentViews&, const ComponentViews&) = default;
};

// Precomputed class spaces for a taxonomy. Component scores are the maximum
// over the triplets containing the component; labels are the logical OR.
class Disentangler {
 public:
  explicit Disentangler(const TripletTaxonomy& taxonomy);

  const TaskSpace& space(Task task) const { return spaces_[task_index(task)]; }
  std::size_t num_triplets() const { return num_triplets_; }

  // Pair indices, or nullopt when the pair never occurs.
  std::optional<std::size_t> instrument_verb_index(std::size_t instrument,
                                                   std::size_t verb) const;
  std::optional<std::size_t> instrument_target_index(std::size_t instrument,
                                                     std::size_t target) const;

  ComponentViews probs(std::span<const double> triplet_probs) const;
  ComponentViews labels(std::span<const std::uint8_t> triplet_labels) const;

  // Frame-wise projection of a frames x C matrix onto a task's classes.
  ScoreMatrix project(const ScoreMatrix& triplet_probs, Task task) const;
  LabelMatrix project(const LabelMatrix& triplet_labels, Task task) const;

 private:
  std::size_t num_triplets_ = 0;
  std::array<TaskSpace, 6> spaces_;
};

ComponentViews disentangle_probs(const TripletTaxonomy& taxonomy,
                                 std::span<const double> triplet_probs);
ComponentViews disentangle_labels(const TripletTaxonomy& taxonomy,
                                  std::span<const std::uint8_t> triplet_labels);

}  // namespace tripletbench
