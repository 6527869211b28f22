#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tripletbench/dataset_io.hpp"
#include "tripletbench/matrix.hpp"

namespace tripletbench::detail {

// Runs matched by video id, in the first run's video order.
struct AlignedRuns {
  std::vector<std::string> video_ids;
  std::vector<std::vector<const ScoreMatrix*>> matrices;  // [video][model]
  std::size_t num_classes = 0;
};

AlignedRuns align_runs(std::span<const Run> runs);

// Offsets of the two-layer network inside the flat parameter vector.
struct DeepLayout {
  DeepLayout(std::size_t in, std::size_t hidden, std::size_t out)
      : w1_offset(0),
        w1_size(in * hidden),
        b1_offset(w1_size),
        b1_size(hidden),
        w2_offset(b1_offset + hidden),
        w2_size(hidden * out),
        b2_offset(w2_offset + w2_size),
        b2_size(out) {}

  std::size_t w1_offset, w1_size;
  std::size_t b1_offset, b1_size;
  std::size_t w2_offset, w2_size;
  std::size_t b2_offset, b2_size;
};

// raw is rows x cols row-major; softmax runs down each column.
inline std::vector<double> softmax_columns(std::span<const double> raw, std::size_t rows,
                                           std::size_t cols) {
  std::vector<double> out(raw.size());
  for (std::size_t c = 0; c < cols; ++c) {
    double peak = raw[c];
    for (std::size_t r = 1; r < rows; ++r) peak = std::max(peak, raw[r * cols + c]);
    double sum = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      out[r * cols + c] = std::exp(raw[r * cols + c] - peak);
      sum += out[r * cols + c];
    }
    for (std::size_t r = 0; r < rows; ++r) out[r * cols + c] /= sum;
  }
  return out;
}

}  // namespace tripletbench::detail
