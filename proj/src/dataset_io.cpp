#include "tripletbench/dataset_io.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "tripletbench/csv.hpp"
#include "tripletbench/parallel.hpp"

namespace tripletbench {
namespace fs = std::filesystem;

namespace {

template <typename T, typename CellParser>
Matrix<T> parse_matrix(std::string_view text, std::size_t num_classes,
                       std::string_view context, CellParser parse_cell) {
  std::vector<T> values;
  std::size_t cols = num_classes;
  std::size_t rows = 0;
  const auto all_lines = csv::lines(text);
  for (std::size_t line_no = 0; line_no < all_lines.size(); ++line_no) {
    const std::string_view line = all_lines[line_no];
    if (csv::trim(line).empty()) {
      // Blank lines are tolerated only at the end of the file.
      const bool trailing = std::all_of(all_lines.begin() + line_no, all_lines.end(),
                                        [](auto l) { return csv::trim(l).empty(); });
      if (trailing) break;
      throw ParseError(std::string(context) + ": blank line " + std::to_string(line_no + 1));
    }
    const auto cells = csv::split(line);
    if (cols == 0) cols = cells.size();
    if (cells.size() != cols) {
      throw ParseError(std::string(context) + ": line " + std::to_string(line_no + 1) +
                       " has " + std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(cols));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      T value{};
      if (!parse_cell(cells[c], value)) {
        throw ParseError(std::string(context) + ": line " + std::to_string(line_no + 1) +
                         ", column " + std::to_string(c + 1) + ": invalid cell '" +
                         std::string(cells[c]) + "'");
      }
      values.push_back(value);
    }
    ++rows;
  }
  return Matrix<T>(rows, cols, std::move(values));
}

fs::path video_path(const fs::path& dir, std::string_view video_id) {
  return dir / (std::string(video_id) + ".csv");
}

std::string frame_location(const std::string& video, std::optional<std::size_t> frame,
                           std::optional<std::size_t> cls) {
  std::string out = video;
  if (frame) out += " frame " + std::to_string(*frame);
  if (cls) out += " class " + std::to_string(*cls);
  return out;
}

}  // namespace

const VideoScores* Run::find(std::string_view video_id) const {
  for (const auto& v : videos) {
    if (v.video_id == video_id) return &v;
  }
  return nullptr;
}

const VideoLabels* GroundTruth::find(std::string_view video_id) const {
  for (const auto& v : videos) {
    if (v.video_id == video_id) return &v;
  }
  return nullptr;
}

std::map<std::string, std::size_t> GroundTruth::frame_counts() const {
  std::map<std::string, std::size_t> out;
  for (const auto& v : videos) out[v.video_id] = v.labels.rows();
  return out;
}

ScoreMatrix parse_scores_csv(std::string_view text, std::size_t num_classes,
                             std::string_view context) {
  return parse_matrix<double>(text, num_classes, context,
                              [](std::string_view cell, double& out) {
                                return csv::parse_double(cell, out);
                              });
}

LabelMatrix parse_labels_csv(std::string_view text, std::size_t num_classes,
                             std::string_view context) {
  return parse_matrix<std::uint8_t>(text, num_classes, context,
                                    [](std::string_view cell, std::uint8_t& out) {
                                      double value = 0.0;
                                      if (!csv::parse_double(cell, value)) return false;
                                      if (value != 0.0 && value != 1.0) return false;
                                      out = value == 1.0 ? 1 : 0;
                                      return true;
                                    });
}

std::string format_scores_csv(const ScoreMatrix& probs) {
  std::string out;
  out.reserve(probs.rows() * probs.cols() * 8);
  for (std::size_t r = 0; r < probs.rows(); ++r) {
    for (std::size_t c = 0; c < probs.cols(); ++c) {
      if (c) out.push_back(',');
      out += csv::format_double(probs(r, c));
    }
    out.push_back('\n');
  }
  return out;
}

std::string format_labels_csv(const LabelMatrix& labels) {
  std::string out;
  out.reserve(labels.rows() * labels.cols() * 2);
  for (std::size_t r = 0; r < labels.rows(); ++r) {
    for (std::size_t c = 0; c < labels.cols(); ++c) {
      if (c) out.push_back(',');
      out.push_back(labels(r, c) ? '1' : '0');
    }
    out.push_back('\n');
  }
  return out;
}

std::vector<std::string> list_videos(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ParseError("not a directory: " + dir.string());
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") {
      ids.push_back(entry.path().stem().string());
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

ScoreMatrix read_video_scores(const fs::path& dir, std::string_view video_id,
                              std::size_t num_classes) {
  const fs::path path = video_path(dir, video_id);
  return parse_scores_csv(csv::read_file(path), num_classes, path.string());
}

LabelMatrix read_video_labels(const fs::path& dir, std::string_view video_id,
                              std::size_t num_classes) {
  const fs::path path = video_path(dir, video_id);
  return parse_labels_csv(csv::read_file(path), num_classes, path.string());
}

Run parse_run(const fs::path& dir, std::size_t num_classes, std::size_t threads) {
  Run run;
  run.team_id = fs::path(dir).lexically_normal().filename().string();
  if (run.team_id.empty()) run.team_id = fs::path(dir).parent_path().filename().string();
  const auto ids = list_videos(dir);
  run.videos.resize(ids.size());
  parallel_for(ids.size(), threads, [&](std::size_t i) {
    run.videos[i] = {ids[i], read_video_scores(dir, ids[i], num_classes)};
  });
  return run;
}

void write_run(const Run& run, const fs::path& dir) {
  fs::create_directories(dir);
  for (const auto& video : run.videos) {
    csv::write_file(video_path(dir, video.video_id), format_scores_csv(video.probs));
  }
}

GroundTruth parse_ground_truth(const fs::path& dir, std::size_t num_classes,
                               std::size_t threads) {
  GroundTruth gt;
  const auto ids = list_videos(dir);
  gt.videos.resize(ids.size());
  parallel_for(ids.size(), threads, [&](std::size_t i) {
    gt.videos[i] = {ids[i], read_video_labels(dir, ids[i], num_classes)};
  });
  return gt;
}

void write_ground_truth(const GroundTruth& gt, const fs::path& dir) {
  fs::create_directories(dir);
  for (const auto& video : gt.videos) {
    csv::write_file(video_path(dir, video.video_id), format_labels_csv(video.labels));
  }
}

void ValidationReport::add(Finding finding) { findings.push_back(std::move(finding)); }

void ValidationReport::finalize() {
  auto key = [](const Finding& f) {
    return std::make_tuple(f.video_id, f.frame.value_or(0), f.frame.has_value(),
                           f.class_index.value_or(0), f.class_index.has_value(), f.code,
                           f.severity, f.message);
  };
  std::sort(findings.begin(), findings.end(),
            [&](const Finding& a, const Finding& b) { return key(a) < key(b); });
  pass = std::none_of(findings.begin(), findings.end(),
                      [](const Finding& f) { return f.severity == Severity::kError; });
}

void to_json(nlohmann::json& j, const Finding& f) {
  j = nlohmann::json{{"severity", f.severity == Severity::kError ? "error" : "warning"},
                     {"video_id", f.video_id},
                     {"frame", f.frame ? nlohmann::json(*f.frame) : nlohmann::json()},
                     {"class", f.class_index ? nlohmann::json(*f.class_index) : nlohmann::json()},
                     {"code", f.code},
                     {"message", f.message}};
}

void to_json(nlohmann::json& j, const ValidationReport& r) {
  j = nlohmann::json{{"pass", r.pass}, {"findings", r.findings}};
}

void from_json(const nlohmann::json& j, Finding& f) {
  f.severity = j.at("severity").get<std::string>() == "error" ? Severity::kError
                                                             : Severity::kWarning;
  f.video_id = j.at("video_id").get<std::string>();
  f.frame = j.at("frame").is_null() ? std::nullopt
                                    : std::optional<std::size_t>(j.at("frame").get<std::size_t>());
  f.class_index = j.at("class").is_null()
                      ? std::nullopt
                      : std::optional<std::size_t>(j.at("class").get<std::size_t>());
  f.code = j.at("code").get<std::string>();
  f.message = j.at("message").get<std::string>();
}

void from_json(const nlohmann::json& j, ValidationReport& r) {
  r.pass = j.at("pass").get<bool>();
  r.findings = j.at("findings").get<std::vector<Finding>>();
}

namespace {

// Collects cell-level findings for one video, capping each code.
class VideoFindings {
 public:
  explicit VideoFindings(std::string video) : video_(std::move(video)) {}

  void add(Severity severity, std::string_view code, std::optional<std::size_t> frame,
           std::optional<std::size_t> cls, std::string message) {
    auto& count = counts_[std::string(code)];
    ++count;
    if (count <= kMaxFindingsPerCode) {
      out_.push_back({severity, video_, frame, cls, std::string(code), std::move(message)});
    }
  }

  void flush(ValidationReport& report) {
    for (auto& f : out_) report.add(std::move(f));
    for (const auto& [code, count] : counts_) {
      if (count > kMaxFindingsPerCode) {
        report.add({Severity::kWarning, video_, std::nullopt, std::nullopt,
                    std::string(finding_code::kTruncated),
                    code + ": " + std::to_string(count - kMaxFindingsPerCode) +
                        " further findings omitted"});
      }
    }
  }

 private:
  std::string video_;
  std::vector<Finding> out_;
  std::map<std::string, std::size_t> counts_;
};

}  // namespace

ValidationReport validate_submission(const Run& run,
                                     const std::map<std::string, std::size_t>& expected_frames,
                                     std::size_t num_classes) {
  ValidationReport report;
  std::set<std::string> seen;
  for (const auto& video : run.videos) {
    if (!seen.insert(video.video_id).second) {
      report.add({Severity::kError, video.video_id, std::nullopt, std::nullopt,
                  std::string(finding_code::kExtraVideo), "duplicate video id in run"});
      continue;
    }
    const auto expected = expected_frames.find(video.video_id);
    if (expected == expected_frames.end()) {
      report.add({Severity::kError, video.video_id, std::nullopt, std::nullopt,
                  std::string(finding_code::kExtraVideo), "video not part of the test set"});
      continue;
    }
    const ScoreMatrix& probs = video.probs;
    if (probs.rows() != expected->second) {
      report.add({Severity::kError, video.video_id, std::nullopt, std::nullopt,
                  std::string(finding_code::kFrameCount),
                  "expected " + std::to_string(expected->second) + " frames, got " +
                      std::to_string(probs.rows())});
    }
    if (probs.cols() != num_classes) {
      report.add({Severity::kError, video.video_id, std::nullopt, std::nullopt,
                  std::string(finding_code::kClassCount),
                  "expected " + std::to_string(num_classes) + " classes, got " +
                      std::to_string(probs.cols())});
    }

    VideoFindings cells(video.video_id);
    std::size_t constant_frames = 0;
    std::optional<std::size_t> first_constant;
    for (std::size_t f = 0; f < probs.rows(); ++f) {
      const auto row = probs.row(f);
      for (std::size_t c = 0; c < row.size(); ++c) {
        const double p = row[c];
        if (!std::isfinite(p)) {
          cells.add(Severity::kError, finding_code::kNonFinite, f, c,
                    frame_location(video.video_id, f, c) + ": non-finite value");
        } else if (p < 0.0 || p > 1.0) {
          cells.add(Severity::kError, finding_code::kRange, f, c,
                    frame_location(video.video_id, f, c) + ": value " +
                        csv::format_double(p) + " outside [0, 1]");
        }
      }
      if (row.size() > 1 &&
          std::all_of(row.begin(), row.end(), [&](double p) { return p == row.front(); })) {
        ++constant_frames;
        if (!first_constant) first_constant = f;
      }
    }
    if (constant_frames > 0) {
      cells.add(Severity::kWarning, finding_code::kConstantFrames, first_constant, std::nullopt,
                std::to_string(constant_frames) + " of " + std::to_string(probs.rows()) +
                    " frames carry the same score for every class");
    }
    cells.flush(report);
  }
  for (const auto& [video_id, frames] : expected_frames) {
    if (!seen.contains(video_id)) {
      report.add({Severity::kError, video_id, std::nullopt, std::nullopt,
                  std::string(finding_code::kMissingVideo),
                  "expected video with " + std::to_string(frames) + " frames is missing"});
    }
  }
  report.finalize();
  return report;
}

ValidationReport causality_audit(const Run& full, const Run& prefix, double tolerance) {
  ValidationReport report;
  for (const auto& short_video : prefix.videos) {
    const VideoScores* long_video = full.find(short_video.video_id);
    if (long_video == nullptr) {
      throw std::invalid_argument("prefix video " + short_video.video_id +
                                  " not present in the full run");
    }
    const ScoreMatrix& a = long_video->probs;
    const ScoreMatrix& b = short_video.probs;
    if (b.rows() > a.rows()) {
      throw std::invalid_argument("prefix of video " + short_video.video_id + " has " +
                                  std::to_string(b.rows()) + " frames, full run has " +
                                  std::to_string(a.rows()));
    }
    if (b.rows() > 0 && a.cols() != b.cols()) {
      throw std::invalid_argument("class count differs for video " + short_video.video_id);
    }
    bool found = false;
    for (std::size_t f = 0; f < b.rows() && !found; ++f) {
      for (std::size_t c = 0; c < b.cols(); ++c) {
        const double diff = std::abs(a(f, c) - b(f, c));
        // NaN compares false, so it is caught by the negated test.
        if (!(diff <= tolerance)) {
          report.add({Severity::kError, short_video.video_id, f, c,
                      std::string(finding_code::kCausality),
                      frame_location(short_video.video_id, f, c) +
                          ": prefix output differs from full output by " +
                          csv::format_double(diff)});
          found = true;
          break;
        }
      }
    }
  }
  report.finalize();
  return report;
}

}  // namespace tripletbench
