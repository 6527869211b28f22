#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "manifest.hpp"
#include "tripletbench/csv.hpp"
#include "tripletbench/dataset_io.hpp"
#include "tripletbench/ensemble.hpp"
#include "tripletbench/metrics.hpp"
#include "tripletbench/parallel.hpp"
#include "tripletbench/postprocess.hpp"
#include "tripletbench/reporting.hpp"
#include "tripletbench/stability.hpp"
#include "tripletbench/taxonomy.hpp"

namespace tripletbench::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Bad flag combinations found after parsing. Exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A check that ran and failed (validation, audit). Exit code 1, the report is
// already written.
class CheckFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Global {
  std::optional<std::size_t> threads_flag;
  std::uint64_t seed = 42;

  std::size_t threads() const {
    if (std::getenv("TRIPLETBENCH_THREADS") != nullptr) return default_thread_count();
    return threads_flag.value_or(default_thread_count());
  }
};

bool has_csv(const fs::path& dir) {
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") return true;
  }
  return false;
}

// Each path is a team directory (holds <video>.csv files) or a parent whose
// subdirectories are team directories.
std::vector<fs::path> team_dirs(const std::vector<fs::path>& roots, const std::string& flag) {
  std::vector<fs::path> out;
  for (const auto& root : roots) {
    if (has_csv(root)) {
      out.push_back(root);
      continue;
    }
    std::vector<fs::path> children;
    for (const auto& entry : fs::directory_iterator(root)) {
      if (entry.is_directory() && has_csv(entry.path())) children.push_back(entry.path());
    }
    if (children.empty()) {
      throw UsageError(flag + ": " + root.string() + " holds no run files");
    }
    std::sort(children.begin(), children.end());
    out.insert(out.end(), children.begin(), children.end());
  }
  return out;
}

std::string team_name(const fs::path& dir) {
  return dir.lexically_normal().has_filename() ? dir.lexically_normal().filename().string()
                                               : dir.lexically_normal().parent_path().filename().string();
}

std::vector<Run> load_runs(const std::vector<fs::path>& dirs, std::size_t num_classes,
                           std::size_t threads) {
  std::vector<Run> runs;
  for (const auto& dir : dirs) {
    runs.push_back(parse_run(dir, num_classes, threads));
    runs.back().team_id = team_name(dir);
  }
  return runs;
}

// Keeps the videos of `run` that `gt` covers, in ground-truth order.
Run restrict_to(const Run& run, const GroundTruth& gt) {
  Run out;
  out.team_id = run.team_id;
  for (const auto& truth : gt.videos) {
    const VideoScores* video = run.find(truth.video_id);
    if (video == nullptr) {
      throw std::runtime_error("run " + run.team_id + " lacks video " + truth.video_id);
    }
    out.videos.push_back(*video);
  }
  return out;
}

std::vector<fs::path> write_run_files(const Run& run, const fs::path& dir) {
  write_run(run, dir);
  std::vector<fs::path> written;
  for (const auto& video : run.videos) written.push_back(dir / (video.video_id + ".csv"));
  return written;
}

fs::path write_json(const fs::path& path, const json& j) {
  csv::write_file(path, j.dump(2) + "\n");
  return path;
}

std::vector<std::string> path_strings(const std::vector<fs::path>& paths) {
  std::vector<std::string> out;
  for (const auto& p : paths) out.push_back(p.generic_string());
  return out;
}

void check_ks(const std::vector<int>& ks, std::size_t num_classes) {
  if (ks.empty()) throw UsageError("--topk: needs at least one K");
  for (int k : ks) {
    if (k < 1 || static_cast<std::size_t>(k) > num_classes) {
      throw UsageError("--topk: K=" + std::to_string(k) + " outside [1, " +
                       std::to_string(num_classes) + "]");
    }
  }
}

// ---------------------------------------------------------------- validate

struct ValidateArgs {
  fs::path runs;
  fs::path gt;
  fs::path expected;
  fs::path taxonomy;
  std::size_t classes = 0;
  fs::path out;
};

int cmd_validate(const ValidateArgs& a, const Global& g) {
  std::map<std::string, std::size_t> expected;
  if (!a.expected.empty()) {
    const json j = json::parse(csv::read_file(a.expected));
    for (const auto& [video, frames] : j.items()) expected[video] = frames.get<std::size_t>();
  } else {
    for (const auto& id : list_videos(a.gt)) expected[id] = read_video_labels(a.gt, id).rows();
  }
  const std::size_t num_classes = a.classes != 0 ? a.classes : load_taxonomy(a.taxonomy).num_triplets();

  const auto ids = list_videos(a.runs);
  std::vector<std::optional<VideoScores>> loaded(ids.size());
  std::vector<std::string> parse_errors(ids.size());
  parallel_for(ids.size(), g.threads(), [&](std::size_t i) {
    try {
      loaded[i] = VideoScores{ids[i], read_video_scores(a.runs, ids[i])};
    } catch (const ParseError& e) {
      parse_errors[i] = e.what();
    }
  });
  Run run;
  run.team_id = team_name(a.runs);
  ValidationReport parse_report;
  auto remaining = expected;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (loaded[i]) {
      run.videos.push_back(std::move(*loaded[i]));
    } else {
      parse_report.add({Severity::kError, ids[i], std::nullopt, std::nullopt,
                        std::string(finding_code::kParse), parse_errors[i]});
      remaining.erase(ids[i]);
    }
  }
  ValidationReport report = validate_submission(run, remaining, num_classes);
  for (auto& f : parse_report.findings) report.add(std::move(f));
  report.finalize();

  fs::create_directories(a.out);
  Manifest manifest{"validate",
                    {{"runs", a.runs.generic_string()}, {"classes", num_classes},
                     {"expected_videos", expected.size()}},
                    g.seed,
                    {a.runs},
                    {write_json(a.out / "validation.json", report)}};
  if (!a.gt.empty()) manifest.inputs.push_back(a.gt);
  if (!a.expected.empty()) manifest.inputs.push_back(a.expected);
  if (!a.taxonomy.empty()) manifest.inputs.push_back(a.taxonomy);
  manifest.write(a.out);

  std::size_t errors = 0, warnings = 0;
  for (const auto& f : report.findings) (f.severity == Severity::kError ? errors : warnings)++;
  std::cout << (report.pass ? "PASS" : "FAIL") << " " << run.team_id << ": " << errors
            << " errors, " << warnings << " warnings\n";
  if (!report.pass) throw CheckFailed("validation failed for " + run.team_id);
  return kExitOk;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::vector<fs::path> runs;
  fs::path gt;
  fs::path taxonomy;
  bool mask = true;
  std::vector<int> ks = kDefaultTopK;
  fs::path out;
};

int cmd_eval(const EvalArgs& a, const Global& g) {
  const TripletTaxonomy taxonomy = load_taxonomy(a.taxonomy);
  const std::size_t num_classes = taxonomy.num_triplets();
  check_ks(a.ks, num_classes);
  const auto teams = team_dirs(a.runs, "--runs");
  const auto gt_ids = list_videos(a.gt);
  if (gt_ids.empty()) throw std::runtime_error("no ground-truth videos in " + a.gt.string());

  EvalOptions options;
  options.apply_mask = a.mask;
  options.ks = a.ks;
  const Evaluator evaluator(taxonomy, options);
  fs::create_directories(a.out);

  std::vector<fs::path> outputs;
  for (const auto& dir : teams) {
    const std::string team = team_name(dir);
    // One video's matrices per worker at a time.
    std::vector<VideoEvaluation> results(gt_ids.size());
    parallel_for(gt_ids.size(), g.threads(), [&](std::size_t i) {
      const LabelMatrix labels = read_video_labels(a.gt, gt_ids[i], num_classes);
      const ScoreMatrix scores = read_video_scores(dir, gt_ids[i], num_classes);
      if (scores.rows() != labels.rows()) {
        throw std::runtime_error(team + "/" + gt_ids[i] + ": " + std::to_string(scores.rows()) +
                                 " frames, ground truth has " + std::to_string(labels.rows()));
      }
      results[i] = evaluator.evaluate_video(gt_ids[i], scores, labels);
    });
    const EvalReport report = evaluator.finalize(team, results);
    outputs.push_back(write_json(a.out / (team + ".json"), report));

    std::cout << team;
    for (Task t : kAllTasks) {
      std::cout << "  AP_" << task_name(t) << "=" << csv::format_fixed(report.task(t).mean_ap * 100, 1);
    }
    std::cout << "  topK=" << csv::format_fixed(report.topk.mean * 100, 1) << "\n";
  }

  Manifest manifest{"eval",
                    {{"runs", path_strings(teams)}, {"mask", a.mask}, {"topk", a.ks}},
                    g.seed,
                    {a.taxonomy, a.gt},
                    outputs};
  manifest.inputs.insert(manifest.inputs.end(), teams.begin(), teams.end());
  manifest.write(a.out);
  return kExitOk;
}

// ---------------------------------------------------------------- leaderboard

struct LeaderboardArgs {
  fs::path reports;
  std::string sort = "IVT";
  std::string std_convention = "sample";
  fs::path out;
};

int cmd_leaderboard(const LeaderboardArgs& a, const Global& g) {
  const auto sort_key = parse_task(a.sort);
  if (!sort_key) throw UsageError("--sort: unknown task '" + a.sort + "'");
  const StdConvention convention =
      a.std_convention == "population" ? StdConvention::kPopulation : StdConvention::kSample;

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(a.reports)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json" &&
        entry.path().filename() != "manifest.json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw UsageError("--reports: no report files in " + a.reports.string());
  std::vector<EvalReport> reports;
  for (const auto& file : files) {
    try {
      reports.push_back(json::parse(csv::read_file(file)).get<EvalReport>());
    } catch (const json::exception& e) {
      throw std::runtime_error("cannot read report " + file.string() + ": " + e.what());
    }
  }
  const Leaderboard lb = build_leaderboard(reports, *sort_key, convention);
  const auto outputs = emit_tables(lb, a.out);
  Manifest{"leaderboard",
           {{"sort", a.sort}, {"std", a.std_convention}, {"teams", reports.size()}},
           g.seed,
           files,
           outputs}
      .write(a.out);
  std::cout << leaderboard_csv(lb);
  return kExitOk;
}

// ---------------------------------------------------------------- ensembles

struct HyperArgs {
  double lr = 1e-3;
  int epochs = 50;
  std::size_t batch = 256;
  std::size_t hidden = 0;

  void add(CLI::App* sub) {
    sub->add_option("--lr", lr, "Adam learning rate")->capture_default_str();
    sub->add_option("--epochs", epochs, "Training epochs")->capture_default_str();
    sub->add_option("--batch-size", batch, "Frames per mini-batch")->capture_default_str();
    sub->add_option("--hidden", hidden, "Hidden width of the deep variant (0 = 2C)");
  }
  EnsembleHyper hyper(std::uint64_t seed, double soft_vote_threshold = 0.5) const {
    EnsembleHyper h;
    h.learning_rate = lr;
    h.epochs = epochs;
    h.batch_size = batch;
    h.hidden = hidden;
    h.seed = seed;
    h.soft_vote_threshold = soft_vote_threshold;
    return h;
  }
  json to_json() const {
    return {{"lr", lr}, {"epochs", epochs}, {"batch_size", batch}, {"hidden", hidden}};
  }
};

EnsembleVariant variant_flag(const std::string& name) {
  const auto v = parse_variant(name);
  if (!v) throw UsageError("--variant: unknown variant '" + name + "'");
  return *v;
}

struct EnsembleArgs {
  std::string variant;
  std::vector<fs::path> runs;
  std::vector<double> weights;
  fs::path calibration_gt;
  fs::path taxonomy;
  bool mask = true;
  double threshold_ap = kDefaultSelectionThresholdPercent;
  double vote_threshold = 0.5;
  std::string team_id = "ensemble";
  HyperArgs hyper;
  fs::path out;
};

int cmd_ensemble(const EnsembleArgs& a, const Global& g) {
  const EnsembleVariant variant = variant_flag(a.variant);
  const auto dirs = team_dirs(a.runs, "--runs");
  if (dirs.size() < 2) throw UsageError("--runs: an ensemble needs at least two runs");
  if (variant == EnsembleVariant::kWeightedAverage && a.weights.empty() && a.calibration_gt.empty()) {
    throw UsageError("--weights: weighted_average needs --weights or --calibration-gt");
  }
  if (is_trainable(variant) && a.calibration_gt.empty()) {
    throw UsageError("--calibration-gt: variant " + a.variant + " is trained on calibration labels");
  }
  if (!a.calibration_gt.empty() && a.taxonomy.empty()) {
    throw UsageError("--taxonomy: required with --calibration-gt");
  }
  const std::size_t threads = g.threads();
  std::vector<Run> runs = load_runs(dirs, 0, threads);

  json config = {{"variant", a.variant},
                 {"runs", path_strings(dirs)},
                 {"team_id", a.team_id},
                 {"mask", a.mask}};
  Manifest manifest{"ensemble", {}, g.seed, dirs, {}};

  std::optional<GroundTruth> calibration;
  if (!a.calibration_gt.empty()) {
    const TripletTaxonomy taxonomy = load_taxonomy(a.taxonomy);
    calibration = parse_ground_truth(a.calibration_gt, taxonomy.num_triplets(), threads);
    manifest.inputs.push_back(a.calibration_gt);
    manifest.inputs.push_back(a.taxonomy);

    EvalOptions options;
    options.apply_mask = a.mask;
    options.keep_per_video = false;
    std::vector<double> ap;
    for (const auto& run : runs) {
      ap.push_back(evaluate_suite(restrict_to(run, *calibration), *calibration, taxonomy, options,
                                  threads)
                       .task(Task::kIVT)
                       .mean_ap);
    }
    const auto keep = select_models(ap, a.threshold_ap);
    json selection = json::array();
    for (std::size_t m = 0; m < runs.size(); ++m) {
      selection.push_back({{"team", runs[m].team_id},
                           {"ap_ivt", ap[m]},
                           {"selected", std::find(keep.begin(), keep.end(), m) != keep.end()}});
    }
    config["threshold_ap"] = a.threshold_ap;
    config["selection"] = selection;
    if (keep.empty()) {
      throw std::runtime_error("no model exceeds --threshold-ap " + csv::format_double(a.threshold_ap));
    }
    std::vector<Run> kept;
    std::vector<double> kept_ap;
    for (std::size_t m : keep) {
      kept.push_back(std::move(runs[m]));
      kept_ap.push_back(ap[m]);
    }
    runs = std::move(kept);
    if (variant == EnsembleVariant::kWeightedAverage && a.weights.empty()) {
      double total = 0.0;
      for (double v : kept_ap) total += v;
      if (!(total > 0.0)) throw std::runtime_error("selected models all score AP 0");
      std::vector<double> w;
      for (double v : kept_ap) w.push_back(v / total);
      config["weights"] = w;
    }
  }

  Run combined;
  std::optional<EnsembleModel> model;
  switch (variant) {
    case EnsembleVariant::kAverage:
      combined = combine_average(runs);
      break;
    case EnsembleVariant::kSoftVote:
      config["threshold"] = a.vote_threshold;
      combined = combine_soft_vote(runs, a.vote_threshold);
      break;
    case EnsembleVariant::kWeightedAverage: {
      const std::vector<double> w =
          a.weights.empty() ? config.at("weights").get<std::vector<double>>() : a.weights;
      if (w.size() != runs.size()) {
        throw UsageError("--weights: got " + std::to_string(w.size()) + " weights for " +
                         std::to_string(runs.size()) + " runs");
      }
      config["weights"] = w;
      combined = combine_weighted_average(runs, w);
      model = EnsembleModel(variant, runs.size(), runs.front().num_classes());
      std::copy(w.begin(), w.end(), model->parameters().begin());
      break;
    }
    case EnsembleVariant::kDeep:
    case EnsembleVariant::kDeepWeighted:
    case EnsembleVariant::kDeepPerClassWeighted: {
      std::vector<Run> train;
      for (const auto& run : runs) train.push_back(restrict_to(run, *calibration));
      config["hyper"] = a.hyper.to_json();
      model = train_deep_ensemble(train, *calibration, variant, a.hyper.hyper(g.seed));
      combined = apply_ensemble(*model, runs);
      std::cout << "loss " << csv::format_double(model->initial_loss) << " -> "
                << csv::format_double(model->final_loss) << "\n";
      break;
    }
  }
  combined.team_id = a.team_id;
  manifest.outputs = write_run_files(combined, a.out / a.team_id);
  if (model) manifest.outputs.push_back(write_json(a.out / "model.json", *model));
  manifest.config = config;
  manifest.write(a.out);
  std::cout << "wrote " << combined.videos.size() << " videos to " << (a.out / a.team_id).string()
            << "\n";
  return kExitOk;
}

struct TrainArgs {
  std::string variant;
  std::vector<fs::path> runs;
  fs::path gt;
  HyperArgs hyper;
  fs::path out;
};

int cmd_ensemble_train(const TrainArgs& a, const Global& g) {
  const EnsembleVariant variant = variant_flag(a.variant);
  if (!is_trainable(variant)) throw UsageError("--variant: " + a.variant + " is not trainable");
  const auto dirs = team_dirs(a.runs, "--runs");
  const std::size_t threads = g.threads();
  const std::vector<Run> runs = load_runs(dirs, 0, threads);
  const GroundTruth gt = parse_ground_truth(a.gt, runs.front().num_classes(), threads);
  std::vector<Run> train;
  for (const auto& run : runs) train.push_back(restrict_to(run, gt));
  const EnsembleModel model = train_deep_ensemble(train, gt, variant, a.hyper.hyper(g.seed));

  fs::create_directories(a.out);
  Manifest manifest{"ensemble-train",
                    {{"variant", a.variant}, {"runs", path_strings(dirs)}, {"hyper", a.hyper.to_json()}},
                    g.seed,
                    dirs,
                    {write_json(a.out / "model.json", model)}};
  manifest.inputs.push_back(a.gt);
  manifest.write(a.out);
  std::cout << "loss " << csv::format_double(model.initial_loss) << " -> "
            << csv::format_double(model.final_loss) << "\n";
  return kExitOk;
}

struct ApplyArgs {
  fs::path model;
  std::vector<fs::path> runs;
  std::string team_id = "ensemble";
  fs::path out;
};

int cmd_ensemble_apply(const ApplyArgs& a, const Global& g) {
  const EnsembleModel model = json::parse(csv::read_file(a.model)).get<EnsembleModel>();
  const auto dirs = team_dirs(a.runs, "--runs");
  const std::vector<Run> runs = load_runs(dirs, 0, g.threads());
  Run combined = apply_ensemble(model, runs);
  combined.team_id = a.team_id;
  Manifest manifest{"ensemble-apply",
                    {{"variant", variant_name(model.variant())},
                     {"runs", path_strings(dirs)},
                     {"team_id", a.team_id}},
                    model.hyper().seed,
                    {a.model},
                    write_run_files(combined, a.out / a.team_id)};
  manifest.inputs.insert(manifest.inputs.end(), dirs.begin(), dirs.end());
  manifest.write(a.out);
  return kExitOk;
}

// ---------------------------------------------------------------- stability

struct StabilityArgs {
  std::vector<fs::path> runs;
  fs::path gt;
  fs::path taxonomy;
  bool mask = true;
  std::size_t n_batches = 30;
  std::size_t clip_len = 100;
  fs::path out;
};

int cmd_stability(const StabilityArgs& a, const Global& g) {
  const TripletTaxonomy taxonomy = load_taxonomy(a.taxonomy);
  const auto dirs = team_dirs(a.runs, "--runs");
  if (dirs.size() < 2) throw UsageError("--runs: stability needs at least two runs");
  const std::size_t threads = g.threads();
  const std::vector<Run> runs = load_runs(dirs, taxonomy.num_triplets(), threads);
  const GroundTruth gt = parse_ground_truth(a.gt, taxonomy.num_triplets(), threads);

  StabilityOptions options;
  options.n_batches = a.n_batches;
  options.clip_length = a.clip_len;
  options.seed = g.seed;
  options.apply_mask = a.mask;
  const StabilityMatrix m = stability_matrix(runs, gt, taxonomy, options, threads);

  fs::create_directories(a.out);
  csv::write_file(a.out / "stability.csv", stability_csv(m));
  Manifest manifest{"stability",
                    {{"runs", path_strings(dirs)},
                     {"n_batches", a.n_batches},
                     {"clip_len", a.clip_len},
                     {"mask", a.mask}},
                    g.seed,
                    {a.taxonomy, a.gt},
                    {a.out / "stability.csv", write_json(a.out / "stability.json", m)}};
  manifest.inputs.insert(manifest.inputs.end(), dirs.begin(), dirs.end());
  manifest.write(a.out);
  std::cout << stability_csv(m);
  return kExitOk;
}

// ---------------------------------------------------------------- post-processing

struct PostprocessArgs {
  fs::path run;
  fs::path freq;
  fs::path taxonomy;
  std::size_t rare = kDefaultRareClassCount;
  double verb_coef = 0.03;
  double target_coef = 0.97;
  fs::path out;
};

int cmd_postprocess(const PostprocessArgs& a, const Global& g) {
  const TripletTaxonomy taxonomy = load_taxonomy(a.taxonomy);
  auto counts = parse_frequencies_csv(csv::read_file(a.freq));
  if (counts.size() != taxonomy.num_triplets()) {
    throw std::runtime_error("frequency file lists " + std::to_string(counts.size()) +
                             " classes, taxonomy has " + std::to_string(taxonomy.num_triplets()));
  }
  if (a.rare > counts.size()) {
    throw UsageError("--rare: " + std::to_string(a.rare) + " exceeds the class count");
  }
  const ClassFrequencies rare = rare_classes(std::move(counts), a.rare);
  const std::size_t threads = g.threads();
  const Run run = parse_run(a.run, taxonomy.num_triplets(), threads);
  const Run adjusted = adjust_run(run, taxonomy, rare, {a.verb_coef, a.target_coef}, threads);
  const std::string team = team_name(a.run);

  Manifest{"postprocess",
           {{"run", a.run.generic_string()},
            {"rare", a.rare},
            {"rare_set", rare.rare_set},
            {"verb_coef", a.verb_coef},
            {"target_coef", a.target_coef}},
           g.seed,
           {a.run, a.freq, a.taxonomy},
           write_run_files(adjusted, a.out / team)}
      .write(a.out);
  return kExitOk;
}

struct FrequenciesArgs {
  fs::path gt;
  fs::path out;
};

int cmd_frequencies(const FrequenciesArgs& a, const Global& g) {
  const GroundTruth gt = parse_ground_truth(a.gt, 0, g.threads());
  const ClassFrequencies freq = class_frequencies(gt, 0);
  fs::create_directories(a.out);
  const fs::path path = a.out / "frequencies.csv";
  csv::write_file(path, format_frequencies_csv(freq));
  Manifest{"frequencies", {{"gt", a.gt.generic_string()}}, g.seed, {a.gt}, {path}}.write(a.out);
  return kExitOk;
}

// ---------------------------------------------------------------- audit

struct AuditArgs {
  fs::path full;
  fs::path prefix;
  double tol = kDefaultCausalityTolerance;
  fs::path out;
};

int cmd_audit(const AuditArgs& a, const Global& g) {
  const std::size_t threads = g.threads();
  const Run full = parse_run(a.full, 0, threads);
  const Run prefix = parse_run(a.prefix, 0, threads);
  const ValidationReport report = causality_audit(full, prefix, a.tol);
  fs::create_directories(a.out);
  Manifest{"audit",
           {{"full", a.full.generic_string()}, {"prefix", a.prefix.generic_string()}, {"tol", a.tol}},
           g.seed,
           {a.full, a.prefix},
           {write_json(a.out / "causality.json", report)}}
      .write(a.out);
  std::cout << (report.pass ? "PASS" : "FAIL") << " causality audit: " << report.findings.size()
            << " findings\n";
  if (!report.pass) throw CheckFailed("causality audit failed");
  return kExitOk;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Evaluation, ranking and ensembling for surgical action-triplet recognition",
               "tripletbench"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  app.fallthrough();

  Global global;
  app.add_option("--threads", global.threads_flag,
                 "Worker threads (default: logical cores; TRIPLETBENCH_THREADS overrides)")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", global.seed, "Seed for clip sampling and training")->capture_default_str();

  const auto existing_dir = CLI::ExistingDirectory;
  const auto existing_file = CLI::ExistingFile;

  ValidateArgs validate;
  auto* validate_cmd = app.add_subcommand("validate", "Check a run's structure and value ranges");
  validate_cmd->add_option("--runs", validate.runs, "Run directory")->required()->check(existing_dir);
  auto* validate_gt =
      validate_cmd->add_option("--gt", validate.gt, "Ground-truth directory")->check(existing_dir);
  auto* validate_expected =
      validate_cmd->add_option("--expected", validate.expected, "JSON map of video id to frame count")
          ->check(existing_file);
  validate_gt->excludes(validate_expected);
  auto* validate_tax =
      validate_cmd->add_option("--taxonomy", validate.taxonomy, "Taxonomy CSV")->check(existing_file);
  auto* validate_classes =
      validate_cmd->add_option("--classes", validate.classes, "Expected class count")
          ->check(CLI::PositiveNumber);
  validate_tax->excludes(validate_classes);
  validate_cmd->add_option("--out", validate.out, "Output directory")->required();

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score runs against ground truth");
  eval_cmd->add_option("--runs", eval.runs, "Team directory or parent of team directories")
      ->required()
      ->check(existing_dir);
  eval_cmd->add_option("--gt", eval.gt, "Ground-truth directory")->required()->check(existing_dir);
  eval_cmd->add_option("--taxonomy", eval.taxonomy, "Taxonomy CSV")->required()->check(existing_file);
  eval_cmd->add_flag("--mask,!--no-mask", eval.mask, "Drop null classes from the IVT/IV/IT means");
  eval_cmd->add_option("--topk", eval.ks, "Comma separated K values")->delimiter(',');
  eval_cmd->add_option("--out", eval.out, "Output directory")->required();

  LeaderboardArgs board;
  auto* board_cmd = app.add_subcommand("leaderboard", "Rank evaluation reports");
  board_cmd->add_option("--reports", board.reports, "Directory of report JSON files")
      ->required()
      ->check(existing_dir);
  board_cmd->add_option("--sort", board.sort, "Task to sort by")->capture_default_str();
  board_cmd->add_option("--std", board.std_convention, "Footer std convention")
      ->check(CLI::IsMember({"sample", "population"}))
      ->capture_default_str();
  board_cmd->add_option("--out", board.out, "Output directory")->required();

  EnsembleArgs ensemble;
  auto* ens_cmd = app.add_subcommand("ensemble", "Combine runs");
  ens_cmd->add_option("--variant", ensemble.variant, "Combiner")->required();
  ens_cmd->add_option("--runs", ensemble.runs, "Run directories")->required()->check(existing_dir);
  auto* ens_weights =
      ens_cmd->add_option("--weights", ensemble.weights, "Comma separated model weights")
          ->delimiter(',');
  auto* ens_calib = ens_cmd->add_option("--calibration-gt", ensemble.calibration_gt,
                                        "Labels used for selection, weights and training")
                        ->check(existing_dir);
  ens_weights->excludes(ens_calib);
  ens_cmd->add_option("--taxonomy", ensemble.taxonomy, "Taxonomy CSV")->check(existing_file);
  ens_cmd->add_flag("--mask,!--no-mask", ensemble.mask, "Mask null classes when scoring models");
  ens_cmd->add_option("--threshold-ap", ensemble.threshold_ap, "Selection threshold in AP percent")
      ->capture_default_str();
  ens_cmd->add_option("--threshold", ensemble.vote_threshold, "Soft-vote threshold")
      ->capture_default_str();
  ens_cmd->add_option("--team-id", ensemble.team_id, "Name of the combined run")->capture_default_str();
  ensemble.hyper.add(ens_cmd);
  ens_cmd->add_option("--out", ensemble.out, "Output directory")->required();

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("ensemble-train", "Fit a learned combiner");
  train_cmd->add_option("--variant", train.variant, "deep, deep_weighted or deep_per_class_weighted")
      ->required();
  train_cmd->add_option("--runs", train.runs, "Run directories")->required()->check(existing_dir);
  train_cmd->add_option("--gt", train.gt, "Training labels")->required()->check(existing_dir);
  train.hyper.add(train_cmd);
  train_cmd->add_option("--out", train.out, "Output directory")->required();

  ApplyArgs apply;
  auto* apply_cmd = app.add_subcommand("ensemble-apply", "Apply a saved combiner");
  apply_cmd->add_option("--model", apply.model, "model.json")->required()->check(existing_file);
  apply_cmd->add_option("--runs", apply.runs, "Run directories, in training order")
      ->required()
      ->check(existing_dir);
  apply_cmd->add_option("--team-id", apply.team_id, "Name of the combined run")->capture_default_str();
  apply_cmd->add_option("--out", apply.out, "Output directory")->required();

  StabilityArgs stability;
  auto* stab_cmd = app.add_subcommand("stability", "Pairwise rank-stability tests over clips");
  stab_cmd->add_option("--runs", stability.runs, "Run directories")->required()->check(existing_dir);
  stab_cmd->add_option("--gt", stability.gt, "Ground-truth directory")->required()->check(existing_dir);
  stab_cmd->add_option("--taxonomy", stability.taxonomy, "Taxonomy CSV")
      ->required()
      ->check(existing_file);
  stab_cmd->add_flag("--mask,!--no-mask", stability.mask, "Mask null classes");
  stab_cmd->add_option("--n-batches", stability.n_batches, "Clips")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  stab_cmd->add_option("--clip-len", stability.clip_len, "Frames per clip")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  stab_cmd->add_option("--out", stability.out, "Output directory")->required();

  PostprocessArgs post;
  auto* post_cmd = app.add_subcommand("postprocess", "Rare-class score adjustment");
  post_cmd->add_option("--run", post.run, "Run directory")->required()->check(existing_dir);
  post_cmd->add_option("--freq", post.freq, "Frequency CSV (triplet_id,count)")
      ->required()
      ->check(existing_file);
  post_cmd->add_option("--taxonomy", post.taxonomy, "Taxonomy CSV")->required()->check(existing_file);
  post_cmd->add_option("--rare", post.rare, "Number of rare classes")->capture_default_str();
  post_cmd->add_option("--verb-coef", post.verb_coef, "Verb coefficient")->capture_default_str();
  post_cmd->add_option("--target-coef", post.target_coef, "Target coefficient")->capture_default_str();
  post_cmd->add_option("--out", post.out, "Output directory")->required();

  FrequenciesArgs freq;
  auto* freq_cmd = app.add_subcommand("frequencies", "Count positive frames per class");
  freq_cmd->add_option("--gt", freq.gt, "Training labels")->required()->check(existing_dir);
  freq_cmd->add_option("--out", freq.out, "Output directory")->required();

  AuditArgs audit;
  auto* audit_cmd = app.add_subcommand("audit", "Compare full-video and prefix outputs");
  audit_cmd->add_option("--full", audit.full, "Run on full videos")->required()->check(existing_dir);
  audit_cmd->add_option("--prefix", audit.prefix, "Run on frame prefixes")
      ->required()
      ->check(existing_dir);
  audit_cmd->add_option("--tol", audit.tol, "Absolute tolerance")->capture_default_str();
  audit_cmd->add_option("--out", audit.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (validate_cmd->parsed()) {
      if (validate.gt.empty() && validate.expected.empty()) {
        throw UsageError("--gt or --expected is required");
      }
      if (validate.taxonomy.empty() && validate.classes == 0) {
        throw UsageError("--taxonomy or --classes is required");
      }
      return cmd_validate(validate, global);
    }
    if (eval_cmd->parsed()) return cmd_eval(eval, global);
    if (board_cmd->parsed()) return cmd_leaderboard(board, global);
    if (ens_cmd->parsed()) return cmd_ensemble(ensemble, global);
    if (train_cmd->parsed()) return cmd_ensemble_train(train, global);
    if (apply_cmd->parsed()) return cmd_ensemble_apply(apply, global);
    if (stab_cmd->parsed()) return cmd_stability(stability, global);
    if (post_cmd->parsed()) return cmd_postprocess(post, global);
    if (freq_cmd->parsed()) return cmd_frequencies(freq, global);
    if (audit_cmd->parsed()) return cmd_audit(audit, global);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const CheckFailed& e) {
    std::cerr << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace tripletbench::cli
