#include "boxfix/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "boxfix/ap.hpp"
#include "boxfix/corrector.hpp"
#include "boxfix/error.hpp"
#include "boxfix/io.hpp"
#include "boxfix/metrics.hpp"
#include "boxfix/noise.hpp"
#include "boxfix/report.hpp"
#include "boxfix/simulator.hpp"

namespace boxfix {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

struct CorruptArgs {
  std::string ann, out, report, config, model = "gaussian";
  double gamma = 0.0;
  std::uint64_t seed = 0;
  bool clip = false;
};

struct CorrectArgs {
  std::string ann, preds, out, report, config, weight = "step:0.7";
  double iou_floor = 0.5, score_floor = 0.05;
  std::int64_t top_k = 1000;
  bool ignore_score = false;
};

struct SimulateArgs {
  std::string config, out, csv, predictions_out, clean_out, noisy_out, corrected_out;
  std::uint64_t seed = 0;
};

struct AnalyzeArgs {
  std::string ref, cand, out, csv;
};

struct EvalArgs {
  std::string gt, preds, out, thresholds;
  bool size_breakdown = false;
};

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  json cfg = io::read_json(path);
  if (!cfg.is_object()) throw Error(ErrorCode::kSchema, path + ": config must be a JSON object");
  return cfg;
}

// Flag if given, else config-file value, else default.
template <class T>
T resolve(const CLI::App* cmd, const char* flag, const T& flag_value, const json& cfg,
          const char* key) {
  if (cmd->count(flag) > 0) return flag_value;
  if (const auto it = cfg.find(key); it != cfg.end()) {
    try {
      return it->get<T>();
    } catch (const json::exception&) {
      throw Error(ErrorCode::kSchema, std::string("config field '") + key + "' has the wrong type");
    }
  }
  return flag_value;
}

std::uint64_t require_seed(const CLI::App* cmd, std::uint64_t flag_value, const json& cfg) {
  if (cmd->count("--seed") > 0) return flag_value;
  if (const auto it = cfg.find("seed"); it != cfg.end()) {
    if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<std::int64_t>() >= 0)) {
      throw Error(ErrorCode::kSchema, "config field 'seed' must be a non-negative integer");
    }
    return it->get<std::uint64_t>();
  }
  throw Error(ErrorCode::kUsage, "--seed is required (no implicit randomness)");
}

BBox clip_to_image(const BBox& box, double width, double height, bool* clipped) {
  const double l = std::clamp(box.left(), 0.0, width);
  const double t = std::clamp(box.top(), 0.0, height);
  const double r = std::clamp(box.right(), 0.0, width);
  const double b = std::clamp(box.bottom(), 0.0, height);
  const BBox out(l, t, r, b);
  *clipped = !(out == box);
  return out;
}

int cmd_corrupt(const CLI::App* cmd, const CorruptArgs& a, std::ostream& out) {
  const json file_cfg = load_config_file(a.config);
  const auto model_name = resolve<std::string>(cmd, "--model", a.model, file_cfg, "model");
  const auto gamma = resolve<double>(cmd, "--gamma", a.gamma, file_cfg, "gamma");
  const bool clip = resolve<bool>(cmd, "--clip-to-image", a.clip, file_cfg, "clip_to_image");
  const std::uint64_t seed = require_seed(cmd, a.seed, file_cfg);
  const NoiseModel model = make_noise_model(model_name, gamma);

  io::DatasetFile ds = io::load_dataset(a.ann);
  const auto clean = ds.instances();
  CorruptionSummary summary;
  auto noisy = corrupt_dataset(clean, model, seed, &summary);

  std::size_t clipped = 0;
  if (clip) {
    for (auto& inst : noisy) {
      const io::ImageRecord* img = ds.find_image(inst.image_id);
      if (img == nullptr || !img->width || !img->height) {
        throw Error(ErrorCode::kSchema, "--clip-to-image needs width and height for image " +
                                            std::to_string(inst.image_id));
      }
      bool c = false;
      inst.box = clip_to_image(inst.box, static_cast<double>(*img->width),
                               static_cast<double>(*img->height), &c);
      if (c) ++clipped;
    }
  }
  ds.set_boxes(noisy);
  io::save_dataset(ds, a.out);

  json config = {{"ann", a.ann},   {"out", a.out},   {"model", model_name},
                 {"gamma", gamma}, {"seed", seed},   {"clip_to_image", clip}};
  json rep = report::header("corrupt", config);
  json s = report::to_json(summary);
  s["clipped"] = clipped;
  if (!clean.empty()) {
    s["empirical_gamma_output"] = estimate_noise_level(relative_errors(error_samples(clean, noisy)));
  }
  rep["summary"] = std::move(s);
  if (!a.report.empty()) io::write_json(a.report, rep);
  out << io::canonical_dump(rep);
  return kExitOk;
}

int cmd_correct(const CLI::App* cmd, const CorrectArgs& a, std::ostream& out, std::ostream& err) {
  const json file_cfg = load_config_file(a.config);
  CorrectionConfig cfg;
  cfg.weight = parse_weight_fn(resolve<std::string>(cmd, "--weight", a.weight, file_cfg, "weight"));
  cfg.iou_floor = resolve<double>(cmd, "--iou-floor", a.iou_floor, file_cfg, "iou_floor");
  cfg.score_floor = resolve<double>(cmd, "--score-floor", a.score_floor, file_cfg, "score_floor");
  const auto top_k = resolve<std::int64_t>(cmd, "--top-k", a.top_k, file_cfg, "top_k");
  if (top_k < 1) throw Error(ErrorCode::kRange, "--top-k must be >= 1");
  cfg.top_k = static_cast<std::size_t>(top_k);
  cfg.use_score = !resolve<bool>(cmd, "--ignore-score", a.ignore_score, file_cfg, "ignore_score");
  cfg.validate();

  io::DatasetFile ds = io::load_dataset(a.ann);
  const auto predictions = io::load_results(a.preds);
  const auto annotations = ds.instances();

  CorrectionReport rep;
  const auto corrected = correct_dataset(annotations, predictions, cfg, &rep);

  std::size_t unknown_image = 0;
  for (const auto& p : predictions) {
    if (ds.find_image(p.image_id) == nullptr) ++unknown_image;
  }
  if (unknown_image > 0) {
    rep.warnings.push_back(std::to_string(unknown_image) +
                           " prediction(s) reference image ids absent from the dataset");
  }
  for (const auto& w : rep.warnings) err << "boxfix: warning: " << w << '\n';

  ds.set_boxes(corrected);
  io::save_dataset(ds, a.out);

  json config = report::to_json(cfg);
  config["ann"] = a.ann;
  config["preds"] = a.preds;
  config["out"] = a.out;
  json doc = report::header("correct", config);
  doc["report"] = report::to_json(rep, true);
  if (!a.report.empty()) io::write_json(a.report, doc);

  json brief = report::header("correct", config);
  brief["report"] = report::to_json(rep, false);
  out << io::canonical_dump(brief);
  return kExitOk;
}

// Builds a dataset document around synthesized instances.
io::DatasetFile scene_dataset(const SceneConfig& scene, const std::vector<Instance>& instances) {
  io::DatasetFile ds;
  std::int64_t last_image = 0;
  for (const auto& inst : instances) {
    if (inst.image_id == last_image) continue;
    last_image = inst.image_id;
    io::ImageRecord img;
    img.id = inst.image_id;
    img.width = static_cast<std::int64_t>(std::ceil(scene.image_width));
    img.height = static_cast<std::int64_t>(std::ceil(scene.image_height));
    img.file_name = "synthetic_" + std::to_string(inst.image_id) + ".jpg";
    ds.images.push_back(img);
  }
  for (std::size_t c = 1; c <= scene.categories; ++c) {
    io::CategoryRecord cat;
    cat.id = static_cast<std::int64_t>(c);
    cat.name = "object_" + std::to_string(c);
    ds.categories.push_back(cat);
  }
  for (const auto& inst : instances) {
    io::AnnotationRecord rec;
    rec.instance = inst;
    rec.extra["iscrowd"] = 0;
    ds.annotations.push_back(rec);
  }
  return ds;
}

int cmd_simulate(const CLI::App* cmd, const SimulateArgs& a, std::ostream& out) {
  const json file_cfg = load_config_file(a.config);
  const std::uint64_t seed = require_seed(cmd, a.seed, file_cfg);

  NoiseModel ann_noise = GaussianSymmetric{0.1};
  if (file_cfg.contains("annotation_noise")) {
    ann_noise = report::noise_model_from_json(file_cfg["annotation_noise"]);
  }
  SimConfig sim;
  sim.seed = seed;
  if (file_cfg.contains("teacher")) sim = report::sim_config_from_json(file_cfg["teacher"], sim);
  CorrectionConfig cfg;
  if (file_cfg.contains("correction")) {
    cfg = report::correction_config_from_json(file_cfg["correction"], cfg);
  }

  io::DatasetFile ds;
  json source;
  if (file_cfg.contains("dataset")) {
    if (!file_cfg["dataset"].is_string()) {
      throw Error(ErrorCode::kSchema, "config field 'dataset' must be a path string");
    }
    fs::path path = file_cfg["dataset"].get<std::string>();
    if (path.is_relative()) path = fs::path(a.config).parent_path() / path;
    ds = io::load_dataset(path);
    source = {{"dataset", file_cfg["dataset"]}};
  } else {
    SceneConfig scene;
    if (file_cfg.contains("scene")) scene = report::scene_config_from_json(file_cfg["scene"]);
    ds = scene_dataset(scene, synthesize_instances(scene, seed));
    source = {{"scene", report::to_json(scene)}};
  }
  const auto clean = ds.instances();
  if (clean.empty()) throw Error(ErrorCode::kSchema, "simulation dataset has no annotations");

  ExperimentData data;
  const ExperimentReport result = run_experiment(clean, ann_noise, sim, cfg, seed, &data);

  json config = source;
  config["seed"] = seed;
  config["annotation_noise"] = report::to_json(ann_noise);
  config["teacher"] = report::to_json(sim);
  config["correction"] = report::to_json(cfg);
  json doc = report::header("simulate", config);
  doc["report"] = report::to_json(result);
  io::write_json(a.out, doc);

  if (!a.csv.empty()) io::write_text_atomic(a.csv, report::experiment_rows_csv(result));
  if (!a.predictions_out.empty()) io::save_results(data.predictions, a.predictions_out);
  if (!a.clean_out.empty()) io::save_dataset(ds, a.clean_out);
  if (!a.noisy_out.empty()) {
    io::DatasetFile noisy = ds;
    noisy.set_boxes(data.noisy);
    io::save_dataset(noisy, a.noisy_out);
  }
  if (!a.corrected_out.empty()) {
    io::DatasetFile corrected = ds;
    corrected.set_boxes(data.corrected);
    io::save_dataset(corrected, a.corrected_out);
  }

  out << "instances " << result.instances << "  mean IoU noisy " << result.mean_iou_noisy
      << "  corrected " << result.mean_iou_corrected << '\n';
  return kExitOk;
}

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out) {
  const auto ref = io::load_dataset(a.ref).instances();
  const auto cand = io::load_dataset(a.cand).instances();
  json doc = report::header("analyze", {{"ref", a.ref}, {"cand", a.cand}});
  doc["report"] = report::analysis(ref, cand);
  io::write_json(a.out, doc);
  if (!a.csv.empty()) io::write_text_atomic(a.csv, report::error_samples_csv(error_samples(ref, cand)));
  if (doc["report"].contains("noise_level")) {
    out << "instances " << ref.size() << "  noise level " << doc["report"]["noise_level"]["overall"]
        << '\n';
  }
  return kExitOk;
}

std::vector<double> parse_thresholds(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kUsage, "cannot parse IoU threshold '" + item + "'");
    }
  }
  return out;
}

int cmd_eval_ap(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  const io::DatasetFile gt = io::load_dataset(a.gt);
  const auto preds = io::load_results(a.preds);
  APOptions opts;
  if (!a.thresholds.empty()) opts.thresholds = parse_thresholds(a.thresholds);
  for (const auto& c : gt.categories) opts.categories.push_back(c.id);
  opts.size_breakdown = a.size_breakdown;
  const auto instances = gt.instances();
  const APResult result = evaluate_ap(preds, instances, opts);
  for (const auto& w : result.warnings) err << "boxfix: warning: " << w << '\n';

  json doc = report::header("eval-ap", {{"gt", a.gt},
                                        {"preds", a.preds},
                                        {"thresholds", opts.thresholds},
                                        {"size_breakdown", a.size_breakdown}});
  doc["report"] = report::to_json(result);
  io::write_json(a.out, doc);
  out << "mAP " << result.map << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Synthesize box annotation noise and correct noisy boxes from detector predictions",
               "boxfix"};
  app.require_subcommand(1);

  CorruptArgs corrupt;
  auto* c = app.add_subcommand("corrupt", "Corrupt annotation boxes with a noise law");
  c->add_option("--ann", corrupt.ann, "Clean COCO annotation file")->required();
  c->add_option("--model", corrupt.model, "gaussian | exp-enclosing | exp-enclosed");
  c->add_option("--gamma", corrupt.gamma, "Noise level (RMS relative boundary error)");
  c->add_option("--seed", corrupt.seed, "Master seed");
  c->add_option("--out", corrupt.out, "Output annotation file")->required();
  c->add_option("--report", corrupt.report, "Also write the summary JSON here");
  c->add_option("--config", corrupt.config, "JSON file with defaults for the flags above");
  c->add_flag("--clip-to-image", corrupt.clip, "Clip noisy boxes to the image bounds");

  CorrectArgs correct;
  auto* k = app.add_subcommand("correct", "Correct annotation boxes from teacher predictions");
  k->add_option("--ann", correct.ann, "Noisy COCO annotation file")->required();
  k->add_option("--preds", correct.preds, "Teacher predictions (COCO results file)")->required();
  k->add_option("--weight", correct.weight, "step:<tau> | gauss:<alpha> | none");
  k->add_option("--iou-floor", correct.iou_floor, "Drop predictions below this IoU");
  k->add_option("--score-floor", correct.score_floor, "Drop predictions below this score");
  k->add_option("--top-k", correct.top_k, "Keep at most this many predictions per annotation");
  k->add_flag("--ignore-score", correct.ignore_score, "Weight by f(IoU) alone");
  k->add_option("--out", correct.out, "Output annotation file")->required();
  k->add_option("--report", correct.report, "Write the full correction report here");
  k->add_option("--config", correct.config, "JSON file with defaults for the flags above");

  SimulateArgs simulate;
  auto* s = app.add_subcommand("simulate", "Run a corrupt -> teacher -> correct experiment");
  s->add_option("--config", simulate.config, "Experiment JSON")->required();
  s->add_option("--out", simulate.out, "Experiment report JSON")->required();
  s->add_option("--seed", simulate.seed, "Overrides the config seed");
  s->add_option("--csv", simulate.csv, "Per-instance rows");
  s->add_option("--predictions-out", simulate.predictions_out, "Simulated teacher predictions");
  s->add_option("--clean-out", simulate.clean_out, "Clean dataset used");
  s->add_option("--noisy-out", simulate.noisy_out, "Corrupted dataset");
  s->add_option("--corrected-out", simulate.corrected_out, "Corrected dataset");

  AnalyzeArgs analyze;
  auto* an = app.add_subcommand("analyze", "Noise statistics of a dataset against a reference");
  an->add_option("--ref", analyze.ref, "Reference (clean) annotation file")->required();
  an->add_option("--cand", analyze.cand, "Candidate annotation file")->required();
  an->add_option("--out", analyze.out, "Report JSON")->required();
  an->add_option("--csv", analyze.csv, "Per-boundary error samples");

  EvalArgs eval;
  auto* e = app.add_subcommand("eval-ap", "COCO-style average precision");
  e->add_option("--gt", eval.gt, "Ground-truth annotation file")->required();
  e->add_option("--preds", eval.preds, "Detections (COCO results file)")->required();
  e->add_option("--out", eval.out, "Report JSON")->required();
  e->add_option("--thresholds", eval.thresholds, "Comma-separated IoU thresholds");
  e->add_flag("--size-breakdown", eval.size_breakdown, "Add small/medium/large mAP");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& arg : args) argv.push_back(arg.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& pe) {
    err << "boxfix: error[usage]: " << pe.what() << '\n';
    return kExitUsage;
  }

  try {
    if (c->parsed()) return cmd_corrupt(c, corrupt, out);
    if (k->parsed()) return cmd_correct(k, correct, out, err);
    if (s->parsed()) return cmd_simulate(s, simulate, out);
    if (an->parsed()) return cmd_analyze(analyze, out);
    if (e->parsed()) return cmd_eval_ap(eval, out, err);
  } catch (const Error& ex) {
    err << "boxfix: error[" << error_code_name(ex.code()) << "]: " << ex.what() << '\n';
    return ex.code() == ErrorCode::kUsage ? kExitUsage : kExitData;
  } catch (const std::exception& ex) {
    err << "boxfix: error[internal]: " << ex.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace boxfix
