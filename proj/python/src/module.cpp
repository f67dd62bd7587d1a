#include <pybind11/eigen.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "boxfix/ap.hpp"
#include "boxfix/corrector.hpp"
#include "boxfix/error.hpp"
#include "boxfix/io.hpp"
#include "boxfix/kalman.hpp"
#include "boxfix/noise.hpp"
#include "boxfix/report.hpp"
#include "boxfix/simulator.hpp"

namespace py = pybind11;
using namespace boxfix;

namespace {

py::dict stats_dict(const std::array<BoundaryStats, 4>& stats) {
  py::dict out;
  for (Boundary b : kAllBoundaries) {
    const auto& s = stats[static_cast<int>(b)];
    py::dict d;
    d["mean"] = s.mean;
    d["stddev"] = s.stddev;
    d["rms"] = s.rms;
    out[boundary_name(b)] = d;
  }
  return out;
}

SimConfig make_sim_config(std::size_t n_predictions, const std::string& noise_model, double gamma,
                          double score_noise_sd, std::optional<double> constant_score,
                          std::uint64_t seed) {
  SimConfig cfg;
  cfg.n_predictions = n_predictions;
  cfg.pred_noise = make_noise_model(noise_model, gamma);
  if (constant_score) {
    cfg.score_law = ConstantScore{*constant_score};
  } else {
    cfg.score_law = IoUProportionalScore{score_noise_sd};
  }
  cfg.seed = seed;
  cfg.validate();
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Box annotation noise synthesis and prediction-ensemble correction";

  py::register_exception<Error>(m, "BoxfixError", PyExc_ValueError);

  py::class_<BBox>(m, "BBox")
      .def(py::init<double, double, double, double>(), py::arg("left"), py::arg("top"),
           py::arg("right"), py::arg("bottom"))
      .def_property_readonly("left", &BBox::left)
      .def_property_readonly("top", &BBox::top)
      .def_property_readonly("right", &BBox::right)
      .def_property_readonly("bottom", &BBox::bottom)
      .def_property_readonly("width", &BBox::width)
      .def_property_readonly("height", &BBox::height)
      .def_property_readonly("area", &BBox::area)
      .def("coords", &BBox::coords)
      .def("contains", &BBox::contains, py::arg("other"), py::arg("tol") = 0.0)
      .def(py::self == py::self)
      .def("__repr__", [](const BBox& b) {
        std::ostringstream os;
        os << "BBox(" << b.left() << ", " << b.top() << ", " << b.right() << ", " << b.bottom() << ")";
        return os.str();
      });

  m.def("iou", &iou, py::arg("a"), py::arg("b"));
  m.def("from_xywh", py::overload_cast<double, double, double, double>(&from_xywh), py::arg("x"),
        py::arg("y"), py::arg("w"), py::arg("h"));
  m.def("to_xywh", [](const BBox& b) {
    const XYWH v = to_xywh(b);
    return py::make_tuple(v.x, v.y, v.w, v.h);
  });

  py::class_<Instance>(m, "Instance")
      .def(py::init([](std::int64_t id, std::int64_t image_id, std::int64_t category_id, BBox box,
                       bool iscrowd) { return Instance{id, image_id, category_id, box, iscrowd}; }),
           py::arg("id"), py::arg("image_id"), py::arg("category_id"), py::arg("box"),
           py::arg("iscrowd") = false)
      .def_readwrite("id", &Instance::id)
      .def_readwrite("image_id", &Instance::image_id)
      .def_readwrite("category_id", &Instance::category_id)
      .def_readwrite("box", &Instance::box)
      .def_readwrite("iscrowd", &Instance::iscrowd);

  py::class_<Prediction>(m, "Prediction")
      .def(py::init<std::int64_t, BBox, std::int64_t, double>(), py::arg("image_id"), py::arg("box"),
           py::arg("category_id"), py::arg("score"))
      .def_readonly("image_id", &Prediction::image_id)
      .def_readonly("box", &Prediction::box)
      .def("score_for", &Prediction::score_for)
      .def_property_readonly("scores", [](const Prediction& p) {
        py::dict d;
        for (const auto& s : p.scores) d[py::int_(s.category_id)] = s.score;
        return d;
      });

  m.def(
      "corrupt_box",
      [](const BBox& clean, const std::string& model, double gamma, std::uint64_t seed) {
        Rng rng(seed);
        return corrupt_box(clean, make_noise_model(model, gamma), rng);
      },
      py::arg("clean"), py::arg("model"), py::arg("gamma"), py::arg("seed"));

  m.def(
      "corrupt_dataset",
      [](const std::vector<Instance>& instances, const std::string& model, double gamma,
         std::uint64_t seed) {
        CorruptionSummary summary;
        auto out = corrupt_dataset(instances, make_noise_model(model, gamma), seed, &summary);
        py::dict s;
        s["instances"] = summary.instances;
        s["clamped"] = summary.clamped;
        s["empirical_gamma"] = summary.empirical_gamma;
        return py::make_tuple(out, s);
      },
      py::arg("instances"), py::arg("model"), py::arg("gamma"), py::arg("seed"));

  m.def(
      "estimate_noise_level",
      [](const std::vector<double>& errors) { return estimate_noise_level(errors); },
      py::arg("relative_errors"));

  py::class_<CorrectionConfig>(m, "CorrectionConfig")
      .def(py::init([](const std::string& weight, double iou_floor, double score_floor,
                       std::size_t top_k, bool use_score) {
             CorrectionConfig cfg;
             cfg.weight = parse_weight_fn(weight);
             cfg.iou_floor = iou_floor;
             cfg.score_floor = score_floor;
             cfg.top_k = top_k;
             cfg.use_score = use_score;
             cfg.validate();
             return cfg;
           }),
           py::arg("weight") = "step:0.7", py::arg("iou_floor") = 0.5, py::arg("score_floor") = 0.05,
           py::arg("top_k") = 1000, py::arg("use_score") = true)
      .def_property_readonly("weight", [](const CorrectionConfig& c) { return format_weight_fn(c.weight); })
      .def_readonly("iou_floor", &CorrectionConfig::iou_floor)
      .def_readonly("score_floor", &CorrectionConfig::score_floor)
      .def_readonly("top_k", &CorrectionConfig::top_k)
      .def_readonly("use_score", &CorrectionConfig::use_score);

  m.def(
      "weight",
      [](const Prediction& p, const Instance& ann, const std::string& fn) {
        return weight(p, ann, parse_weight_fn(fn));
      },
      py::arg("prediction"), py::arg("annotation"), py::arg("fn") = "step:0.7");

  m.def(
      "kalman_update",
      [](const Vec4& mean, const Mat4& cov, const Vec4& z, const Mat4& r) {
        const KalmanState s = kalman_update({mean, cov}, z, r);
        return py::make_tuple(s.mean, s.cov);
      },
      py::arg("mean"), py::arg("cov"), py::arg("measurement_mean"), py::arg("measurement_cov"));

  m.def(
      "posterior_batch",
      [](const Vec4& mean, const Mat4& cov, const std::vector<std::pair<Vec4, Mat4>>& ms) {
        std::vector<Measurement> list;
        for (const auto& [z, r] : ms) list.push_back({z, r});
        const KalmanState s = posterior_batch(mean, cov, list);
        return py::make_tuple(s.mean, s.cov);
      },
      py::arg("prior_mean"), py::arg("prior_cov"), py::arg("measurements"));

  m.def(
      "correct_box",
      [](const Instance& ann, const std::vector<Prediction>& preds, const CorrectionConfig& cfg) {
        return correct_box(ann, preds, cfg);
      },
      py::arg("annotation"), py::arg("predictions"), py::arg("config") = CorrectionConfig{});

  m.def(
      "correct_dataset",
      [](const std::vector<Instance>& anns, const std::vector<Prediction>& preds,
         const CorrectionConfig& cfg) {
        CorrectionReport rep;
        auto out = correct_dataset(anns, preds, cfg, &rep);
        py::dict r;
        r["unchanged"] = rep.unchanged;
        r["unchanged_fraction"] = rep.unchanged_fraction();
        r["clamped"] = rep.clamped;
        r["predictions_unmatched"] = rep.predictions_unmatched;
        r["warnings"] = rep.warnings;
        py::list rows;
        for (const auto& row : rep.instances) {
          py::dict d;
          d["id"] = row.instance_id;
          d["delta_sum"] = row.delta_sum;
          d["kept"] = row.kept;
          d["changed"] = row.changed;
          rows.append(d);
        }
        r["per_instance"] = rows;
        return py::make_tuple(out, r);
      },
      py::arg("annotations"), py::arg("predictions"), py::arg("config") = CorrectionConfig{});

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init(&make_sim_config), py::arg("n_predictions") = 20,
           py::arg("noise_model") = "gaussian", py::arg("gamma") = 0.05,
           py::arg("score_noise_sd") = 0.1, py::arg("constant_score") = py::none(),
           py::arg("seed") = 0)
      .def_readonly("n_predictions", &SimConfig::n_predictions)
      .def_readonly("seed", &SimConfig::seed);

  py::class_<SceneConfig>(m, "SceneConfig")
      .def(py::init<>())
      .def_readwrite("instances", &SceneConfig::instances)
      .def_readwrite("per_image", &SceneConfig::per_image)
      .def_readwrite("image_width", &SceneConfig::image_width)
      .def_readwrite("image_height", &SceneConfig::image_height)
      .def_readwrite("min_extent", &SceneConfig::min_extent)
      .def_readwrite("max_extent", &SceneConfig::max_extent)
      .def_readwrite("categories", &SceneConfig::categories);

  m.def("synthesize_instances", &synthesize_instances, py::arg("scene"), py::arg("seed"));

  py::class_<ExperimentReport>(m, "ExperimentReport")
      .def_readonly("instances", &ExperimentReport::instances)
      .def_readonly("mean_iou_noisy", &ExperimentReport::mean_iou_noisy)
      .def_readonly("mean_iou_corrected", &ExperimentReport::mean_iou_corrected)
      .def_readonly("gamma_noisy", &ExperimentReport::gamma_noisy)
      .def_readonly("gamma_corrected", &ExperimentReport::gamma_corrected)
      .def_readonly("annotation_clamps", &ExperimentReport::annotation_clamps)
      .def_readonly("correction_clamps", &ExperimentReport::correction_clamps)
      .def_readonly("unchanged", &ExperimentReport::unchanged)
      .def_property_readonly("noisy_errors", [](const ExperimentReport& r) { return stats_dict(r.noisy_errors); })
      .def_property_readonly("corrected_errors",
                             [](const ExperimentReport& r) { return stats_dict(r.corrected_errors); });

  m.def(
      "run_experiment",
      [](const std::vector<Instance>& clean, const std::string& ann_model, double ann_gamma,
         const SimConfig& sim, const CorrectionConfig& cfg, std::uint64_t seed) {
        return run_experiment(clean, make_noise_model(ann_model, ann_gamma), sim, cfg, seed);
      },
      py::arg("clean"), py::arg("ann_model"), py::arg("ann_gamma"), py::arg("sim"),
      py::arg("config"), py::arg("seed"));

  m.def(
      "evaluate_ap",
      [](const std::vector<Prediction>& preds, const std::vector<Instance>& gt,
         std::optional<std::vector<double>> thresholds) {
        APOptions opts;
        if (thresholds) opts.thresholds = *thresholds;
        const APResult r = evaluate_ap(preds, gt, opts);
        py::dict out;
        out["map"] = r.map;
        py::dict per;
        for (std::size_t i = 0; i < r.thresholds.size(); ++i) per[py::float_(r.thresholds[i])] = r.per_threshold[i];
        out["per_threshold"] = per;
        out["per_category"] = r.per_category;
        out["warnings"] = r.warnings;
        return out;
      },
      py::arg("predictions"), py::arg("ground_truth"), py::arg("thresholds") = py::none());

  m.def(
      "load_dataset_instances",
      [](const std::string& path) { return io::load_dataset(path).instances(); }, py::arg("path"));
  m.def(
      "load_results", [](const std::string& path) { return io::load_results(path); }, py::arg("path"));
}
