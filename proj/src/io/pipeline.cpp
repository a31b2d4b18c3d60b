// Copyright 2026 The srdet Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "srdet/io/pipeline.hpp"

#include <cstdio>
#include <sstream>

#include "srdet/det/checkpoint.hpp"
#include "srdet/det/trainer.hpp"
#include "srdet/io/ppm.hpp"
#include "srdet/sr/checkpoint.hpp"
#include "srdet/train/sr_trainer.hpp"

namespace srdet::io {
namespace {

class ArmError : public Error {
 public:
  using Error::Error;
};

std::string arm_label(std::size_t arm) {
  return "arm " + std::to_string(arm + 1) + " (" + kArmNames[arm] + ")";
}

// Runs fn, re-raising failures with the arm named. Numeric failures keep
// their type so callers can still tell them apart.
template <typename Fn>
auto in_arm(std::size_t arm, Fn fn) {
  try {
    return fn();
  } catch (const NumericError& e) {
    throw NumericError(arm_label(arm) + ": " + e.what(), e.op());
  } catch (const std::exception& e) {
    throw ArmError(arm_label(arm) + ": " + e.what());
  }
}

det::BoundingBox scaled(const det::BoundingBox& b, double s) {
  return {b.x_min * s, b.y_min * s, b.x_max * s, b.y_max * s};
}

std::vector<det::DetSample> det_samples(const std::vector<Tensor<float>>& images,
                                        const std::vector<std::vector<det::GroundTruth>>& gts,
                                        double box_scale) {
  std::vector<det::DetSample> out;
  for (std::size_t i = 0; i < images.size(); ++i) {
    det::DetSample s{images[i], {}};
    for (const auto& g : gts[i]) s.gts.push_back({g.class_id, scaled(g.box, box_scale)});
    out.push_back(std::move(s));
  }
  return out;
}

double mean_psnr(const std::vector<Tensor<float>>& a, const std::vector<Tensor<float>>& b,
                 bool* any_infinite) {
  double acc = 0.0;
  std::size_t finite = 0;
  *any_infinite = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const eval::Psnr p = eval::psnr(a[i], b[i]);
    if (p.infinite) {
      *any_infinite = true;
      continue;
    }
    acc += p.db;
    ++finite;
  }
  return finite == 0 ? 0.0 : acc / static_cast<double>(finite);
}

std::string fixed(double v, int digits) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

Pipeline::Pipeline(sr::Generator<float> generator, det::Detector<float> detector,
                   det::DetectConfig cfg)
    : generator_(std::move(generator)), detector_(std::move(detector)), cfg_(cfg) {
  cfg_.validate();
  if (generator_.spec().input_channels != detector_.spec().input_channels) {
    throw ValidationError("pipeline: generator emits " +
                          std::to_string(generator_.spec().input_channels) +
                          " channels but the detector expects " +
                          std::to_string(detector_.spec().input_channels));
  }
}

Pipeline Pipeline::load(const std::filesystem::path& generator_ckpt,
                        const std::filesystem::path& detector_ckpt, const det::DetectConfig& cfg) {
  for (const auto* p : {&generator_ckpt, &detector_ckpt}) {
    if (!std::filesystem::is_regular_file(*p)) {
      throw sr::CheckpointError(sr::CheckpointErrorKind::kIo, "missing checkpoint " + p->string());
    }
  }
  return Pipeline(sr::load_generator(generator_ckpt), det::load_detector(detector_ckpt), cfg);
}

PipelineResult Pipeline::run(const Tensor<float>& lr) const {
  PipelineResult out;
  out.sr = generator_.forward(lr);
  out.detections = det::detect(detector_, out.sr, cfg_);
  return out;
}

DetectionEval evaluate_detector(const det::Detector<float>& detector,
                                const std::vector<Tensor<float>>& images,
                                const std::vector<std::vector<det::GroundTruth>>& gts,
                                const det::DetectConfig& cfg, double iou_threshold,
                                double box_scale) {
  std::vector<eval::ImageResult> results;
  DetectionEval out;
  for (std::size_t i = 0; i < images.size(); ++i) {
    eval::ImageResult r;
    for (auto d : det::detect(detector, images[i], cfg)) {
      d.box = scaled(d.box, box_scale);
      r.detections.push_back(d);
    }
    r.ground_truths = gts[i];
    out.match += eval::match_detections(r.detections, r.ground_truths, iou_threshold);
    results.push_back(std::move(r));
  }
  out.ap = eval::average_precision(results, iou_threshold);
  return out;
}

std::vector<Sample> load_samples(const DataConfig& data) {
  if (data.dir.empty()) return make_synthetic_samples(data.synthetic);
  return load_dataset(std::filesystem::path(data.dir) / "manifest.tsv", data.synthetic.scale);
}

SplitData gather(const std::vector<Sample>& samples, const std::vector<std::size_t>& indices) {
  SplitData out;
  for (std::size_t i : indices) {
    if (i >= samples.size()) throw DomainError("gather: sample index out of range", i);
    out.hr.push_back(samples[i].hr);
    out.lr.push_back(samples[i].lr);
    out.gts.push_back(samples[i].gts);
  }
  return out;
}

sr::Generator<float> train_generator(const SrConfig& cfg, const SplitData& data,
                                     std::vector<train::LossReport>* history, const Logger& log) {
  sr::Generator<float> g(cfg.generator, cfg.init_seed);
  sr::Discriminator<float> d(cfg.discriminator, cfg.init_seed + 1);
  const train::FeatureExtractor<float> phi(cfg.feature_extractor);
  std::vector<train::SrPair<float>> pairs;
  for (std::size_t i = 0; i < data.hr.size(); ++i) pairs.push_back({data.lr[i], data.hr[i]});
  const long every = static_cast<long>(std::max<std::size_t>(1, cfg.training.steps / 10));
  auto reports = train::train_sr(g, d, phi, pairs, cfg.training, [&](const train::LossReport& r) {
    if (log && (r.step + 1) % every == 0) {
      log("sr step " + std::to_string(r.step + 1) + ": perceptual " + fixed(r.l_perceptual, 5) +
          ", total " + fixed(r.l_total, 5) + ", d_loss " + fixed(r.discriminator_loss, 4));
    }
  });
  if (history != nullptr) *history = std::move(reports);
  return g;
}

det::Detector<float> train_detector_on(const DetConfig& cfg,
                                       const std::vector<Tensor<float>>& images,
                                       const std::vector<std::vector<det::GroundTruth>>& gts,
                                       double frame_scale, const Logger& log,
                                       const std::string& tag) {
  det::DetectorSpec spec = cfg.spec;
  for (double& sc : spec.anchors.scales) sc /= frame_scale;
  det::Detector<float> detector(spec, cfg.init_seed);
  const auto data = det_samples(images, gts, 1.0 / frame_scale);
  const long every = static_cast<long>(std::max<std::size_t>(1, cfg.training.steps / 5));
  det::train_detector(detector, data, cfg.training, [&](const det::DetLossReport& r) {
    if (log && (r.step + 1) % every == 0) {
      log(tag + " step " + std::to_string(r.step + 1) + ": loss " + fixed(r.total, 4));
    }
  });
  return detector;
}

AblationResult run_ablation(const PipelineConfig& cfg, const Logger& log) {
  cfg.validate();
  const std::size_t scale = cfg.data.synthetic.scale;
  const std::vector<Sample> samples = load_samples(cfg.data);
  const Split split = split_indices(samples.size(), cfg.data.test_fraction, cfg.data.split_seed);
  if (split.train.empty() || split.test.empty()) {
    throw ValidationError("ablation needs non-empty train and test splits, got " +
                          std::to_string(split.train.size()) + " / " +
                          std::to_string(split.test.size()));
  }
  if (log) {
    log("dataset: " + std::to_string(split.train.size()) + " train / " +
        std::to_string(split.test.size()) + " test samples");
  }
  const SplitData train = gather(samples, split.train);
  const SplitData test = gather(samples, split.test);

  AblationResult result;
  const double iou_t = cfg.eval.iou_threshold;

  // The generator from arm 2 also feeds arm 4.
  std::vector<Tensor<float>> sr_train, sr_test;
  in_arm(1, [&] {
    const sr::Generator<float> g = train_generator(cfg.sr, train, &result.sr_history, log);
    for (const auto& x : train.lr) sr_train.push_back(g.forward(x));
    for (const auto& x : test.lr) sr_test.push_back(g.forward(x));
    bool inf = false;
    result.sr_psnr = {mean_psnr(sr_test, test.hr, &inf), false};
    std::vector<Tensor<float>> up;
    for (const auto& x : test.lr) up.push_back(nearest_upsample(x, scale));
    result.upsample_psnr = {mean_psnr(up, test.hr, &inf), false};
    return 0;
  });

  auto detection_arm = [&](std::size_t arm, const std::vector<Tensor<float>>& train_images,
                           const std::vector<Tensor<float>>& test_images, double frame_scale) {
    return in_arm(arm, [&] {
      const det::Detector<float> detector =
          train_detector_on(cfg.det, train_images, train.gts, frame_scale, log, arm_label(arm));
      return evaluate_detector(detector, test_images, test.gts, cfg.det.detect, iou_t, frame_scale);
    });
  };

  const DetectionEval lr_eval = detection_arm(0, train.lr, test.lr, static_cast<double>(scale));
  const DetectionEval hr_eval = detection_arm(2, train.hr, test.hr, 1.0);
  const DetectionEval sr_eval = detection_arm(3, sr_train, sr_test, 1.0);

  std::vector<eval::ReportRow> rows;
  const DetectionEval* evals[4] = {&lr_eval, nullptr, &hr_eval, &sr_eval};
  for (std::size_t arm = 0; arm < 4; ++arm) {
    if (evals[arm] == nullptr) {
      rows.push_back({std::to_string(arm + 1), kArmNames[arm], {}, {}, {}, {}});
      continue;
    }
    const eval::Prf prf = eval::prf_metrics(evals[arm]->match);
    result.prf[arm] = prf;
    rows.push_back(eval::make_row(std::to_string(arm + 1), kArmNames[arm], prf, evals[arm]->ap));
  }

  const std::string hr = std::to_string(cfg.data.synthetic.hr_size);
  const std::string lr = std::to_string(cfg.data.synthetic.hr_size / scale);
  std::vector<std::string> notes = {
      "Matching: greedy by score, same class, IoU >= " + fixed(iou_t, 2) + ".",
      "1 Traditional Model: detector trained and run on " + lr + "x" + lr +
          " LR inputs; boxes scaled x" + std::to_string(scale) + " for scoring.",
      "2 ESRGAN Only: generator without a detector; mean PSNR " + fixed(result.sr_psnr.db, 2) +
          " dB vs HR (nearest-neighbour upsampling: " + fixed(result.upsample_psnr.db, 2) +
          " dB).",
      "3 Faster R-CNN Only: detector trained and run on native " + hr + "x" + hr + " HR inputs.",
      "4 ESRGAN + Faster R-CNN: detector trained and run on generator outputs.",
      "Test split: " + std::to_string(split.test.size()) + " images.",
  };
  result.report = eval::build_report(std::move(rows), std::move(notes));
  return result;
}

void write_ablation_outputs(const AblationResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "report.csv", eval::render_csv(result.report));
  write_text(dir / "table.txt", eval::render_table(result.report));
  std::ostringstream hist;
  train::write_loss_history_csv(hist, result.sr_history);
  write_text(dir / "loss_history.csv", hist.str());
}

}  // namespace srdet::io
