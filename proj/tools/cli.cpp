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

#include <cstdio>
#include <filesystem>
#include <functional>
#include <ostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "srdet/det/checkpoint.hpp"
#include "srdet/eval/metrics.hpp"
#include "srdet/io/annotate.hpp"
#include "srdet/io/annotations.hpp"
#include "srdet/io/config.hpp"
#include "srdet/io/dataset.hpp"
#include "srdet/io/pipeline.hpp"
#include "srdet/io/ppm.hpp"
#include "srdet/sr/checkpoint.hpp"
#include "srdet/tools/cli.hpp"

namespace fs = std::filesystem;

namespace srdet::tools {
namespace {

io::PipelineConfig load_config(const std::string& path) {
  io::PipelineConfig cfg;
  if (!path.empty()) cfg = io::load_pipeline_config(path);
  return cfg;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"srdet: super-resolution then detection on small images"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  std::function<void()> action;
  const io::Logger log_line = [&err](const std::string& s) { err << s << "\n"; };

  // gen-data
  std::string config_path, out_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> count;
  auto* gen = app.add_subcommand("gen-data", "Write a synthetic shapes dataset");
  gen->add_option("--out", out_path, "Output directory")->required();
  gen->add_option("--config", config_path, "Config file");
  gen->add_option("--seed", seed, "Override data.seed");
  gen->add_option("--count", count, "Override data.count");
  gen->callback([&] {
    action = [&] {
      io::PipelineConfig cfg = load_config(config_path);
      if (seed) cfg.data.synthetic.seed = *seed;
      if (count) cfg.data.synthetic.count = *count;
      const auto records = io::make_synthetic_dataset(cfg.data.synthetic, out_path);
      out << "wrote " << records.size() << " samples to " << out_path << "\n";
    };
  });

  // train-sr
  std::string history_path;
  auto* train_sr = app.add_subcommand("train-sr", "Train the generator on the training split");
  train_sr->add_option("--out", out_path, "Generator checkpoint to write")->required();
  train_sr->add_option("--config", config_path, "Config file");
  train_sr->add_option("--seed", seed, "Override sr.seed");
  train_sr->add_option("--history", history_path, "Loss history CSV to write");
  train_sr->callback([&] {
    action = [&] {
      io::PipelineConfig cfg = load_config(config_path);
      if (seed) cfg.sr.training.seed = *seed;
      const auto samples = io::load_samples(cfg.data);
      const auto split =
          io::split_indices(samples.size(), cfg.data.test_fraction, cfg.data.split_seed);
      std::vector<train::LossReport> history;
      const auto g =
          io::train_generator(cfg.sr, io::gather(samples, split.train), &history, log_line);
      sr::save_checkpoint(g, out_path);
      if (!history_path.empty()) {
        std::ostringstream csv;
        train::write_loss_history_csv(csv, history);
        io::write_text(history_path, csv.str());
      }
    };
  });

  // train-det
  std::string input_kind = "hr", sr_ckpt;
  auto* train_det = app.add_subcommand("train-det", "Train the detector on the training split");
  train_det->add_option("--out", out_path, "Detector checkpoint to write")->required();
  train_det->add_option("--config", config_path, "Config file");
  train_det->add_option("--seed", seed, "Override det.seed");
  train_det->add_option("--input", input_kind, "Training images: hr, lr or sr")
      ->check(CLI::IsMember({"hr", "lr", "sr"}));
  train_det->add_option("--sr-ckpt", sr_ckpt, "Generator checkpoint, required for --input sr");
  train_det->callback([&] {
    if (input_kind == "sr" && sr_ckpt.empty()) {
      throw CLI::RequiredError("--sr-ckpt is required with --input sr");
    }
    action = [&] {
      io::PipelineConfig cfg = load_config(config_path);
      if (seed) cfg.det.training.seed = *seed;
      std::optional<sr::Generator<float>> g;
      if (input_kind == "sr") g = sr::load_generator(sr_ckpt);
      const auto samples = io::load_samples(cfg.data);
      const auto split =
          io::split_indices(samples.size(), cfg.data.test_fraction, cfg.data.split_seed);
      const io::SplitData train = io::gather(samples, split.train);
      std::vector<Tensor<float>> images;
      double frame_scale = 1.0;
      if (input_kind == "hr") {
        images = train.hr;
      } else if (input_kind == "lr") {
        images = train.lr;
        frame_scale = static_cast<double>(cfg.data.synthetic.scale);
      } else {
        for (const auto& x : train.lr) images.push_back(g->forward(x));
      }
      const auto detector =
          io::train_detector_on(cfg.det, images, train.gts, frame_scale, log_line);
      det::save_checkpoint(detector, out_path);
    };
  });

  // enhance
  std::string in_path, ckpt_path;
  auto* enhance = app.add_subcommand("enhance", "Super-resolve one LR image");
  enhance->add_option("--in", in_path, "LR image (PPM)")->required();
  enhance->add_option("--out", out_path, "SR image to write (PPM)")->required();
  enhance->add_option("--ckpt", ckpt_path, "Generator checkpoint")->required();
  enhance->callback([&] {
    action = [&] {
      const auto g = sr::load_generator(ckpt_path);
      io::write_ppm(g.forward(io::read_ppm(in_path)), out_path);
    };
  });

  // detect
  std::string annotated_path;
  auto* detect = app.add_subcommand("detect", "Run the detector on one image");
  detect->add_option("--in", in_path, "Image (PPM)")->required();
  detect->add_option("--ckpt", ckpt_path, "Detector checkpoint")->required();
  detect->add_option("--out", out_path, "Detections file; defaults to standard output");
  detect->add_option("--annotated", annotated_path, "Annotated image to write (PPM)");
  detect->add_option("--config", config_path, "Config file");
  detect->callback([&] {
    action = [&] {
      const io::PipelineConfig cfg = load_config(config_path);
      const auto detector = det::load_detector(ckpt_path);
      const auto image = io::read_ppm(in_path);
      const auto dets = det::detect(detector, image, cfg.det.detect);
      if (out_path.empty()) {
        out << io::format_detections(dets);
      } else {
        io::write_detections(dets, out_path);
      }
      if (!annotated_path.empty()) {
        io::write_ppm(io::annotate_image(image, dets, cfg.det.class_names), annotated_path);
      }
    };
  });

  // pipeline
  std::string det_ckpt;
  auto* pipeline = app.add_subcommand("pipeline", "LR image -> generator -> detector");
  pipeline->add_option("--in", in_path, "LR image (PPM)")->required();
  pipeline->add_option("--sr-ckpt", sr_ckpt, "Generator checkpoint")->required();
  pipeline->add_option("--det-ckpt", det_ckpt, "Detector checkpoint")->required();
  pipeline->add_option("--out", out_path, "Output directory")->required();
  pipeline->add_option("--config", config_path, "Config file");
  pipeline->callback([&] {
    action = [&] {
      const io::PipelineConfig cfg = load_config(config_path);
      const auto p = io::Pipeline::load(sr_ckpt, det_ckpt, cfg.det.detect);
      const auto result = p.run(io::read_ppm(in_path));
      const fs::path dir(out_path);
      fs::create_directories(dir);
      io::write_ppm(result.sr, dir / "sr.ppm");
      io::write_detections(result.detections, dir / "detections.txt");
      io::write_ppm(io::annotate_image(result.sr, result.detections, cfg.det.class_names),
                    dir / "annotated.ppm");
    };
  });

  // ablate
  auto* ablate = app.add_subcommand("ablate", "Train and evaluate the four-arm comparison");
  ablate->add_option("--config", config_path, "Config file");
  ablate->add_option("--out", out_path, "Output directory")->required();
  ablate->callback([&] {
    action = [&] {
      const io::PipelineConfig cfg = load_config(config_path);
      const auto result = io::run_ablation(cfg, log_line);
      io::write_ablation_outputs(result, out_path);
      out << eval::render_table(result.report);
    };
  });

  // eval
  std::vector<std::string> det_files, gt_files;
  double iou = 0.5;
  auto* evaluate = app.add_subcommand("eval", "Score detection files against annotations");
  evaluate->add_option("--dets", det_files, "Detection files")->required();
  evaluate->add_option("--gt", gt_files, "Annotation files, paired with --dets")->required();
  evaluate->add_option("--iou", iou, "IoU threshold");
  evaluate->callback([&] {
    if (det_files.size() != gt_files.size()) {
      throw CLI::ValidationError("--dets and --gt must be given the same number of times");
    }
    action = [&] {
      std::vector<eval::ImageResult> results;
      eval::MatchResult total;
      for (std::size_t i = 0; i < det_files.size(); ++i) {
        eval::ImageResult r{io::read_detections(det_files[i]), io::read_annotations(gt_files[i])};
        total += eval::match_detections(r.detections, r.ground_truths, iou);
        results.push_back(std::move(r));
      }
      const eval::Prf prf = eval::prf_metrics(total);
      out << "tp,fp,fn,precision,recall,accuracy,ap\n"
          << total.tp << "," << total.fp << "," << total.fn << "," << fmt(prf.precision) << ","
          << fmt(prf.recall) << "," << fmt(prf.accuracy) << ","
          << fmt(eval::average_precision(results, iou)) << "\n";
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "error: " << e.what() << "\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  try {
    action();
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace srdet::tools
