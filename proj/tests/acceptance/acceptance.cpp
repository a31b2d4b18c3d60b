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

// Acceptance suite: one PASS/FAIL line per criterion on stdout, progress on
// stderr. Exit status is non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "oracles.hpp"
#include "srdet/core/ops.hpp"
#include "srdet/det/box.hpp"
#include "srdet/det/detector.hpp"
#include "srdet/eval/metrics.hpp"
#include "srdet/eval/report.hpp"
#include "srdet/io/config.hpp"
#include "srdet/io/pipeline.hpp"
#include "srdet/io/ppm.hpp"
#include "srdet/sr/checkpoint.hpp"
#include "srdet/tools/cli.hpp"
#include "srdet/train/sr_trainer.hpp"
#include "test_util.hpp"

namespace srdet::acceptance {
namespace {

using Clock = std::chrono::steady_clock;
using testing::random_tensor;

constexpr double kOracleRuntimeLimitS = 120.0;
constexpr double kConvAbsTolerance = 1e-6;
constexpr double kIouTolerance = 1e-6;
constexpr double kApTolerance = 1e-9;
constexpr double kLossTolerance = 1e-9;
constexpr double kPrfTolerance = 1e-5;
constexpr double kMarginPct = 5.0;
constexpr double kAblationBudgetS = 30.0 * 60.0;
constexpr std::size_t kSmokeSteps = 200;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Accumulates sub-checks; the first failure is kept in the detail.
class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && pass_) first_failure_ = what;
    pass_ = pass_ && ok;
  }
  void note(const std::string& s) { notes_ += (notes_.empty() ? "" : "; ") + s; }
  Outcome outcome() const {
    return {pass_, pass_ ? notes_ : "failed: " + first_failure_ + (notes_.empty() ? "" : "; " + notes_)};
  }

 private:
  bool pass_ = true;
  std::string first_failure_;
  std::string notes_;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2e", v);
  return buf;
}

std::string fixed(double v, int digits = 1) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

oracle::Box to_oracle(const det::BoundingBox& b) { return {b.x_min, b.y_min, b.x_max, b.y_max}; }

det::BoundingBox grid_box(Rng& rng, int extent) {
  const double x0 = rng.below(extent * 4) / 4.0, y0 = rng.below(extent * 4) / 4.0;
  return {x0, y0, x0 + (1 + rng.below(extent * 2)) / 4.0, y0 + (1 + rng.below(extent * 2)) / 4.0};
}

Outcome gradient_correctness() {
  const auto t0 = Clock::now();
  Checker c;
  double worst_op = 0.0;
  std::string worst_name;
  const auto ops = checks::op_gradient_checks(2026);
  for (const auto& g : ops) {
    c.expect(g.entries > 0, g.name + " checked no entries");
    c.expect(g.max_rel_error <= checks::kOpGradientTolerance,
             g.name + " rel error " + sci(g.max_rel_error));
    if (g.max_rel_error >= worst_op) {
      worst_op = g.max_rel_error;
      worst_name = g.name;
    }
  }
  const auto comp = checks::composite_gradient_check(2026);
  c.expect(comp.max_rel_error <= checks::kCompositeGradientTolerance,
           "composite rel error " + sci(comp.max_rel_error));
  c.expect(comp.skipped * 20 <= comp.entries, "too many kink-straddling entries");
  const double secs = seconds_since(t0);
  c.expect(secs <= kOracleRuntimeLimitS, "runtime " + fixed(secs) + " s");
  c.note(std::to_string(ops.size()) + " ops, worst " + worst_name + " " + sci(worst_op) +
         " <= 1e-4");
  c.note("composite " + sci(comp.max_rel_error) + " <= 1e-3 over " +
         std::to_string(comp.entries) + " entries (" + std::to_string(comp.skipped) +
         " skipped at kinks)");
  c.note(fixed(secs) + " s");
  return c.outcome();
}

Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  Checker c;
  Rng rng(7);

  double conv_err = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t ch = 1 + rng.below(4), o = 1 + rng.below(4), k = 1 + 2 * rng.below(3);
    const std::size_t h = k + rng.below(8), w = k + rng.below(8);
    const std::size_t stride = 1 + rng.below(3), pad = rng.below(3);
    const auto x = random_tensor<double>({ch, h, w}, rng);
    const auto kernel = random_tensor<double>({o, ch, k, k}, rng);
    const auto bias = random_tensor<double>({o}, rng);
    const auto y = ops::conv2d(x, kernel, bias, {stride, pad});
    std::size_t oh = 0, ow = 0;
    const auto ref = oracle::conv2d({x.data().begin(), x.data().end()}, ch, h, w,
                                    {kernel.data().begin(), kernel.data().end()}, o, k,
                                    {bias.data().begin(), bias.data().end()}, stride, pad, &oh, &ow);
    c.expect(y.shape() == Shape({o, oh, ow}), "conv output shape");
    if (y.numel() != ref.size()) continue;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      conv_err = std::max(conv_err, std::abs(y.data()[i] - ref[i]));
    }
  }
  c.expect(conv_err <= kConvAbsTolerance, "conv2d abs error " + sci(conv_err));

  int nms_mismatch = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng.below(30);
    std::vector<det::BoundingBox> boxes;
    std::vector<oracle::Box> oboxes;
    std::vector<double> scores;
    for (std::size_t i = 0; i < n; ++i) {
      boxes.push_back(grid_box(rng, 6));
      oboxes.push_back(to_oracle(boxes.back()));
      scores.push_back(rng.below(8) / 7.0);
    }
    const double thr = 0.05 + 0.15 * rng.below(6);
    const auto got = det::nms(boxes, scores, thr);
    const auto want = oracle::nms(oboxes, scores, thr);
    if (std::vector<std::size_t>(got) != want) ++nms_mismatch;
  }
  c.expect(nms_mismatch == 0, std::to_string(nms_mismatch) + " NMS mismatches");

  std::vector<double> sixteen(16);
  for (int i = 0; i < 16; ++i) sixteen[i] = i + 1;
  const auto fixture = det::roi_pool(Tensor<double>({1, 4, 4}, sixteen), {0, 0, 4, 4}, 2, 1);
  c.expect(std::vector<double>(fixture.data().begin(), fixture.data().end()) ==
               std::vector<double>{6, 8, 14, 16},
           "roi_pool 1..16 fixture");
  int pool_mismatch = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t ch = 1 + rng.below(3), h = 2 + rng.below(8), w = 2 + rng.below(8);
    const std::size_t stride = 1 + rng.below(4), pool = 1 + rng.below(4);
    const auto f = random_tensor<double>({ch, h, w}, rng);
    const double x0 = rng.uniform() * (w * stride - 1), y0 = rng.uniform() * (h * stride - 1);
    const det::BoundingBox roi{x0, y0, x0 + 0.5 + rng.uniform() * w * stride,
                               y0 + 0.5 + rng.uniform() * h * stride};
    const auto got = det::roi_pool(f, roi, pool, stride);
    const auto cy0 = static_cast<std::size_t>(std::floor(roi.y_min / stride));
    const auto cx0 = static_cast<std::size_t>(std::floor(roi.x_min / stride));
    const auto cy1 = std::min(h, static_cast<std::size_t>(std::ceil(roi.y_max / stride)));
    const auto cx1 = std::min(w, static_cast<std::size_t>(std::ceil(roi.x_max / stride)));
    const auto want = oracle::bin_max_pool({f.data().begin(), f.data().end()}, ch, h, w, cy0, cy1,
                                           cx0, cx1, pool);
    if (std::vector<double>(got.data().begin(), got.data().end()) != want) ++pool_mismatch;
  }
  c.expect(pool_mismatch == 0, std::to_string(pool_mismatch) + " roi_pool mismatches");

  double iou_err = std::abs(det::iou({0, 0, 2, 2}, {1, 1, 3, 3}) - 1.0 / 7.0);
  c.expect(iou_err <= kIouTolerance, "IoU 1/7 fixture");
  for (int trial = 0; trial < 1000; ++trial) {
    const auto a = grid_box(rng, 8), b = grid_box(rng, 8);
    iou_err = std::max(iou_err,
                       std::abs(det::iou(a, b) - oracle::grid_iou(to_oracle(a), to_oracle(b), 4)));
  }
  c.expect(iou_err <= kIouTolerance, "IoU error " + sci(iou_err));

  double ap_err = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<det::Detection> dets;
    std::vector<det::GroundTruth> gts;
    std::vector<oracle::Det> odets;
    std::vector<oracle::Gt> ogts;
    const std::size_t ng = rng.below(7), nd = rng.below(7);
    for (std::size_t i = 0; i < ng; ++i) {
      const int cls = 1 + static_cast<int>(rng.below(2));
      gts.push_back({cls, grid_box(rng, 4)});
      ogts.push_back({cls, to_oracle(gts.back().box)});
    }
    for (std::size_t i = 0; i < nd; ++i) {
      const int cls = 1 + static_cast<int>(rng.below(2));
      const auto box = (ng > 0 && rng.below(2) == 0) ? gts[rng.below(ng)].box : grid_box(rng, 4);
      const double score = rng.below(5) / 4.0;
      dets.push_back({box, cls, score});
      odets.push_back({cls, to_oracle(box), score});
    }
    const auto flags = oracle::greedy_flags(odets, ogts, 0.5);
    std::vector<std::size_t> order(nd);
    for (std::size_t i = 0; i < nd; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });
    std::vector<oracle::Scored> ranked;
    for (std::size_t i : order) ranked.push_back({dets[i].score, flags[i]});
    ap_err = std::max(ap_err, std::abs(eval::average_precision(dets, gts, 0.5) -
                                       oracle::ap_by_integration(ranked, ng)));
  }
  c.expect(ap_err <= kApTolerance, "AP error " + sci(ap_err));

  const double secs = seconds_since(t0);
  c.expect(secs <= kOracleRuntimeLimitS, "runtime " + fixed(secs) + " s");
  c.note("conv2d 200 configs max abs " + sci(conv_err));
  c.note("NMS 500 instances exact");
  c.note("roi_pool fixture + 300 exact");
  c.note("IoU max " + sci(iou_err));
  c.note("AP max " + sci(ap_err));
  c.note(fixed(secs) + " s");
  return c.outcome();
}

Outcome loss_fixtures() {
  Checker c;
  const double adv = train::adversarial_value(Tensor<double>({1}, {0.5}), Tensor<double>({1}, {0.5}))
                         .item();
  c.expect(std::abs(adv - 2.0 * std::log(0.5)) <= kLossTolerance, "adversarial value " + sci(adv));

  const train::FeatureExtractor<float> phi;
  Rng rng(3);
  const auto x = random_tensor<float>({3, 24, 24}, rng, 0, 1);
  c.expect(train::perceptual_loss(phi, x, x.clone()).item() == 0.0f, "perceptual(x, x) != 0");

  // Recomposition on every report of a short seeded run.
  sr::GeneratorSpec gs;
  gs.num_rrdb = 1;
  gs.base_channels = 8;
  gs.growth_channels = 4;
  sr::DiscriminatorSpec ds;
  ds.conv_stages = {{8, 2}, {8, 2}};
  std::vector<train::SrPair<float>> data;
  for (int i = 0; i < 4; ++i) {
    data.push_back({random_tensor<float>({3, 6, 6}, rng, 0, 1),
                    random_tensor<float>({3, 24, 24}, rng, 0, 1)});
  }
  train::SrTrainingOptions opts;
  opts.steps = 20;
  opts.batch_size = 2;
  opts.weights.lambda_content = 0.01;
  sr::Generator<float> g(gs, 1);
  sr::Discriminator<float> d(ds, 2);
  double worst = 0.0;
  for (const auto& r : train::train_sr(g, d, phi, data, opts)) {
    worst = std::max(worst, std::abs(r.l_total - (opts.weights.lambda_gan * r.l_gan +
                                                  opts.weights.lambda_perceptual * r.l_perceptual +
                                                  opts.weights.lambda_content * r.l_content)));
  }
  c.expect(worst <= kLossTolerance, "total loss recomposition " + sci(worst));

  gs.scale_factor = 4;
  const sr::Generator<float> g4(gs, 3);
  int shape_checks = 0;
  for (int trial = 0; trial < 8; ++trial) {
    const std::size_t h = 1 + rng.below(12), w = 1 + rng.below(12);
    const auto y = g4.forward(random_tensor<float>({3, h, w}, rng, 0, 1));
    c.expect(y.shape() == Shape({3, 4 * h, 4 * w}), "x4 shape law at " + std::to_string(h) + "x" +
                                                        std::to_string(w));
    ++shape_checks;
  }
  c.note("adversarial(0.5, 0.5) = " + fixed(adv, 12));
  c.note("perceptual(x, x) = 0");
  c.note("recomposition max " + sci(worst) + " over 20 reports");
  c.note("x4 shape law on " + std::to_string(shape_checks) + " sizes");
  return c.outcome();
}

Outcome residual_identity() {
  Checker c;
  sr::GeneratorSpec s;
  s.num_rrdb = 3;
  s.base_channels = 16;
  s.growth_channels = 8;
  sr::Generator<float> g(s, 11);
  for (std::size_t b = 0; b < s.num_rrdb; ++b) {
    for (auto& p : g.dense_path_parameters(b)) {
      std::fill(p.tensor.mutable_data().begin(), p.tensor.mutable_data().end(), 0.0f);
    }
  }
  Rng rng(12);
  const auto x = random_tensor<float>({s.base_channels, 7, 9}, rng, -3, 3);
  double worst = 0.0;
  for (std::size_t b = 0; b < s.num_rrdb; ++b) {
    worst = std::max(worst, testing::max_abs_diff(g.rrdb_forward(b, x), x));
  }
  const double trunk = testing::max_abs_diff(g.rrdb_stack_forward(x), x);
  c.expect(worst == 0.0, "block deviation " + sci(worst));
  c.expect(trunk == 0.0, "trunk deviation " + sci(trunk));
  c.note(std::to_string(s.num_rrdb) + " blocks and full trunk, max abs deviation 0");
  return c.outcome();
}

Outcome serialization() {
  Checker c;
  const auto dir = testing::temp_dir("acceptance_serialization");
  sr::GeneratorSpec s;
  s.num_rrdb = 2;
  s.base_channels = 8;
  s.growth_channels = 4;
  s.scale_factor = 4;
  const sr::Generator<float> g(s, 21);
  Rng rng(22);
  const auto lr = random_tensor<float>({3, 9, 7}, rng, 0, 1);
  const auto before = g.forward(lr);
  sr::save_checkpoint(g, dir / "g.srdt");
  const auto loaded = sr::load_generator(dir / "g.srdt");
  c.expect(testing::bitwise_equal(loaded.forward(lr), before), "checkpoint forward differs");

  const auto img = random_tensor<float>({3, 11, 13}, rng, 0, 1);
  io::write_ppm(img, dir / "a.ppm");
  const auto first = io::read_bytes(dir / "a.ppm");
  io::write_ppm(io::read_ppm(dir / "a.ppm"), dir / "b.ppm");
  c.expect(io::read_bytes(dir / "b.ppm") == first, "PPM write-read-write not idempotent");

  // Every truncation of both formats must raise a typed error, and a failed
  // load must leave the target network untouched.
  const auto ckpt = io::read_bytes(dir / "g.srdt");
  sr::Generator<float> target(s, 99);
  const auto target_before = target.forward(lr);
  std::size_t ckpt_cases = 0, ppm_cases = 0;
  for (std::size_t n = 0; n < ckpt.size(); n += (n < 256 ? 1 : 101)) {
    io::write_bytes(dir / "t.srdt", std::span<const std::uint8_t>(ckpt.data(), n));
    ++ckpt_cases;
    try {
      sr::load_checkpoint(target, dir / "t.srdt");
      c.expect(false, "truncated checkpoint of " + std::to_string(n) + " bytes loaded");
    } catch (const sr::CheckpointError&) {
    } catch (const std::exception& e) {
      c.expect(false, std::string("untyped checkpoint error: ") + e.what());
    }
  }
  c.expect(testing::bitwise_equal(target.forward(lr), target_before),
           "failed loads modified the network");
  for (std::size_t n = 0; n < first.size(); ++n) {
    ++ppm_cases;
    try {
      io::decode_ppm(std::span<const std::uint8_t>(first.data(), n));
      c.expect(false, "truncated PPM of " + std::to_string(n) + " bytes decoded");
    } catch (const io::ParseError&) {
    } catch (const std::exception& e) {
      c.expect(false, std::string("untyped PPM error: ") + e.what());
    }
  }
  c.note("checkpoint forward bitwise identical");
  c.note("PPM bytewise idempotent");
  c.note(std::to_string(ckpt_cases) + " checkpoint and " + std::to_string(ppm_cases) +
         " PPM truncations all typed errors");
  return c.outcome();
}

int run_cli(const std::vector<std::string>& args, std::string* out) {
  std::vector<const char*> argv{"srdet"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o;
  const int code = tools::run_cli(static_cast<int>(argv.size()), argv.data(), o, std::cerr);
  if (out != nullptr) *out = o.str();
  return code;
}

struct AblationRuns {
  std::filesystem::path first;
  std::filesystem::path second;
  double first_seconds = 0.0;
  int first_code = -1;
  int second_code = -1;
};

AblationRuns run_ablation_twice() {
  AblationRuns r;
  const std::string cfg = testing::source_path("configs/default.cfg").string();
  r.first = testing::temp_dir("acceptance_ablate_1");
  r.second = testing::temp_dir("acceptance_ablate_2");
  const auto t0 = Clock::now();
  r.first_code = run_cli({"ablate", "--config", cfg, "--out", r.first.string()}, nullptr);
  r.first_seconds = seconds_since(t0);
  r.second_code = run_cli({"ablate", "--config", cfg, "--out", r.second.string()}, nullptr);
  return r;
}

Outcome determinism(const AblationRuns& runs) {
  Checker c;
  c.expect(runs.first_code == 0 && runs.second_code == 0, "ablate exited non-zero");
  for (const char* name : {"report.csv", "loss_history.csv", "table.txt"}) {
    try {
      c.expect(io::read_bytes(runs.first / name) == io::read_bytes(runs.second / name),
               std::string(name) + " differs between runs");
    } catch (const std::exception& e) {
      c.expect(false, e.what());
    }
  }
  c.note("report.csv, loss_history.csv and table.txt byte-identical across two runs");
  return c.outcome();
}

Outcome table_ordering(const AblationRuns& runs) {
  Checker c;
  std::map<std::string, std::vector<double>> rows;
  try {
    std::istringstream csv(io::read_text(runs.first / "report.csv"));
    std::string line;
    std::getline(csv, line);
    while (std::getline(csv, line)) {
      std::istringstream fields(line);
      std::string method, v;
      std::getline(fields, method, ',');
      std::vector<double> values;
      while (std::getline(fields, v, ',')) {
        values.push_back(v.empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(v));
      }
      rows[method] = values;
    }
  } catch (const std::exception& e) {
    c.expect(false, e.what());
    return c.outcome();
  }
  const auto& lr = rows["Traditional Model"];
  const auto& hr = rows["Faster R-CNN Only"];
  const auto& both = rows["ESRGAN + Faster R-CNN"];
  if (lr.size() < 3 || hr.size() < 3 || both.size() < 3) {
    c.expect(false, "report.csv is missing rows");
    return c.outcome();
  }
  // Columns: accuracy, precision, recall, ap.
  const double recall_margin = both[2] - lr[2];
  const double accuracy_margin = both[0] - lr[0];
  c.expect(recall_margin >= kMarginPct, "recall margin " + fixed(recall_margin) + " pp");
  c.expect(accuracy_margin >= kMarginPct, "accuracy margin " + fixed(accuracy_margin) + " pp");
  c.expect(hr[2] > lr[2], "HR recall " + fixed(hr[2]) + " <= LR recall " + fixed(lr[2]));
  c.expect(runs.first_seconds <= kAblationBudgetS, "ablation took " + fixed(runs.first_seconds) + " s");
  c.note("recall SR+det " + fixed(both[2]) + " vs LR " + fixed(lr[2]) + " (+" +
         fixed(recall_margin) + " pp)");
  c.note("accuracy " + fixed(both[0]) + " vs " + fixed(lr[0]) + " (+" + fixed(accuracy_margin) +
         " pp)");
  c.note("HR recall " + fixed(hr[2]));
  c.note("ablation " + fixed(runs.first_seconds) + " s");
  return c.outcome();
}

Outcome metric_fixtures() {
  Checker c;
  eval::MatchResult m;
  m.tp = 8;
  m.fp = 2;
  m.fn = 3;
  const eval::Prf p = eval::prf_metrics(m);
  c.expect(std::abs(p.precision - 0.8) <= kPrfTolerance, "precision " + fixed(p.precision, 6));
  c.expect(std::abs(p.recall - 0.72727) <= kPrfTolerance, "recall " + fixed(p.recall, 6));
  c.expect(std::abs(p.accuracy - 0.61538) <= kPrfTolerance, "accuracy " + fixed(p.accuracy, 6));

  auto row = [](const char* e, const char* name, double a, double pr, double r) {
    return eval::ReportRow{e, name, a, pr, r, std::nullopt};
  };
  const auto report = eval::build_report({row("1", "Traditional Model", 65, 60, 55),
                                          row("2", "ESRGAN Only", 75, 72, 70),
                                          row("3", "Faster R-CNN Only", 78, 75, 73),
                                          row("4", "ESRGAN + Faster R-CNN", 89, 87, 85)});
  try {
    c.expect(eval::render_table(report) == io::read_text(testing::data_path("reference_table.txt")),
             "rendered table differs from golden");
  } catch (const std::exception& e) {
    c.expect(false, e.what());
  }
  c.note("prf(8, 2, 3) = (" + fixed(p.precision, 5) + ", " + fixed(p.recall, 5) + ", " +
         fixed(p.accuracy, 5) + ")");
  c.note("reference table matches golden byte-for-byte");
  return c.outcome();
}

Outcome training_smoke() {
  Checker c;
  const io::PipelineConfig cfg = io::load_pipeline_config(testing::source_path("configs/default.cfg"));
  io::SyntheticOptions data_opts = cfg.data.synthetic;
  data_opts.count = 8;
  std::vector<train::SrPair<float>> batch;
  for (const auto& s : io::make_synthetic_samples(data_opts)) batch.push_back({s.lr, s.hr});

  sr::Generator<float> g(cfg.sr.generator, cfg.sr.init_seed);
  sr::Discriminator<float> d(cfg.sr.discriminator, cfg.sr.init_seed + 1);
  const train::FeatureExtractor<float> phi(cfg.sr.feature_extractor);
  const double before = train::batch_perceptual_loss<float>(g, phi, batch);
  train::SrTrainer<float> trainer(g, d, phi, cfg.sr.training.weights, cfg.sr.training.adam);
  for (std::size_t i = 0; i < kSmokeSteps; ++i) trainer.train_step(batch);
  const double after = train::batch_perceptual_loss<float>(g, phi, batch);
  c.expect(after < before, "perceptual " + sci(before) + " -> " + sci(after));

  auto poisoned = batch;
  poisoned[0].lr = poisoned[0].lr.clone();
  poisoned[0].lr.mutable_data()[5] = std::numeric_limits<float>::quiet_NaN();
  std::string op;
  try {
    trainer.train_step(poisoned);
    c.expect(false, "NaN input did not abort");
  } catch (const NumericError& e) {
    op = e.op();
    c.expect(!op.empty() && std::string(e.what()).find(op) != std::string::npos,
             "NaN abort does not name the op");
  }
  c.note("perceptual " + sci(before) + " -> " + sci(after) + " after " +
         std::to_string(kSmokeSteps) + " steps");
  c.note("NaN aborts naming op '" + op + "'");
  return c.outcome();
}

}  // namespace
}  // namespace srdet::acceptance

int main() {
  using namespace srdet::acceptance;
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  AblationRuns ablation;
  bool ablation_done = false;
  auto with_ablation = [&](Outcome (*f)(const AblationRuns&)) {
    return [&, f] {
      if (!ablation_done) {
        ablation = run_ablation_twice();
        ablation_done = true;
      }
      return f(ablation);
    };
  };
  const std::vector<Criterion> criteria{
      {1, "gradient correctness", gradient_correctness},
      {2, "oracle equivalence", oracle_equivalence},
      {3, "loss fixtures", loss_fixtures},
      {4, "residual identity", residual_identity},
      {5, "serialization", serialization},
      {6, "determinism", with_ablation(determinism)},
      {7, "reference table ordering", with_ablation(table_ordering)},
      {8, "metric fixtures", metric_fixtures},
      {9, "training smoke", training_smoke},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    std::cerr << "running criterion " << c.id << " (" << c.name << ")\n";
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << c.id << " " << c.name << ": " << o.detail
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
