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

#include "srdet/io/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>

#include "srdet/io/ppm.hpp"

namespace srdet::io {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= v.size()) {
    std::size_t end = v.find(',', pos);
    if (end == std::string::npos) end = v.size();
    out.push_back(trim(std::string_view(v).substr(pos, end - pos)));
    pos = end + 1;
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || end != v.data() + v.size() || !std::isfinite(out)) {
    throw ValidationError("config " + key + ": '" + v + "' is not a number");
  }
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || end != v.data() + v.size()) {
    throw ValidationError("config " + key + ": '" + v + "' is not a non-negative integer");
  }
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

template <typename T, typename F>
std::string join(const std::vector<T>& xs, F f) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + f(xs[i]);
  return out;
}

struct Field {
  std::string key;
  std::function<void(PipelineConfig&, const std::string&)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

template <typename Ref>
Field size_field(std::string key, Ref ref) {
  return {key,
          [key, ref](PipelineConfig& c, const std::string& v) {
            ref(c) = static_cast<std::size_t>(to_u64(key, v));
          },
          [ref](const PipelineConfig& c) {
            return std::to_string(ref(c));
          }};
}

template <typename Ref>
Field u64_field(std::string key, Ref ref) {
  return {key, [key, ref](PipelineConfig& c, const std::string& v) { ref(c) = to_u64(key, v); },
          [ref](const PipelineConfig& c) {
            return std::to_string(ref(c));
          }};
}

template <typename Ref>
Field real_field(std::string key, Ref ref) {
  return {key, [key, ref](PipelineConfig& c, const std::string& v) { ref(c) = to_double(key, v); },
          [ref](const PipelineConfig& c) { return fmt(ref(c)); }};
}

template <typename Ref>
Field sizes_field(std::string key, Ref ref) {
  return {key,
          [key, ref](PipelineConfig& c, const std::string& v) {
            std::vector<std::size_t> out;
            for (const auto& s : split_list(v)) out.push_back(static_cast<std::size_t>(to_u64(key, s)));
            ref(c) = out;
          },
          [ref](const PipelineConfig& c) {
            return join(ref(c),
                        [](std::size_t x) { return std::to_string(x); });
          }};
}

template <typename Ref>
Field reals_field(std::string key, Ref ref) {
  return {key,
          [key, ref](PipelineConfig& c, const std::string& v) {
            std::vector<double> out;
            for (const auto& s : split_list(v)) out.push_back(to_double(key, s));
            ref(c) = out;
          },
          [ref](const PipelineConfig& c) {
            return join(ref(c), [](double x) { return fmt(x); });
          }};
}

#define SRDET_REF(expr) [](auto& c) -> auto& { return c.expr; }

const std::vector<Field>& fields() {
  static const std::vector<Field> kFields = {
      size_field("data.count", SRDET_REF(data.synthetic.count)),
      size_field("data.hr_size", SRDET_REF(data.synthetic.hr_size)),
      size_field("data.scale", SRDET_REF(data.synthetic.scale)),
      size_field("data.min_objects", SRDET_REF(data.synthetic.min_objects)),
      size_field("data.max_objects", SRDET_REF(data.synthetic.max_objects)),
      size_field("data.min_extent", SRDET_REF(data.synthetic.min_extent)),
      size_field("data.max_extent", SRDET_REF(data.synthetic.max_extent)),
      u64_field("data.seed", SRDET_REF(data.synthetic.seed)),
      real_field("data.test_fraction", SRDET_REF(data.test_fraction)),
      u64_field("data.split_seed", SRDET_REF(data.split_seed)),
      Field{"data.dir", [](PipelineConfig& c, const std::string& v) { c.data.dir = v; },
            [](const PipelineConfig& c) { return c.data.dir; }},

      size_field("sr.num_rrdb", SRDET_REF(sr.generator.num_rrdb)),
      size_field("sr.base_channels", SRDET_REF(sr.generator.base_channels)),
      size_field("sr.growth_channels", SRDET_REF(sr.generator.growth_channels)),
      real_field("sr.residual_beta", SRDET_REF(sr.generator.residual_beta)),
      size_field("sr.scale", SRDET_REF(sr.generator.scale_factor)),
      u64_field("sr.init_seed", SRDET_REF(sr.init_seed)),
      Field{"sr.disc_stages",
            [](PipelineConfig& c, const std::string& v) {
              std::vector<sr::ConvStage> stages;
              for (const auto& s : split_list(v)) {
                const auto colon = s.find(':');
                if (colon == std::string::npos) {
                  throw ValidationError("config sr.disc_stages: expected channels:stride, got '" +
                                        s + "'");
                }
                stages.push_back(
                    {static_cast<std::size_t>(to_u64("sr.disc_stages", s.substr(0, colon))),
                     static_cast<std::size_t>(to_u64("sr.disc_stages", s.substr(colon + 1)))});
              }
              c.sr.discriminator.conv_stages = stages;
            },
            [](const PipelineConfig& c) {
              return join(c.sr.discriminator.conv_stages, [](const sr::ConvStage& s) {
                return std::to_string(s.out_channels) + ":" + std::to_string(s.stride);
              });
            }},
      u64_field("sr.phi_seed", SRDET_REF(sr.feature_extractor.seed)),
      real_field("sr.lambda_gan", SRDET_REF(sr.training.weights.lambda_gan)),
      real_field("sr.lambda_perceptual", SRDET_REF(sr.training.weights.lambda_perceptual)),
      real_field("sr.lambda_content", SRDET_REF(sr.training.weights.lambda_content)),
      size_field("sr.steps", SRDET_REF(sr.training.steps)),
      size_field("sr.batch_size", SRDET_REF(sr.training.batch_size)),
      u64_field("sr.seed", SRDET_REF(sr.training.seed)),
      real_field("sr.lr", SRDET_REF(sr.training.adam.lr)),

      sizes_field("det.backbone_channels", SRDET_REF(det.spec.backbone_channels)),
      size_field("det.rpn_channels", SRDET_REF(det.spec.rpn_channels)),
      reals_field("det.anchor_scales", SRDET_REF(det.spec.anchors.scales)),
      reals_field("det.aspect_ratios", SRDET_REF(det.spec.anchors.aspect_ratios)),
      size_field("det.num_classes", SRDET_REF(det.spec.num_classes)),
      size_field("det.pool_size", SRDET_REF(det.spec.pool_size)),
      size_field("det.fc_dim", SRDET_REF(det.spec.fc_dim)),
      u64_field("det.init_seed", SRDET_REF(det.init_seed)),
      Field{"det.class_names",
            [](PipelineConfig& c, const std::string& v) { c.det.class_names = split_list(v); },
            [](const PipelineConfig& c) {
              return join(c.det.class_names, [](const std::string& s) { return s; });
            }},
      real_field("det.score_threshold", SRDET_REF(det.detect.score_threshold)),
      real_field("det.nms_iou", SRDET_REF(det.detect.nms_iou)),
      size_field("det.max_detections", SRDET_REF(det.detect.max_detections)),
      size_field("det.pre_nms_k", SRDET_REF(det.detect.proposals.pre_nms_k)),
      size_field("det.post_nms_k", SRDET_REF(det.detect.proposals.post_nms_k)),
      real_field("det.proposal_nms_iou", SRDET_REF(det.detect.proposals.nms_iou)),
      real_field("det.min_size", SRDET_REF(det.detect.proposals.min_size)),
      size_field("det.steps", SRDET_REF(det.training.steps)),
      size_field("det.batch_size", SRDET_REF(det.training.batch_size)),
      u64_field("det.seed", SRDET_REF(det.training.seed)),
      real_field("det.lr", SRDET_REF(det.training.adam.lr)),
      real_field("det.rpn_positive_iou", SRDET_REF(det.training.rpn_positive_iou)),
      real_field("det.rpn_negative_iou", SRDET_REF(det.training.rpn_negative_iou)),
      size_field("det.rpn_batch", SRDET_REF(det.training.rpn_batch)),
      real_field("det.rpn_positive_fraction", SRDET_REF(det.training.rpn_positive_fraction)),
      real_field("det.roi_foreground_iou", SRDET_REF(det.training.roi_foreground_iou)),
      size_field("det.roi_batch", SRDET_REF(det.training.roi_batch)),
      real_field("det.roi_foreground_fraction", SRDET_REF(det.training.roi_foreground_fraction)),
      size_field("det.train_pre_nms_k", SRDET_REF(det.training.proposals.pre_nms_k)),
      size_field("det.train_post_nms_k", SRDET_REF(det.training.proposals.post_nms_k)),

      real_field("eval.iou_threshold", SRDET_REF(eval.iou_threshold)),
  };
  return kFields;
}

#undef SRDET_REF

}  // namespace

std::map<std::string, std::string> parse_key_values(std::string_view text) {
  std::map<std::string, std::string> out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    ++line_no;
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    const std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const std::size_t eq = body.find('=');
    const std::string where = "config line " + std::to_string(line_no);
    if (eq == std::string::npos) throw ValidationError(where + ": expected 'section.key = value'");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.find('.') == std::string::npos || key.front() == '.' || key.back() == '.') {
      throw ValidationError(where + ": key '" + key + "' is not of the form section.key");
    }
    if (!out.emplace(key, value).second) {
      throw ValidationError(where + ": duplicate key '" + key + "'");
    }
  }
  return out;
}

void PipelineConfig::validate() const {
  data.synthetic.validate();
  if (!(data.test_fraction > 0.0 && data.test_fraction < 1.0)) {
    throw ValidationError("config data.test_fraction must be in (0, 1)");
  }
  if (!data.dir.empty() && !std::filesystem::exists(std::filesystem::path(data.dir) / "manifest.tsv")) {
    throw ValidationError("config data.dir: no manifest.tsv under '" + data.dir + "'");
  }
  sr.generator.validate();
  if (sr.generator.scale_factor != data.synthetic.scale) {
    throw ValidationError("config sr.scale (" + std::to_string(sr.generator.scale_factor) +
                          ") must equal data.scale (" + std::to_string(data.synthetic.scale) + ")");
  }
  sr.discriminator.validate();
  if (sr.discriminator.min_input_extent() > data.synthetic.hr_size) {
    throw ValidationError("config sr.disc_stages downsample more than data.hr_size allows");
  }
  sr.feature_extractor.validate();
  sr.training.weights.validate();
  if (sr.training.batch_size == 0) throw ValidationError("config sr.batch_size must be positive");
  if (!(sr.training.adam.lr > 0.0)) throw ValidationError("config sr.lr must be positive");
  det.spec.validate();
  det.detect.validate();
  det.training.validate();
  if (!(det.training.adam.lr > 0.0)) throw ValidationError("config det.lr must be positive");
  if (det.class_names.size() != det.spec.num_classes) {
    throw ValidationError("config det.class_names lists " + std::to_string(det.class_names.size()) +
                          " names for " + std::to_string(det.spec.num_classes) + " classes");
  }
  for (const auto& n : det.class_names) {
    if (n.empty()) throw ValidationError("config det.class_names contains an empty name");
  }
  if (!(eval.iou_threshold > 0.0 && eval.iou_threshold <= 1.0)) {
    throw ValidationError("config eval.iou_threshold must be in (0, 1]");
  }
}

PipelineConfig parse_pipeline_config(std::string_view text) {
  PipelineConfig cfg;
  for (const auto& [key, value] : parse_key_values(text)) {
    const Field* field = nullptr;
    for (const auto& f : fields()) {
      if (f.key == key) field = &f;
    }
    if (field == nullptr) throw ValidationError("unknown config key '" + key + "'");
    field->set(cfg, value);
  }
  cfg.det.spec.anchors.feature_stride = cfg.det.spec.feature_stride();
  cfg.validate();
  return cfg;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  return parse_pipeline_config(read_text(path));
}

std::string format_pipeline_config(const PipelineConfig& cfg) {
  std::string out;
  for (const auto& f : fields()) out += f.key + " = " + f.get(cfg) + "\n";
  return out;
}

}  // namespace srdet::io
