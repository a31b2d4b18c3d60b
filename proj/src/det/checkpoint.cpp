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

#include "srdet/det/checkpoint.hpp"

#include <cmath>
#include <string>

namespace srdet::det {
namespace {

using sr::CheckpointError;
using sr::CheckpointErrorKind;

class MetaReader {
 public:
  explicit MetaReader(const std::vector<float>& data) : data_(data) {}

  float next(const char* field) {
    if (pos_ >= data_.size()) {
      throw CheckpointError(CheckpointErrorKind::kMalformed,
                            std::string("meta.detector ends before ") + field);
    }
    return data_[pos_++];
  }

  std::size_t count(const char* field) {
    const float v = next(field);
    if (!(v >= 0.0f) || v != std::floor(v) || v > 1e6f) {
      throw CheckpointError(CheckpointErrorKind::kMalformed,
                            std::string("bad value for ") + field + " in meta.detector");
    }
    return static_cast<std::size_t>(v);
  }

  bool done() const { return pos_ == data_.size(); }

 private:
  const std::vector<float>& data_;
  std::size_t pos_ = 0;
};

// Anchor geometry is stored in float, so compare against the stored rounding.
DetectorSpec rounded(DetectorSpec spec) {
  for (double& s : spec.anchors.scales) s = static_cast<float>(s);
  for (double& r : spec.anchors.aspect_ratios) r = static_cast<float>(r);
  return spec;
}

}  // namespace

sr::CheckpointTensor detector_meta(const DetectorSpec& spec) {
  sr::CheckpointTensor m{"meta.detector", {}, {}};
  auto push = [&](double v) { m.data.push_back(static_cast<float>(v)); };
  push(static_cast<double>(spec.input_channels));
  push(static_cast<double>(spec.backbone_channels.size()));
  for (std::size_t c : spec.backbone_channels) push(static_cast<double>(c));
  push(static_cast<double>(spec.rpn_channels));
  push(static_cast<double>(spec.anchors.scales.size()));
  for (double s : spec.anchors.scales) push(s);
  push(static_cast<double>(spec.anchors.aspect_ratios.size()));
  for (double r : spec.anchors.aspect_ratios) push(r);
  push(static_cast<double>(spec.anchors.feature_stride));
  push(static_cast<double>(spec.num_classes));
  push(static_cast<double>(spec.pool_size));
  push(static_cast<double>(spec.fc_dim));
  m.shape = {m.data.size()};
  return m;
}

DetectorSpec detector_spec_from(const std::vector<sr::CheckpointTensor>& entries) {
  const sr::CheckpointTensor& m = sr::find_tensor(entries, "meta.detector");
  MetaReader r(m.data);
  DetectorSpec spec;
  spec.input_channels = r.count("input_channels");
  spec.backbone_channels.assign(r.count("backbone stage count"), 0);
  for (std::size_t& c : spec.backbone_channels) c = r.count("backbone channels");
  spec.rpn_channels = r.count("rpn_channels");
  spec.anchors.scales.assign(r.count("anchor scale count"), 0.0);
  for (double& s : spec.anchors.scales) s = r.next("anchor scale");
  spec.anchors.aspect_ratios.assign(r.count("aspect ratio count"), 0.0);
  for (double& a : spec.anchors.aspect_ratios) a = r.next("aspect ratio");
  spec.anchors.feature_stride = r.count("feature_stride");
  spec.num_classes = r.count("num_classes");
  spec.pool_size = r.count("pool_size");
  spec.fc_dim = r.count("fc_dim");
  if (!r.done()) {
    throw CheckpointError(CheckpointErrorKind::kMalformed, "meta.detector has trailing values");
  }
  return spec;
}

void save_checkpoint(const Detector<float>& net, const std::filesystem::path& path) {
  const sr::CheckpointTensor meta = detector_meta(net.spec());
  sr::write_checkpoint_file(path, sr::to_checkpoint(net.parameters(), &meta));
}

void load_checkpoint(Detector<float>& net, const std::filesystem::path& path) {
  const auto entries = sr::read_checkpoint_file(path);
  if (!(detector_spec_from(entries) == rounded(net.spec()))) {
    throw CheckpointError(CheckpointErrorKind::kSpecMismatch,
                          path.string() + " was written by a different detector spec");
  }
  sr::assign_parameters(net.parameters(), entries);
}

Detector<float> load_detector(const std::filesystem::path& path) {
  const auto entries = sr::read_checkpoint_file(path);
  const DetectorSpec spec = detector_spec_from(entries);
  try {
    spec.validate();
  } catch (const ValidationError& e) {
    throw CheckpointError(CheckpointErrorKind::kMalformed, e.what());
  }
  Detector<float> net(spec, 0);
  sr::assign_parameters(net.parameters(), entries);
  return net;
}

}  // namespace srdet::det
