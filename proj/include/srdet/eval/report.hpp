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

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "srdet/eval/metrics.hpp"

namespace srdet::eval {

inline constexpr const char* kAccuracyDefinition =
    "Accuracy = TP / (TP + FP + FN), the detection Jaccard index (no true negatives exist "
    "in detection).";

// Values are percentages in [0, 100]; a missing value renders as "-" in the
// table and as an empty CSV field.
struct ReportRow {
  std::string experiment;
  std::string method;
  std::optional<double> accuracy_pct;
  std::optional<double> precision_pct;
  std::optional<double> recall_pct;
  std::optional<double> ap_pct;
};

struct MetricsReport {
  std::vector<ReportRow> rows;
  // Footer lines printed under the table after the accuracy definition.
  std::vector<std::string> notes;
};

ReportRow make_row(std::string experiment, std::string method, const Prf& prf, double ap);

// Validates names (non-empty, no commas or line breaks) and value ranges.
MetricsReport build_report(std::vector<ReportRow> rows, std::vector<std::string> notes = {});

// Fixed-width ASCII table: Experiment | Method | Accuracy (%) | Precision (%) |
// Recall (%), one decimal per value, followed by the footer.
std::string render_table(const MetricsReport& report);

// Header experiment,accuracy_pct,precision_pct,recall_pct,ap_pct; the
// experiment field carries the method name.
std::string render_csv(const MetricsReport& report);

}  // namespace srdet::eval
