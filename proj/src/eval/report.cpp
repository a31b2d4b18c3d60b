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

#include "srdet/eval/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "srdet/core/errors.hpp"

namespace srdet::eval {
namespace {

std::string fmt_pct(const std::optional<double>& v) {
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", *v);
  return buf;
}

void check_name(const std::string& s, const char* what) {
  if (s.empty()) throw ValidationError(std::string("report: empty ") + what + " name");
  if (s.find_first_of(",\n\r") != std::string::npos) {
    throw ValidationError(std::string("report: ") + what + " name '" + s +
                          "' contains a comma or line break");
  }
}

void check_value(const std::optional<double>& v, const std::string& row) {
  if (v && !(*v >= 0.0 && *v <= 100.0)) {
    throw ValidationError("report: value for '" + row + "' outside [0, 100]");
  }
}

std::string pad(const std::string& s, std::size_t width, bool right) {
  const std::string fill(width - std::min(width, s.size()), ' ');
  return right ? fill + s : s + fill;
}

}  // namespace

ReportRow make_row(std::string experiment, std::string method, const Prf& prf, double ap) {
  return {std::move(experiment), std::move(method), 100.0 * prf.accuracy, 100.0 * prf.precision,
          100.0 * prf.recall, 100.0 * ap};
}

MetricsReport build_report(std::vector<ReportRow> rows, std::vector<std::string> notes) {
  if (rows.empty()) throw ValidationError("report: no rows");
  for (const auto& r : rows) {
    check_name(r.experiment, "experiment");
    check_name(r.method, "method");
    for (const auto* v : {&r.accuracy_pct, &r.precision_pct, &r.recall_pct, &r.ap_pct}) {
      check_value(*v, r.method);
    }
  }
  return {std::move(rows), std::move(notes)};
}

std::string render_table(const MetricsReport& report) {
  constexpr std::size_t kCols = 5;
  const std::array<std::string, kCols> header{"Experiment", "Method", "Accuracy (%)",
                                              "Precision (%)", "Recall (%)"};
  std::vector<std::array<std::string, kCols>> cells;
  for (const auto& r : report.rows) {
    auto cell = [](const std::optional<double>& v) { return v ? fmt_pct(v) : std::string("-"); };
    cells.push_back({r.experiment, r.method, cell(r.accuracy_pct), cell(r.precision_pct),
                     cell(r.recall_pct)});
  }
  std::array<std::size_t, kCols> width{};
  for (std::size_t c = 0; c < kCols; ++c) {
    width[c] = header[c].size();
    for (const auto& row : cells) width[c] = std::max(width[c], row[c].size());
  }
  std::string rule = "+";
  for (std::size_t w : width) rule += std::string(w + 2, '-') + "+";
  rule += "\n";

  auto line = [&](const std::array<std::string, kCols>& row, bool numeric_right) {
    std::string s = "|";
    for (std::size_t c = 0; c < kCols; ++c) {
      s += " " + pad(row[c], width[c], numeric_right && c >= 2) + " |";
    }
    return s + "\n";
  };

  std::string out = rule + line(header, false) + rule;
  for (const auto& row : cells) out += line(row, true);
  out += rule;
  out += kAccuracyDefinition;
  out += "\n";
  for (const auto& n : report.notes) out += n + "\n";
  return out;
}

std::string render_csv(const MetricsReport& report) {
  std::string out = "experiment,accuracy_pct,precision_pct,recall_pct,ap_pct\n";
  for (const auto& r : report.rows) {
    out += r.method + "," + fmt_pct(r.accuracy_pct) + "," + fmt_pct(r.precision_pct) + "," +
           fmt_pct(r.recall_pct) + "," + fmt_pct(r.ap_pct) + "\n";
  }
  return out;
}

}  // namespace srdet::eval
