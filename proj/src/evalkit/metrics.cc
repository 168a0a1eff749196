// Copyright 2026 The GRWM Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "grwm/evalkit/metrics.h"

#include <algorithm>

#include "grwm/common/errors.h"

namespace grwm::evalkit {

const char* AggregationName(Aggregation a) {
  return a == Aggregation::kMean ? "mean" : "median";
}

Aggregation ParseAggregation(const std::string& name) {
  if (name == "mean") return Aggregation::kMean;
  if (name == "median") return Aggregation::kMedian;
  throw FormatError(FormatErrorKind::kMalformed, "unknown aggregation " + name);
}

double MetricCurve::MeanOver(int first, int last) const {
  GRWM_REQUIRE(first >= 1 && first <= last && last <= horizon,
               "step range outside the curve");
  double s = 0.0;
  for (int t = first; t <= last; ++t) s += values[t - 1];
  return s / (last - first + 1);
}

std::vector<double> FramewiseMse(const std::vector<mazeworld::Frame>& pred,
                                 const std::vector<mazeworld::Frame>& truth) {
  GRWM_REQUIRE(pred.size() == truth.size(),
               "sequence lengths differ: " + std::to_string(pred.size()) +
                   " vs " + std::to_string(truth.size()));
  std::vector<double> out;
  out.reserve(pred.size());
  for (size_t t = 0; t < pred.size(); ++t) {
    const auto& a = pred[t];
    const auto& b = truth[t];
    GRWM_REQUIRE(a.height == b.height && a.width == b.width &&
                     a.rgb.size() == b.rgb.size() && !a.rgb.empty(),
                 "frame dimensions differ");
    double s = 0.0;
    for (size_t i = 0; i < a.rgb.size(); ++i) {
      const double d = (double(a.rgb[i]) - double(b.rgb[i])) / 255.0;
      s += d * d;
    }
    out.push_back(s / a.rgb.size());
  }
  return out;
}

double Median(std::vector<double> values) {
  GRWM_REQUIRE(!values.empty(), "median of nothing");
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

MetricCurve AggregateCurves(const std::vector<std::vector<double>>& episodes,
                            Aggregation mode) {
  GRWM_REQUIRE(!episodes.empty(), "no episodes");
  MetricCurve c;
  c.horizon = static_cast<int>(episodes[0].size());
  c.episodes = static_cast<int>(episodes.size());
  c.mode = mode;
  for (const auto& e : episodes) {
    GRWM_REQUIRE(static_cast<int>(e.size()) == c.horizon,
                 "episode curves differ in length");
  }
  std::vector<double> column(episodes.size());
  for (int t = 0; t < c.horizon; ++t) {
    for (size_t e = 0; e < episodes.size(); ++e) column[e] = episodes[e][t];
    if (mode == Aggregation::kMedian) {
      c.values.push_back(Median(column));
    } else {
      double s = 0.0;
      for (double v : column) s += v;
      c.values.push_back(s / column.size());
    }
  }
  return c;
}

GeometryReport MonitorGeometry(const numcore::Tensor<float>& embeddings,
                               geomloss::SlowMode mode) {
  GRWM_REQUIRE(embeddings.rank() == 3, "embeddings must be [B, L, D]");
  const numcore::Tensor<double> p = embeddings.Cast<double>();
  return {geomloss::SlowLossValue(p, mode), geomloss::UniformLossValue(p)};
}

}  // namespace grwm::evalkit
