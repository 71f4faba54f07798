/*
 * Copyright 2026 The tabreg Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tabreg/profile.hpp"

namespace tabreg::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = false;  // points instead of a polyline
};

struct PlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 640;
  int height = 420;
  // Optional reference line y = a + b x drawn across the plot.
  bool reference_line = false;
  double reference_intercept = 0.0;
  double reference_slope = 1.0;
};

// Standalone SVG documents; output depends only on the inputs.
std::string line_plot(const std::vector<Series>& series, const PlotOptions& opt);
std::string histogram_plot(const Histogram& h, const PlotOptions& opt,
                           const Series* density_overlay = nullptr);
std::string bar_plot(const std::vector<std::string>& labels, std::span<const double> values,
                     const PlotOptions& opt);

void write(const std::filesystem::path& path, const std::string& document);

}  // namespace tabreg::svg
