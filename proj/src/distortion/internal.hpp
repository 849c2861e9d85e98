// Copyright 2026 The weakiqa Authors
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

#pragma once

#include <array>
#include <vector>

#include "iqa/imgcore.hpp"

namespace iqa::detail {

// Greedy minimum-variance palette: repeatedly splits the cluster with the
// largest squared error at the SSE-optimal cut along its widest axis.
std::vector<std::array<double, 3>> minimum_variance_palette(const ImageBuffer& img, int colors);

// Floyd-Steinberg error diffusion onto a fixed palette.
ImageBuffer dither_to_palette(const ImageBuffer& img, const std::vector<std::array<double, 3>>& palette);

ImageBuffer median_filter(const ImageBuffer& img, int size);

// Gradient magnitude of luma (Sobel, replicate border).
std::vector<double> gradient_magnitude(const ImageBuffer& img);

}  // namespace iqa::detail
