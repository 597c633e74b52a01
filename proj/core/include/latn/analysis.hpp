// Copyright 2026 The latn Authors. All Rights Reserved.
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

#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "latn/encoder.hpp"
#include "latn/mask.hpp"
#include "latn/tensor.hpp"

namespace latn {

/// Attention received per frame: mean over heads, then over query rows, of
/// each column. Sums to 1 when every map is row-stochastic.
Tensor attention_profile(std::span<const Tensor> maps);

/// Pairwise cosine similarity of the rows of X. Rows of zero norm have
/// similarity 0 with everything, themselves included.
Tensor cosine_similarity_matrix(const Tensor& x);

/// A differentiable T x D -> T x D map with its vector-Jacobian product.
struct FrameMap {
  std::function<Tensor(const Tensor&)> forward;
  /// (x, upstream) -> upstream^T dY/dX evaluated at x.
  std::function<Tensor(const Tensor&, const Tensor&)> vjp;
};

/// The modality encoder as a FrameMap at a fixed valid length.
FrameMap encoder_frame_map(const ModalityEncoder& encoder, const std::vector<EncoderBlockParams>& params,
                           std::size_t valid_len);

/// G[i][j] = Frobenius norm of the D x D Jacobian block dY[i]/dX[j], computed
/// exactly from one vector-Jacobian product per output coordinate.
Tensor gradient_matrix(const FrameMap& map, const Tensor& x);

/// Band neighborhoods { j : |i - j| <= window } for every frame.
std::vector<std::vector<std::size_t>> window_neighborhoods(std::size_t frames, std::size_t window);

/// Window to use for N_i: the first local mask's window if the variant has
/// one, otherwise ceil(T / 10).
std::size_t default_locality_window(const VariantConfig& variant, std::size_t frames);

/// S_i = a_in / (a_in + a_out), a_in and a_out the mean of G[i][j] over
/// j inside and outside N_i. Every N_i must be a non-empty proper subset.
/// When both means are zero the frame is insensitive and S_i is 0.5.
Tensor locality_statistic(const Tensor& g, const std::vector<std::vector<std::size_t>>& neighborhoods);

// Artifact writers. Output is byte-identical for identical input.

void write_csv_vector(const std::filesystem::path& path, const std::string& header, const Tensor& values);
void write_csv_matrix(const std::filesystem::path& path, const Tensor& m);
/// Binary PGM (P5) of a matrix, min -> 0 and max -> 255, with the range in
/// a sidecar `<path>.json`.
void write_pgm_heatmap(const std::filesystem::path& path, const Tensor& m);
/// Binary PGM of a mask: 255 keep, 0 forbid.
void write_mask_pgm(const std::filesystem::path& path, const AttentionMask& mask);

}  // namespace latn
