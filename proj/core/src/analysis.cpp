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

#include "latn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"

#include "latn/error.hpp"

namespace latn {
namespace fs = std::filesystem;

Tensor attention_profile(std::span<const Tensor> maps) {
  if (maps.empty()) throw Error(ErrorCode::kInvalidArgument, "attention_profile: no maps");
  const std::size_t t = maps.front().rows();
  Tensor profile({t});
  for (const Tensor& m : maps) {
    if (m.rank() != 2 || m.rows() != t || m.cols() != t) {
      throw Error(ErrorCode::kShape, "attention_profile: maps must all be T x T");
    }
    for (std::size_t i = 0; i < t; ++i)
      for (std::size_t j = 0; j < t; ++j) profile[j] += m(i, j);
  }
  profile *= 1.0 / static_cast<double>(maps.size() * t);
  return profile;
}

Tensor cosine_similarity_matrix(const Tensor& x) {
  if (x.rank() != 2) throw Error(ErrorCode::kShape, "cosine_similarity_matrix: X must be a matrix");
  const std::size_t t = x.rows();
  std::vector<double> norms(t);
  for (std::size_t i = 0; i < t; ++i) {
    double acc = 0.0;
    for (double v : x.row(i)) acc += v * v;
    norms[i] = std::sqrt(acc);
  }
  const Tensor dots = matmul_a_bt(x, x);
  Tensor sim({t, t});
  for (std::size_t i = 0; i < t; ++i) {
    for (std::size_t j = i; j < t; ++j) {
      const double denom = norms[i] * norms[j];
      const double s = denom > 0.0 ? dots(i, j) / denom : 0.0;
      sim(i, j) = s;
      sim(j, i) = s;
    }
  }
  return sim;
}

FrameMap encoder_frame_map(const ModalityEncoder& encoder, const std::vector<EncoderBlockParams>& params,
                           std::size_t valid_len) {
  FrameMap map;
  map.forward = [&encoder, &params, valid_len](const Tensor& x) { return encoder.forward(params, x, valid_len); };
  map.vjp = [&encoder, &params, valid_len](const Tensor& x, const Tensor& upstream) {
    ModalityEncoder::Cache cache;
    encoder.forward(params, x, valid_len, &cache);
    std::vector<EncoderBlockParams> grads;
    for (const EncoderBlockParams& p : params) grads.push_back(p.zeros_like());
    return encoder.backward(params, cache, upstream, grads);
  };
  return map;
}

Tensor gradient_matrix(const FrameMap& map, const Tensor& x) {
  if (x.rank() != 2) throw Error(ErrorCode::kShape, "gradient_matrix: X must be a matrix");
  const std::size_t t = x.rows(), d = x.cols();
  const Tensor y = map.forward(x);
  if (y.rank() != 2 || y.rows() != t) throw Error(ErrorCode::kShape, "gradient_matrix: output rows differ from input");
  const std::size_t out_dim = y.cols();
  Tensor squares({t, t});
  Tensor upstream({t, out_dim});
  for (std::size_t i = 0; i < t; ++i) {
    for (std::size_t a = 0; a < out_dim; ++a) {
      upstream(i, a) = 1.0;
      const Tensor row_grad = map.vjp(x, upstream);  // dY[i][a] / dX
      upstream(i, a) = 0.0;
      for (std::size_t j = 0; j < t; ++j)
        for (std::size_t b = 0; b < d; ++b) squares(i, j) += row_grad(j, b) * row_grad(j, b);
    }
  }
  for (double& v : squares.data()) v = std::sqrt(v);
  return squares;
}

std::vector<std::vector<std::size_t>> window_neighborhoods(std::size_t frames, std::size_t window) {
  const AttentionMask band = toeplitz_mask(frames, window);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < frames; ++i) out.push_back(neighborhood(band, i));
  return out;
}

std::size_t default_locality_window(const VariantConfig& variant, std::size_t frames) {
  if (!variant.masks.empty()) return variant.masks.front().window;
  return (frames + 9) / 10;
}

Tensor locality_statistic(const Tensor& g, const std::vector<std::vector<std::size_t>>& neighborhoods) {
  if (g.rank() != 2 || g.rows() != g.cols()) throw Error(ErrorCode::kShape, "locality_statistic: G must be T x T");
  const std::size_t t = g.rows();
  if (neighborhoods.size() != t) throw Error(ErrorCode::kShape, "locality_statistic: need one neighborhood per frame");
  Tensor s({t});
  std::vector<bool> inside(t);
  for (std::size_t i = 0; i < t; ++i) {
    std::fill(inside.begin(), inside.end(), false);
    for (std::size_t j : neighborhoods[i]) {
      if (j >= t) throw Error(ErrorCode::kInvalidArgument, "locality_statistic: neighbor index out of range");
      inside[j] = true;
    }
    const auto n_in = static_cast<std::size_t>(std::count(inside.begin(), inside.end(), true));
    if (n_in == 0 || n_in == t) {
      throw Error(ErrorCode::kInvalidArgument, "locality_statistic: N_" + std::to_string(i) +
                                                   " must be a non-empty proper subset of the frames");
    }
    double sum_in = 0.0, sum_out = 0.0;
    for (std::size_t j = 0; j < t; ++j) (inside[j] ? sum_in : sum_out) += g(i, j);
    const double avg_in = sum_in / static_cast<double>(n_in);
    const double avg_out = sum_out / static_cast<double>(t - n_in);
    s[i] = (avg_in + avg_out) > 0.0 ? avg_in / (avg_in + avg_out) : 0.5;
  }
  return s;
}

namespace {

std::ofstream open_out(const fs::path& path, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  return out;
}

// Round-trippable and locale-independent.
std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_pgm(const fs::path& path, std::size_t rows, std::size_t cols, const std::vector<unsigned char>& pixels) {
  std::ofstream out = open_out(path, true);
  out << "P5\n" << cols << ' ' << rows << "\n255\n";
  out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
}

}  // namespace

void write_csv_vector(const fs::path& path, const std::string& header, const Tensor& values) {
  std::ofstream out = open_out(path, false);
  out << "index," << header << '\n';
  for (std::size_t i = 0; i < values.size(); ++i) out << i << ',' << format_double(values[i]) << '\n';
}

void write_csv_matrix(const fs::path& path, const Tensor& m) {
  if (m.rank() != 2) throw Error(ErrorCode::kShape, "write_csv_matrix: expected a matrix");
  std::ofstream out = open_out(path, false);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_double(m(i, j));
    out << '\n';
  }
}

void write_pgm_heatmap(const fs::path& path, const Tensor& m) {
  if (m.rank() != 2 || m.empty()) throw Error(ErrorCode::kShape, "write_pgm_heatmap: expected a non-empty matrix");
  const auto [lo_it, hi_it] = std::minmax_element(m.data().begin(), m.data().end());
  const double lo = *lo_it, hi = *hi_it;
  std::vector<unsigned char> pixels(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double unit = hi > lo ? (m[i] - lo) / (hi - lo) : 0.0;
    pixels[i] = static_cast<unsigned char>(std::lround(unit * 255.0));
  }
  write_pgm(path, m.rows(), m.cols(), pixels);
  nlohmann::ordered_json side;
  side["min"] = lo;
  side["max"] = hi;
  side["rows"] = m.rows();
  side["cols"] = m.cols();
  std::ofstream meta = open_out(fs::path(path.string() + ".json"), false);
  meta << side.dump(2) << '\n';
}

void write_mask_pgm(const fs::path& path, const AttentionMask& mask) {
  const std::size_t t = mask.size();
  std::vector<unsigned char> pixels(t * t);
  for (std::size_t i = 0; i < t; ++i)
    for (std::size_t j = 0; j < t; ++j) pixels[i * t + j] = mask.keep(i, j) ? 255 : 0;
  write_pgm(path, t, t, pixels);
}

}  // namespace latn
