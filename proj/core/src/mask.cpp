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

#include "latn/mask.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

#include "latn/error.hpp"

namespace latn {
namespace {

std::size_t parse_count(const std::string& text, const std::string& whole) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
    throw Error(ErrorCode::kConfig, "mask '" + whole + "': expected a non-negative integer, got '" +
                                        text + "'");
  }
  return static_cast<std::size_t>(std::stoull(text));
}

std::size_t distance(std::size_t i, std::size_t j) { return i > j ? i - j : j - i; }

}  // namespace

MaskSpec MaskSpec::parse(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
  if (parts.empty()) throw Error(ErrorCode::kConfig, "empty mask spec");

  MaskSpec spec;
  const std::string& kind = parts[0];
  if (kind == "bd" || kind == "tp") {
    if (parts.size() != 2) throw Error(ErrorCode::kConfig, "mask '" + text + "': expected " + kind + ":W");
    spec.family = kind == "bd" ? MaskFamily::kBlockDiagonal : MaskFamily::kToeplitz;
    spec.window = parse_count(parts[1], text);
    if (spec.family == MaskFamily::kBlockDiagonal && spec.window < 1) {
      throw Error(ErrorCode::kConfig, "mask '" + text + "': block width must be >= 1");
    }
  } else if (kind == "td") {
    if (parts.size() != 3) throw Error(ErrorCode::kConfig, "mask '" + text + "': expected td:W:L");
    spec.family = MaskFamily::kToeplitzDilated;
    spec.window = parse_count(parts[1], text);
    spec.dilation = parse_count(parts[2], text);
    if (spec.dilation < 1) throw Error(ErrorCode::kConfig, "mask '" + text + "': dilation must be >= 1");
  } else {
    throw Error(ErrorCode::kConfig, "mask '" + text + "': unknown family '" + kind + "'");
  }
  return spec;
}

std::string MaskSpec::to_string() const {
  switch (family) {
    case MaskFamily::kBlockDiagonal: return "bd:" + std::to_string(window);
    case MaskFamily::kToeplitz: return "tp:" + std::to_string(window);
    case MaskFamily::kToeplitzDilated:
      return "td:" + std::to_string(window) + ":" + std::to_string(dilation);
  }
  return "?";
}

AttentionMask::AttentionMask(std::size_t size, MaskSpec spec)
    : size_(size), spec_(spec), keep_(size * size, 0) {
  if (size == 0) throw Error(ErrorCode::kInvalidArgument, "mask: frame count must be >= 1");
}

AttentionMask AttentionMask::all_keep(std::size_t size) {
  // A Toeplitz band that covers the whole matrix.
  return toeplitz_mask(size, size == 0 ? 0 : size - 1);
}

AttentionMask AttentionMask::identity(std::size_t size) { return toeplitz_mask(size, 0); }

AttentionMask AttentionMask::with_padding(std::size_t valid_len) const {
  AttentionMask out = *this;
  for (std::size_t i = 0; i < size_; ++i) {
    for (std::size_t j = 0; j < size_; ++j) {
      const bool real = i < valid_len && j < valid_len;
      out.keep_[i * size_ + j] = (i == j || (real && keep(i, j))) ? 1 : 0;
    }
  }
  return out;
}

std::size_t AttentionMask::kept_in_row(std::size_t i) const {
  return static_cast<std::size_t>(std::count(keep_.begin() + i * size_, keep_.begin() + (i + 1) * size_,
                                             std::uint8_t{1}));
}

bool AttentionMask::is_all_keep() const {
  return std::all_of(keep_.begin(), keep_.end(), [](std::uint8_t k) { return k != 0; });
}

AttentionMask block_diagonal_mask(std::size_t frames, std::size_t window) {
  if (window < 1) throw Error(ErrorCode::kInvalidArgument, "block_diagonal_mask: W must be >= 1");
  AttentionMask mask(frames, {MaskFamily::kBlockDiagonal, window, 1});
  for (std::size_t i = 0; i < frames; ++i)
    for (std::size_t j = 0; j < frames; ++j)
      mask.keep_[i * frames + j] = (i / window == j / window) ? 1 : 0;
  return mask;
}

AttentionMask toeplitz_mask(std::size_t frames, std::size_t window) {
  AttentionMask mask(frames, {MaskFamily::kToeplitz, window, 1});
  for (std::size_t i = 0; i < frames; ++i)
    for (std::size_t j = 0; j < frames; ++j)
      mask.keep_[i * frames + j] = distance(i, j) <= window ? 1 : 0;
  return mask;
}

AttentionMask toeplitz_dilated_mask(std::size_t frames, std::size_t window, std::size_t dilation) {
  if (dilation < 1) throw Error(ErrorCode::kInvalidArgument, "toeplitz_dilated_mask: L must be >= 1");
  AttentionMask mask(frames, {MaskFamily::kToeplitzDilated, window, dilation});
  for (std::size_t i = 0; i < frames; ++i) {
    for (std::size_t j = 0; j < frames; ++j) {
      const std::size_t d = distance(i, j);
      mask.keep_[i * frames + j] = (d <= window && d % dilation == 0) ? 1 : 0;
    }
  }
  return mask;
}

AttentionMask make_mask(const MaskSpec& spec, std::size_t frames) {
  switch (spec.family) {
    case MaskFamily::kBlockDiagonal: return block_diagonal_mask(frames, spec.window);
    case MaskFamily::kToeplitz: return toeplitz_mask(frames, spec.window);
    case MaskFamily::kToeplitzDilated: return toeplitz_dilated_mask(frames, spec.window, spec.dilation);
  }
  throw Error(ErrorCode::kInvalidArgument, "make_mask: unknown family");
}

std::vector<std::size_t> neighborhood(const AttentionMask& mask, std::size_t i) {
  if (i >= mask.size()) {
    throw Error(ErrorCode::kInvalidArgument, "neighborhood: frame " + std::to_string(i) +
                                                 " out of range for T=" + std::to_string(mask.size()));
  }
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < mask.size(); ++j)
    if (mask.keep(i, j)) out.push_back(j);
  return out;
}

AttentionMask padding_mask(std::size_t frames, std::size_t valid_len) {
  return AttentionMask::all_keep(frames).with_padding(valid_len);
}

}  // namespace latn
