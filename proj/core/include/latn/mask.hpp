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
#include <cstdint>
#include <string>
#include <vector>

namespace latn {

enum class MaskFamily { kBlockDiagonal, kToeplitz, kToeplitzDilated };

/// Family plus window/dilation, independent of sequence length. Parses and
/// prints the `bd:W`, `tp:W`, `td:W:L` grammar.
struct MaskSpec {
  MaskFamily family = MaskFamily::kToeplitz;
  std::size_t window = 1;
  std::size_t dilation = 1;  // only meaningful for kToeplitzDilated

  static MaskSpec parse(const std::string& text);
  std::string to_string() const;

  friend bool operator==(const MaskSpec&, const MaskSpec&) = default;
};

/// T x T keep/forbid pattern for local attention. The diagonal is always
/// kept and the pattern is symmetric for every family.
class AttentionMask {
 public:
  /// Everything kept; not tied to a family.
  static AttentionMask all_keep(std::size_t size);
  static AttentionMask identity(std::size_t size);

  std::size_t size() const noexcept { return size_; }
  bool keep(std::size_t i, std::size_t j) const { return keep_[i * size_ + j] != 0; }
  MaskFamily family() const noexcept { return spec_.family; }
  const MaskSpec& spec() const noexcept { return spec_; }
  std::size_t window() const noexcept { return spec_.window; }
  std::size_t dilation() const noexcept { return spec_.dilation; }

  /// Row i restricted to keys j < valid_len; padded rows keep only themselves
  /// in addition, so no row is ever empty.
  AttentionMask with_padding(std::size_t valid_len) const;

  std::size_t kept_in_row(std::size_t i) const;
  bool is_all_keep() const;

  friend bool operator==(const AttentionMask& a, const AttentionMask& b) {
    return a.size_ == b.size_ && a.keep_ == b.keep_;
  }

 private:
  friend AttentionMask block_diagonal_mask(std::size_t, std::size_t);
  friend AttentionMask toeplitz_mask(std::size_t, std::size_t);
  friend AttentionMask toeplitz_dilated_mask(std::size_t, std::size_t, std::size_t);

  AttentionMask(std::size_t size, MaskSpec spec);

  std::size_t size_ = 0;
  MaskSpec spec_;
  std::vector<std::uint8_t> keep_;
};

/// keep[i][j] iff i / W == j / W; the last block is short when W does not
/// divide T. Requires 1 <= W.
AttentionMask block_diagonal_mask(std::size_t frames, std::size_t window);

/// keep[i][j] iff |i - j| <= W.
AttentionMask toeplitz_mask(std::size_t frames, std::size_t window);

/// keep[i][j] iff |i - j| <= W and (j - i) is a multiple of L. Offsets are
/// counted from the reference frame i. Requires L >= 1.
AttentionMask toeplitz_dilated_mask(std::size_t frames, std::size_t window, std::size_t dilation);

AttentionMask make_mask(const MaskSpec& spec, std::size_t frames);

/// { j : keep[i][j] } in ascending order.
std::vector<std::size_t> neighborhood(const AttentionMask& mask, std::size_t i);

/// Row mask for a sequence of `frames` with only the first `valid_len` real.
AttentionMask padding_mask(std::size_t frames, std::size_t valid_len);

}  // namespace latn
