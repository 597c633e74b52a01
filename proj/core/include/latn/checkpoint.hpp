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

#include <cstdint>
#include <filesystem>
#include <string>

#include "latn/model.hpp"

namespace latn {

inline constexpr char kCheckpointMagic[4] = {'L', 'A', 'T', 'N'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  EncoderConfig config;
  ModelParams params;
};

// Layout, all integers little-endian u32:
//   "LATN" | version | config length | config JSON bytes
//   | tensor count | per tensor: name length | name | rank | dims... | f32 data
// Parameters are stored as f32, so loading rounds them to single precision.

void write_checkpoint(const std::filesystem::path& path, const EncoderConfig& config, const ModelParams& params);
/// Throws Error(kIo) if the file cannot be opened and Error(kFormat) on any
/// structural problem, including a parameter set that does not match the config.
Checkpoint read_checkpoint(const std::filesystem::path& path);

std::string encoder_config_to_json(const EncoderConfig& config);
EncoderConfig encoder_config_from_json(const std::string& text);

}  // namespace latn
