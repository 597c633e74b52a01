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

// JSON (de)serialization of configuration structs. Private to the library.

#include <initializer_list>
#include <string>

#include "json.hpp"

#include "latn/data_io.hpp"
#include "latn/error.hpp"
#include "latn/model.hpp"
#include "latn/train.hpp"

namespace latn::detail {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

/// Throws Error(kConfig) naming `section.key` for the first key not in `allowed`.
void reject_unknown_keys(const json& object, std::initializer_list<const char*> allowed,
                         const std::string& section);

ordered_json variant_to_json(const VariantConfig& v);
VariantConfig variant_from_json(const json& j, const std::string& section);

ordered_json encoder_config_to_json(const EncoderConfig& c);
/// Unset keys keep their defaults; `dims_required` demands the dims and class count.
EncoderConfig encoder_config_from_json(const json& j, const std::string& section, bool dims_required);

ordered_json train_config_to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const json& j, const std::string& section);

ordered_json synth_config_to_json(const SynthConfig& c);
SynthConfig synth_config_from_json(const json& j, const std::string& section);

/// Reads `object[key]` into `out` when present, with a kConfig error naming
/// the field on a type mismatch.
template <class T>
void read_field(const json& object, const char* key, const std::string& section, T& out) {
  auto it = object.find(key);
  if (it == object.end()) return;
  try {
    out = it->template get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::kConfig, "config field '" + section + "." + key + "' has the wrong type");
  }
}

}  // namespace latn::detail
