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

#include "latn/checkpoint.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "config_json.hpp"
#include "latn/error.hpp"

namespace latn {
namespace fs = std::filesystem;

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

class Reader {
 public:
  Reader(std::string bytes, std::string origin) : bytes_(std::move(bytes)), origin_(std::move(origin)) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::string text(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  float f32() {
    need(4);
    float f;
    std::memcpy(&f, bytes_.data() + pos_, 4);
    pos_ += 4;
    return f;
  }
  bool at_end() const { return pos_ == bytes_.size(); }
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::kFormat, origin_ + ": " + what + " (offset " + std::to_string(pos_) + ")");
  }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) fail("truncated checkpoint");
  }
  std::string bytes_;
  std::string origin_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encoder_config_to_json(const EncoderConfig& config) {
  return detail::encoder_config_to_json(config).dump();
}

EncoderConfig encoder_config_from_json(const std::string& text) {
  try {
    return detail::encoder_config_from_json(detail::json::parse(text), "model", true);
  } catch (const detail::json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("malformed model config: ") + e.what());
  }
}

void write_checkpoint(const fs::path& path, const EncoderConfig& config, const ModelParams& params) {
  std::string bytes(kCheckpointMagic, 4);
  put_u32(bytes, kCheckpointVersion);
  const std::string blob = encoder_config_to_json(config);
  put_u32(bytes, static_cast<std::uint32_t>(blob.size()));
  bytes += blob;
  std::uint32_t count = 0;
  params.for_each([&count](const std::string&, const Tensor&) { ++count; });
  put_u32(bytes, count);
  params.for_each([&bytes](const std::string& name, const Tensor& t) {
    put_u32(bytes, static_cast<std::uint32_t>(name.size()));
    bytes += name;
    put_u32(bytes, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) put_u32(bytes, static_cast<std::uint32_t>(d));
    for (double v : t.data()) {
      const float f = static_cast<float>(v);
      char raw[4];
      std::memcpy(raw, &f, 4);
      bytes.append(raw, 4);
    }
  });
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write checkpoint " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "short write to checkpoint " + path.string());
}

Checkpoint read_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  Reader r(ss.str(), path.string());

  if (r.text(4) != std::string(kCheckpointMagic, 4)) r.fail("bad magic bytes");
  if (const std::uint32_t version = r.u32(); version != kCheckpointVersion) {
    r.fail("unsupported version " + std::to_string(version));
  }
  Checkpoint ckpt;
  const std::uint32_t blob_len = r.u32();
  try {
    ckpt.config = encoder_config_from_json(r.text(blob_len));
  } catch (const Error& e) {
    r.fail(e.what());
  }
  const VideoClassifier model(ckpt.config);
  Rng rng(0);
  ckpt.params = model.init_params(rng);

  std::uint32_t expected = 0;
  ckpt.params.for_each([&expected](const std::string&, const Tensor&) { ++expected; });
  if (const std::uint32_t count = r.u32(); count != expected) {
    r.fail("holds " + std::to_string(count) + " tensors, config implies " + std::to_string(expected));
  }
  ckpt.params.for_each([&r](const std::string& name, Tensor& t) {
    const std::string stored = r.text(r.u32());
    if (stored != name) r.fail("expected tensor '" + name + "', found '" + stored + "'");
    const std::uint32_t rank = r.u32();
    std::vector<std::size_t> shape;
    for (std::uint32_t k = 0; k < rank && k < 4; ++k) shape.push_back(r.u32());
    if (shape != t.shape()) r.fail("tensor '" + name + "' has shape " + shape_string(shape));
    for (double& v : t.data()) {
      const float f = r.f32();
      if (!std::isfinite(f)) r.fail("tensor '" + name + "' holds a non-finite value");
      v = f;
    }
  });
  if (!r.at_end()) r.fail("trailing bytes after last tensor");
  return ckpt;
}

}  // namespace latn
