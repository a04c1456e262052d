// Copyright 2026 The nzip Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nzip/weights_io.hpp"

#include <openssl/sha.h>

#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

#include "nzip/byte_io.hpp"
#include "nzip/errors.hpp"

namespace nzip {

std::vector<std::uint8_t> serialize_weights(const ParameterList& params) {
  check_unique_names(params);
  ByteWriter w;
  w.bytes(std::string_view("NZWT"));
  w.u16(kWeightFormatVersion);
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (const Parameter& p : params) {
    if (p.name.size() > 0xFFFF) throw ContractError("parameter name too long: " + p.name);
    w.u16(static_cast<std::uint16_t>(p.name.size()));
    w.bytes(p.name);
    const Shape& s = p.value.shape();
    if (s.size() > 0xFF) throw ContractError("parameter rank too large: " + p.name);
    w.u8(static_cast<std::uint8_t>(s.size()));
    for (std::size_t d : s) w.u32(static_cast<std::uint32_t>(d));
    for (double v : p.value.data()) w.f32(static_cast<float>(v));
  }
  return w.take();
}

std::vector<NamedArray> parse_weights(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (r.string(4) != "NZWT") throw DecodeError("not a weight file (bad magic)");
  const std::uint16_t version = r.u16();
  if (version != kWeightFormatVersion) {
    throw VersionError("unsupported weight file version " + std::to_string(version));
  }
  const std::uint32_t count = r.u32();
  std::vector<NamedArray> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedArray a;
    a.name = r.string(r.u16());
    const std::uint8_t rank = r.u8();
    std::size_t numel = 1;
    for (std::uint8_t d = 0; d < rank; ++d) {
      a.shape.push_back(r.u32());
      numel *= a.shape.back();
    }
    if (numel > r.remaining() / 4) throw DecodeError("weight file truncated in " + a.name);
    a.values.resize(numel);
    for (float& v : a.values) v = r.f32();
    out.push_back(std::move(a));
  }
  if (r.remaining() != 0) throw DecodeError("trailing bytes after weight records");
  return out;
}

void assign_weights(ParameterList& params, const std::vector<NamedArray>& arrays,
                    std::string_view ignore_prefix) {
  std::map<std::string, const NamedArray*> by_name;
  for (const NamedArray& a : arrays) {
    if (!by_name.emplace(a.name, &a).second) throw DecodeError("duplicate weight name " + a.name);
  }
  for (Parameter& p : params) {
    auto it = by_name.find(p.name);
    if (it == by_name.end()) throw DecodeError("weight file lacks parameter " + p.name);
    const NamedArray& a = *it->second;
    if (a.shape != p.value.shape()) {
      throw DimensionError("parameter " + p.name + " expects " + to_string(p.value.shape()) +
                           ", file has " + to_string(a.shape));
    }
    auto dst = p.value.mutable_data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = static_cast<double>(a.values[i]);
    by_name.erase(it);
  }
  for (const auto& [name, _] : by_name) {
    if (ignore_prefix.empty() || name.rfind(ignore_prefix, 0) != 0) {
      throw DecodeError("unexpected weight " + name);
    }
  }
}

ModelDigest digest_bytes(std::span<const std::uint8_t> bytes) {
  std::uint8_t full[SHA256_DIGEST_LENGTH];
  SHA256(bytes.data(), bytes.size(), full);
  ModelDigest d{};
  std::memcpy(d.data(), full, d.size());
  return d;
}

std::string to_hex(const ModelDigest& digest) {
  static const char* kHex = "0123456789abcdef";
  std::string s;
  for (std::uint8_t b : digest) {
    s.push_back(kHex[b >> 4]);
    s.push_back(kHex[b & 15]);
  }
  return s;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

CodecModel codec_from_weights(const std::vector<NamedArray>& arrays) {
  auto find = [&](const std::string& name) -> const NamedArray& {
    for (const NamedArray& a : arrays) {
      if (a.name == name) return a;
    }
    throw DecodeError("weight file lacks " + name);
  };
  CodecConfig config;
  config.hidden_channels = find("encoder.conv1.weight").shape.at(0);
  config.latent_channels = find("encoder.conv4.weight").shape.at(0);
  config.hyper_channels = find("hyper_encoder.conv1.weight").shape.at(0);
  CodecModel model(config, 0);
  ParameterList params = model.parameters();
  assign_weights(params, arrays, "head.");
  return model;
}

CodecModel load_codec(const std::filesystem::path& path) {
  return codec_from_weights(parse_weights(read_file(path)));
}

void save_codec(CodecModel& model, const std::filesystem::path& path) {
  write_file(path, serialize_weights(model.parameters()));
}

void save_bundle(CodecModel& model, TaskHead* head, const std::filesystem::path& path) {
  ParameterList params = model.parameters();
  if (head) {
    params.push_back({"head.config", head->config_tensor(), Constraint::kNone, 0.0, false});
    for (Parameter& p : head->parameters()) params.push_back(p);
  }
  write_file(path, serialize_weights(params));
}

std::unique_ptr<TaskHead> head_from_weights(const std::vector<NamedArray>& arrays) {
  const NamedArray* config = nullptr;
  std::vector<NamedArray> section;
  for (const NamedArray& a : arrays) {
    if (a.name == "head.config") config = &a;
    else if (a.name.rfind("head.", 0) == 0) section.push_back(a);
  }
  if (!config) return nullptr;
  auto head = std::make_unique<TaskHead>(TaskHead::config_from_tensor(config->values), 0);
  ParameterList params = head->parameters();
  assign_weights(params, section);
  return head;
}

}  // namespace nzip
