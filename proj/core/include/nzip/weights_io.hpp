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

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nzip/codec_model.hpp"
#include "nzip/layers.hpp"
#include "nzip/task_head.hpp"

namespace nzip {

// .nzwt layout, little-endian:
//   magic "NZWT" | version u16 | count u32 |
//   count x { name_len u16 | name utf-8 | rank u8 | extents u32 x rank | f32 x numel }
inline constexpr std::uint16_t kWeightFormatVersion = 1;

struct NamedArray {
  std::string name;
  Shape shape;
  std::vector<float> values;
};

std::vector<std::uint8_t> serialize_weights(const ParameterList& params);
std::vector<NamedArray> parse_weights(std::span<const std::uint8_t> bytes);

// Copies arrays into parameters by name. Every parameter must be present with
// a matching shape; arrays whose names start with `ignore_prefix` may be
// left over (other sections of the same file).
void assign_weights(ParameterList& params, const std::vector<NamedArray>& arrays,
                    std::string_view ignore_prefix = {});

ModelDigest digest_bytes(std::span<const std::uint8_t> bytes);
std::string to_hex(const ModelDigest& digest);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

// Rebuilds a codec from parameter shapes alone.
CodecModel codec_from_weights(const std::vector<NamedArray>& arrays);
CodecModel load_codec(const std::filesystem::path& path);
void save_codec(CodecModel& model, const std::filesystem::path& path);

// Codec and, optionally, a task head in one file. The head section is every
// "head." entry; "head.config" stores the head's configuration.
void save_bundle(CodecModel& model, TaskHead* head, const std::filesystem::path& path);
// nullptr when the file has no head section.
std::unique_ptr<TaskHead> head_from_weights(const std::vector<NamedArray>& arrays);

}  // namespace nzip
