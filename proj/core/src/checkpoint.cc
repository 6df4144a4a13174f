/* Copyright 2026 The Radcam Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "radcam/checkpoint.h"

#include <bit>
#include <cstdint>

#include <nlohmann/json.hpp>
#include "radcam/io.h"

namespace radcam {

using nlohmann::json;

void SaveCheckpoint(const std::filesystem::path& path, const ParamList& params,
                    const std::string& config_hash) {
  json manifest;
  manifest["format"] = "radcam-checkpoint-1";
  manifest["config_hash"] = config_hash;
  manifest["blob"] = path.filename().string() + ".bin";
  manifest["entries"] = json::array();
  std::string blob;
  for (const auto& [name, tensor] : params) {
    manifest["entries"].push_back(
        {{"name", name}, {"shape", tensor->shape()}, {"offset", blob.size()}});
    for (double v : tensor->data()) {
      const auto bits = std::bit_cast<std::uint64_t>(v);
      for (int b = 0; b < 8; ++b) blob.push_back(static_cast<char>(bits >> (8 * b)));
    }
  }
  manifest["total_bytes"] = blob.size();
  WriteFile(path.string() + ".bin", blob);
  WriteFile(path, manifest.dump(1));
}

std::string LoadCheckpoint(const std::filesystem::path& path, const ParamList& params) {
  json manifest;
  try {
    manifest = json::parse(ReadFile(path));
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  const std::filesystem::path blob_path = path.parent_path() / manifest.value("blob", "");
  const std::string blob = ReadFile(blob_path);

  struct Entry {
    Shape shape;
    std::size_t offset;
  };
  std::map<std::string, Entry> entries;
  try {
    for (const json& e : manifest.at("entries")) {
      entries[e.at("name").get<std::string>()] =
          Entry{e.at("shape").get<Shape>(), e.at("offset").get<std::size_t>()};
    }
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": malformed manifest: " + e.what());
  }

  for (const auto& [name, tensor] : params) {
    auto it = entries.find(name);
    if (it == entries.end()) {
      throw ConfigError("checkpoint " + path.string() + " has no entry '" + name +
                        "' required by the config");
    }
    if (it->second.shape != tensor->shape()) {
      throw ConfigError("checkpoint entry '" + name + "' has shape " +
                        ShapeString(it->second.shape) + ", config expects " +
                        ShapeString(tensor->shape()));
    }
    const std::size_t bytes = tensor->size() * 8;
    if (it->second.offset + bytes > blob.size()) {
      throw DataError("checkpoint entry '" + name + "' runs past the end of " +
                      blob_path.string());
    }
    auto out = tensor->mutable_data();
    for (std::size_t i = 0; i < tensor->size(); ++i) {
      std::uint64_t bits = 0;
      for (int b = 0; b < 8; ++b) {
        bits |= static_cast<std::uint64_t>(
                    static_cast<unsigned char>(blob[it->second.offset + 8 * i + b]))
                << (8 * b);
      }
      out[i] = std::bit_cast<double>(bits);
    }
  }
  return manifest.value("config_hash", "");
}

}  // namespace radcam
