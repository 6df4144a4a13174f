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

// Checkpoints: a JSON manifest naming every tensor with its shape and byte
// offset into a sibling blob of little-endian fp64 values.

#ifndef RADCAM_CHECKPOINT_H_
#define RADCAM_CHECKPOINT_H_

#include <filesystem>
#include <string>

#include "radcam/mlp.h"

namespace radcam {

// Writes `path` (manifest) and `path` + ".bin" (values).
void SaveCheckpoint(const std::filesystem::path& path, const ParamList& params,
                    const std::string& config_hash);

// Fills every tensor of `params` from the checkpoint. A missing or
// differently shaped entry throws ConfigError naming the entry; entries the
// config does not use are ignored, so a full model can run with stages
// switched off. Unreadable or truncated files throw DataError. Returns the
// stored config hash.
std::string LoadCheckpoint(const std::filesystem::path& path, const ParamList& params);

}  // namespace radcam

#endif  // RADCAM_CHECKPOINT_H_
