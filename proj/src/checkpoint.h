// checkpoint.h

// Copyright 2026  spkdino authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Binary checkpoints. Layout, all integers and floats little-endian:
//
//   "SPKDINO\0"  u32 version  u64 step
//   u32 len + bytes: time-delay layout ("5:1,3:2,...")
//   u32 len + bytes: resolved run config
//   u32 n  then n x (u32 len + name, u64 rows, u64 cols)
//   f64 data of every tensor in the order above, row-major
//
// Tensor names carry a group prefix: student., teacher., velocity., and the
// single tensor "center".

#ifndef SPKDINO_CHECKPOINT_H_
#define SPKDINO_CHECKPOINT_H_

#include <cstdint>
#include <optional>
#include <string>

#include "common.h"
#include "net.h"

namespace spkdino {

inline constexpr uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  int64_t step = 0;
  std::string config_text;
  ModelParams student;
  std::optional<ModelParams> teacher;
  std::optional<ModelParams> velocity;
  std::optional<Vector> center;
};

std::string SerializeCheckpoint(const Checkpoint& ckpt);
Checkpoint DeserializeCheckpoint(const std::string& bytes);

/// Writes to a temporary file and renames it into place.
void SaveCheckpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint LoadCheckpoint(const std::string& path);

}  // namespace spkdino

#endif  // SPKDINO_CHECKPOINT_H_
