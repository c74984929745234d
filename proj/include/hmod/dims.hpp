// Copyright 2026 The hmod Authors
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

#include <cstddef>

namespace hmod {

// Sizes that fix the parameter shapes of a model instance.
struct ModelDims {
  std::size_t nodes = 1;            // N
  std::size_t discrete_levels = 4;  // D
  std::size_t memory_dim = 128;     // d_H
  std::size_t message_dim = 128;    // d_M
  std::size_t head_hidden = 256;    // hidden width of the prediction head
  std::size_t fusion_layers = 2;    // L
  std::size_t feature_dim = 0;      // event features folded into level-0 messages
  bool continuous = true;           // level 0 present

  std::size_t level_count() const { return discrete_levels + 1; }
  std::size_t first_level() const { return continuous ? 0 : 1; }
  std::size_t active_levels() const { return level_count() - first_level(); }
};

}  // namespace hmod
