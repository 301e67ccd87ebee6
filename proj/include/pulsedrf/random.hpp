// Copyright 2026 The pulsedrf Authors
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

// Seed-stable random streams. Work is cut into fixed-size blocks and every
// (seed, block, stream) triple owns an independent engine, so results do not
// depend on how blocks are distributed across workers.

#include <cstdint>
#include <random>

namespace pulsedrf {

inline constexpr std::uint64_t kBlockSize = 4096;

enum class Stream : std::uint32_t {
  emission = 1,
  paths = 2,
  detection = 3,
  noise = 4,
  shots = 5,
};

inline std::mt19937_64 block_engine(std::uint64_t seed, std::uint64_t block, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

inline std::uint64_t block_count(std::uint64_t items) { return (items + kBlockSize - 1) / kBlockSize; }

}  // namespace pulsedrf
