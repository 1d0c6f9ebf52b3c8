// Copyright 2026 The RPG Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RPG_RANDOM_H_
#define RPG_RANDOM_H_

#include <array>
#include <cstdint>
#include <vector>

namespace rpg {

// Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy as 1, 2,
// 3", SC'11). Counter-based: every output block is a pure function of
// (counter, key), so any stream position can be regenerated without replay.
std::array<uint32_t, 4> Philox4x32(std::array<uint32_t, 4> counter,
                                   std::array<uint32_t, 2> key);

// Sequential view over a Philox counter space.
//
// The 64-bit seed is the Philox key. The 64-bit stream id occupies the upper
// half of the counter and the draw index the lower half, so streams with
// distinct ids never overlap. Every random decision in the library derives
// its stream id from a documented tag (see StreamTag) so twin runs and replays
// see identical draws.
class RandomStream {
 public:
  RandomStream(uint64_t seed, uint64_t stream);

  uint64_t NextU64();
  // Uniform on [0, 1) with 53 random bits.
  double Uniform();
  // Uniform integer on [0, n). n must be positive.
  uint64_t Below(uint64_t n);
  // Standard normal via Box-Muller (one value per call, the pair's second
  // value is cached).
  double Normal();

 private:
  void Refill();

  std::array<uint32_t, 2> key_;
  uint64_t stream_;
  uint64_t block_index_ = 0;
  std::array<uint64_t, 2> buffer_{};
  int buffered_ = 0;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

// Stream tags. The final stream id is (tag << 48) | sub-index.
enum class StreamTag : uint64_t {
  kInit = 1,
  kBatch = 2,
  kSynthetic = 3,
  kSplit = 4,
  kNoise = 5,
  kProbe = 6,
  kTest = 7,
};

uint64_t StreamId(StreamTag tag, uint64_t sub_index);

// First `count` entries of a uniformly random permutation of [0, n)
// (partial Fisher-Yates). Requires count <= n.
std::vector<std::size_t> SampleWithoutReplacement(RandomStream& rng,
                                                  std::size_t n,
                                                  std::size_t count);

}  // namespace rpg

#endif  // RPG_RANDOM_H_
