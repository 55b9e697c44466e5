// Copyright 2026 The MIA Engine Authors
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

#ifndef MIA_RNG_H_
#define MIA_RNG_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace mia {

// Portable seeded random source.
//
// The bit generator is std::mt19937_64, whose output sequence is fixed by the
// C++ standard. The distributions are implemented here rather than taken from
// <random>, because the standard distributions are implementation-defined:
//   Uniform01: (x >> 11) * 2^-53, a double in [0, 1).
//   Normal:    Box-Muller on u1 = 1 - Uniform01() (in (0, 1]) and
//              u2 = Uniform01(); the cosine branch is returned first and the
//              sine branch is cached for the next call.
//   Below(n):  rejection sampling of x % n over the largest multiple of n.
//   Shuffle:   Fisher-Yates from the back, swapping i with Below(i + 1).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t NextU64() { return engine_(); }
  double Uniform01();
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform01(); }
  double Normal();
  double Normal(double mean, double stddev) { return mean + stddev * Normal(); }
  std::uint64_t Below(std::uint64_t n);

  template <typename T>
  void Shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(Below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// SplitMix64 finalizer.
std::uint64_t MixSeed(std::uint64_t x);

// Sub-seed for one pipeline stage: MixSeed(seed ^ MixSeed(stage)).
std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stage);

}  // namespace mia

#endif  // MIA_RNG_H_
