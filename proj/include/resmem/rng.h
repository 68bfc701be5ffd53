// Copyright 2026 The ResMem Authors.
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

#ifndef RESMEM_RNG_H_
#define RESMEM_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace resmem {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
inline std::uint64_t MixBits(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter-based substream: the engine for (seed, k0, k1, ...) depends only on
// those keys, never on the order in which substreams are created.
inline Rng Substream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = MixBits(seed);
  for (std::uint64_t k : keys) h = MixBits(h ^ MixBits(k));
  return Rng(h);
}

}  // namespace resmem

#endif  // RESMEM_RNG_H_
