// Copyright 2026 The mhamcl Authors
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

#ifndef MHAMCL__RANDOM_HPP_
#define MHAMCL__RANDOM_HPP_

#include <cstdint>
#include <random>
#include <string_view>

namespace mhamcl
{

using Rng = std::mt19937_64;

/// Zero-mean normal draw; a zero deviation returns 0 without consuming the stream.
inline double sample_normal(Rng & rng, double stddev)
{
  if (stddev <= 0.0) {
    return 0.0;
  }
  return std::normal_distribution<double>(0.0, stddev)(rng);
}

/// Derives an independent seed for a named consumer from one global seed, so
/// adding draws in one consumer never shifts another's sequence.
inline std::uint64_t stream_seed(std::uint64_t global_seed, std::string_view name)
{
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  std::uint64_t z = global_seed ^ h;  // splitmix64 finalizer
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Rng make_stream(std::uint64_t global_seed, std::string_view name)
{
  return Rng(stream_seed(global_seed, name));
}

}  // namespace mhamcl

#endif  // MHAMCL__RANDOM_HPP_
