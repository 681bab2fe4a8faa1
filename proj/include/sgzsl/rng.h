// Copyright 2026 The sgzsl Authors
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

#ifndef SGZSL_RNG_H_
#define SGZSL_RNG_H_

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

namespace sgzsl {

// Seeded random source. Every component draws from its own stream, derived
// from the run seed plus a stream label, so adding draws in one place never
// perturbs another.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  Rng(std::uint64_t seed, std::uint64_t stream);

  double Normal();
  double Normal(double mean, double stddev);
  double Uniform(double lo, double hi);
  // Uniform integer in [0, n).
  std::size_t Index(std::size_t n);

  template <typename T>
  void Shuffle(std::vector<T>& values) {
    std::shuffle(values.begin(), values.end(), engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// Stream labels used across the library.
namespace streams {
inline constexpr std::uint64_t kDataset = 1;
inline constexpr std::uint64_t kTeacherInit = 2;
inline constexpr std::uint64_t kTeacherBatches = 3;
inline constexpr std::uint64_t kDpNoise = 4;
inline constexpr std::uint64_t kGeneratorInit = 5;
inline constexpr std::uint64_t kStudentInit = 6;
inline constexpr std::uint64_t kGeneratorNoise = 7;
inline constexpr std::uint64_t kStudentBatches = 8;
inline constexpr std::uint64_t kClassifier = 9;
}  // namespace streams

}  // namespace sgzsl

#endif  // SGZSL_RNG_H_
