// Copyright 2026 The qstream Authors
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

// Shared helpers for the unit tests.

#ifndef QSTREAM_TESTS_TEST_UTIL_HPP_
#define QSTREAM_TESTS_TEST_UTIL_HPP_

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>

#include "qstream/density.hpp"
#include "qstream/matrix.hpp"
#include "qstream/rng.hpp"

namespace qstream::testing {

inline ComplexMatrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  ComplexMatrix m(rows, cols);
  for (auto& e : m.entries()) e = {n(rng), n(rng)};
  return m;
}

// Uniform-ish mixed state: A A^dagger / Tr.
inline QubitDensityMatrix random_density(Rng& rng) {
  const ComplexMatrix a = random_matrix(2, 2, rng);
  ComplexMatrix m = a * a.adjoint();
  m *= 1.0 / m.trace().real();
  return QubitDensityMatrix::unchecked(m);
}

inline QubitDensityMatrix random_pure(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return QubitDensityMatrix::pure(std::acos(1.0 - 2.0 * u(rng)), 2.0 * std::numbers::pi * u(rng));
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("qstream_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace qstream::testing

#endif  // QSTREAM_TESTS_TEST_UTIL_HPP_
