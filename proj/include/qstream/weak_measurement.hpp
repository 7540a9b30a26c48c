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

#ifndef QSTREAM_WEAK_MEASUREMENT_HPP_
#define QSTREAM_WEAK_MEASUREMENT_HPP_

#include <cstddef>
#include <vector>

#include "qstream/density.hpp"
#include "qstream/matrix.hpp"
#include "qstream/rng.hpp"

namespace qstream {

// Integer pointer positions q_min, q_min+1, ..., q_max.
struct PointerGrid {
  int q_min = -50;
  int q_max = 50;

  std::size_t points() const { return static_cast<std::size_t>(q_max - q_min + 1); }
  bool contains(int q) const { return q >= q_min && q <= q_max; }
  std::size_t index_of(int q) const { return static_cast<std::size_t>(q - q_min); }
  // Maps any integer onto the grid cyclically.
  int wrap(int q) const;
};

// Gaussian pointer wavefunction sampled on the grid and renormalized so the
// squared amplitudes sum to one.
struct GaussianPointer {
  double sigma = 10.0;
  PointerGrid grid;
  std::vector<double> amplitudes;  // indexed by grid.index_of(q)

  // phi(q) with cyclic wrap-around for off-grid arguments.
  double amplitude(int q) const { return amplitudes[grid.index_of(grid.wrap(q))]; }
};

GaussianPointer make_gaussian_pointer(double sigma, const PointerGrid& grid = {});

// Displacement of the pointer per unit of sigma_z, in grid steps.
inline constexpr int kCouplingShift = 1;

// M(q0) = phi(q0 - g)|0><0| + phi(q0 + g)|1><1|.
ComplexMatrix kraus_operator(int q0, const GaussianPointer& pointer, int shift = kCouplingShift);

// P(q0) for every grid outcome, indexed by grid.index_of(q0).
std::vector<double> outcome_distribution(const QubitDensityMatrix& rho, const GaussianPointer& pointer);

// Maps q0 in [q_min, q_max] to [0, 1].
double normalize_weak_value(int q0, const PointerGrid& grid = {});

struct MeasurementOutcome {
  int q0 = 0;
  double q0_normalized = 0.5;
  double probability = 0.0;
  QubitDensityMatrix posterior;
};

// Conditional update for a given outcome.
MeasurementOutcome collapse_on(const QubitDensityMatrix& rho, const GaussianPointer& pointer, int q0);

MeasurementOutcome sample_and_collapse(const QubitDensityMatrix& rho, const GaussianPointer& pointer, Rng& rng);

// Outcome-averaged channel sum_q M(q) rho M(q)^dagger.
QubitDensityMatrix nonselective_map(const QubitDensityMatrix& rho, const GaussianPointer& pointer);

// Explicit pointer-qubit construction, kept as the reference implementation
// for the 2x2 Kraus path. Not used in training.
namespace collective {

// |Phi><Phi| on the grid.
ComplexMatrix pointer_state(const GaussianPointer& pointer);

// exp(-i g p (x) sigma_z) realized as the cyclic translation of the pointer by
// +g on the |0> branch and -g on the |1> branch. Pointer index major.
ComplexMatrix coupling_unitary(const PointerGrid& grid, int shift = kCouplingShift);

// U (rho_p (x) rho) U^dagger.
ComplexMatrix couple(const QubitDensityMatrix& rho, const GaussianPointer& pointer);

// (|q0><q0| (x) I) m (|q0><q0| (x) I).
ComplexMatrix project(const ComplexMatrix& m, const PointerGrid& grid, int q0);

struct OracleResult {
  double probability = 0.0;
  QubitDensityMatrix posterior;
};

}  // namespace collective

collective::OracleResult collective_measure_oracle(const QubitDensityMatrix& rho, const GaussianPointer& pointer,
                                                   int q0);

}  // namespace qstream

#endif  // QSTREAM_WEAK_MEASUREMENT_HPP_
