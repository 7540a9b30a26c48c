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

#ifndef QSTREAM_LINDBLAD_HPP_
#define QSTREAM_LINDBLAD_HPP_

#include <numbers>
#include <string>
#include <vector>

#include "qstream/density.hpp"
#include "qstream/matrix.hpp"

namespace qstream {

inline constexpr double kOmegaMax = 3.0 * std::numbers::pi;

// Amplitude that flips |0> to |1> in unit time under H = omega * sigma_x.
inline constexpr double kFlipOmega = std::numbers::pi / 2.0;

enum class DetuningMode {
  kProportional,  // Delta = detuning_ratio * Omega(t)
  kFixed,         // Delta = fixed_detuning
};

struct NoiseModel {
  double detuning_ratio = 0.0;
  DetuningMode detuning_mode = DetuningMode::kProportional;
  double fixed_detuning = 0.0;
  double dephasing_rate = 0.0;   // Gamma
  double relaxation_rate = 0.0;  // gamma, collapse operator sqrt(gamma) sigma_x

  double detuning_for(double omega) const {
    return detuning_mode == DetuningMode::kProportional ? detuning_ratio * omega : fixed_detuning;
  }

  // Throws ConfigError on negative rates.
  void validate() const;

  static NoiseModel none() { return {}; }
  static NoiseModel detuning() { return {.detuning_ratio = 0.05}; }
  static NoiseModel dephasing() { return {.dephasing_rate = 0.05}; }
  static NoiseModel relaxation() { return {.relaxation_rate = 0.05}; }
  static NoiseModel hybrid() {
    return {.detuning_ratio = 0.1, .dephasing_rate = 0.05, .relaxation_rate = 0.05};
  }
};

struct DriveSpec {
  double omega = 0.0;
};

// H = Omega sigma_x + Delta sigma_z.
ComplexMatrix build_hamiltonian(const DriveSpec& drive, const NoiseModel& noise);

// sqrt(Gamma)|0><0|, sqrt(Gamma)|1><1| when Gamma > 0 and sqrt(gamma) sigma_x
// when gamma > 0.
std::vector<ComplexMatrix> collapse_operators(const NoiseModel& noise);

// -i[H, rho] + sum_n (C rho C^dagger - {C^dagger C, rho}/2). Accepts any 2x2
// matrix so it can be used for intermediate Runge-Kutta stages.
ComplexMatrix lindblad_rhs(const ComplexMatrix& rho, const ComplexMatrix& h,
                           const std::vector<ComplexMatrix>& collapses);
ComplexMatrix lindblad_rhs(const QubitDensityMatrix& rho, const ComplexMatrix& h,
                           const std::vector<ComplexMatrix>& collapses);

// Raw classical RK4 over `dt` with `substeps` equal steps; no projection.
ComplexMatrix integrate_rk4(const ComplexMatrix& rho, const ComplexMatrix& h,
                            const std::vector<ComplexMatrix>& collapses, double dt, int substeps);

// One control interval with the drive held constant. The result is
// re-symmetrized and renormalized to unit trace, then validated; failure
// throws NumericalError.
QubitDensityMatrix evolve_interval(const QubitDensityMatrix& rho, const DriveSpec& drive,
                                   const NoiseModel& noise, double dt, int substeps = 10);

}  // namespace qstream

#endif  // QSTREAM_LINDBLAD_HPP_
