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

#include "qstream/lindblad.hpp"

#include <cmath>

#include "qstream/errors.hpp"

namespace qstream {

void NoiseModel::validate() const {
  if (!(dephasing_rate >= 0.0)) throw ConfigError("noise: dephasing rate must be >= 0");
  if (!(relaxation_rate >= 0.0)) throw ConfigError("noise: relaxation rate must be >= 0");
  if (!std::isfinite(detuning_ratio) || !std::isfinite(fixed_detuning)) {
    throw ConfigError("noise: detuning must be finite");
  }
}

ComplexMatrix build_hamiltonian(const DriveSpec& drive, const NoiseModel& noise) {
  require(drive.omega >= 0.0 && drive.omega <= kOmegaMax + 1e-12,
          "build_hamiltonian: omega must lie in [0, 3*pi]");
  const double delta = noise.detuning_for(drive.omega);
  return ComplexMatrix{{delta, drive.omega}, {drive.omega, -delta}};
}

std::vector<ComplexMatrix> collapse_operators(const NoiseModel& noise) {
  std::vector<ComplexMatrix> ops;
  if (noise.dephasing_rate > 0.0) {
    const double s = std::sqrt(noise.dephasing_rate);
    ops.push_back(s * pauli::projector(0));
    ops.push_back(s * pauli::projector(1));
  }
  if (noise.relaxation_rate > 0.0) {
    ops.push_back(std::sqrt(noise.relaxation_rate) * pauli::x());
  }
  return ops;
}

ComplexMatrix lindblad_rhs(const ComplexMatrix& rho, const ComplexMatrix& h,
                           const std::vector<ComplexMatrix>& collapses) {
  ComplexMatrix out = Complex(0.0, -1.0) * commutator(h, rho);
  for (const auto& c : collapses) {
    const ComplexMatrix c_dag = c.adjoint();
    out += c * rho * c_dag;
    out -= 0.5 * anticommutator(c_dag * c, rho);
  }
  return out;
}

ComplexMatrix lindblad_rhs(const QubitDensityMatrix& rho, const ComplexMatrix& h,
                           const std::vector<ComplexMatrix>& collapses) {
  return lindblad_rhs(rho.matrix(), h, collapses);
}

ComplexMatrix integrate_rk4(const ComplexMatrix& rho, const ComplexMatrix& h,
                            const std::vector<ComplexMatrix>& collapses, double dt, int substeps) {
  require(dt > 0.0, "integrate_rk4: dt must be positive");
  require(substeps >= 1, "integrate_rk4: substeps must be >= 1");
  const double step = dt / substeps;
  ComplexMatrix state = rho;
  for (int i = 0; i < substeps; ++i) {
    const ComplexMatrix k1 = lindblad_rhs(state, h, collapses);
    const ComplexMatrix k2 = lindblad_rhs(state + (0.5 * step) * k1, h, collapses);
    const ComplexMatrix k3 = lindblad_rhs(state + (0.5 * step) * k2, h, collapses);
    const ComplexMatrix k4 = lindblad_rhs(state + step * k3, h, collapses);
    state += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return state;
}

QubitDensityMatrix evolve_interval(const QubitDensityMatrix& rho, const DriveSpec& drive,
                                   const NoiseModel& noise, double dt, int substeps) {
  const ComplexMatrix h = build_hamiltonian(drive, noise);
  const auto collapses = collapse_operators(noise);
  ComplexMatrix next = integrate_rk4(rho.matrix(), h, collapses, dt, substeps);

  next = 0.5 * (next + next.adjoint());
  const double tr = next.trace().real();
  if (!std::isfinite(tr) || tr <= 0.0) throw NumericalError("evolve_interval: trace collapsed to " + std::to_string(tr));
  next *= 1.0 / tr;

  const auto report = validate_density_matrix(next);
  if (!report.pass) {
    throw NumericalError("evolve_interval: integration left the density-matrix manifold (min eigenvalue " +
                         std::to_string(report.min_eigenvalue) + ")");
  }
  return QubitDensityMatrix::unchecked(std::move(next));
}

}  // namespace qstream
