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

#include "qstream/weak_measurement.hpp"

#include <cmath>
#include <string>

#include "qstream/errors.hpp"

namespace qstream {

int PointerGrid::wrap(int q) const {
  const int n = static_cast<int>(points());
  int offset = (q - q_min) % n;
  if (offset < 0) offset += n;
  return q_min + offset;
}

GaussianPointer make_gaussian_pointer(double sigma, const PointerGrid& grid) {
  require(sigma > 0.0 && std::isfinite(sigma), "make_gaussian_pointer: sigma must be positive");
  require(grid.q_max > grid.q_min, "make_gaussian_pointer: empty grid");
  GaussianPointer pointer{sigma, grid, std::vector<double>(grid.points())};
  double norm = 0.0;
  for (int q = grid.q_min; q <= grid.q_max; ++q) {
    const double a = std::exp(-static_cast<double>(q) * q / (4.0 * sigma * sigma));
    pointer.amplitudes[grid.index_of(q)] = a;
    norm += a * a;
  }
  const double scale = 1.0 / std::sqrt(norm);
  for (auto& a : pointer.amplitudes) a *= scale;
  return pointer;
}

ComplexMatrix kraus_operator(int q0, const GaussianPointer& pointer, int shift) {
  require(pointer.grid.contains(q0), "kraus_operator: q0 is off the pointer grid");
  return ComplexMatrix{{pointer.amplitude(q0 - shift), 0.0}, {0.0, pointer.amplitude(q0 + shift)}};
}

std::vector<double> outcome_distribution(const QubitDensityMatrix& rho, const GaussianPointer& pointer) {
  const PointerGrid& grid = pointer.grid;
  std::vector<double> p(grid.points());
  const double p0 = rho.rho11();
  const double p1 = rho.rho22();
  for (int q = grid.q_min; q <= grid.q_max; ++q) {
    const double a0 = pointer.amplitude(q - kCouplingShift);
    const double a1 = pointer.amplitude(q + kCouplingShift);
    p[grid.index_of(q)] = p0 * a0 * a0 + p1 * a1 * a1;
  }
  return p;
}

double normalize_weak_value(int q0, const PointerGrid& grid) {
  require(grid.contains(q0), "normalize_weak_value: q0 out of range");
  return static_cast<double>(q0 - grid.q_min) / static_cast<double>(grid.q_max - grid.q_min);
}

MeasurementOutcome collapse_on(const QubitDensityMatrix& rho, const GaussianPointer& pointer, int q0) {
  require(pointer.grid.contains(q0), "collapse_on: q0 is off the pointer grid");
  const double a0 = pointer.amplitude(q0 - kCouplingShift);
  const double a1 = pointer.amplitude(q0 + kCouplingShift);
  const double w0 = a0 * a0 * rho.rho11();
  const double w1 = a1 * a1 * rho.rho22();
  const double prob = w0 + w1;
  if (!(prob >= 1e-300)) {
    throw NumericalError("collapse_on: outcome q0=" + std::to_string(q0) + " has vanishing probability");
  }
  const Complex off = a0 * a1 * rho.rho12() / prob;
  ComplexMatrix post{{w0 / prob, off}, {std::conj(off), w1 / prob}};
  return {q0, normalize_weak_value(q0, pointer.grid), prob, QubitDensityMatrix::unchecked(std::move(post))};
}

MeasurementOutcome sample_and_collapse(const QubitDensityMatrix& rho, const GaussianPointer& pointer, Rng& rng) {
  const auto dist = outcome_distribution(rho, pointer);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double u = uniform(rng);
  double cumulative = 0.0;
  std::size_t chosen = dist.size();
  std::size_t last_supported = dist.size();
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist[i] > 0.0) last_supported = i;
    cumulative += dist[i];
    if (u < cumulative) {
      chosen = i;
      break;
    }
  }
  // u landed in the round-off gap above the cumulative sum.
  if (chosen == dist.size()) chosen = last_supported;
  if (chosen == dist.size()) throw NumericalError("sample_and_collapse: outcome distribution is empty");
  return collapse_on(rho, pointer, pointer.grid.q_min + static_cast<int>(chosen));
}

QubitDensityMatrix nonselective_map(const QubitDensityMatrix& rho, const GaussianPointer& pointer) {
  // Diagonal is preserved because sum_q phi(q -/+ g)^2 = 1 on the periodic
  // grid; coherences pick up the overlap of the two shifted pointers.
  double overlap = 0.0;
  for (int q = pointer.grid.q_min; q <= pointer.grid.q_max; ++q) {
    overlap += pointer.amplitude(q - kCouplingShift) * pointer.amplitude(q + kCouplingShift);
  }
  const Complex off = overlap * rho.rho12();
  return QubitDensityMatrix::unchecked(
      ComplexMatrix{{rho.rho11(), off}, {std::conj(off), rho.rho22()}});
}

namespace collective {

ComplexMatrix pointer_state(const GaussianPointer& pointer) {
  const std::size_t n = pointer.grid.points();
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m(i, j) = pointer.amplitudes[i] * pointer.amplitudes[j];
  }
  return m;
}

ComplexMatrix coupling_unitary(const PointerGrid& grid, int shift) {
  const std::size_t n = grid.points();
  ComplexMatrix u(2 * n, 2 * n);
  for (int q = grid.q_min; q <= grid.q_max; ++q) {
    const std::size_t from = grid.index_of(q);
    u(2 * grid.index_of(grid.wrap(q + shift)) + 0, 2 * from + 0) = 1.0;
    u(2 * grid.index_of(grid.wrap(q - shift)) + 1, 2 * from + 1) = 1.0;
  }
  return u;
}

ComplexMatrix couple(const QubitDensityMatrix& rho, const GaussianPointer& pointer) {
  const ComplexMatrix initial = tensor_product(pointer_state(pointer), rho.matrix());
  const ComplexMatrix u = coupling_unitary(pointer.grid);
  return u * initial * u.adjoint();
}

ComplexMatrix project(const ComplexMatrix& m, const PointerGrid& grid, int q0) {
  require(grid.contains(q0), "collective::project: q0 is off the pointer grid");
  const std::size_t n = grid.points();
  if (!m.is_square() || m.rows() != 2 * n) throw ShapeError("collective::project: dimension mismatch");
  std::vector<Complex> diag(2 * n, 0.0);
  diag[2 * grid.index_of(q0)] = 1.0;
  diag[2 * grid.index_of(q0) + 1] = 1.0;
  const ComplexMatrix projector = ComplexMatrix::diagonal(diag);
  return projector * m * projector;
}

}  // namespace collective

collective::OracleResult collective_measure_oracle(const QubitDensityMatrix& rho, const GaussianPointer& pointer,
                                                   int q0) {
  require(pointer.grid.contains(q0), "collective_measure_oracle: q0 is off the pointer grid");
  const ComplexMatrix coupled = collective::couple(rho, pointer);
  const ComplexMatrix projected = collective::project(coupled, pointer.grid, q0);
  ComplexMatrix reduced = partial_trace(projected, Subsystem::kQubit, pointer.grid.points());
  const double prob = reduced.trace().real();
  if (!(prob >= 1e-300)) throw NumericalError("collective_measure_oracle: vanishing outcome probability");
  reduced *= 1.0 / prob;
  return {prob, QubitDensityMatrix::unchecked(std::move(reduced))};
}

}  // namespace qstream
