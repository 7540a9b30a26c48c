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

#include "qstream/density.hpp"

#include <algorithm>
#include <cmath>

#include "qstream/errors.hpp"

namespace qstream {

ValidationReport validate_density_matrix(const ComplexMatrix& m) {
  require(m.is_square(), "validate_density_matrix: matrix must be square");
  ValidationReport report;
  report.hermiticity_defect = m.max_abs_diff(m.adjoint());
  report.trace_defect = std::abs(m.trace() - Complex(1.0));
  // Eigenvalues of the Hermitian part so that a small Hermiticity defect is
  // reported as such rather than corrupting the spectrum.
  ComplexMatrix hermitian_part = m + m.adjoint();
  hermitian_part *= 0.5;
  const auto eig = hermitian_eigenvalues(hermitian_part);
  report.min_eigenvalue = eig.empty() ? 0.0 : eig.front();
  report.pass = report.hermiticity_defect <= kHermiticityTol && report.trace_defect <= kTraceTol &&
                report.min_eigenvalue >= -kEigenvalueTol;
  return report;
}

QubitDensityMatrix::QubitDensityMatrix() : m_{{1.0, 0.0}, {0.0, 0.0}} {}

QubitDensityMatrix::QubitDensityMatrix(ComplexMatrix m) : m_(std::move(m)) {
  if (m_.rows() != 2 || m_.cols() != 2) throw ShapeError("QubitDensityMatrix: expected a 2x2 matrix");
  const auto report = validate_density_matrix(m_);
  if (!report.pass) {
    throw ContractViolation("QubitDensityMatrix: not a valid density matrix (hermiticity " +
                            std::to_string(report.hermiticity_defect) + ", trace " +
                            std::to_string(report.trace_defect) + ", min eigenvalue " +
                            std::to_string(report.min_eigenvalue) + ")");
  }
}

QubitDensityMatrix QubitDensityMatrix::unchecked(ComplexMatrix m) {
  QubitDensityMatrix out;
  out.m_ = std::move(m);
  return out;
}

QubitDensityMatrix QubitDensityMatrix::ground() { return {}; }

QubitDensityMatrix QubitDensityMatrix::excited() {
  return unchecked(ComplexMatrix{{0.0, 0.0}, {0.0, 1.0}});
}

QubitDensityMatrix QubitDensityMatrix::plus() {
  return unchecked(ComplexMatrix{{0.5, 0.5}, {0.5, 0.5}});
}

QubitDensityMatrix QubitDensityMatrix::maximally_mixed() {
  return unchecked(ComplexMatrix{{0.5, 0.0}, {0.0, 0.5}});
}

QubitDensityMatrix QubitDensityMatrix::pure(double polar, double azimuth) {
  const Complex a = std::cos(polar / 2.0);
  const Complex b = std::polar(std::sin(polar / 2.0), azimuth);
  return unchecked(ComplexMatrix{{a * std::conj(a), a * std::conj(b)}, {b * std::conj(a), b * std::conj(b)}});
}

QubitDensityMatrix QubitDensityMatrix::from_bloch(double x, double y, double z) {
  require(x * x + y * y + z * z <= 1.0 + 1e-12, "from_bloch: Bloch vector longer than 1");
  return unchecked(ComplexMatrix{{0.5 * (1.0 + z), Complex(0.5 * x, -0.5 * y)},
                                 {Complex(0.5 * x, 0.5 * y), 0.5 * (1.0 - z)}});
}

double QubitDensityMatrix::purity() const { return (m_ * m_).trace().real(); }

double expectation(const QubitDensityMatrix& rho, const ComplexMatrix& obs) {
  if (obs.rows() != 2 || obs.cols() != 2) throw ShapeError("expectation: observable must be 2x2");
  require(obs.max_abs_diff(obs.adjoint()) <= kHermiticityTol, "expectation: observable is not Hermitian");
  const Complex value = (rho.matrix() * obs).trace();
  return value.real();
}

namespace {
// Eigenvalues at or below this are treated as exact zeros.
constexpr double kRankCutoff = 1e-14;
}  // namespace

double uhlmann_fidelity(const QubitDensityMatrix& rho, const QubitDensityMatrix& target) {
  const auto check = [](const QubitDensityMatrix& m, const char* which) {
    const auto report = validate_density_matrix(m.matrix());
    require(report.pass, std::string("uhlmann_fidelity: ") + which + " is not a valid density matrix");
  };
  check(rho, "rho");
  check(target, "target");
  // For 2x2 matrices Tr sqrt(M) = sqrt(Tr M + 2 sqrt(det M)) with
  // M = sqrt(rho) target sqrt(rho), so F = Tr(rho target) + 2 sqrt(det rho det target).
  // Taking square roots of round-off eigenvalues would leak ~1e-8 errors for
  // pure inputs, hence the rank cut-off on each determinant.
  const auto det = [](const QubitDensityMatrix& m) {
    const auto ev = hermitian_eigenvalues(m.matrix());
    return ev[0] <= kRankCutoff ? 0.0 : ev[0] * ev[1];
  };
  double overlap = 0.0;
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t c = 0; c < 2; ++c) overlap += (rho(r, c) * target(c, r)).real();
  }
  return std::clamp(overlap + 2.0 * std::sqrt(det(rho) * det(target)), 0.0, 1.0);
}

ComplexMatrix partial_trace(const ComplexMatrix& m, Subsystem keep, std::size_t pointer_dim) {
  constexpr std::size_t kQubitDim = 2;
  if (!m.is_square() || m.rows() != pointer_dim * kQubitDim) {
    throw ShapeError("partial_trace: expected a square matrix of dimension " +
                     std::to_string(pointer_dim * kQubitDim) + ", got " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()));
  }
  if (keep == Subsystem::kQubit) {
    ComplexMatrix out(kQubitDim, kQubitDim);
    for (std::size_t q = 0; q < pointer_dim; ++q) {
      for (std::size_t s = 0; s < kQubitDim; ++s) {
        for (std::size_t t = 0; t < kQubitDim; ++t) out(s, t) += m(q * kQubitDim + s, q * kQubitDim + t);
      }
    }
    return out;
  }
  ComplexMatrix out(pointer_dim, pointer_dim);
  for (std::size_t q = 0; q < pointer_dim; ++q) {
    for (std::size_t r = 0; r < pointer_dim; ++r) {
      for (std::size_t s = 0; s < kQubitDim; ++s) out(q, r) += m(q * kQubitDim + s, r * kQubitDim + s);
    }
  }
  return out;
}

}  // namespace qstream
