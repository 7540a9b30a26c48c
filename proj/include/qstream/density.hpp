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

#ifndef QSTREAM_DENSITY_HPP_
#define QSTREAM_DENSITY_HPP_

#include <cstddef>

#include "qstream/matrix.hpp"

namespace qstream {

// Tolerances shared by every density-matrix check in the library.
inline constexpr double kHermiticityTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kEigenvalueTol = 1e-10;

struct ValidationReport {
  double hermiticity_defect = 0.0;  // max |m - m^dagger|
  double trace_defect = 0.0;        // |Tr m - 1|
  double min_eigenvalue = 0.0;
  bool pass = false;
};

ValidationReport validate_density_matrix(const ComplexMatrix& m);

// 2x2 density matrix of the qubit. Index 0 is |0>, so rho11() is the |0>
// population and rho22() the |1> population.
class QubitDensityMatrix {
 public:
  // |0><0|.
  QubitDensityMatrix();

  // Throws ContractViolation unless `m` is a valid 2x2 density matrix.
  explicit QubitDensityMatrix(ComplexMatrix m);

  // Skips validation; for values produced by trusted code paths.
  static QubitDensityMatrix unchecked(ComplexMatrix m);

  static QubitDensityMatrix ground();       // |0><0|
  static QubitDensityMatrix excited();      // |1><1|
  static QubitDensityMatrix plus();         // |+><+|
  static QubitDensityMatrix maximally_mixed();
  // cos(a/2)|0> + e^{i phi} sin(a/2)|1>
  static QubitDensityMatrix pure(double polar, double azimuth = 0.0);
  // Bloch-vector parametrization; |r| <= 1.
  static QubitDensityMatrix from_bloch(double x, double y, double z);

  const ComplexMatrix& matrix() const { return m_; }
  Complex operator()(std::size_t r, std::size_t c) const { return m_(r, c); }

  double rho11() const { return m_(0, 0).real(); }
  double rho22() const { return m_(1, 1).real(); }
  Complex rho12() const { return m_(0, 1); }
  Complex rho21() const { return m_(1, 0); }

  double purity() const;

 private:
  ComplexMatrix m_;
};

// Tr(rho * obs). `obs` must be Hermitian.
double expectation(const QubitDensityMatrix& rho, const ComplexMatrix& obs);

// (Tr sqrt(sqrt(rho) target sqrt(rho)))^2.
double uhlmann_fidelity(const QubitDensityMatrix& rho, const QubitDensityMatrix& target);

enum class Subsystem { kPointer, kQubit };

// Reduced state of a (pointer x qubit) matrix with pointer index major.
// `keep` names the subsystem that survives the trace.
ComplexMatrix partial_trace(const ComplexMatrix& m, Subsystem keep, std::size_t pointer_dim = 101);

}  // namespace qstream

#endif  // QSTREAM_DENSITY_HPP_
