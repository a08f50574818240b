// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------


#include "risopt/hermitian.hpp"

#include <cmath>

namespace risopt::hermitian {

namespace {
const double kSqrt2 = std::sqrt(2.0);
}

Eigen::Index offdiag_index(Eigen::Index a, Eigen::Index b, Eigen::Index l) {
  // pairs (a, b), a < b, enumerated row by row
  const Eigen::Index before = a * l - a * (a + 1) / 2;
  return l + 2 * (before + (b - a - 1));
}

RVector pack(const CMatrix& phi) {
  const Eigen::Index l = phi.rows();
  RVector x(param_count(l));
  for (Eigen::Index a = 0; a < l; ++a) x(a) = phi(a, a).real();
  Eigen::Index p = l;
  for (Eigen::Index a = 0; a < l; ++a) {
    for (Eigen::Index b = a + 1; b < l; ++b) {
      x(p++) = kSqrt2 * phi(a, b).real();
      x(p++) = kSqrt2 * phi(a, b).imag();
    }
  }
  return x;
}

CMatrix unpack(const RVector& x, Eigen::Index l) {
  CMatrix phi(l, l);
  for (Eigen::Index a = 0; a < l; ++a) phi(a, a) = x(a);
  Eigen::Index p = l;
  for (Eigen::Index a = 0; a < l; ++a) {
    for (Eigen::Index b = a + 1; b < l; ++b) {
      const Complex v(x(p) / kSqrt2, x(p + 1) / kSqrt2);
      phi(a, b) = v;
      phi(b, a) = std::conj(v);
      p += 2;
    }
  }
  return phi;
}

RVector trace_gradient(const CMatrix& a) {
  const Eigen::Index l = a.rows();
  RVector g(param_count(l));
  for (Eigen::Index i = 0; i < l; ++i) g(i) = a(i, i).real();
  Eigen::Index p = l;
  for (Eigen::Index i = 0; i < l; ++i) {
    for (Eigen::Index j = i + 1; j < l; ++j) {
      // Phi_ij = u + jv contributes u Re(A_ij + A_ji) + v (Im A_ij - Im A_ji)
      g(p++) = (a(i, j).real() + a(j, i).real()) / kSqrt2;
      g(p++) = (a(i, j).imag() - a(j, i).imag()) / kSqrt2;
    }
  }
  return g;
}

RMatrix embed(const CMatrix& phi) {
  const Eigen::Index l = phi.rows();
  RMatrix e(2 * l, 2 * l);
  e.topLeftCorner(l, l) = phi.real();
  e.bottomRightCorner(l, l) = phi.real();
  e.bottomLeftCorner(l, l) = phi.imag();
  e.topRightCorner(l, l) = -phi.imag();
  return e;
}

CMatrix extract(const RMatrix& embedded) {
  const Eigen::Index l = embedded.rows() / 2;
  CMatrix phi(l, l);
  phi.real() = embedded.topLeftCorner(l, l);
  phi.imag() = embedded.bottomLeftCorner(l, l);
  return phi;
}

CMatrix symmetrize(const CMatrix& phi) { return 0.5 * (phi + phi.adjoint()); }

CMatrix clip_psd(const CMatrix& phi, double floor) {
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(symmetrize(phi));
  RVector vals = eig.eigenvalues().cwiseMax(floor);
  return symmetrize(eig.eigenvectors() * vals.asDiagonal() * eig.eigenvectors().adjoint());
}

double min_eigenvalue(const CMatrix& phi) {
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(symmetrize(phi), Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

}  // namespace risopt::hermitian
