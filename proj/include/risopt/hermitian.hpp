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


#pragma once

#include "risopt/types.hpp"

namespace risopt::hermitian {

/// Real parameter count of an L x L Hermitian matrix.
inline Eigen::Index param_count(Eigen::Index l) { return l * l; }

/// Isometric packing: [Phi_11..Phi_LL, then for a < b in row-major order
/// sqrt(2) Re Phi_ab, sqrt(2) Im Phi_ab]. ||pack(X)|| = ||X||_F.
RVector pack(const CMatrix& phi);
CMatrix unpack(const RVector& x, Eigen::Index l);

/// Index of the packed (re, im) pair for a < b.
Eigen::Index offdiag_index(Eigen::Index a, Eigen::Index b, Eigen::Index l);

/// g with Re tr(A Phi) = g . pack(Phi) for every Hermitian Phi.
RVector trace_gradient(const CMatrix& a);

/// Standard embedding [[X, -Y], [Y, X]] of X + jY; PSD iff the input is.
RMatrix embed(const CMatrix& phi);
/// Inverse of embed on matrices with the embedding's block structure.
CMatrix extract(const RMatrix& embedded);

CMatrix symmetrize(const CMatrix& phi);

/// Projection onto the PSD cone by clipping negative eigenvalues.
CMatrix clip_psd(const CMatrix& phi, double floor = 0.0);

double min_eigenvalue(const CMatrix& phi);

}  // namespace risopt::hermitian
