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


#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "risopt/cone_program.hpp"

namespace risopt::conic {

Eigen::Index ConeDims::rows() const {
  Eigen::Index n = nonneg;
  for (int m : soc) n += m;
  for (int p : psd) n += static_cast<Eigen::Index>(p) * p;
  return n;
}

int ConeDims::degree() const {
  int d = nonneg + static_cast<int>(soc.size());
  for (int p : psd) d += p;
  return d;
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::near_optimal: return "near_optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using RowSpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Index = Eigen::Index;

struct SocBlock {
  Index offset = 0;
  int size = 0;
  std::vector<Index> support;  // ascending
  RMatrix gram;                // G_k' G_k on the support, lower triangle
};

struct PsdEntry {
  int a, b;
  double value;
};

struct PsdBlock {
  Index offset = 0;
  int order = 0;
  std::vector<Index> support;
  std::vector<std::vector<PsdEntry>> entries;  // per support column
};

// Orthant rows of G, split by density, and per-SOC Gram matrices. The normal
// matrix gets sum_r w_r g_r g_r' from the orthant rows, eta^-2 G_k' G_k from
// each SOC and low-rank SOC corrections.
struct Structure {
  Index n = 0, m = 0;
  int nonneg = 0;
  Index cone_rows = 0;  // orthant + SOC rows
  RowSpMat rows;
  std::vector<Index> dense_ids;
  RMatrix dense_t;  // n x dense_ids.size()
  std::vector<Index> sparse_ids;
  std::vector<SocBlock> soc;
  std::vector<PsdBlock> psd;
};

Structure analyse(const ConeProgram& prog) {
  Structure st;
  st.n = prog.num_vars();
  st.m = prog.dims.rows();
  st.nonneg = prog.dims.nonneg;
  st.rows = RowSpMat(prog.G);
  st.rows.makeCompressed();
  Index off = st.nonneg;
  for (int size : prog.dims.soc) {
    SocBlock blk;
    blk.offset = off;
    blk.size = size;
    std::vector<Index> map(static_cast<size_t>(st.n), -1);
    for (Index r = off; r < off + size; ++r)
      for (RowSpMat::InnerIterator it(st.rows, r); it; ++it) map[static_cast<size_t>(it.col())] = 0;
    for (Index c = 0; c < st.n; ++c)
      if (map[static_cast<size_t>(c)] == 0) {
        map[static_cast<size_t>(c)] = static_cast<Index>(blk.support.size());
        blk.support.push_back(c);
      }
    RMatrix rows_t = RMatrix::Zero(static_cast<Index>(blk.support.size()), size);
    for (Index r = 0; r < size; ++r)
      for (RowSpMat::InnerIterator it(st.rows, off + r); it; ++it)
        rows_t(map[static_cast<size_t>(it.col())], r) = it.value();
    blk.gram = RMatrix::Zero(rows_t.rows(), rows_t.rows());
    blk.gram.selfadjointView<Eigen::Lower>().rankUpdate(rows_t);
    st.soc.push_back(std::move(blk));
    off += size;
  }
  st.cone_rows = off;
  const Index dense_nnz = std::max<Index>(32, st.n / 4);
  for (Index r = 0; r < st.nonneg; ++r) {
    const Index nnz = st.rows.outerIndexPtr()[r + 1] - st.rows.outerIndexPtr()[r];
    if (nnz == 0) continue;
    (nnz > dense_nnz ? st.dense_ids : st.sparse_ids).push_back(r);
  }
  st.dense_t = RMatrix::Zero(st.n, static_cast<Index>(st.dense_ids.size()));
  for (size_t i = 0; i < st.dense_ids.size(); ++i)
    for (RowSpMat::InnerIterator it(st.rows, st.dense_ids[i]); it; ++it)
      st.dense_t(it.col(), static_cast<Index>(i)) = it.value();
  for (int p : prog.dims.psd) {
    PsdBlock blk;
    blk.offset = off;
    blk.order = p;
    Index len = static_cast<Index>(p) * p;
    std::vector<Index> map(static_cast<size_t>(st.n), -1);
    for (Index r = 0; r < len; ++r) {
      for (RowSpMat::InnerIterator it(st.rows, off + r); it; ++it) {
        Index col = it.col();
        if (map[static_cast<size_t>(col)] < 0) {
          map[static_cast<size_t>(col)] = static_cast<Index>(blk.support.size());
          blk.support.push_back(col);
          blk.entries.emplace_back();
        }
        blk.entries[static_cast<size_t>(map[static_cast<size_t>(col)])].push_back(
            {static_cast<int>(r % p), static_cast<int>(r / p), it.value()});
      }
    }
    st.psd.push_back(std::move(blk));
    off += len;
  }
  return st;
}

inline Eigen::Map<const RMatrix> as_matrix(const RVector& v, Index off, int p) {
  return Eigen::Map<const RMatrix>(v.data() + off, p, p);
}
inline Eigen::Map<RMatrix> as_matrix(RVector& v, Index off, int p) {
  return Eigen::Map<RMatrix>(v.data() + off, p, p);
}

double soc_det_sqrt(const double* x, int size) {
  double n1 = 0.0;
  for (int i = 1; i < size; ++i) n1 += x[i] * x[i];
  n1 = std::sqrt(n1);
  double a = x[0] - n1, b = x[0] + n1;
  if (a <= 0.0) return 0.0;
  return std::sqrt(a * b);
}

double min_eig_sym(const RMatrix& m) {
  Eigen::SelfAdjointEigenSolver<RMatrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

// NT scaling state for the whole cone.
struct Scaling {
  RVector lp_d;                  // W = diag(d) on the orthant
  std::vector<double> soc_eta;
  std::vector<RVector> soc_v;
  std::vector<RMatrix> psd_r, psd_rti;
  RVector lambda;                // scaled point
};

class Cone {
 public:
  Cone(const ConeDims& dims) : dims_(dims) {
    Index off = dims.nonneg;
    for (int s : dims.soc) { soc_off_.push_back(off); off += s; }
    for (int p : dims.psd) { psd_off_.push_back(off); off += static_cast<Index>(p) * p; }
    m_ = off;
  }

  RVector identity() const {
    RVector e = RVector::Zero(m_);
    e.head(dims_.nonneg).setOnes();
    for (size_t k = 0; k < dims_.soc.size(); ++k) e(soc_off_[k]) = 1.0;
    for (size_t k = 0; k < dims_.psd.size(); ++k) {
      int p = dims_.psd[k];
      for (int i = 0; i < p; ++i) e(psd_off_[k] + static_cast<Index>(i) * p + i) = 1.0;
    }
    return e;
  }

  // Smallest "eigenvalue" over all cones; negative means outside.
  double min_margin(const RVector& x) const {
    double mn = std::numeric_limits<double>::infinity();
    for (int i = 0; i < dims_.nonneg; ++i) mn = std::min(mn, x(i));
    for (size_t k = 0; k < dims_.soc.size(); ++k) {
      const double* v = x.data() + soc_off_[k];
      int sz = dims_.soc[k];
      double n1 = 0.0;
      for (int i = 1; i < sz; ++i) n1 += v[i] * v[i];
      mn = std::min(mn, v[0] - std::sqrt(n1));
    }
    for (size_t k = 0; k < dims_.psd.size(); ++k) {
      int p = dims_.psd[k];
      mn = std::min(mn, min_eig_sym(as_matrix(x, psd_off_[k], p)));
    }
    return mn;
  }

  RVector jordan(const RVector& u, const RVector& v) const {
    RVector w(m_);
    int nl = dims_.nonneg;
    w.head(nl) = u.head(nl).cwiseProduct(v.head(nl));
    for (size_t k = 0; k < dims_.soc.size(); ++k) {
      Index o = soc_off_[k];
      int sz = dims_.soc[k];
      w(o) = u.segment(o, sz).dot(v.segment(o, sz));
      w.segment(o + 1, sz - 1) = u(o) * v.segment(o + 1, sz - 1) + v(o) * u.segment(o + 1, sz - 1);
    }
    for (size_t k = 0; k < dims_.psd.size(); ++k) {
      int p = dims_.psd[k];
      Index o = psd_off_[k];
      RMatrix U = as_matrix(u, o, p), V = as_matrix(v, o, p);
      as_matrix(w, o, p) = 0.5 * (U * V + V * U);
    }
    return w;
  }

  // Solve lambda o x = y, lambda diagonal on PSD blocks.
  RVector jordan_div(const RVector& lambda, const RVector& y) const {
    RVector x(m_);
    int nl = dims_.nonneg;
    x.head(nl) = y.head(nl).cwiseQuotient(lambda.head(nl));
    for (size_t k = 0; k < dims_.soc.size(); ++k) {
      Index o = soc_off_[k];
      int sz = dims_.soc[k];
      double l0 = lambda(o);
      auto l1 = lambda.segment(o + 1, sz - 1);
      auto y1 = y.segment(o + 1, sz - 1);
      double det = l0 * l0 - l1.squaredNorm();
      double x0 = (l0 * y(o) - l1.dot(y1)) / det;
      x(o) = x0;
      x.segment(o + 1, sz - 1) = (y1 - x0 * l1) / l0;
    }
    for (size_t k = 0; k < dims_.psd.size(); ++k) {
      int p = dims_.psd[k];
      Index o = psd_off_[k];
      auto Y = as_matrix(y, o, p);
      auto X = as_matrix(x, o, p);
      for (int j = 0; j < p; ++j) {
        double lj = lambda(o + static_cast<Index>(j) * p + j);
        for (int i = 0; i < p; ++i) {
          double li = lambda(o + static_cast<Index>(i) * p + i);
          X(i, j) = 2.0 * Y(i, j) / (li + lj);
        }
      }
    }
    return x;
  }

  // Largest t with lambda + t d in the cone (lambda the scaled point).
  double max_step(const RVector& lambda, const RVector& d) const {
    double t = std::numeric_limits<double>::infinity();
    for (int i = 0; i < dims_.nonneg; ++i)
      if (d(i) < 0.0) t = std::min(t, -lambda(i) / d(i));
    for (size_t k = 0; k < dims_.soc.size(); ++k) {
      Index o = soc_off_[k];
      int sz = dims_.soc[k];
      double l0 = lambda(o);
      auto l1 = lambda.segment(o + 1, sz - 1);
      double nrm = std::sqrt(std::max(l0 * l0 - l1.squaredNorm(), 1e-300));
      double lb0 = l0 / nrm;
      RVector lb1 = l1 / nrm;
      auto d1 = d.segment(o + 1, sz - 1);
      double lbd = lb0 * d(o) - lb1.dot(d1);
      double factor = (lbd + d(o)) / (lb0 + 1.0);
      double rho0 = lbd / nrm;
      double rho1 = (d1 - factor * lb1).norm() / nrm;
      double sig = rho1 - rho0;
      if (sig > 0.0) t = std::min(t, 1.0 / sig);
    }
    for (size_t k = 0; k < dims_.psd.size(); ++k) {
      int p = dims_.psd[k];
      Index o = psd_off_[k];
      RVector isq(p);
      for (int i = 0; i < p; ++i) isq(i) = 1.0 / std::sqrt(lambda(o + static_cast<Index>(i) * p + i));
      RMatrix D = isq.asDiagonal() * RMatrix(as_matrix(d, o, p)) * isq.asDiagonal();
      double mu = min_eig_sym(D);
      if (mu < 0.0) t = std::min(t, -1.0 / mu);
    }
    return t;
  }

  Scaling scaling(const RVector& s, const RVector& z) const {
    Scaling w;
    w.lambda = RVector::Zero(m_);
    int nl = dims_.nonneg;
    w.lp_d = (s.head(nl).cwiseQuotient(z.head(nl))).cwiseSqrt();
    w.lambda.head(nl) = (s.head(nl).cwiseProduct(z.head(nl))).cwiseSqrt();
    for (size_t k = 0; k < dims_.soc.size(); ++k) {
      Index o = soc_off_[k];
      int sz = dims_.soc[k];
      double sn = soc_det_sqrt(s.data() + o, sz);
      double zn = soc_det_sqrt(z.data() + o, sz);
      sn = std::max(sn, 1e-300);
      zn = std::max(zn, 1e-300);
      RVector sb = s.segment(o, sz) / sn;
      RVector zb = z.segment(o, sz) / zn;
      double gamma = std::sqrt(std::max(0.5 * (1.0 + sb.dot(zb)), 1e-300));
      // hyperbolic form: W = eta [w0 w1'; w1 I + w1 w1'/(1 + w0)] = eta (2 v v' - J)
      RVector wb = zb;
      wb(0) = sb(0) + zb(0);
      wb.tail(sz - 1) = sb.tail(sz - 1) - zb.tail(sz - 1);
      wb /= 2.0 * gamma;
      RVector v(sz);
      v(0) = std::sqrt(0.5 * (wb(0) + 1.0));
      v.tail(sz - 1) = wb.tail(sz - 1) / (2.0 * v(0));
      double eta = std::sqrt(sn / zn);
      w.soc_eta.push_back(eta);
      w.soc_v.push_back(v);
      // lambda = W z
      RVector zk = z.segment(o, sz);
      RVector jz = zk;
      jz.tail(sz - 1) = -jz.tail(sz - 1);
      w.lambda.segment(o, sz) = eta * (2.0 * v * v.dot(zk) - jz);
    }
    for (size_t k = 0; k < dims_.psd.size(); ++k) {
      int p = dims_.psd[k];
      Index o = psd_off_[k];
      RMatrix S = as_matrix(s, o, p), Z = as_matrix(z, o, p);
      Eigen::LLT<RMatrix> ls(0.5 * (S + S.transpose()));
      Eigen::LLT<RMatrix> lz(0.5 * (Z + Z.transpose()));
      RMatrix Ls = ls.matrixL(), Lz = lz.matrixL();
      Eigen::JacobiSVD<RMatrix> svd(Lz.transpose() * Ls, Eigen::ComputeFullU | Eigen::ComputeFullV);
      RVector sv = svd.singularValues().cwiseMax(1e-300);
      RVector isq = sv.cwiseSqrt().cwiseInverse();
      w.psd_r.push_back(Ls * svd.matrixV() * isq.asDiagonal());
      w.psd_rti.push_back(Lz * svd.matrixU() * isq.asDiagonal());
      for (int i = 0; i < p; ++i) w.lambda(o + static_cast<Index>(i) * p + i) = sv(i);
    }
    return w;
  }

  enum class Op { W, Wt, Winv, Winvt };

  RVector apply(const Scaling& w, Op op, const RVector& u) const {
    RVector out(m_);
    int nl = dims_.nonneg;
    if (op == Op::W || op == Op::Wt) out.head(nl) = w.lp_d.cwiseProduct(u.head(nl));
    else out.head(nl) = u.head(nl).cwiseQuotient(w.lp_d);
    for (size_t k = 0; k < dims_.soc.size(); ++k) {
      Index o = soc_off_[k];
      int sz = dims_.soc[k];
      const RVector& v = w.soc_v[k];
      RVector uk = u.segment(o, sz);
      RVector ju = uk;
      ju.tail(sz - 1) = -ju.tail(sz - 1);
      if (op == Op::W || op == Op::Wt) {
        out.segment(o, sz) = w.soc_eta[k] * (2.0 * v * v.dot(uk) - ju);
      } else {
        RVector a = v;
        a.tail(sz - 1) = -a.tail(sz - 1);
        out.segment(o, sz) = (2.0 * a * a.dot(uk) - ju) / w.soc_eta[k];
      }
    }
    for (size_t k = 0; k < dims_.psd.size(); ++k) {
      int p = dims_.psd[k];
      Index o = psd_off_[k];
      RMatrix U = as_matrix(u, o, p);
      const RMatrix& r = w.psd_r[k];
      const RMatrix& rti = w.psd_rti[k];
      RMatrix res;
      switch (op) {
        case Op::W: res = r.transpose() * U * r; break;
        case Op::Wt: res = r * U * r.transpose(); break;
        case Op::Winv: res = rti * U * rti.transpose(); break;
        case Op::Winvt: res = rti.transpose() * U * rti; break;
      }
      as_matrix(out, o, p) = res;
    }
    return out;
  }

  const std::vector<Index>& soc_offsets() const { return soc_off_; }
  const std::vector<Index>& psd_offsets() const { return psd_off_; }

 private:
  ConeDims dims_;
  std::vector<Index> soc_off_, psd_off_;
  Index m_ = 0;
};

// Lower triangle only.
RMatrix normal_matrix(const Structure& st, const Scaling& w) {
  const Index n = st.n;
  RMatrix N = RMatrix::Zero(n, n);
  RVector weight(st.cone_rows);
  for (int r = 0; r < st.nonneg; ++r) weight(r) = 1.0 / (w.lp_d(r) * w.lp_d(r));
  for (size_t k = 0; k < st.soc.size(); ++k)
    weight.segment(st.soc[k].offset, st.soc[k].size).setConstant(1.0 / (w.soc_eta[k] * w.soc_eta[k]));
  for (size_t k = 0; k < st.soc.size(); ++k) {
    const SocBlock& blk = st.soc[k];
    const double ie2 = weight(blk.offset);
    const Index q = static_cast<Index>(blk.support.size());
    for (Index j = 0; j < q; ++j) {
      const Index cj = blk.support[static_cast<size_t>(j)];
      for (Index i = j; i < q; ++i) N(blk.support[static_cast<size_t>(i)], cj) += ie2 * blk.gram(i, j);
    }
  }

  if (!st.dense_ids.empty()) {
    RMatrix scaled = st.dense_t;
    for (size_t i = 0; i < st.dense_ids.size(); ++i)
      scaled.col(static_cast<Index>(i)) *= std::sqrt(weight(st.dense_ids[i]));
    N.selfadjointView<Eigen::Lower>().rankUpdate(scaled);
  }
  const int* outer = st.rows.outerIndexPtr();
  const int* inner = st.rows.innerIndexPtr();
  const double* val = st.rows.valuePtr();
  for (Index r : st.sparse_ids) {
    const double wr = weight(r);
    for (int p = outer[r]; p < outer[r + 1]; ++p)
      for (int q = outer[r]; q <= p; ++q) N(inner[p], inner[q]) += wr * val[p] * val[q];
  }

  // SOC: W^-2 = eta^-2 (I + 4||v||^2 a a' - 2 (a v' + v a')), a = J v
  if (!st.soc.empty()) {
    const Index nk = static_cast<Index>(st.soc.size());
    RMatrix plus(n, 2 * nk), minus(n, nk);
    for (Index k = 0; k < nk; ++k) {
      const SocBlock& blk = st.soc[static_cast<size_t>(k)];
      const RVector& v = w.soc_v[static_cast<size_t>(k)];
      RVector pa = RVector::Zero(n), pv = RVector::Zero(n);
      for (int r = 0; r < blk.size; ++r) {
        const double ar = r == 0 ? v(0) : -v(r);
        for (int p = outer[blk.offset + r]; p < outer[blk.offset + r + 1]; ++p) {
          pa(inner[p]) += ar * val[p];
          pv(inner[p]) += v(r) * val[p];
        }
      }
      const double ie2 = weight(blk.offset);
      const double c4 = 4.0 * v.squaredNorm() * ie2;
      const double h = std::sqrt(ie2);  // 2 ie2 (pa pv' + pv pa') = h^2 ((pa+pv)^2 - (pa-pv)^2)
      plus.col(2 * k) = std::sqrt(c4) * pa;
      plus.col(2 * k + 1) = h * (pa - pv);
      minus.col(k) = h * (pa + pv);
    }
    N.selfadjointView<Eigen::Lower>().rankUpdate(plus);
    N.selfadjointView<Eigen::Lower>().rankUpdate(minus, -1.0);
  }

  for (size_t k = 0; k < st.psd.size(); ++k) {
    const PsdBlock& blk = st.psd[k];
    const RMatrix R = w.psd_rti[k] * w.psd_rti[k].transpose();
    const size_t q = blk.support.size();
    for (size_t j = 0; j < q; ++j) {
      const Index cj = blk.support[j];
      for (size_t i = j; i < q; ++i) {
        const Index ci = blk.support[i];
        double acc = 0.0;
        for (const PsdEntry& e : blk.entries[i])
          for (const PsdEntry& f : blk.entries[j]) acc += e.value * f.value * R(e.a, f.a) * R(f.b, e.b);
        N(std::max(ci, cj), std::min(ci, cj)) += acc;
      }
    }
  }
  return N;
}

class NormalSolver {
 public:
  // N holds its lower triangle.
  bool factor(const RMatrix& N) {
    N_ = &N;
    llt_.compute(N);
    if (llt_.info() == Eigen::Success) return true;
    double scale = std::max(N.diagonal().cwiseAbs().maxCoeff(), 1.0);
    for (double reg = 1e-12; reg <= 1e-4; reg *= 100.0) {
      RMatrix M = N;
      M.diagonal().array() += reg * scale;
      llt_.compute(M);
      if (llt_.info() == Eigen::Success) return true;
    }
    return false;
  }
  RVector solve(const RVector& b, int refine) const {
    RVector x = llt_.solve(b);
    for (int i = 0; i < refine; ++i) x += llt_.solve(b - N_->selfadjointView<Eigen::Lower>() * x);
    return x;
  }

 private:
  const RMatrix* N_ = nullptr;
  Eigen::LLT<RMatrix> llt_;
};

struct Direction {
  RVector dx, ds, dz, ds_t, dz_t;
};

}  // namespace

double min_cone_margin(const RVector& s, const ConeDims& dims) {
  return Cone(dims).min_margin(s);
}

static IpmResult solve_equilibrated(const ConeProgram& prog, const IpmOptions& opt) {
  const Index n = prog.num_vars();
  const Index m = prog.dims.rows();
  if (prog.G.rows() != m || prog.G.cols() != n || prog.h.size() != m)
    throw Error("cone program dimensions are inconsistent");
  Structure st = analyse(prog);
  Cone cone(prog.dims);
  const SpMat& G = prog.G;
  const RVector& c = prog.c;
  const RVector& h = prog.h;
  const RVector e = cone.identity();
  const double degree = prog.dims.degree();

  IpmResult res;

  // Starting point from least squares on G.
  RMatrix GtG = RMatrix(SpMat(G.transpose() * G));
  NormalSolver ls;
  if (!ls.factor(GtG)) throw Error("constraint matrix has dependent columns");
  RVector x = ls.solve(G.transpose() * h, opt.refinement_steps);
  RVector s = h - G * x;
  RVector z = -(G * ls.solve(c, opt.refinement_steps));
  double ms = cone.min_margin(s);
  if (ms < 1.0) s += (1.0 - ms) * e;
  double mz = cone.min_margin(z);
  if (mz < 1.0) z += (1.0 - mz) * e;

  const double resx0 = std::max(1.0, c.norm());
  const double resz0 = std::max(1.0, h.norm());

  auto solve_once = [&](const Scaling& w, const NormalSolver& ns, const RVector& rx_t,
                        const RVector& rz_t, const RVector& rc) {
    Direction d;
    RVector u = cone.jordan_div(w.lambda, rc);
    RVector rhs = rx_t +
                  G.transpose() * cone.apply(w, Cone::Op::Winv, cone.apply(w, Cone::Op::Winvt, rz_t)) -
                  G.transpose() * cone.apply(w, Cone::Op::Winv, u);
    d.dx = ns.solve(rhs, opt.refinement_steps);
    RVector v = cone.apply(w, Cone::Op::Winvt, G * d.dx - rz_t);
    d.dz_t = v + u;
    d.ds_t = -v;
    d.dz = cone.apply(w, Cone::Op::Winv, d.dz_t);
    d.ds = cone.apply(w, Cone::Op::Wt, d.ds_t);
    return d;
  };

  // Refines against the unreduced equations G'dz = rx_t, G dx + ds = rz_t,
  // lambda o (ds_t + dz_t) = rc; the normal matrix alone loses accuracy near
  // the boundary.
  auto newton = [&](const Scaling& w, const NormalSolver& ns, const RVector& rx_t,
                    const RVector& rz_t, const RVector& rc) {
    Direction d = solve_once(w, ns, rx_t, rz_t, rc);
    for (int r = 0; r < opt.refinement_steps; ++r) {
      RVector e1 = rx_t - G.transpose() * d.dz;
      RVector e2 = rz_t - G * d.dx - d.ds;
      RVector e3 = rc - cone.jordan(w.lambda, d.ds_t + d.dz_t);
      Direction c = solve_once(w, ns, e1, e2, e3);
      d.dx += c.dx;
      d.ds += c.ds;
      d.dz += c.dz;
      d.ds_t += c.ds_t;
      d.dz_t += c.dz_t;
    }
    return d;
  };

  auto fill = [&](SolveStatus status, int it) {
    res.x = x;
    res.s = s;
    res.z = z;
    res.status = status;
    res.iterations = it;
    res.primal_objective = c.dot(x);
    res.dual_objective = -h.dot(z);
    res.gap = s.dot(z);
    res.primal_residual = (G * x + s - h).norm() / resz0;
    res.dual_residual = (G.transpose() * z + c).norm() / resx0;
  };

  // Near the boundary the iterates can drift once the normal matrix loses
  // accuracy; the best iterate seen is the one that gets graded, and a
  // near-optimal best iterate that stops improving ends the solve.
  constexpr int kStallIters = 5;
  double best_merit = std::numeric_limits<double>::infinity();
  int best_it = 0;
  RVector best_x = x, best_s = s, best_z = z;

  for (int it = 0; it <= opt.max_iters; ++it) {
    RVector rx = G.transpose() * z + c;
    RVector rz = G * x + s - h;
    double pcost = c.dot(x);
    double dcost = -h.dot(z);
    double gap = s.dot(z);
    double pres = rz.norm() / resz0;
    double dres = rx.norm() / resx0;
    double relgap = std::numeric_limits<double>::infinity();
    if (pcost < 0.0) relgap = gap / -pcost;
    else if (dcost > 0.0) relgap = gap / dcost;
    double scale_gap = gap / (1.0 + std::abs(pcost));

    bool feas = pres <= opt.feastol && dres <= opt.feastol;
    // On scaled data the residual norms are not scale free; the objective
    // gap is, and must close too.
    const double obj_gap = std::abs(pcost - dcost);
    bool obj_ok = obj_gap <= opt.abstol || obj_gap <= opt.reltol * (1.0 + std::abs(pcost));
    if (feas && obj_ok && (gap <= opt.abstol || relgap <= opt.reltol || scale_gap <= opt.reltol)) {
      fill(SolveStatus::optimal, it);
      return res;
    }
    const double merit = std::max({pres, dres, scale_gap});
    if (merit < best_merit) {
      best_merit = merit;
      best_it = it;
      best_x = x;
      best_s = s;
      best_z = z;
    } else if (it - best_it >= kStallIters && best_merit <= std::max(opt.near_feastol, opt.near_reltol)) {
      break;
    }
    // Primal infeasibility certificate: G'z ~ 0 with h'z < 0.
    double hz = h.dot(z);
    if (hz < 0.0) {
      double atz = (G.transpose() * z).norm();
      if (atz / -hz <= opt.feastol && cone.min_margin(z) >= 0.0 && it > 0) {
        fill(SolveStatus::infeasible, it);
        return res;
      }
    }
    if (it == opt.max_iters) break;

    Scaling w = cone.scaling(s, z);
    RMatrix N = normal_matrix(st, w);
    NormalSolver ns;
    if (!ns.factor(N)) break;

    const RVector& lam = w.lambda;
    RVector lamsq = cone.jordan(lam, lam);
    double mu = lam.squaredNorm() / degree;

    Direction aff = newton(w, ns, -rx, -rz, -lamsq);
    double a_aff = std::min({1.0, cone.max_step(lam, aff.ds_t), cone.max_step(lam, aff.dz_t)});
    double sig = (lam + a_aff * aff.ds_t).dot(lam + a_aff * aff.dz_t) / lam.squaredNorm();
    sig = std::clamp(sig, 0.0, 1.0);
    sig = sig * sig * sig;

    RVector rc = -lamsq - cone.jordan(aff.ds_t, aff.dz_t) + sig * mu * e;
    Direction cmb = newton(w, ns, -rx, -rz, rc);
    double a_max = std::min(cone.max_step(lam, cmb.ds_t), cone.max_step(lam, cmb.dz_t));
    double alpha = std::min(1.0, opt.step_fraction * a_max);
    if (!std::isfinite(alpha) || alpha <= 1e-14) {
      fill(SolveStatus::numerical_failure, it);
      break;
    }
    // The step is taken in scaled coordinates; close to the boundary the
    // unscaled point can round onto or past it, so back off until it is interior.
    RVector sn = s + alpha * cmb.ds;
    RVector zn = z + alpha * cmb.dz;
    for (int bt = 0; bt < 40 && !(cone.min_margin(sn) > 0.0 && cone.min_margin(zn) > 0.0); ++bt) {
      alpha *= 0.5;
      sn = s + alpha * cmb.ds;
      zn = z + alpha * cmb.dz;
    }
    RVector xn = x + alpha * cmb.dx;
    if (!xn.allFinite() || !sn.allFinite() || !zn.allFinite()) break;
    x = std::move(xn);
    s = std::move(sn);
    z = std::move(zn);
    res.iterations = it + 1;
  }

  // Out of iterations or stalled. When the primal has converged but the
  // multipliers have drifted, the least-norm correction that restores dual
  // feasibility exactly often still lies in the dual cone; grade the polished
  // last iterate if it certifies, otherwise the best iterate.
  const int iters = res.iterations;
  auto grade = [&](double dres) {
    double pcost = c.dot(x);
    double pres = (G * x + s - h).norm() / resz0;
    // s'z alone does not bound the objective error once the multipliers drift.
    double gap = std::max(std::abs(s.dot(z)), std::abs(pcost + h.dot(z)));
    return pres <= opt.near_feastol && dres <= opt.near_feastol &&
           gap / (1.0 + std::abs(pcost)) <= opt.near_reltol && cone.min_margin(s) >= 0.0 &&
           cone.min_margin(z) > 0.0;
  };
  // An uncertified result returns the last iterate, whose primal part is the
  // most advanced.
  const RVector last_x = x, last_s = s, last_z = z;
  RVector zp = z - G * ls.solve(G.transpose() * z + c, opt.refinement_steps);
  if (zp.allFinite()) {
    z = zp;
    if (grade((G.transpose() * z + c).norm() / resx0)) {
      fill(SolveStatus::near_optimal, iters);
      return res;
    }
  }
  x = best_x;
  s = best_s;
  z = best_z;
  if (grade((G.transpose() * z + c).norm() / resx0)) {
    fill(SolveStatus::near_optimal, iters);
    return res;
  }
  x = last_x;
  s = last_s;
  z = last_z;
  fill(SolveStatus::numerical_failure, iters);
  return res;
}

void write_triplets(const ConeProgram& prog, std::ostream& out) {
  out << std::setprecision(17);
  out << "conic-triplets 1\n";
  out << "dims " << prog.num_vars() << ' ' << prog.dims.rows() << ' ' << prog.dims.nonneg << ' '
      << prog.dims.soc.size();
  for (int s : prog.dims.soc) out << ' ' << s;
  out << ' ' << prog.dims.psd.size();
  for (int p : prog.dims.psd) out << ' ' << p;
  out << "\nc";
  for (Index i = 0; i < prog.c.size(); ++i) out << ' ' << prog.c(i);
  out << "\nh";
  for (Index i = 0; i < prog.h.size(); ++i) out << ' ' << prog.h(i);
  out << "\nG " << prog.G.nonZeros() << '\n';
  for (int k = 0; k < prog.G.outerSize(); ++k)
    for (SpMat::InnerIterator it(prog.G, k); it; ++it)
      out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

ConeProgram read_triplets(std::istream& in) {
  auto expect = [&](const std::string& word) {
    std::string tok;
    if (!(in >> tok) || tok != word) throw Error("triplet file: expected '" + word + "'");
  };
  ConeProgram prog;
  expect("conic-triplets");
  int version = 0;
  in >> version;
  if (version != 1) throw Error("triplet file: unsupported version");
  expect("dims");
  Index n = 0, m = 0;
  size_t nsoc = 0, npsd = 0;
  in >> n >> m >> prog.dims.nonneg >> nsoc;
  prog.dims.soc.resize(nsoc);
  for (auto& s : prog.dims.soc) in >> s;
  in >> npsd;
  prog.dims.psd.resize(npsd);
  for (auto& p : prog.dims.psd) in >> p;
  if (!in || prog.dims.rows() != m) throw Error("triplet file: bad dims line");
  expect("c");
  prog.c.resize(n);
  for (Index i = 0; i < n; ++i) in >> prog.c(i);
  expect("h");
  prog.h.resize(m);
  for (Index i = 0; i < m; ++i) in >> prog.h(i);
  expect("G");
  Index nnz = 0;
  in >> nnz;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(nnz));
  for (Index k = 0; k < nnz; ++k) {
    Index r, col;
    double v;
    in >> r >> col >> v;
    trip.emplace_back(r, col, v);
  }
  if (!in) throw Error("triplet file: truncated");
  prog.G = SpMat(m, n);
  prog.G.setFromTriplets(trip.begin(), trip.end());
  return prog;
}

}  // namespace risopt::conic

namespace risopt::conic {

// Rows are scaled by one positive factor per cone (so every cone maps onto
// itself) and columns by one factor each, Ruiz style, until all row and
// column infinity norms are near one. Strong and weak sensors otherwise put
// row norms six orders of magnitude apart and the normal equations lose the
// accuracy the dual residual needs.
IpmResult solve_interior_point(const ConeProgram& prog, const IpmOptions& opt) {
  const Index n = prog.num_vars();
  const Index m = prog.dims.rows();
  if (prog.G.rows() != m || prog.G.cols() != n || prog.h.size() != m)
    throw Error("cone program dimensions are inconsistent");

  // Cone index of every row.
  std::vector<Index> group(static_cast<std::size_t>(m));
  Index row = 0, g = 0;
  for (int i = 0; i < prog.dims.nonneg; ++i) group[row++] = g++;
  for (int q : prog.dims.soc) {
    for (int i = 0; i < q; ++i) group[row++] = g;
    ++g;
  }
  for (int p : prog.dims.psd) {
    for (int i = 0; i < p * p; ++i) group[row++] = g;
    ++g;
  }

  constexpr int kPasses = 20;
  constexpr double kTol = 0.1;
  RVector rs = RVector::Ones(m), cs = RVector::Ones(n);
  SpMat G = prog.G;
  for (int pass = 0; pass < kPasses; ++pass) {
    RVector gnorm = RVector::Zero(g), cnorm = RVector::Zero(n);
    for (Index j = 0; j < G.outerSize(); ++j)
      for (SpMat::InnerIterator it(G, j); it; ++it) {
        const double a = std::abs(it.value());
        Index k = group[static_cast<std::size_t>(it.row())];
        gnorm[k] = std::max(gnorm[k], a);
        cnorm[j] = std::max(cnorm[j], a);
      }
    double worst = 0.0;
    for (Index k = 0; k < g; ++k)
      if (gnorm[k] > 0.0) worst = std::max(worst, std::abs(std::log(gnorm[k])));
    for (Index j = 0; j < n; ++j)
      if (cnorm[j] > 0.0) worst = std::max(worst, std::abs(std::log(cnorm[j])));
    if (worst < kTol) break;
    RVector rstep(m), cstep(n);
    for (Index i = 0; i < m; ++i) {
      double v = gnorm[group[static_cast<std::size_t>(i)]];
      rstep[i] = v > 0.0 ? 1.0 / std::sqrt(v) : 1.0;
    }
    for (Index j = 0; j < n; ++j) cstep[j] = cnorm[j] > 0.0 ? 1.0 / std::sqrt(cnorm[j]) : 1.0;
    G = rstep.asDiagonal() * G * cstep.asDiagonal();
    rs.array() *= rstep.array();
    cs.array() *= cstep.array();
  }

  ConeProgram scaled{cs.cwiseProduct(prog.c), G, rs.cwiseProduct(prog.h), prog.dims};
  IpmResult res = solve_equilibrated(scaled, opt);
  res.x = cs.cwiseProduct(res.x);
  res.s = res.s.cwiseQuotient(rs);
  res.z = rs.cwiseProduct(res.z);
  res.primal_residual = (prog.G * res.x + res.s - prog.h).norm() / std::max(1.0, prog.h.norm());
  res.dual_residual = (prog.G.transpose() * res.z + prog.c).norm() / std::max(1.0, prog.c.norm());
  return res;
}

}  // namespace risopt::conic
