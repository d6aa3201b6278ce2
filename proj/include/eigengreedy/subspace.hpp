#pragma once

// Reduced basis state: orthonormal basis, projected terms, second-order
// Gramians, a QR factor of the residual generators, and snapshot data.
// Everything except the members marked "offline" is independent of n.

#include "eigensolve.hpp"

#include <limits>

namespace eigengreedy {

template <class Scalar>
struct Snapshot {
  VecR mu;
  int ell = 0;
  VecR values;              // lambda_1..lambda_ell at mu
  double next_value = 0.0;  // lambda_{ell+1} (lambda_n when ell = n)
  Mat<Scalar> M;            // W^* V, ell x r
  Mat<Scalar> W;            // offline: n x ell eigenvector block
};

template <class Scalar>
struct RomState {
  int n = 0, p = 0;
  std::vector<ThetaTerm> terms;
  Box domain;
  std::vector<std::pair<double, double>> extrema;  // [lambda_min, lambda_max](A_q)

  int r = 0;
  std::vector<Mat<Scalar>> reduced;  // V^* A_q V
  std::vector<Mat<Scalar>> G;        // (A_q V)^* (A_q' V), index q*Q + q'
  // Triangular factor of the generator block [v_i, A_1 v_i, ..., A_Q v_i]_i
  // (column i*(Q+1) + k); residual norms are ||T c|| without cancellation.
  Mat<Scalar> T;
  std::vector<Snapshot<Scalar>> snapshots;

  // offline members
  Mat<Scalar> V;
  std::vector<Mat<Scalar>> AV;
  Mat<Scalar> Z;

  // provenance
  std::string kind;   // "gap", "eig" or empty
  double tol = 0.0;

  int Q() const { return static_cast<int>(terms.size()); }
  bool has_basis() const { return V.rows() == n && V.cols() == r && r > 0; }
  bool extendable() const { return static_cast<int>(AV.size()) == Q() && Z.rows() == n && (r == 0 || has_basis()); }

  VecR theta(const VecR& mu) const {
    if (mu.size() != p) throw precondition_error("parameter dimension mismatch");
    VecR th(Q());
    for (int q = 0; q < Q(); ++q) th[q] = terms[q](mu);
    return th;
  }

  /// Upper bound on ||A(mu)|| from the term enclosures.
  double norm_bound(const VecR& theta) const {
    double s = 0;
    for (int q = 0; q < Q(); ++q) s += std::abs(theta[q]) * std::max(std::abs(extrema[q].first), std::abs(extrema[q].second));
    return s;
  }
};

template <class Scalar>
RomState<Scalar> make_state(const AffineFamily<Scalar>& f, std::vector<std::pair<double, double>> extrema) {
  if (static_cast<int>(extrema.size()) != f.Q()) throw precondition_error("make_state: one extremum pair per term");
  RomState<Scalar> s;
  s.n = f.n;
  s.p = f.p;
  s.terms = f.terms;
  s.domain = f.domain;
  s.extrema = std::move(extrema);
  s.reduced.assign(f.Q(), Mat<Scalar>(0, 0));
  s.G.assign(f.Q() * f.Q(), Mat<Scalar>(0, 0));
  s.T = Mat<Scalar>(0, 0);
  s.V = Mat<Scalar>(f.n, 0);
  s.AV.assign(f.Q(), Mat<Scalar>(f.n, 0));
  s.Z = Mat<Scalar>(f.n, 0);
  return s;
}

template <class Scalar>
RomState<Scalar> make_state(const AffineFamily<Scalar>& f, const EigOptions& opt = {}) {
  return make_state(f, term_extrema(f, opt));
}

namespace detail {

template <class Scalar>
void grow_square(Mat<Scalar>& A, Eigen::Index r) {
  Mat<Scalar> B = Mat<Scalar>::Zero(r, r);
  const Eigen::Index o = A.rows();
  B.topLeftCorner(o, o) = A;
  A.swap(B);
}

template <class Scalar>
Scalar real_part(const Scalar& v) {
  if constexpr (is_complex<Scalar>::value)
    return Scalar(v.real(), 0.0);
  else
    return v;
}

// Append one generator column x to the running QR factor (Z, T).
template <class Scalar>
void qr_append(Mat<Scalar>& Z, Mat<Scalar>& T, const Vec<Scalar>& x) {
  const double eps = std::numeric_limits<double>::epsilon();
  const Eigen::Index k = Z.cols();
  Vec<Scalar> c = Vec<Scalar>::Zero(k);
  Vec<Scalar> w = x;
  for (int pass = 0; pass < 2; ++pass)
    if (k) {
      Vec<Scalar> d = Z.adjoint() * w;
      w -= Z * d;
      c += d;
    }
  const double xn = x.norm(), wn = w.norm();
  const Eigen::Index col = T.cols();
  if (wn > 64 * eps * xn && wn > 0) {
    Z.conservativeResize(Eigen::NoChange, k + 1);
    Z.col(k) = w / wn;
    Mat<Scalar> Tn = Mat<Scalar>::Zero(k + 1, col + 1);
    Tn.topLeftCorner(k, col) = T;
    Tn.col(col).head(k) = c;
    Tn(k, col) = Scalar(wn);
    T.swap(Tn);
  } else {
    T.conservativeResize(k, col + 1);
    T.col(col) = c;
  }
}

}  // namespace detail

/// Extends the basis by the components of `cols` orthogonal to the current
/// span (modified Gram-Schmidt, two sweeps). Columns whose remaining norm is
/// below `drop` times their input norm are skipped. Returns the number added.
template <class Scalar>
int orth_extend(RomState<Scalar>& s, const AffineFamily<Scalar>& f, const Mat<Scalar>& cols, double drop = 1e-12) {
  if (cols.rows() != s.n) throw precondition_error("orth_extend: columns have wrong length");
  if (!s.extendable()) throw precondition_error("orth_extend: state has no offline data (basis not stored)");
  const int Q = s.Q();
  int added = 0;
  for (Eigen::Index c = 0; c < cols.cols(); ++c) {
    Vec<Scalar> w = cols.col(c);
    const double n0 = w.norm();
    if (n0 == 0) continue;
    for (int sweep = 0; sweep < 2; ++sweep)
      for (int j = 0; j < s.r; ++j) w -= s.V.col(j) * s.V.col(j).dot(w);
    const double n1 = w.norm();
    if (s.r >= s.n || n1 < drop * n0) {
      log(LogLevel::debug, "orth_extend: dropped a linearly dependent column");
      continue;
    }
    w /= n1;
    std::vector<Vec<Scalar>> a(Q);
    for (int q = 0; q < Q; ++q) a[q] = apply_term(f, q, Mat<Scalar>(w)).col(0);

    const int r0 = s.r, r1 = s.r + 1;
    for (int q = 0; q < Q; ++q) {
      detail::grow_square(s.reduced[q], r1);
      Vec<Scalar> col = s.V.adjoint() * a[q];
      s.reduced[q].col(r0).head(r0) = col;
      s.reduced[q].row(r0).head(r0) = col.adjoint();
      s.reduced[q](r0, r0) = detail::real_part(w.dot(a[q]));
    }
    for (int q = 0; q < Q; ++q)
      for (int q2 = 0; q2 < Q; ++q2) {
        Mat<Scalar>& Gq = s.G[q * Q + q2];
        detail::grow_square(Gq, r1);
        Gq.col(r0).head(r0) = s.AV[q].adjoint() * a[q2];
        Gq.row(r0).head(r0) = (s.AV[q2].adjoint() * a[q]).adjoint();
        Gq(r0, r0) = a[q].dot(a[q2]);
      }
    detail::qr_append(s.Z, s.T, w);
    for (int q = 0; q < Q; ++q) detail::qr_append(s.Z, s.T, a[q]);

    for (auto& sn : s.snapshots) {
      if (sn.W.cols() != sn.ell) throw precondition_error("orth_extend: snapshot lacks its eigenvector block");
      sn.M.conservativeResize(sn.ell, r1);
      sn.M.col(r0) = sn.W.adjoint() * w;
    }
    s.V.conservativeResize(Eigen::NoChange, r1);
    s.V.col(r0) = w;
    for (int q = 0; q < Q; ++q) {
      s.AV[q].conservativeResize(Eigen::NoChange, r1);
      s.AV[q].col(r0) = a[q];
    }
    s.r = r1;
    ++added;
  }
  return added;
}

/// Records a full-order solve at mu as a snapshot and extends the basis with
/// its eigenvectors. Returns the number of basis columns added.
template <class Scalar>
int add_snapshot(RomState<Scalar>& s, const AffineFamily<Scalar>& f, const VecR& mu, const ClusterSolve<Scalar>& cs) {
  const int added = orth_extend(s, f, cs.pairs.vectors);
  Snapshot<Scalar> sn;
  sn.mu = mu;
  sn.ell = cs.ell;
  sn.values = cs.pairs.values;
  sn.next_value = cs.next_value;
  sn.W = cs.pairs.vectors;
  sn.M = sn.W.adjoint() * s.V;
  s.snapshots.push_back(std::move(sn));
  return added;
}

/// Drops the offline members (V, A_q V, Z, snapshot blocks) unless keep_basis.
template <class Scalar>
void strip_offline(RomState<Scalar>& s, bool keep_basis) {
  s.AV.clear();
  s.Z.resize(0, 0);
  for (auto& sn : s.snapshots) sn.W.resize(0, 0);
  if (!keep_basis) s.V.resize(0, 0);
}

/// Keeps the first `keep` basis vectors. The result is a valid (smaller)
/// online state; offline data other than V is dropped, so it cannot grow.
template <class Scalar>
RomState<Scalar> truncate(const RomState<Scalar>& s, int keep) {
  if (keep < 1 || keep > s.r) throw precondition_error("truncate: keep must lie in [1, r]");
  RomState<Scalar> t = s;
  const int Q = s.Q();
  t.r = keep;
  for (auto& A : t.reduced) A = Mat<Scalar>(A.topLeftCorner(keep, keep));
  for (auto& A : t.G) A = Mat<Scalar>(A.topLeftCorner(keep, keep));
  Mat<Scalar> T = s.T.leftCols(static_cast<Eigen::Index>(keep) * (Q + 1));
  Eigen::Index rows = T.rows();
  while (rows > 0 && T.row(rows - 1).isZero(0.0)) --rows;
  t.T = T.topRows(rows);
  for (auto& sn : t.snapshots) {
    sn.M = Mat<Scalar>(sn.M.leftCols(keep));
    sn.W.resize(0, 0);
  }
  if (s.has_basis()) t.V = Mat<Scalar>(s.V.leftCols(keep));
  t.AV.clear();
  t.Z.resize(0, 0);
  return t;
}

// ----------------------------------------------------------------------------
// online evaluation

template <class Scalar>
Mat<Scalar> reduced_assemble_theta(const RomState<Scalar>& s, const VecR& theta) {
  if (s.r < 1) throw precondition_error("reduced_assemble: empty basis");
  Mat<Scalar> H = Mat<Scalar>::Zero(s.r, s.r);
  for (int q = 0; q < s.Q(); ++q) H += Scalar(theta[q]) * s.reduced[q];
  return 0.5 * (H + H.adjoint());
}

template <class Scalar>
Mat<Scalar> reduced_assemble(const RomState<Scalar>& s, const VecR& mu) {
  return reduced_assemble_theta(s, s.theta(mu));
}

template <class Scalar>
struct ReducedSolve {
  VecR values;        // all r Ritz values, ascending
  Mat<Scalar> Y;      // r x r coefficient vectors
  EigenClustering clustering;
  bool degenerate = false;  // all Ritz values in a single cluster (c*I)

  int m1() const { return clustering.multiplicities.empty() ? 0 : clustering.multiplicities[0]; }
  double lambda1() const { return values[0]; }
};

template <class Scalar>
ReducedSolve<Scalar> reduced_smallest_theta(const RomState<Scalar>& s, const VecR& theta, ClusterTol tol = {}) {
  auto ep = dense_eig<Scalar>(reduced_assemble_theta(s, theta));
  ReducedSolve<Scalar> out;
  out.values = ep.values;
  out.Y = ep.vectors;
  out.clustering = cluster(out.values, tol);
  out.degenerate = out.clustering.count() == 1;
  return out;
}

template <class Scalar>
ReducedSolve<Scalar> reduced_smallest(const RomState<Scalar>& s, const VecR& mu, ClusterTol tol = {}) {
  return reduced_smallest_theta(s, s.theta(mu), tol);
}

/// ||A(theta) V Y - V Y diag(shifts)||_2 evaluated from the QR factor.
template <class Scalar>
double residual_block_norm(const RomState<Scalar>& s, const VecR& theta, const Mat<Scalar>& Y, const VecR& shifts) {
  const int Q = s.Q();
  const Eigen::Index m = Y.cols();
  if (m == 0) return 0.0;
  if (Y.rows() != s.r || shifts.size() != m) throw precondition_error("residual: block shape mismatch");
  if (s.T.cols() != static_cast<Eigen::Index>(s.r) * (Q + 1)) throw precondition_error("residual: state lacks its QR factor");
  Mat<Scalar> C = Mat<Scalar>::Zero(static_cast<Eigen::Index>(s.r) * (Q + 1), m);
  for (int i = 0; i < s.r; ++i) {
    C.row(static_cast<Eigen::Index>(i) * (Q + 1)) = -(Y.row(i).array() * shifts.transpose().array().template cast<Scalar>()).matrix();
    for (int q = 0; q < Q; ++q) C.row(static_cast<Eigen::Index>(i) * (Q + 1) + 1 + q) = Scalar(theta[q]) * Y.row(i);
  }
  Mat<Scalar> TC = s.T * C;
  if (TC.rows() == 0) return 0.0;
  Eigen::JacobiSVD<Mat<Scalar>> svd(TC);
  return svd.singularValues()(0);
}

/// sum_{q,q'} theta_q theta_q' G_{q,q'}  (= V^* A(mu)^2 V).
template <class Scalar>
Mat<Scalar> second_moment(const RomState<Scalar>& s, const VecR& theta) {
  const int Q = s.Q();
  Mat<Scalar> K = Mat<Scalar>::Zero(s.r, s.r);
  for (int q = 0; q < Q; ++q)
    for (int q2 = 0; q2 < Q; ++q2) K += Scalar(theta[q] * theta[q2]) * s.G[q * Q + q2];
  return 0.5 * (K + K.adjoint());
}

enum class ResidualMethod { qr, gramian };

/// ||A(mu) V w - lambda V w|| for an orthonormal reduced block w.
/// The gramian route is sqrt(max(0, lambda_max(w^* K w - lambda^2 I))),
/// which loses half the digits near zero; qr is the default.
template <class Scalar>
double residual_norm(const RomState<Scalar>& s, const VecR& mu, const Mat<Scalar>& w, double lambda,
                     ResidualMethod method = ResidualMethod::qr) {
  const VecR theta = s.theta(mu);
  if (method == ResidualMethod::qr) return residual_block_norm(s, theta, w, VecR::Constant(w.cols(), lambda));
  Mat<Scalar> M = w.adjoint() * second_moment(s, theta) * w;
  M = 0.5 * (M + M.adjoint());
  M.diagonal().array() -= Scalar(lambda * lambda);
  const double top = dense_eigenvalues<Scalar>(M).maxCoeff();
  return std::sqrt(std::max(0.0, top));
}

/// ||(I - W W^*) W'|| for orthonormal blocks; 1 when dimensions differ.
template <class Scalar>
double projector_distance(const Mat<Scalar>& W, const Mat<Scalar>& Wp, double orth_tol = 1e-8) {
  if (W.rows() != Wp.rows()) throw precondition_error("projector_distance: ambient dimensions differ");
  auto check = [&](const Mat<Scalar>& B) {
    if (B.cols() == 0) return;
    Mat<Scalar> E = B.adjoint() * B - Mat<Scalar>::Identity(B.cols(), B.cols());
    if (E.norm() > orth_tol) throw precondition_error("projector_distance: block is not orthonormal");
  };
  check(W);
  check(Wp);
  if (W.cols() != Wp.cols()) return 1.0;
  if (W.cols() == 0) return 0.0;
  Mat<Scalar> D = Wp - W * (W.adjoint() * Wp);
  Eigen::JacobiSVD<Mat<Scalar>> svd(D);
  return std::min(1.0, svd.singularValues()(0));
}

/// V * Y.
template <class Scalar>
Mat<Scalar> lift(const RomState<Scalar>& s, const Mat<Scalar>& Y) {
  if (!s.has_basis()) throw precondition_error("lift: basis not stored");
  if (Y.rows() != s.r) throw precondition_error("lift: reduced block has wrong row count");
  return s.V * Y;
}

/// Recompute projected quantities from V and compare; returns the largest
/// absolute deviation (used by the paranoid mode and tests).
template <class Scalar>
double consistency_error(const RomState<Scalar>& s, const AffineFamily<Scalar>& f) {
  if (!s.has_basis()) throw precondition_error("consistency_error: basis not stored");
  const int Q = s.Q();
  double err = (s.V.adjoint() * s.V - Mat<Scalar>::Identity(s.r, s.r)).cwiseAbs().maxCoeff();
  std::vector<Mat<Scalar>> AV(Q);
  for (int q = 0; q < Q; ++q) {
    AV[q] = apply_term(f, q, s.V);
    err = std::max(err, (s.V.adjoint() * AV[q] - s.reduced[q]).cwiseAbs().maxCoeff());
  }
  for (int q = 0; q < Q; ++q)
    for (int q2 = 0; q2 < Q; ++q2) err = std::max(err, (AV[q].adjoint() * AV[q2] - s.G[q * Q + q2]).cwiseAbs().maxCoeff());
  for (const auto& sn : s.snapshots)
    if (sn.W.cols() == sn.ell) err = std::max(err, (sn.W.adjoint() * s.V - sn.M).cwiseAbs().maxCoeff());
  return err;
}

}  // namespace eigengreedy
