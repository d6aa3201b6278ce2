#pragma once

// Test families: spin chains built from Kronecker-embedded site operators,
// a seeded random quadratic family and two small analytic examples.

#include "affine_model.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <cstdint>
#include <random>
#include <set>

namespace eigengreedy {

using cplx = std::complex<double>;
using SpC = SpMat<cplx>;

namespace spin {

inline SpC from_dense(const Eigen::MatrixXcd& D) {
  SpC S = D.sparseView();
  S.makeCompressed();
  return S;
}

// Pauli matrices without the 1/2 factor.
inline SpC half_x() { return from_dense((Eigen::MatrixXcd(2, 2) << 0, 1, 1, 0).finished()); }
inline SpC half_y() { return from_dense((Eigen::MatrixXcd(2, 2) << 0, cplx(0, -1), cplx(0, 1), 0).finished()); }
inline SpC half_z() { return from_dense((Eigen::MatrixXcd(2, 2) << 1, 0, 0, -1).finished()); }

inline SpC one_x() {
  const double s = 1.0 / std::sqrt(2.0);
  return from_dense((Eigen::MatrixXcd(3, 3) << 0, s, 0, s, 0, s, 0, s, 0).finished());
}
inline SpC one_y() {
  const cplx s(0, -1.0 / std::sqrt(2.0));
  return from_dense((Eigen::MatrixXcd(3, 3) << 0, s, 0, -s, 0, s, 0, -s, 0).finished());
}
inline SpC one_z() { return from_dense((Eigen::MatrixXcd(3, 3) << 1, 0, 0, 0, 0, 0, 0, 0, -1).finished()); }

}  // namespace spin

inline SpC sparse_identity(long m) {
  SpC I(m, m);
  I.setIdentity();
  return I;
}

/// I^{(j-1)} (x) S (x) I^{(L-j)} for a local m x m Hermitian S, 1-based site j.
inline SpC spin_site_operator(int L, int j, const SpC& S) {
  if (L < 1 || j < 1 || j > L) throw precondition_error("spin_site_operator: site index out of range");
  if (S.rows() != S.cols()) throw precondition_error("spin_site_operator: local operator not square");
  const long m = S.rows();
  if (!(Eigen::MatrixXcd(S) - Eigen::MatrixXcd(S).adjoint()).isZero(0))
    throw precondition_error("spin_site_operator: local operator not Hermitian");
  long left = 1, right = 1;
  for (int a = 1; a < j; ++a) left *= m;
  for (int a = j + 1; a <= L; ++a) right *= m;
  SpC tmp = Eigen::kroneckerProduct(sparse_identity(left), S);
  SpC out = Eigen::kroneckerProduct(tmp, sparse_identity(right));
  out.makeCompressed();
  return out;
}

namespace detail {

// Upper triangle of a Hermitian complex matrix, cast to Scalar.
template <class Scalar>
SpMat<Scalar> upper_as(const SpC& H, const char* what) {
  SpC U = H.triangularView<Eigen::Upper>();
  U.prune(cplx(0.0));
  if constexpr (is_complex<Scalar>::value) {
    return U;
  } else {
    for (int c = 0; c < U.outerSize(); ++c)
      for (SpC::InnerIterator it(U, c); it; ++it)
        if (std::abs(it.value().imag()) > 1e-14 * (1 + std::abs(it.value().real())))
          throw precondition_error(std::string(what) + ": complex entries, use a complex scalar type");
    SpMat<Scalar> R = U.real();
    R.prune(0.0);
    return R;
  }
}

}  // namespace detail

/// Spin-1/2 xxz chain with open boundary:
///   A(mu) = A_1 + mu_1 A_2 - mu_2 A_3 on [-1,2.5] x [0,3.5].
template <class Scalar = double>
AffineFamily<Scalar> xxz_family(int L) {
  if (L < 2) throw precondition_error("xxz_family needs L >= 2");
  const long n = 1L << L;
  SpC A1(n, n), A2(n, n), A3(n, n);
  std::vector<SpC> X, Y, Z;
  for (int j = 1; j <= L; ++j) {
    X.push_back(spin_site_operator(L, j, spin::half_x()));
    Y.push_back(spin_site_operator(L, j, spin::half_y()));
    Z.push_back(spin_site_operator(L, j, spin::half_z()));
  }
  for (int j = 0; j + 1 < L; ++j) {
    A1 += cplx(0.25) * (SpC(X[j] * X[j + 1]) + SpC(Y[j] * Y[j + 1]));
    A2 += cplx(0.25) * SpC(Z[j] * Z[j + 1]);
  }
  for (int j = 0; j < L; ++j) A3 += cplx(0.5) * Z[j];

  AffineFamily<Scalar> f;
  f.n = static_cast<int>(n);
  f.p = 2;
  f.domain = {{-1.0, 2.5}, {0.0, 3.5}};
  f.terms = {ThetaTerm::monomial(1.0, {0, 0}), ThetaTerm::monomial(1.0, {1, 0}), ThetaTerm::monomial(-1.0, {0, 1})};
  f.matrices = {detail::upper_as<Scalar>(A1, "xxz"), detail::upper_as<Scalar>(A2, "xxz"), detail::upper_as<Scalar>(A3, "xxz")};
  f.validate();
  return f;
}

/// Spin-1 bilinear-biquadratic chain with uniaxial single-ion anisotropy:
///   A(mu) = cos(mu_1) A_1 + sin(mu_1) A_2 + mu_2 A_3 on [-pi,pi] x [-2,3].
/// The biquadratic term is (S_j . S_{j+1})^2 = sum_{a,b} S_a S_b (x) S_a S_b.
template <class Scalar = double>
AffineFamily<Scalar> blbq_family(int L) {
  if (L < 2) throw precondition_error("blbq_family needs L >= 2");
  long n = 1;
  for (int j = 0; j < L; ++j) n *= 3;
  const SpC loc[3] = {spin::one_x(), spin::one_y(), spin::one_z()};
  const SpC I3 = sparse_identity(3);
  SpC A1(n, n), A2(n, n), A3(n, n);

  // two-site bilinear operator on C^3 (x) C^3, then embedded at (j, j+1)
  SpC bil(9, 9);
  for (int a = 0; a < 3; ++a) bil += SpC(Eigen::kroneckerProduct(loc[a], loc[a]));
  SpC biq = bil * bil;
  for (int j = 1; j < L; ++j) {
    long left = 1, right = 1;
    for (int a = 1; a < j; ++a) left *= 3;
    for (int a = j + 2; a <= L; ++a) right *= 3;
    SpC t1 = Eigen::kroneckerProduct(sparse_identity(left), bil);
    A1 += SpC(Eigen::kroneckerProduct(t1, sparse_identity(right)));
    SpC t2 = Eigen::kroneckerProduct(sparse_identity(left), biq);
    A2 += SpC(Eigen::kroneckerProduct(t2, sparse_identity(right)));
  }
  const SpC z2 = loc[2] * loc[2];
  for (int j = 1; j <= L; ++j) A3 += spin_site_operator(L, j, z2);

  AffineFamily<Scalar> f;
  f.n = static_cast<int>(n);
  f.p = 2;
  f.domain = {{-std::numbers::pi, std::numbers::pi}, {-2.0, 3.0}};
  f.terms = {ThetaTerm::cosine(1.0, 1.0, 0), ThetaTerm::sine(1.0, 1.0, 0), ThetaTerm::monomial(1.0, {0, 1})};
  f.matrices = {detail::upper_as<Scalar>(A1, "blbq"), detail::upper_as<Scalar>(A2, "blbq"), detail::upper_as<Scalar>(A3, "blbq")};
  f.validate();
  return f;
}

/// A(mu) = mu^2 A_1 + mu A_2 on [0.1, 10]; A_q = (G + G^T)/2 with G standard
/// normal from std::mt19937_64(seed), A_1 drawn before A_2, column-major.
template <class Scalar = double>
AffineFamily<Scalar> random_quadratic_family(int n, std::uint64_t seed) {
  if (n < 2) throw precondition_error("random_quadratic_family needs n >= 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0.0, 1.0);
  AffineFamily<Scalar> f;
  f.n = n;
  f.p = 1;
  f.domain = {{0.1, 10.0}};
  f.terms = {ThetaTerm::monomial(1.0, {2}), ThetaTerm::monomial(1.0, {1})};
  for (int q = 0; q < 2; ++q) {
    MatR G(n, n);
    for (int c = 0; c < n; ++c)
      for (int r = 0; r < n; ++r) G(r, c) = N(rng);
    MatR S = 0.5 * (G + G.transpose());
    Mat<Scalar> U = S.cast<Scalar>().template triangularView<Eigen::Upper>();
    f.matrices.push_back(U.sparseView());
  }
  f.validate();
  return f;
}

/// diag(mu, mu^2 - 2, -mu) on [-2, 2]; lambda_1 has multiplicity 2 at mu = +-1.
template <class Scalar = double>
AffineFamily<Scalar> example1_family() {
  AffineFamily<Scalar> f;
  f.n = 3;
  f.p = 1;
  f.domain = {{-2.0, 2.0}};
  f.terms = {ThetaTerm::monomial(1.0, {1}), ThetaTerm::monomial(1.0, {2}), ThetaTerm::monomial(1.0, {0})};
  auto diag = [](double a, double b, double c) {
    SpMat<Scalar> D(3, 3);
    std::vector<Eigen::Triplet<Scalar>> t;
    if (a != 0) t.emplace_back(0, 0, Scalar(a));
    if (b != 0) t.emplace_back(1, 1, Scalar(b));
    if (c != 0) t.emplace_back(2, 2, Scalar(c));
    D.setFromTriplets(t.begin(), t.end());
    return D;
  };
  f.matrices = {diag(1, 0, -1), diag(0, 1, 0), diag(0, -2, 0)};
  f.validate();
  return f;
}

/// -w(mu) w(mu)^* with w_i = L_i(mu)/||L(mu)|| over Lagrange polynomials on
/// `nodes`; lambda_1 == -1 and simple for every mu. Uses rational theta terms.
template <class Scalar = double>
AffineFamily<Scalar> lagrange_rank_one_family(const std::vector<double>& nodes) {
  const int m = static_cast<int>(nodes.size());
  if (m < 2) throw precondition_error("lagrange family needs at least 2 nodes");
  if (m > 20) throw precondition_error("lagrange family supports at most 20 nodes");
  std::set<double> uniq(nodes.begin(), nodes.end());
  if (static_cast<int>(uniq.size()) != m) throw precondition_error("lagrange family: duplicate nodes");
  for (double x : nodes)
    if (x < -1.0 || x > 1.0) throw precondition_error("lagrange family: nodes must lie in [-1,1]");
  AffineFamily<Scalar> f;
  f.n = m;
  f.p = 1;
  f.domain = {{-1.0, 1.0}};
  for (int i = 0; i < m; ++i)
    for (int k = i; k < m; ++k) {
      ThetaTerm t;
      t.kind = ThetaKind::lagrange;
      t.coefficient = -1.0;
      t.nodes = nodes;
      t.i = i;
      t.k = k;
      f.terms.push_back(t);
      SpMat<Scalar> E(m, m);
      E.insert(i, k) = Scalar(1.0);
      E.makeCompressed();
      f.matrices.push_back(E);
    }
  f.validate();
  return f;
}

/// Normalized Lagrange vector w(mu) of the rank-one family.
inline VecR lagrange_vector(const std::vector<double>& nodes, double x) {
  const int m = static_cast<int>(nodes.size());
  VecR w(m);
  for (int a = 0; a < m; ++a) {
    double L = 1;
    for (int b = 0; b < m; ++b)
      if (b != a) L *= (x - nodes[b]) / (nodes[a] - nodes[b]);
    w[a] = L;
  }
  return w / w.norm();
}

}  // namespace eigengreedy
