#pragma once

// Independent reference computations shared by the unit and acceptance tests.
// Nothing here uses the reduced-order machinery under test except to build
// states; every check is against dense full-order linear algebra.

#include <eigengreedy/eigengreedy.hpp>

#include <functional>
#include <random>

namespace oracle {

using namespace eigengreedy;

/// Minimum of the LP by enumerating every vertex of the polytope
/// {lo <= y <= hi, rows * y >= rhs}. `feasible` is false if there is none.
inline double lp_vertices(const LpInstance& in, bool& feasible) {
  const int Q = static_cast<int>(in.objective.size());
  const int J = static_cast<int>(in.rows.rows());
  std::vector<VecR> A;
  std::vector<double> b;
  for (int q = 0; q < Q; ++q) {
    VecR e = VecR::Zero(Q);
    e[q] = 1;
    A.push_back(e);
    b.push_back(in.lo[q]);
    A.push_back(-e);
    b.push_back(-in.hi[q]);
  }
  for (int j = 0; j < J; ++j) {
    A.push_back(in.rows.row(j).transpose());
    b.push_back(in.rhs[j]);
  }
  const int C = static_cast<int>(A.size());
  double best = std::numeric_limits<double>::infinity();
  feasible = false;
  std::vector<int> idx(Q);
  std::function<void(int, int)> rec = [&](int start, int d) {
    if (d == Q) {
      MatR M(Q, Q);
      VecR rb(Q);
      for (int i = 0; i < Q; ++i) {
        M.row(i) = A[idx[i]].transpose();
        rb[i] = b[idx[i]];
      }
      Eigen::FullPivLU<MatR> lu(M);
      if (lu.rank() < Q) return;
      VecR y = lu.solve(rb);
      for (int c = 0; c < C; ++c)
        if (A[c].dot(y) < b[c] - 1e-9) return;
      feasible = true;
      best = std::min(best, in.objective.dot(y));
      return;
    }
    for (int i = start; i < C; ++i) {
      idx[d] = i;
      rec(i + 1, d + 1);
    }
  };
  rec(0, 0);
  return best;
}

/// Random LP with Q variables and J halfspaces that contains a known point.
inline LpInstance random_lp(std::mt19937_64& rng, int Q, int J) {
  std::uniform_real_distribution<double> U(-1, 1);
  LpInstance in;
  in.objective.resize(Q);
  in.lo.resize(Q);
  in.hi.resize(Q);
  in.rows.resize(J, Q);
  in.rhs.resize(J);
  VecR y0(Q);
  for (int q = 0; q < Q; ++q) {
    in.objective[q] = U(rng);
    const double a = U(rng), c = U(rng);
    in.lo[q] = std::min(a, c);
    in.hi[q] = std::max(a, c) + 1e-3;
    y0[q] = in.lo[q] + (in.hi[q] - in.lo[q]) * (0.5 + 0.5 * U(rng));
  }
  for (int j = 0; j < J; ++j) {
    for (int q = 0; q < Q; ++q) in.rows(j, q) = U(rng);
    in.rhs[j] = in.rows.row(j).dot(y0) - 0.3 * std::abs(U(rng));
  }
  return in;
}

template <class Scalar>
VecR random_mu(const AffineFamily<Scalar>& f, std::mt19937_64& rng) {
  VecR mu(f.p);
  for (int d = 0; d < f.p; ++d) mu[d] = std::uniform_real_distribution<double>(f.domain[d].first, f.domain[d].second)(rng);
  return mu;
}

/// Reduced state from `snaps` random-parameter snapshots (lowest t clusters
/// each) plus `extra` random directions.
template <class Scalar>
RomState<Scalar> random_state(const AffineFamily<Scalar>& f, std::mt19937_64& rng, int snaps, int t, int extra) {
  auto st = make_state(f);
  for (int j = 0; j < snaps; ++j) {
    VecR mu = random_mu(f, rng);
    add_snapshot(st, f, mu, lowest_clusters(f, mu, t));
  }
  if (extra > 0) {
    std::normal_distribution<double> N;
    Mat<Scalar> X(f.n, extra);
    for (Eigen::Index i = 0; i < X.size(); ++i) {
      if constexpr (is_complex<Scalar>::value)
        X.data()[i] = Scalar(N(rng), N(rng));
      else
        X.data()[i] = N(rng);
    }
    orth_extend(st, f, X);
  }
  return st;
}

/// Dense spectrum with eigenvectors.
template <class Scalar>
EigenPairs<Scalar> dense(const AffineFamily<Scalar>& f, const VecR& mu) {
  return dense_eig<Scalar>(assemble_dense(f, mu));
}

/// Ground eigenspace (first cluster) and gap from the dense oracle.
template <class Scalar>
struct Ground {
  Mat<Scalar> W;
  double lambda1 = 0, gap = 0;
  int m1 = 0;
};

template <class Scalar>
Ground<Scalar> ground(const AffineFamily<Scalar>& f, const VecR& mu, ClusterTol tol = {}) {
  auto ep = dense(f, mu);
  auto cl = cluster(ep.values, tol);
  Ground<Scalar> g;
  g.m1 = cl.multiplicities[0];
  g.W = ep.vectors.leftCols(g.m1);
  g.lambda1 = ep.values[0];
  g.gap = cl.count() > 1 ? ep.values[g.m1] - ep.values[0] : 0.0;
  return g;
}

/// ||A(mu) X - X diag(shifts)|| computed directly in the full space.
template <class Scalar>
double direct_residual(const AffineFamily<Scalar>& f, const VecR& mu, const Mat<Scalar>& X, const VecR& shifts) {
  Mat<Scalar> R = assemble_dense(f, mu) * X - X * shifts.cast<Scalar>().asDiagonal();
  if (R.cols() == 0) return 0.0;
  Eigen::JacobiSVD<Mat<Scalar>> svd(R);
  return svd.singularValues()(0);
}

}  // namespace oracle
