#pragma once

// Small dense LPs of the form
//   minimize c^T y  subject to  lo <= y <= hi,  A y >= b
// solved exactly (up to rounding) by a two-phase tableau simplex with
// Bland's anti-cycling rule.

#include "types.hpp"

#include <limits>
#include <vector>

namespace eigengreedy {

struct LpInstance {
  VecR objective;   // Q
  VecR lo, hi;      // box, Q each
  MatR rows;        // J x Q
  VecR rhs;         // J
};

struct LpResult {
  VecR y;
  double value = 0.0;
  bool relaxed = false;   // rhs had to be loosened to become feasible
  int pivots = 0;
};

struct LpOptions {
  double pivot_tol = 1e-12;
  double feas_tol = 1e-11;
  double relax = 1e-10;
  int max_pivots = 100000;
};

namespace detail {

struct Tableau {
  MatR t;                  // (m+1) x (N+1); last row = objective, last col = rhs
  std::vector<int> basis;  // m entries
  int pivots = 0;

  int m() const { return static_cast<int>(t.rows()) - 1; }
  int N() const { return static_cast<int>(t.cols()) - 1; }

  void pivot(int r, int c) {
    t.row(r) /= t(r, c);
    const auto rows = t.rows();
    for (Eigen::Index i = 0; i < rows; ++i)
      if (i != r && t(i, c) != 0.0) t.row(i) -= t(i, c) * t.row(r);
    basis[r] = c;
    ++pivots;
  }

  // Minimize the objective row; columns >= allowed are barred from entering.
  // Returns false only if unbounded.
  bool run(int allowed, const LpOptions& o) {
    const double ctol = o.pivot_tol * std::max(1.0, t.row(m()).head(allowed).cwiseAbs().maxCoeff());
    while (true) {
      if (pivots > o.max_pivots) throw numerical_error("lp: pivot limit exceeded");
      int enter = -1;
      for (int j = 0; j < allowed; ++j)
        if (t(m(), j) < -ctol) {
          enter = j;
          break;
        }
      if (enter < 0) return true;
      std::size_t leave = basis.size();
      double best = std::numeric_limits<double>::infinity();
      const Eigen::Index rhs = N();
      for (std::size_t i = 0; i < basis.size(); ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        const double a = t(row, enter);
        if (a <= o.pivot_tol) continue;
        const double ratio = t(row, rhs) / a;
        const double tie = 1e-15 * std::max(1.0, std::abs(ratio));
        if (leave == basis.size() || ratio < best - tie || (std::abs(ratio - best) <= tie && basis[i] < basis[leave])) {
          best = ratio;
          leave = i;
        }
      }
      if (leave == basis.size()) return false;
      pivot(static_cast<int>(leave), enter);
    }
  }
};

inline LpResult solve_once(const LpInstance& in, const VecR& rhs, const LpOptions& o, bool& feasible) {
  const int Q = static_cast<int>(in.objective.size());
  const int J = static_cast<int>(in.rows.rows());
  const VecR u = in.hi - in.lo;
  const VecR b1 = rhs - in.rows * in.lo;

  // columns: z (Q) | s (J) | t (Q) | artificials
  std::vector<int> need_art;
  for (int i = 0; i < J; ++i)
    if (b1[i] > 0) need_art.push_back(i);
  const int nart = static_cast<int>(need_art.size());
  const int N = Q + J + Q + nart;
  const int m = J + Q;
  Tableau T;
  T.t = MatR::Zero(m + 1, N + 1);
  T.basis.assign(m, -1);
  int a = 0;
  for (int i = 0; i < J; ++i) {
    if (b1[i] > 0) {  // A z - s + art = b1
      T.t.row(i).head(Q) = in.rows.row(i);
      T.t(i, Q + i) = -1.0;
      T.t(i, Q + J + Q + a) = 1.0;
      T.t(i, N) = b1[i];
      T.basis[i] = Q + J + Q + a;
      ++a;
    } else {  // -A z + s = -b1
      T.t.row(i).head(Q) = -in.rows.row(i);
      T.t(i, Q + i) = 1.0;
      T.t(i, N) = -b1[i];
      T.basis[i] = Q + i;
    }
  }
  for (int q = 0; q < Q; ++q) {
    T.t(J + q, q) = 1.0;
    T.t(J + q, Q + J + q) = 1.0;
    T.t(J + q, N) = u[q];
    T.basis[J + q] = Q + J + q;
  }

  // phase 1: minimize sum of artificials
  if (nart) {
    for (int c = Q + J + Q; c < N; ++c) T.t(m, c) = 1.0;
    for (int i = 0; i < J; ++i)
      if (T.basis[i] >= Q + J + Q) T.t.row(m) -= T.t.row(i);
    T.run(N, o);
    const double infeas = -T.t(m, N);
    const double scale = 1.0 + b1.cwiseAbs().maxCoeff();
    if (infeas > o.feas_tol * scale) {
      feasible = false;
      return {};
    }
    // drive zero-level artificials out of the basis where possible
    for (int i = 0; i < m; ++i) {
      if (T.basis[i] < Q + J + Q) continue;
      int c = -1;
      for (int j = 0; j < Q + J + Q; ++j)
        if (std::abs(T.t(i, j)) > o.pivot_tol) {
          c = j;
          break;
        }
      if (c >= 0) T.pivot(i, c);
    }
  }
  feasible = true;

  // phase 2 on the original objective in z (artificial columns barred)
  T.t.row(m).setZero();
  T.t.row(m).head(Q) = in.objective.transpose();
  for (int i = 0; i < m; ++i) {
    const int bcol = T.basis[i];
    if (bcol < N && T.t(m, bcol) != 0.0) T.t.row(m) -= T.t(m, bcol) * T.t.row(i);
  }
  if (!T.run(Q + J + Q, o)) throw numerical_error("lp: unbounded (box should prevent this)");

  VecR z = VecR::Zero(Q);
  for (int i = 0; i < m; ++i)
    if (T.basis[i] < Q) z[T.basis[i]] = T.t(i, N);
  z = z.cwiseMax(0.0).cwiseMin(u);
  LpResult r;
  r.y = in.lo + z;
  r.value = in.objective.dot(r.y);
  r.pivots = T.pivots;
  return r;
}

}  // namespace detail

inline LpResult solve_lp(const LpInstance& in, const LpOptions& o = {}) {
  const auto Q = in.objective.size();
  if (in.lo.size() != Q || in.hi.size() != Q || (in.rows.rows() > 0 && in.rows.cols() != Q) ||
      in.rows.rows() != in.rhs.size())
    throw precondition_error("solve_lp: inconsistent instance dimensions");
  for (Eigen::Index q = 0; q < Q; ++q)
    if (!(in.lo[q] <= in.hi[q])) throw precondition_error("solve_lp: empty box");
  bool feasible = false;
  LpResult r = detail::solve_once(in, in.rhs, o, feasible);
  if (feasible) return r;
  VecR relaxed = in.rhs;
  for (Eigen::Index i = 0; i < relaxed.size(); ++i) relaxed[i] -= o.relax * (1.0 + std::abs(relaxed[i]));
  r = detail::solve_once(in, relaxed, o, feasible);
  if (!feasible) throw numerical_error("solve_lp: infeasible after rhs relaxation (inconsistent constraint data)");
  r.relaxed = true;
  return r;
}

}  // namespace eigengreedy
