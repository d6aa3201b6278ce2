#pragma once

// Parametric affine Hermitian families A(mu) = sum_q theta_q(mu) A_q and
// the parameter grids they are swept over.

#include "types.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <utility>
#include <vector>

namespace eigengreedy {

enum class ThetaKind { monomial, cosine, sine, lagrange };

inline const char* to_string(ThetaKind k) {
  switch (k) {
    case ThetaKind::monomial: return "monomial";
    case ThetaKind::cosine: return "cosine";
    case ThetaKind::sine: return "sine";
    case ThetaKind::lagrange: return "lagrange";
  }
  return "?";
}

/// One scalar coefficient function theta_q.
///   monomial: c * prod_d mu_d^e_d
///   cosine / sine: c * cos(f * mu_axis), c * sin(f * mu_axis)
///   lagrange: c * L_i(mu_0) L_k(mu_0) / sum_j L_j(mu_0)^2 over `nodes`.
/// The lagrange kind is rational and only exists for the rank-one test
/// family; the lower-bound machinery refuses families that use it.
struct ThetaTerm {
  ThetaKind kind = ThetaKind::monomial;
  double coefficient = 1.0;
  std::vector<int> exponents;
  double frequency = 1.0;
  int axis = 0;
  std::vector<double> nodes;
  int i = 0, k = 0;

  static ThetaTerm monomial(double c, std::vector<int> e) {
    ThetaTerm t;
    t.kind = ThetaKind::monomial;
    t.coefficient = c;
    t.exponents = std::move(e);
    return t;
  }
  static ThetaTerm cosine(double c, double freq, int ax) {
    ThetaTerm t;
    t.kind = ThetaKind::cosine;
    t.coefficient = c;
    t.frequency = freq;
    t.axis = ax;
    return t;
  }
  static ThetaTerm sine(double c, double freq, int ax) {
    ThetaTerm t = cosine(c, freq, ax);
    t.kind = ThetaKind::sine;
    return t;
  }

  bool rational() const { return kind == ThetaKind::lagrange; }

  /// Throws precondition_error if the descriptor does not fit dimension p.
  void check(int p) const {
    switch (kind) {
      case ThetaKind::monomial:
        if (static_cast<int>(exponents.size()) != p)
          throw precondition_error("monomial term: exponents length " + std::to_string(exponents.size()) +
                                   " != parameter dimension " + std::to_string(p));
        for (int e : exponents)
          if (e < 0) throw precondition_error("monomial term: negative exponent");
        break;
      case ThetaKind::cosine:
      case ThetaKind::sine:
        if (axis < 0 || axis >= p)
          throw precondition_error("trigonometric term: axis " + std::to_string(axis) + " out of range");
        break;
      case ThetaKind::lagrange: {
        if (p != 1) throw precondition_error("lagrange term needs a scalar parameter");
        const int m = static_cast<int>(nodes.size());
        if (m < 1 || i < 0 || k < 0 || i >= m || k >= m) throw precondition_error("lagrange term: bad node index");
        break;
      }
    }
  }

  double operator()(const VecR& mu) const {
    switch (kind) {
      case ThetaKind::monomial: {
        double v = coefficient;
        for (std::size_t d = 0; d < exponents.size(); ++d)
          for (int e = 0; e < exponents[d]; ++e) v *= mu[static_cast<Eigen::Index>(d)];
        return v;
      }
      case ThetaKind::cosine: return coefficient * std::cos(frequency * mu[axis]);
      case ThetaKind::sine: return coefficient * std::sin(frequency * mu[axis]);
      case ThetaKind::lagrange: {
        const double x = mu[0];
        const std::size_t m = nodes.size();
        double li = 0, lk = 0, s = 0;
        for (std::size_t a = 0; a < m; ++a) {
          double L = 1;
          for (std::size_t b = 0; b < m; ++b)
            if (b != a) L *= (x - nodes[b]) / (nodes[a] - nodes[b]);
          s += L * L;
          if (static_cast<int>(a) == i) li = L;
          if (static_cast<int>(a) == k) lk = L;
        }
        return coefficient * li * lk / s;
      }
    }
    return 0.0;
  }
};

using Box = std::vector<std::pair<double, double>>;

inline bool inside(const Box& box, const VecR& mu, double slack = 0.0) {
  for (std::size_t d = 0; d < box.size(); ++d) {
    const double x = mu[static_cast<Eigen::Index>(d)];
    if (x < box[d].first - slack || x > box[d].second + slack) return false;
  }
  return true;
}

/// A(mu) = sum_q theta_q(mu) A_q with every A_q stored as its upper triangle.
/// The strictly lower part is never stored, so the assembled matrix is
/// Hermitian by construction.
template <class Scalar>
struct AffineFamily {
  using scalar_type = Scalar;

  int n = 0;
  int p = 0;
  std::vector<ThetaTerm> terms;
  std::vector<SpMat<Scalar>> matrices;
  Box domain;

  int Q() const { return static_cast<int>(terms.size()); }

  bool rational() const {
    return std::any_of(terms.begin(), terms.end(), [](const ThetaTerm& t) { return t.rational(); });
  }

  void validate() const {
    if (n < 2) throw precondition_error("family dimension n must be >= 2");
    if (terms.empty()) throw precondition_error("family needs Q >= 1 terms");
    if (matrices.size() != terms.size()) throw precondition_error("term/matrix count mismatch");
    if (static_cast<int>(domain.size()) != p) throw precondition_error("domain box dimension != p");
    for (auto& [lo, hi] : domain)
      if (!(lo <= hi)) throw precondition_error("domain axis with lo > hi");
    for (const auto& t : terms) t.check(p);
    for (const auto& A : matrices) {
      if (A.rows() != n || A.cols() != n) throw precondition_error("term matrix has wrong shape");
      for (int c = 0; c < A.outerSize(); ++c)
        for (typename SpMat<Scalar>::InnerIterator it(A, c); it; ++it) {
          if (it.row() > it.col()) throw precondition_error("term matrix stores a strictly lower entry");
          if constexpr (is_complex<Scalar>::value)
            if (it.row() == it.col() && it.value().imag() != 0.0)
              throw precondition_error("term matrix has a non-real diagonal entry");
        }
    }
  }
};

template <class Scalar>
VecR evaluate_theta(const AffineFamily<Scalar>& f, const VecR& mu) {
  if (mu.size() != f.p)
    throw precondition_error("parameter has dimension " + std::to_string(mu.size()) + ", family expects " +
                             std::to_string(f.p));
  if (!inside(f.domain, mu, 1e-12)) {
    std::ostringstream os;
    os << "parameter (" << mu.transpose() << ") lies outside the domain box";
    warn(os.str());
  }
  VecR th(f.Q());
  for (int q = 0; q < f.Q(); ++q) th[q] = f.terms[q](mu);
  return th;
}

/// Theta values without the domain warning (used on grids already checked).
template <class Scalar>
VecR theta_unchecked(const AffineFamily<Scalar>& f, const VecR& mu) {
  VecR th(f.Q());
  for (int q = 0; q < f.Q(); ++q) th[q] = f.terms[q](mu);
  return th;
}

/// Full Hermitian sparse matrix (both triangles) for given theta values.
template <class Scalar>
SpMat<Scalar> assemble_theta(const AffineFamily<Scalar>& f, const VecR& theta) {
  SpMat<Scalar> U(f.n, f.n);
  for (int q = 0; q < f.Q(); ++q)
    if (theta[q] != 0.0) U += Scalar(theta[q]) * f.matrices[q];
  U.prune(Scalar(0));
  SpMat<Scalar> full = U.template selfadjointView<Eigen::Upper>();
  return full;
}

template <class Scalar>
SpMat<Scalar> assemble(const AffineFamily<Scalar>& f, const VecR& mu) {
  return assemble_theta(f, evaluate_theta(f, mu));
}

template <class Scalar>
Mat<Scalar> assemble_dense(const AffineFamily<Scalar>& f, const VecR& mu) {
  return Mat<Scalar>(assemble(f, mu));
}

/// y = A(theta) X without forming A(theta).
template <class Scalar>
Mat<Scalar> apply_theta(const AffineFamily<Scalar>& f, const VecR& theta, const Mat<Scalar>& X) {
  if (X.rows() != f.n) throw precondition_error("apply: operand has wrong row count");
  Mat<Scalar> Y = Mat<Scalar>::Zero(f.n, X.cols());
  Mat<Scalar> AX(f.n, X.cols());
  for (int q = 0; q < f.Q(); ++q) {
    if (theta[q] == 0.0) continue;
    AX.noalias() = f.matrices[q].template selfadjointView<Eigen::Upper>() * X;
    Y += Scalar(theta[q]) * AX;
  }
  return Y;
}

template <class Scalar>
Vec<Scalar> apply(const AffineFamily<Scalar>& f, const VecR& mu, const Vec<Scalar>& x) {
  if (x.size() != f.n) throw precondition_error("apply: vector length != n");
  return apply_theta(f, evaluate_theta(f, mu), Mat<Scalar>(x)).col(0);
}

/// Apply a single term matrix A_q (full Hermitian action).
template <class Scalar>
Mat<Scalar> apply_term(const AffineFamily<Scalar>& f, int q, const Mat<Scalar>& X) {
  Mat<Scalar> Y = f.matrices[q].template selfadjointView<Eigen::Upper>() * X;
  return Y;
}

/// Upper bound on ||A_q||_2 via the maximum absolute row sum of the full matrix.
template <class Scalar>
double term_norm_bound(const AffineFamily<Scalar>& f, int q) {
  std::vector<double> row(f.n, 0.0);
  const auto& A = f.matrices[q];
  for (int c = 0; c < A.outerSize(); ++c)
    for (typename SpMat<Scalar>::InnerIterator it(A, c); it; ++it) {
      const double a = std::abs(it.value());
      row[it.row()] += a;
      if (it.row() != it.col()) row[it.col()] += a;
    }
  return row.empty() ? 0.0 : *std::max_element(row.begin(), row.end());
}

// ----------------------------------------------------------------------------
// Parameter grids

enum class GridProvenance { tensor_chebyshev_with_endpoints, explicit_list };

struct ParameterGrid {
  std::vector<VecR> points;
  GridProvenance provenance = GridProvenance::explicit_list;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  const VecR& operator[](std::size_t i) const { return points[i]; }
  auto begin() const { return points.begin(); }
  auto end() const { return points.end(); }
};

/// (count-2) first-kind Chebyshev nodes mapped into [lo,hi] plus both ends.
inline std::vector<double> chebyshev_axis(double lo, double hi, int count) {
  if (count < 2) throw precondition_error("chebyshev grid needs at least 2 points per axis");
  const int m = count - 2;
  std::vector<double> x;
  x.reserve(count);
  x.push_back(lo);
  for (int k = 1; k <= m; ++k) {
    const double t = std::cos((2.0 * k - 1.0) * std::numbers::pi / (2.0 * m));
    x.push_back(lo + (hi - lo) * (t + 1.0) / 2.0);
  }
  x.push_back(hi);
  std::sort(x.begin(), x.end());
  return x;
}

/// Tensor grid; the first axis varies slowest.
inline ParameterGrid chebyshev_grid(const Box& box, const std::vector<int>& counts) {
  if (counts.size() != box.size()) throw precondition_error("chebyshev grid: one count per axis required");
  std::vector<std::vector<double>> axes;
  for (std::size_t d = 0; d < box.size(); ++d) axes.push_back(chebyshev_axis(box[d].first, box[d].second, counts[d]));
  ParameterGrid g;
  g.provenance = GridProvenance::tensor_chebyshev_with_endpoints;
  const int p = static_cast<int>(box.size());
  std::vector<std::size_t> idx(p, 0);
  while (true) {
    VecR mu(p);
    for (int d = 0; d < p; ++d) mu[d] = axes[d][idx[d]];
    g.points.push_back(mu);
    int d = p - 1;
    while (d >= 0 && ++idx[d] == axes[d].size()) idx[d--] = 0;
    if (d < 0) break;
  }
  return g;
}

/// Append points not already present (exact comparison); keeps order.
inline ParameterGrid with_points(ParameterGrid g, const std::vector<VecR>& extra) {
  for (const auto& e : extra) {
    bool dup = false;
    for (const auto& x : g.points) dup = dup || (x.size() == e.size() && x == e);
    if (!dup) g.points.push_back(e);
  }
  g.provenance = GridProvenance::explicit_list;
  return g;
}

/// 1-D grid sorted ascending (for scalar-parameter families with extra points).
inline ParameterGrid sorted_1d(ParameterGrid g) {
  std::sort(g.points.begin(), g.points.end(), [](const VecR& a, const VecR& b) { return a[0] < b[0]; });
  return g;
}

inline void check_grid(const ParameterGrid& g, const Box& box) {
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i].size() != static_cast<Eigen::Index>(box.size()))
      throw precondition_error("grid point " + std::to_string(i) + " has wrong dimension");
    if (!inside(box, g[i], 1e-12)) throw precondition_error("grid point " + std::to_string(i) + " lies outside the domain");
  }
}

}  // namespace eigengreedy
