#pragma once

// Certified lower bounds for the lowest eigenvalues from a reduced state:
// the residual rho of the leading Ritz block, the snapshot constraint
// offsets beta, the LP value eta_*, and the resulting lambda_k lower bounds.

#include "lp.hpp"
#include "subspace.hpp"

#include <atomic>
#include <map>

namespace eigengreedy {

struct BoundOptions {
  ClusterTol cluster{};
  double zero_guard = 1e-12;      // 0/0 guard, relative to the point scale
  bool strict_dimension = false;  // turn the n >= 2s diagnostic into an error
  LpOptions lp{};
};

/// Reduced data at one parameter, with per-s memo of rho and eta_*.
/// Not thread-safe; use one per worker.
template <class Scalar>
struct PointEval {
  VecR mu, theta;
  ReducedSolve<Scalar> red;
  double scale = 1.0;  // 1 + ||A(mu)|| upper estimate

  struct PerS {
    double rho = -1, eta = 0;
    bool eta_done = false, relaxed = false;
  };
  std::map<int, PerS> memo;
};

template <class Scalar>
PointEval<Scalar> evaluate_point(const RomState<Scalar>& s, const VecR& mu, const BoundOptions& o = {}) {
  PointEval<Scalar> pe;
  pe.mu = mu;
  pe.theta = s.theta(mu);
  pe.red = reduced_smallest_theta(s, pe.theta, o.cluster);
  pe.scale = 1.0 + s.norm_bound(pe.theta);
  return pe;
}

/// s must close a cluster of the reduced spectrum.
template <class Scalar>
void check_srange(const PointEval<Scalar>& pe, int s) {
  const int r = static_cast<int>(pe.red.values.size());
  if (s < 1 || s > r) throw precondition_error("s = " + std::to_string(s) + " outside [1, r]");
  if (!pe.red.clustering.on_boundary(s)) throw precondition_error("s = " + std::to_string(s) + " splits a reduced cluster");
}

template <class Scalar>
double rho(const RomState<Scalar>& st, PointEval<Scalar>& pe, int s) {
  check_srange(pe, s);
  auto& m = pe.memo[s];
  if (m.rho < 0) m.rho = residual_block_norm(st, pe.theta, Mat<Scalar>(pe.red.Y.leftCols(s)), VecR(pe.red.values.head(s)));
  return m.rho;
}

namespace detail {
inline void dimension_diagnostic(int n, int s, bool strict) {
  if (n >= 2 * s) return;
  const std::string msg = "snapshot bound evaluated with n = " + std::to_string(n) + " < 2s = " + std::to_string(2 * s);
  if (strict) throw precondition_error(msg);
  static std::atomic<bool> once{false};
  if (!once.exchange(true)) warn(msg + " (reported once)");
}
}  // namespace detail

/// Offset of snapshot j's constraint row:
///   lambda_min((Lambda - lambda_1 I) - M P_s M^* (Lambda - next I)),
/// evaluated through the similar Hermitian matrix
///   (Lambda - lambda_1 I) + D^{1/2} M P_s M^* D^{1/2},  D = next I - Lambda.
template <class Scalar>
double beta(const RomState<Scalar>& st, int j, const PointEval<Scalar>& pe, int s, const BoundOptions& o = {}) {
  check_srange(pe, s);
  detail::dimension_diagnostic(st.n, s, o.strict_dimension);
  const auto& sn = st.snapshots.at(static_cast<std::size_t>(j));
  if (sn.M.cols() != st.r) throw precondition_error("beta: snapshot cross products out of date");
  Mat<Scalar> MY = sn.M * pe.red.Y.leftCols(s);  // ell x s
  VecR d = (sn.next_value - sn.values.array()).cwiseMax(0.0).sqrt().matrix();
  Mat<Scalar> B = d.asDiagonal() * MY;
  Mat<Scalar> H = B * B.adjoint();
  H.diagonal().array() += (sn.values.array() - sn.values[0]).template cast<Scalar>();
  H = 0.5 * (H + H.adjoint());
  return dense_eigenvalues<Scalar>(H).minCoeff();
}

/// Constraint polytope at (mu, s) built from every snapshot.
template <class Scalar>
LpInstance lp_instance(const RomState<Scalar>& st, const PointEval<Scalar>& pe, int s, const BoundOptions& o = {}) {
  const int Q = st.Q();
  const int J = static_cast<int>(st.snapshots.size());
  LpInstance in;
  in.objective = pe.theta;
  in.lo.resize(Q);
  in.hi.resize(Q);
  for (int q = 0; q < Q; ++q) {
    in.lo[q] = st.extrema[q].first;
    in.hi[q] = st.extrema[q].second;
  }
  in.rows.resize(J, Q);
  in.rhs.resize(J);
  for (int j = 0; j < J; ++j) {
    const auto& sn = st.snapshots[j];
    in.rows.row(j) = st.theta(sn.mu).transpose();
    in.rhs[j] = sn.values[0] + beta(st, j, pe, s, o);
  }
  return in;
}

template <class Scalar>
double eta_star(const RomState<Scalar>& st, PointEval<Scalar>& pe, int s, const BoundOptions& o = {}) {
  check_srange(pe, s);
  detail::dimension_diagnostic(st.n, s, o.strict_dimension);
  auto& m = pe.memo[s];
  if (!m.eta_done) {
    if (std::any_of(st.terms.begin(), st.terms.end(), [](const ThetaTerm& t) { return t.rational(); }))
      throw precondition_error("eta_star: family has rational theta terms");
    if (s >= st.n) {  // U(mu, s) is the whole space: nothing left to bound
      m.eta = std::numeric_limits<double>::infinity();
      m.eta_done = true;
      return m.eta;
    }
    if (st.r >= st.n) {  // V spans everything, Ritz values are the spectrum
      m.eta = pe.red.values[s];
      m.eta_done = true;
      return m.eta;
    }
    auto res = solve_lp(lp_instance(st, pe, s, o), o.lp);
    m.eta = res.value;
    m.relaxed = res.relaxed;
    m.eta_done = true;
    if (res.relaxed) warn("eta_star: LP needed rhs relaxation");
  }
  return m.eta;
}

// ----------------------------------------------------------------------------
// scalar pieces

/// 2 rho^2 / (g + sqrt(g^2 + 4 rho^2)), with 0/0 read as 0.
inline double perturbation_term(double rho, double g, double scale, double guard = 1e-12) {
  const double z = guard * scale;
  if (rho <= z && g <= z) return 0.0;
  const double den = g + std::sqrt(g * g + 4 * rho * rho);
  if (den <= 0) return 0.0;
  return 2 * rho * rho / den;
}

inline double f_J(double lambda1V, double eta, double rho, double scale = 1.0, double guard = 1e-12) {
  return std::min(lambda1V, eta) - perturbation_term(rho, std::abs(lambda1V - eta), scale, guard);
}

/// min_{j<=k} |eta - values_j|.
inline double g_k(const VecR& values, int k, double eta) {
  if (k < 1 || k > values.size()) throw precondition_error("g_k: k out of range");
  return (values.head(k).array() - eta).abs().minCoeff();
}

inline double h_k(double rho, const VecR& values, int k, double eta, double scale = 1.0, double guard = 1e-12) {
  if (rho < 0) throw precondition_error("h_k: rho must be >= 0");
  return eta - perturbation_term(rho, g_k(values, k, eta), scale, guard);
}

template <class Scalar>
double slb_k(const RomState<Scalar>& st, PointEval<Scalar>& pe, int k, int s, const BoundOptions& o = {}) {
  check_srange(pe, s);
  if (k < 1 || k > s) throw precondition_error("slb_k: need 1 <= k <= s");
  const double eta = eta_star(st, pe, s, o);
  const double r = rho(st, pe, s);
  const double g = g_k(pe.red.values, k, eta);
  return std::min(pe.red.values[k - 1], eta) - perturbation_term(r, g, pe.scale, o.zero_guard);
}

template <class Scalar>
double slb_1(const RomState<Scalar>& st, PointEval<Scalar>& pe, int s, const BoundOptions& o = {}) {
  return slb_k(st, pe, 1, s, o);
}

/// Distance bound from the Ritz value to the spectrum.
inline double bauer_fike(double residual) {
  if (residual < 0) throw precondition_error("bauer_fike: negative residual");
  return residual;
}

/// sqrt((lambda1V - lambda1) / gap): bound on the component of the Ritz
/// vector outside the exact ground eigenspace.
inline double eigvec_from_eigval_bound(double lambda1V, double lambda1, double gap) {
  if (!(gap > 0)) throw precondition_error("eigvec_from_eigval_bound: gap must be positive");
  if (lambda1V < lambda1) throw precondition_error("eigvec_from_eigval_bound: need lambda1V >= lambda1");
  return std::sqrt((lambda1V - lambda1) / gap);
}

}  // namespace eigengreedy
