#pragma once

// Spectral gap bounds, the exact-dimension test for reduced clusters, the
// eigenspace error estimator and online conditional certification.

#include "lowerbounds.hpp"

namespace eigengreedy {

struct GapBounds {
  bool degenerate = false;  // second reduced cluster undefined: forced point
  int m1 = 0, m2 = 0;
  double lambda1V = 0;
  double reduced_gap = 0;   // lambda^V_{m1+1} - lambda^V_1
  double slb1 = 0;          // slb_1 with s = m1
  double sub = 0, slb = 0;
  double indicator = 0;     // (sub - slb) / reduced_gap, clamped at 0
};

template <class Scalar>
GapBounds gap_bounds(const RomState<Scalar>& st, PointEval<Scalar>& pe, const BoundOptions& o = {}) {
  GapBounds g;
  const auto& cl = pe.red.clustering;
  g.lambda1V = pe.red.values[0];
  if (st.r < 2 || cl.count() < 2) {
    g.degenerate = true;
    return g;
  }
  g.m1 = cl.multiplicities[0];
  g.m2 = cl.multiplicities[1];
  g.reduced_gap = pe.red.values[g.m1] - g.lambda1V;
  g.slb1 = slb_1(st, pe, g.m1, o);
  g.sub = pe.red.values[g.m1] - g.slb1;
  g.slb = slb_k(st, pe, g.m1 + 1, g.m1 + g.m2, o) - g.lambda1V;
  g.indicator = std::max(0.0, (g.sub - g.slb) / g.reduced_gap);
  return g;
}

template <class Scalar>
double reduced_gap(const RomState<Scalar>& st, const VecR& mu, ClusterTol tol = {}) {
  if (st.r < 2) throw precondition_error("reduced_gap: needs r >= 2");
  auto red = reduced_smallest(st, mu, tol);
  if (red.degenerate) return std::numeric_limits<double>::quiet_NaN();
  return red.values[red.m1()] - red.values[0];
}

/// epsilon^(J)(mu, s): the perturbation term with g_s(eta_*).
template <class Scalar>
double epsilon_J(const RomState<Scalar>& st, PointEval<Scalar>& pe, int s, const BoundOptions& o = {}) {
  const double eta = eta_star(st, pe, s, o);
  return perturbation_term(rho(st, pe, s), g_k(pe.red.values, s, eta), pe.scale, o.zero_guard);
}

struct DimCheckResult {
  std::vector<bool> satisfied;
  std::vector<int> s;
  std::vector<double> eta, epsilon, lambdaV;
  bool all() const {
    for (bool b : satisfied)
      if (!b) return false;
    return !satisfied.empty();
  }
  /// eta - lambda^V_s - epsilon for t = 1.
  double F() const { return eta[0] - lambdaV[0] - epsilon[0]; }
};

/// For t = 1..k: eta_*(mu, s(t)) > lambda^V_{s(t)} + epsilon(mu, s(t)) with a
/// safety margin. When all hold the first k reduced multiplicities are exact.
template <class Scalar>
DimCheckResult check_dim_condition(const RomState<Scalar>& st, PointEval<Scalar>& pe, int k, const BoundOptions& o = {},
                                   double margin = 1e-12) {
  const auto& cl = pe.red.clustering;
  if (k < 1 || k > cl.count()) throw precondition_error("check_dim_condition: k exceeds the number of reduced clusters");
  DimCheckResult d;
  for (int t = 1; t <= k; ++t) {
    const int s = cl.covered(t);
    const double eta = eta_star(st, pe, s, o);
    const double eps = epsilon_J(st, pe, s, o);
    const double lv = pe.red.values[s - 1];
    d.s.push_back(s);
    d.eta.push_back(eta);
    d.epsilon.push_back(eps);
    d.lambdaV.push_back(lv);
    d.satisfied.push_back(eta > lv + eps + margin * pe.scale);
  }
  return d;
}

/// F diagnostic: eta_*(mu, m1) - lambda^V_{m1} - epsilon(mu, m1).
template <class Scalar>
double f_diagnostic(const RomState<Scalar>& st, PointEval<Scalar>& pe, const BoundOptions& o = {}) {
  return check_dim_condition(st, pe, 1, o, 0.0).F();
}

/// lambda_1^SUB - lambda_1^SLB with s = m1(mu, V).
template <class Scalar>
double h_surrogate(const RomState<Scalar>& st, PointEval<Scalar>& pe, const BoundOptions& o = {}) {
  return std::max(0.0, pe.red.values[0] - slb_1(st, pe, pe.red.m1(), o));
}

/// ||A V w - lambda^V_1 V w|| for the reduced ground cluster block w.
template <class Scalar>
double ground_residual(const RomState<Scalar>& st, const PointEval<Scalar>& pe) {
  const int m1 = pe.red.m1();
  return residual_block_norm(st, pe.theta, Mat<Scalar>(pe.red.Y.leftCols(m1)), VecR::Constant(m1, pe.red.values[0]));
}

struct DeltaEval {
  double delta = 0;
  double H = 0;
  double residual = 0;
  double gap = 0;       // reduced gap of the gap state
  double eps_gamma = 0;
};

inline double delta_from_parts(double H, double residual, double gap, double eps_gamma) {
  return (H + residual) / ((1.0 - eps_gamma) * gap);
}

/// Eigenspace error estimator combining the eigenspace state (bounds and
/// residual) with the gap state (reduced gap).
template <class Scalar>
DeltaEval delta_estimator(const RomState<Scalar>& eig, const RomState<Scalar>& gap, double eps_gamma, const VecR& mu,
                          const BoundOptions& o = {}) {
  if (!(eps_gamma > 0 && eps_gamma < 1)) throw precondition_error("delta_estimator: eps_gamma must lie in (0,1)");
  auto pg = evaluate_point(gap, mu, o);
  auto gb = gap_bounds(gap, pg, o);
  if (gb.degenerate || !(gb.reduced_gap > 0)) throw precondition_error("delta_estimator: gap state is degenerate here");
  auto pe = evaluate_point(eig, mu, o);
  DeltaEval d;
  d.H = h_surrogate(eig, pe, o);
  d.residual = ground_residual(eig, pe);
  d.gap = gb.reduced_gap;
  d.eps_gamma = eps_gamma;
  d.delta = delta_from_parts(d.H, d.residual, d.gap, eps_gamma);
  return d;
}

/// |gamma^V - gamma| / gamma^V from a full-order solve (diagnostic only).
template <class Scalar>
double gap_error_oracle(const RomState<Scalar>& st, const AffineFamily<Scalar>& f, const VecR& mu, const EigOptions& eo = {}) {
  const double gV = reduced_gap(st, mu, eo.cluster);
  auto cs = lowest_clusters(f, mu, 1, eo);
  const double g = cs.next_value - cs.pairs.values[0];
  return std::abs(gV - g) / gV;
}

enum class CertStatus { certified, dim_condition_failed, gap_width_too_large, degenerate };

inline const char* to_string(CertStatus s) {
  switch (s) {
    case CertStatus::certified: return "certified";
    case CertStatus::dim_condition_failed: return "dim_condition_failed";
    case CertStatus::gap_width_too_large: return "gap_width_too_large";
    case CertStatus::degenerate: return "degenerate";
  }
  return "?";
}

struct CertifyResult {
  CertStatus status = CertStatus::degenerate;
  double bound = std::numeric_limits<double>::infinity();
  double eps_mu = std::numeric_limits<double>::quiet_NaN();
  DeltaEval parts;
  GapBounds gap;
  double lambda1V = 0;
  int m1 = 0;
};

enum class EpsMode { relative, absolute };

/// Online certification at an arbitrary mu: both states must pass the k = 1
/// dimension test; then the gap width eps_mu replaces eps_gamma in Delta.
template <class Scalar>
CertifyResult conditional_certify_online(const RomState<Scalar>& gap, const RomState<Scalar>& eig, const VecR& mu,
                                         EpsMode mode = EpsMode::relative, const BoundOptions& o = {},
                                         double margin = 1e-12) {
  CertifyResult c;
  auto pg = evaluate_point(gap, mu, o);
  auto pe = evaluate_point(eig, mu, o);
  c.lambda1V = pe.red.values[0];
  c.m1 = pe.red.m1();
  c.gap = gap_bounds(gap, pg, o);
  if (c.gap.degenerate) return c;
  const bool dim_gap = check_dim_condition(gap, pg, 1, o, margin).all();
  const bool dim_eig = check_dim_condition(eig, pe, 1, o, margin).all();
  if (!dim_gap || !dim_eig) {
    c.status = CertStatus::dim_condition_failed;
    return c;
  }
  c.eps_mu = mode == EpsMode::relative ? c.gap.indicator : c.gap.sub - c.gap.slb;
  if (!(c.eps_mu < 1.0)) {
    c.status = CertStatus::gap_width_too_large;
    return c;
  }
  c.parts.H = h_surrogate(eig, pe, o);
  c.parts.residual = ground_residual(eig, pe);
  c.parts.gap = c.gap.reduced_gap;
  c.parts.eps_gamma = std::max(0.0, c.eps_mu);
  c.parts.delta = delta_from_parts(c.parts.H, c.parts.residual, c.parts.gap, c.parts.eps_gamma);
  c.bound = c.parts.delta;
  c.status = CertStatus::certified;
  return c;
}

}  // namespace eigengreedy
