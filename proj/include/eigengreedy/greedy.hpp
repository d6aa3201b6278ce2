#pragma once

// Offline greedy drivers: the gap-space builder and the eigenspace builder,
// each followed by a pass that inserts every grid point failing the k = 1
// dimension test. Both repeat until a full sweep needs no insertion.

#include "gap_cert.hpp"
#include "parallel.hpp"

#include <set>
#include <sstream>

namespace eigengreedy {

struct GreedyConfig {
  ParameterGrid grid;
  double tol = 1e-6;
  int max_iterations = 2000;
  int initial_index = 0;
  double dim_margin = 1e-12;
  BoundOptions bounds{};
  EigOptions eig{};
  int threads = 0;
  double eps_gamma = 0;  // eigenspace stage only; 0 = take it from the gap state
};

struct TraceRow {
  int iteration = 0;
  std::size_t index = 0;  // grid index of the inserted point
  VecR mu;
  double estimator = 0;   // value that triggered the insertion (inf if forced)
  double H = 0;           // eigenvalue surrogate term
  double residual = 0;    // residual term
  int r = 0;              // basis dimension after insertion
  int ell = 0;
  std::string phase;      // initial | greedy | enforce
  double after = 0;       // estimator at the same point right after insertion
};

template <class Scalar>
struct GreedyResult {
  RomState<Scalar> state;
  std::vector<TraceRow> trace;
  double final_max = 0;   // max estimator over the grid at termination
};

/// Index of the largest value; forced entries win, ties go to the lowest index.
inline std::size_t argmax_over_grid(const std::vector<double>& values, const std::vector<bool>& forced = {}) {
  if (values.empty()) throw precondition_error("argmax_over_grid: empty grid");
  std::size_t best = 0;
  auto key = [&](std::size_t i) {
    if (!forced.empty() && forced[i]) return std::numeric_limits<double>::infinity();
    return values[i];
  };
  for (std::size_t i = 1; i < values.size(); ++i)
    if (key(i) > key(best)) best = i;
  return best;
}

namespace detail {

struct SweepValue {
  double value = 0;
  bool forced = false;
  double H = 0, residual = 0;
};

inline std::string mu_str(const VecR& mu) {
  std::ostringstream os;
  os << '(';
  for (Eigen::Index i = 0; i < mu.size(); ++i) os << (i ? "," : "") << mu[i];
  os << ')';
  return os.str();
}

template <class Scalar, class Estimate>
std::size_t greedy_loop(RomState<Scalar>& st, const GreedyConfig& cfg, std::set<std::size_t>& S, int& iter,
                        Estimate&& estimate, const std::function<void(std::size_t, const SweepValue&, const char*)>& insert,
                        double& final_max) {
  while (true) {
    auto vals = parallel_map<SweepValue>(cfg.grid.size(), [&](std::size_t i) { return estimate(st, i); }, cfg.threads);
    std::vector<double> v(vals.size());
    std::vector<bool> forced(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) {
      v[i] = vals[i].value;
      forced[i] = vals[i].forced;
    }
    const std::size_t j = argmax_over_grid(v, forced);
    final_max = forced[j] ? std::numeric_limits<double>::infinity() : v[j];
    if (!forced[j] && v[j] <= cfg.tol) return j;
    if (S.count(j))
      throw numerical_error("greedy stagnation: point " + std::to_string(j) + " " + mu_str(cfg.grid[j]) +
                            " already holds a snapshot but its estimator is " + std::to_string(v[j]));
    if (++iter > cfg.max_iterations) throw numerical_error("greedy: max_iterations exceeded");
    insert(j, vals[j], "greedy");
  }
}

}  // namespace detail

/// Builds a reduced space whose gap indicator is below cfg.tol on the grid
/// and whose lowest reduced multiplicity passes the dimension test there.
/// `start`, if given, is an extendable state to continue from (for instance
/// a previous run); the initial insertion is then skipped.
template <class Scalar>
GreedyResult<Scalar> greedy_gap(const AffineFamily<Scalar>& f, const GreedyConfig& cfg,
                                const RomState<Scalar>* start = nullptr) {
  if (f.rational()) throw precondition_error("greedy_gap: rational theta terms are not supported by the lower bounds");
  if (cfg.grid.empty()) throw precondition_error("greedy_gap: empty grid");
  if (!(cfg.tol > 0)) throw precondition_error("greedy_gap: tolerance must be positive");
  check_grid(cfg.grid, f.domain);
  if (cfg.initial_index < 0 || static_cast<std::size_t>(cfg.initial_index) >= cfg.grid.size())
    throw precondition_error("greedy_gap: initial index outside the grid");

  GreedyResult<Scalar> res;
  RomState<Scalar>& st = res.state;
  std::set<std::size_t> S;
  if (start) {
    if (!start->extendable() || start->n != f.n || start->Q() != f.Q())
      throw precondition_error("greedy_gap: start state is not an extendable state of this family");
    st = *start;
    for (std::size_t i = 0; i < cfg.grid.size(); ++i)
      for (const auto& sn : st.snapshots)
        if (sn.mu == cfg.grid[i]) S.insert(i);
  } else {
    st = make_state(f, cfg.eig);
  }
  st.kind = "gap";
  st.tol = cfg.tol;
  int iter = 0;
  int k_hint = 4;

  auto estimate = [&](const RomState<Scalar>& s, std::size_t i) {
    detail::SweepValue sv;
    if (s.r < 2) {
      sv.forced = true;
      return sv;
    }
    auto pe = evaluate_point(s, cfg.grid[i], cfg.bounds);
    auto g = gap_bounds(s, pe, cfg.bounds);
    sv.forced = g.degenerate;
    sv.value = g.indicator;
    sv.H = g.sub - g.slb;
    return sv;
  };
  auto insert = [&](std::size_t j, const detail::SweepValue& sv, const char* phase) {
    auto cs = lowest_clusters(f, cfg.grid[j], 2, cfg.eig, k_hint);
    k_hint = std::max(k_hint, cs.ell + 2);
    add_snapshot(st, f, cfg.grid[j], cs);
    S.insert(j);
    TraceRow row;
    row.iteration = static_cast<int>(res.trace.size());
    row.index = j;
    row.mu = cfg.grid[j];
    row.estimator = sv.forced ? std::numeric_limits<double>::infinity() : sv.value;
    row.H = sv.H;
    row.r = st.r;
    row.ell = cs.ell;
    row.phase = phase;
    row.after = estimate(st, j).value;
    res.trace.push_back(row);
    info("gap greedy: " + std::string(phase) + " mu=" + detail::mu_str(cfg.grid[j]) + " r=" + std::to_string(st.r) +
         " estimator=" + std::to_string(row.estimator));
  };

  if (st.r == 0) insert(static_cast<std::size_t>(cfg.initial_index), detail::SweepValue{0, true}, "initial");
  while (true) {
    detail::greedy_loop(st, cfg, S, iter, estimate, insert, res.final_max);
    int added = 0;
    for (std::size_t i = 0; i < cfg.grid.size(); ++i) {
      if (S.count(i)) continue;
      auto pe = evaluate_point(st, cfg.grid[i], cfg.bounds);
      bool need = pe.red.clustering.count() < 2;
      if (!need) need = !check_dim_condition(st, pe, 1, cfg.bounds, cfg.dim_margin).all();
      if (need) {
        if (++iter > cfg.max_iterations) throw numerical_error("greedy: max_iterations exceeded");
        detail::SweepValue sv{0, true};
        insert(i, sv, "enforce");
        ++added;
      }
    }
    if (added == 0) break;
  }
  return res;
}

/// Builds a reduced space for the ground eigenspace with Delta <= cfg.tol on
/// the grid, given a converged gap state built on the same grid.
template <class Scalar>
GreedyResult<Scalar> greedy_eigenspace(const AffineFamily<Scalar>& f, const RomState<Scalar>& gap, const GreedyConfig& cfg) {
  if (f.rational()) throw precondition_error("greedy_eigenspace: rational theta terms are not supported");
  if (cfg.grid.empty()) throw precondition_error("greedy_eigenspace: empty grid");
  if (!(cfg.tol > 0)) throw precondition_error("greedy_eigenspace: tolerance must be positive");
  const double eps_gamma = cfg.eps_gamma > 0 ? cfg.eps_gamma : gap.tol;
  if (!(eps_gamma > 0 && eps_gamma < 1)) throw precondition_error("greedy_eigenspace: eps_gamma must lie in (0,1)");
  if (gap.n != f.n || gap.Q() != f.Q()) throw precondition_error("greedy_eigenspace: gap state belongs to another family");
  check_grid(cfg.grid, f.domain);

  // reduced gap of the frozen gap state, once per grid point
  auto gaps = parallel_map<double>(cfg.grid.size(), [&](std::size_t i) {
    auto pg = evaluate_point(gap, cfg.grid[i], cfg.bounds);
    auto gb = gap_bounds(gap, pg, cfg.bounds);
    if (gb.degenerate || !(gb.reduced_gap > 0))
      throw precondition_error("greedy_eigenspace: gap state degenerate at grid point " + std::to_string(i));
    return gb.reduced_gap;
  }, cfg.threads);

  GreedyResult<Scalar> res;
  RomState<Scalar>& st = res.state;
  st = make_state(f, gap.extrema);
  st.kind = "eig";
  st.tol = cfg.tol;
  std::set<std::size_t> S;
  int iter = 0;
  int k_hint = 4;

  auto estimate = [&](const RomState<Scalar>& s, std::size_t i) {
    detail::SweepValue sv;
    auto pe = evaluate_point(s, cfg.grid[i], cfg.bounds);
    sv.H = h_surrogate(s, pe, cfg.bounds);
    sv.residual = ground_residual(s, pe);
    sv.value = delta_from_parts(sv.H, sv.residual, gaps[i], eps_gamma);
    return sv;
  };
  auto insert = [&](std::size_t j, const detail::SweepValue& sv, const char* phase) {
    auto cs = lowest_clusters(f, cfg.grid[j], 1, cfg.eig, k_hint);
    k_hint = std::max(k_hint, cs.ell + 2);
    add_snapshot(st, f, cfg.grid[j], cs);
    S.insert(j);
    TraceRow row;
    row.iteration = static_cast<int>(res.trace.size());
    row.index = j;
    row.mu = cfg.grid[j];
    row.estimator = sv.forced ? std::numeric_limits<double>::infinity() : sv.value;
    row.H = sv.H;
    row.residual = sv.residual;
    row.r = st.r;
    row.ell = cs.ell;
    row.phase = phase;
    row.after = estimate(st, j).value;
    res.trace.push_back(row);
    info("eigenspace greedy: " + std::string(phase) + " mu=" + detail::mu_str(cfg.grid[j]) + " r=" + std::to_string(st.r) +
         " estimator=" + std::to_string(row.estimator));
  };

  {
    detail::SweepValue first;
    first.forced = true;
    insert(static_cast<std::size_t>(cfg.initial_index), first, "initial");
  }
  while (true) {
    detail::greedy_loop(st, cfg, S, iter, estimate, insert, res.final_max);
    int added = 0;
    for (std::size_t i = 0; i < cfg.grid.size(); ++i) {
      if (S.count(i)) continue;
      auto pe = evaluate_point(st, cfg.grid[i], cfg.bounds);
      if (!check_dim_condition(st, pe, 1, cfg.bounds, cfg.dim_margin).all()) {
        if (++iter > cfg.max_iterations) throw numerical_error("greedy: max_iterations exceeded");
        auto sv = estimate(st, i);
        insert(i, sv, "enforce");
        ++added;
      }
    }
    if (added == 0) break;
  }
  return res;
}

}  // namespace eigengreedy
