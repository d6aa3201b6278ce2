#pragma once

// Full-order and reduced Hermitian eigensolvers and the multiplicity
// clustering rule.

#include "affine_model.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <limits>
#include <numeric>
#include <random>

namespace eigengreedy {

template <class Scalar>
struct EigenPairs {
  VecR values;           // ascending
  Mat<Scalar> vectors;   // orthonormal columns, same count as values
  bool degenerate = false;  // values[k-1] and the next eigenvalue share a cluster
  int iterations = 0;
  double residual = 0.0;    // largest ||A v - lambda v|| among returned pairs
};

/// Ascending values grouped into coalescent clusters.
struct EigenClustering {
  VecR cluster_values;        // strictly increasing
  std::vector<int> multiplicities;
  std::vector<int> starts;    // index of the first member of each cluster

  int count() const { return static_cast<int>(multiplicities.size()); }
  int total() const {
    int s = 0;
    for (int m : multiplicities) s += m;
    return s;
  }
  /// Number of values covered by the first t clusters.
  int covered(int t) const {
    int s = 0;
    for (int i = 0; i < t && i < count(); ++i) s += multiplicities[i];
    return s;
  }
  /// Cluster index containing value index i.
  int cluster_of(int i) const {
    for (int c = count() - 1; c >= 0; --c)
      if (starts[c] <= i) return c;
    return -1;
  }
  /// True if s equals the number of values in some leading set of clusters.
  bool on_boundary(int s) const {
    if (s == 0) return true;
    int acc = 0;
    for (int m : multiplicities) {
      acc += m;
      if (acc == s) return true;
      if (acc > s) return false;
    }
    return false;
  }
};

struct ClusterTol {
  double abs = 1e-14;
  double rel = 1e-8;
};

inline bool coalescent(double a, double b, const ClusterTol& tol) {
  if (std::abs(a) < tol.abs && std::abs(b) < tol.abs) return true;
  const double m = std::max(std::abs(a), std::abs(b));
  return m > 0 && std::abs(a - b) / m < tol.rel;
}

/// Transitive chaining along adjacent pairs of an ascending sequence. A
/// cluster whose members are all below tol.abs in magnitude is valued 0,
/// otherwise its value is the mean of its members.
inline EigenClustering cluster(const VecR& values, ClusterTol tol = {}) {
  EigenClustering c;
  const Eigen::Index N = values.size();
  for (Eigen::Index i = 1; i < N; ++i)
    if (values[i] < values[i - 1]) throw precondition_error("cluster: values not ascending");
  std::vector<double> vals;
  Eigen::Index i = 0;
  while (i < N) {
    Eigen::Index j = i + 1;
    while (j < N && coalescent(values[j - 1], values[j], tol)) ++j;
    bool tiny = true;
    double sum = 0;
    for (Eigen::Index a = i; a < j; ++a) {
      tiny = tiny && std::abs(values[a]) < tol.abs;
      sum += values[a];
    }
    vals.push_back(tiny ? 0.0 : sum / static_cast<double>(j - i));
    c.multiplicities.push_back(static_cast<int>(j - i));
    c.starts.push_back(static_cast<int>(i));
    i = j;
  }
  c.cluster_values = Eigen::Map<VecR>(vals.data(), static_cast<Eigen::Index>(vals.size()));
  return c;
}

/// Scale each column so that its largest-magnitude entry is real positive.
template <class Scalar>
void fix_phase(Mat<Scalar>& V) {
  for (Eigen::Index c = 0; c < V.cols(); ++c) {
    Eigen::Index im = 0;
    V.col(c).cwiseAbs().maxCoeff(&im);
    const Scalar v = V(im, c);
    const double a = std::abs(v);
    if (a == 0) continue;
    if constexpr (is_complex<Scalar>::value)
      V.col(c) *= std::conj(v) / a;
    else if (v < 0)
      V.col(c) = -V.col(c);
  }
}

template <class Scalar>
EigenPairs<Scalar> dense_eig(const Mat<Scalar>& A) {
  if (A.rows() != A.cols()) throw precondition_error("dense_eig: matrix not square");
  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es(A);
  if (es.info() != Eigen::Success) throw numerical_error("dense_eig: QR iteration did not converge");
  EigenPairs<Scalar> out;
  out.values = es.eigenvalues();
  out.vectors = es.eigenvectors();
  fix_phase(out.vectors);
  return out;
}

/// Eigenvalues only of a dense Hermitian matrix.
template <class Scalar>
VecR dense_eigenvalues(const Mat<Scalar>& A) {
  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es(A, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw numerical_error("dense_eigenvalues: QR iteration did not converge");
  return es.eigenvalues();
}

struct EigOptions {
  double tol = 1e-14;            // residual target relative to ||A||
  int dense_limit = 4096;        // dense factorization never attempted above this n
  int dense_crossover = 512;     // dense path used at or below this n
  bool force_iterative = false;
  int max_iterations = 20000;
  ClusterTol cluster{};
  std::uint64_t seed = 0x9e3779b97f4a7c15ULL;
};

namespace detail {

inline std::uint64_t hash_mu(std::uint64_t seed, const VecR& mu) {
  std::uint64_t h = 1469598103934665603ULL ^ seed;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    std::uint64_t bits;
    const double x = mu[i];
    std::memcpy(&bits, &x, sizeof bits);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffu;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

template <class Scalar>
Mat<Scalar> random_block(Eigen::Index n, Eigen::Index b, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0.0, 1.0);
  Mat<Scalar> X(n, b);
  for (Eigen::Index c = 0; c < b; ++c)
    for (Eigen::Index r = 0; r < n; ++r) {
      if constexpr (is_complex<Scalar>::value)
        X(r, c) = Scalar(N(rng), N(rng));
      else
        X(r, c) = N(rng);
    }
  return X;
}

// Orthogonalize W against orthonormal V (two passes), then orthonormalize
// W itself; columns whose relative norm collapses below `drop` are removed.
template <class Scalar>
Mat<Scalar> orth_against(const Mat<Scalar>& V, Mat<Scalar> W, double drop) {
  Mat<Scalar> out(W.rows(), 0);
  for (Eigen::Index c = 0; c < W.cols(); ++c) {
    Vec<Scalar> w = W.col(c);
    const double n0 = w.norm();
    if (n0 == 0) continue;
    for (int pass = 0; pass < 2; ++pass) {
      if (V.cols()) w -= V * (V.adjoint() * w);
      if (out.cols()) w -= out * (out.adjoint() * w);
    }
    const double n1 = w.norm();
    if (n1 <= drop * n0) continue;
    out.conservativeResize(Eigen::NoChange, out.cols() + 1);
    out.col(out.cols() - 1) = w / n1;
  }
  return out;
}

}  // namespace detail

/// Block Davidson with diagonal preconditioning for the k lowest eigenpairs
/// of a Hermitian operator. `op(X)` returns A X; `diag` is diag(A); `anorm`
/// is an upper estimate of ||A|| used for the stopping rule.
template <class Scalar, class Op>
EigenPairs<Scalar> davidson(const Op& op, const VecR& diag, Eigen::Index n, int k, double anorm,
                            const EigOptions& opt, std::uint64_t seed) {
  if (k < 1 || k > n) throw precondition_error("davidson: k out of range");
  const int want = static_cast<int>(std::min<Eigen::Index>(n, k + 1));  // k plus one to test degeneracy
  const Eigen::Index b = std::min<Eigen::Index>(n, k + 2);
  const Eigen::Index mmax = std::min<Eigen::Index>(n, std::max<Eigen::Index>(3 * b, 30) + b);
  const double eps = std::numeric_limits<double>::epsilon();
  const double thresh = std::max(opt.tol, 64 * eps) * std::max(anorm, 1e-300);

  // random block plus unit vectors at the smallest diagonal entries; the latter
  // catch ground states that live almost entirely on a few basis vectors
  Mat<Scalar> start = detail::random_block<Scalar>(n, b, seed);
  {
    std::vector<Eigen::Index> idx(n);
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    const Eigen::Index u = std::min<Eigen::Index>(b, n - b);
    std::partial_sort(idx.begin(), idx.begin() + u, idx.end(),
                      [&](Eigen::Index a, Eigen::Index c) { return diag[a] < diag[c] || (diag[a] == diag[c] && a < c); });
    start.conservativeResize(Eigen::NoChange, b + u);
    start.rightCols(u).setZero();
    for (Eigen::Index j = 0; j < u; ++j) start(idx[j], b + j) = Scalar(1);
  }
  Mat<Scalar> V = detail::orth_against<Scalar>(Mat<Scalar>(n, 0), start, 1e-10);
  Mat<Scalar> AV = op(V);
  EigenPairs<Scalar> out;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    Mat<Scalar> H = V.adjoint() * AV;
    H = (0.5 * (H + H.adjoint())).eval();
    Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es(H);
    const Eigen::Index m = V.cols();
    const Eigen::Index nb = std::min(b, m);
    Mat<Scalar> Y = es.eigenvectors().leftCols(nb);
    VecR th = es.eigenvalues().head(nb);
    Mat<Scalar> X = V * Y;
    Mat<Scalar> AX = AV * Y;
    Mat<Scalar> R = AX - X * th.asDiagonal();
    bool done = nb >= want;
    double worst = 0;
    for (int i = 0; i < want && i < nb; ++i) {
      const double rn = R.col(i).norm();
      worst = std::max(worst, rn);
      done = done && rn <= thresh;
    }
    if (done || m == n) {
      out.values = th.head(k);
      out.vectors = X.leftCols(k);
      out.iterations = it;
      double res = 0;
      for (int i = 0; i < k; ++i) res = std::max(res, R.col(i).norm());
      out.residual = res;
      if (want > k) {
        VecR two(2);
        two << th[k - 1], th[k];
        out.degenerate = coalescent(two[0], two[1], opt.cluster);
      }
      fix_phase(out.vectors);
      return out;
    }
    // correction vectors for the unconverged block members
    Mat<Scalar> T(n, 0);
    for (Eigen::Index i = 0; i < nb; ++i) {
      if (R.col(i).norm() <= thresh) continue;
      Vec<Scalar> t = R.col(i);
      for (Eigen::Index r = 0; r < n; ++r) {
        double d = diag[r] - th[i];
        const double floor = 1e-8 * std::max(anorm, 1e-300);
        if (std::abs(d) < floor) d = d < 0 ? -floor : floor;
        t[r] /= d;
      }
      T.conservativeResize(Eigen::NoChange, T.cols() + 1);
      T.col(T.cols() - 1) = t;
    }
    if (m + T.cols() > mmax) {  // thick restart on the current Ritz block
      V = detail::orth_against<Scalar>(Mat<Scalar>(n, 0), X, 1e-12);
      AV = op(V);
    }
    Mat<Scalar> Tn = detail::orth_against<Scalar>(V, T, 1e-10);
    if (Tn.cols() == 0) Tn = detail::orth_against<Scalar>(V, Mat<Scalar>(R), 1e-10);
    if (Tn.cols() == 0) Tn = detail::orth_against<Scalar>(V, detail::random_block<Scalar>(n, 1, seed + it), 1e-10);
    if (Tn.cols() == 0) throw numerical_error("davidson: search space cannot be extended");
    Mat<Scalar> ATn = op(Tn);
    const Eigen::Index old = V.cols();
    V.conservativeResize(Eigen::NoChange, old + Tn.cols());
    V.rightCols(Tn.cols()) = Tn;
    AV.conservativeResize(Eigen::NoChange, old + Tn.cols());
    AV.rightCols(Tn.cols()) = ATn;
    (void)worst;
  }
  throw numerical_error("davidson: no convergence within " + std::to_string(opt.max_iterations) + " iterations");
}

template <class Scalar>
double norm_estimate(const AffineFamily<Scalar>& f, const VecR& theta) {
  double s = 0;
  for (int q = 0; q < f.Q(); ++q) s += std::abs(theta[q]) * term_norm_bound(f, q);
  return s;
}

template <class Scalar>
VecR diagonal_of(const AffineFamily<Scalar>& f, const VecR& theta) {
  VecR d = VecR::Zero(f.n);
  for (int q = 0; q < f.Q(); ++q) {
    if (theta[q] == 0.0) continue;
    const auto& A = f.matrices[q];
    for (int c = 0; c < A.outerSize(); ++c)
      for (typename SpMat<Scalar>::InnerIterator it(A, c); it; ++it)
        if (it.row() == it.col()) d[c] += theta[q] * std::real(it.value());
  }
  return d;
}

/// The k smallest eigenpairs of A(theta). Dense below the crossover,
/// block Davidson above it (or when forced).
template <class Scalar>
EigenPairs<Scalar> smallest_k_theta(const AffineFamily<Scalar>& f, const VecR& theta, int k, const EigOptions& opt,
                                    std::uint64_t seed) {
  const int n = f.n;
  if (k < 1 || k > n) throw precondition_error("smallest_k: k must lie in [1, n]");
  const bool tiny = n <= 4 * (k + 2) + 8;
  const bool dense = tiny || (!opt.force_iterative && n <= opt.dense_crossover);
  if (dense) {
    if (n > opt.dense_limit) throw precondition_error("smallest_k: n exceeds the dense limit");
    auto all = dense_eig<Scalar>(Mat<Scalar>(assemble_theta(f, theta)));
    EigenPairs<Scalar> out;
    out.values = all.values.head(k);
    out.vectors = all.vectors.leftCols(k);
    if (k < n) out.degenerate = coalescent(all.values[k - 1], all.values[k], opt.cluster);
    return out;
  }
  auto op = [&](const Mat<Scalar>& X) { return apply_theta(f, theta, X); };
  return davidson<Scalar>(op, diagonal_of(f, theta), n, k, norm_estimate(f, theta), opt, seed);
}

template <class Scalar>
EigenPairs<Scalar> smallest_k(const AffineFamily<Scalar>& f, const VecR& mu, int k, const EigOptions& opt = {}) {
  return smallest_k_theta(f, evaluate_theta(f, mu), k, opt, detail::hash_mu(opt.seed, mu));
}

/// Eigenpairs spanning the first t clusters of A(mu) plus the next eigenvalue.
template <class Scalar>
struct ClusterSolve {
  EigenPairs<Scalar> pairs;  // ell values and vectors
  int ell = 0;
  double next_value = 0.0;   // lambda_{ell+1}, or lambda_n when ell = n
  EigenClustering clustering;  // of all computed values
};

/// Grows the requested count until the t-th cluster is provably complete
/// (a value of a later cluster has been computed) or the spectrum is exhausted.
template <class Scalar>
ClusterSolve<Scalar> lowest_clusters(const AffineFamily<Scalar>& f, const VecR& mu, int t, const EigOptions& opt = {},
                                     int k_guess = 4) {
  if (t < 1) throw precondition_error("lowest_clusters: t must be >= 1");
  const VecR theta = evaluate_theta(f, mu);
  const std::uint64_t seed = detail::hash_mu(opt.seed, mu);
  int k = std::min(f.n, std::max(k_guess, t + 1));
  const bool dense = f.n <= 4 * (k + 2) + 8 || (!opt.force_iterative && f.n <= opt.dense_crossover);
  if (dense) k = f.n;
  while (true) {
    auto ep = smallest_k_theta(f, theta, k, opt, seed);
    auto cl = cluster(ep.values, opt.cluster);
    ClusterSolve<Scalar> out;
    if (cl.count() > t) {
      out.ell = cl.covered(t);
      out.next_value = ep.values[out.ell];
    } else if (k == f.n) {
      out.ell = f.n;
      out.next_value = ep.values[f.n - 1];
    } else {
      k = std::min(f.n, 2 * k);
      continue;
    }
    out.pairs.values = ep.values.head(out.ell);
    out.pairs.vectors = ep.vectors.leftCols(out.ell);
    out.pairs.iterations = ep.iterations;
    out.pairs.residual = ep.residual;
    out.clustering = cl;
    return out;
  }
}

/// [lambda_min, lambda_max] of each A_q, widened by the solver residual and
/// a rounding allowance so the enclosure is safe.
template <class Scalar>
std::vector<std::pair<double, double>> term_extrema(const AffineFamily<Scalar>& f, const EigOptions& opt = {}) {
  std::vector<std::pair<double, double>> ex;
  const double eps = std::numeric_limits<double>::epsilon();
  for (int q = 0; q < f.Q(); ++q) {
    const double nb = term_norm_bound(f, q);
    const double pad = 16 * eps * f.n * nb;
    AffineFamily<Scalar> one;
    one.n = f.n;
    one.p = f.p;
    one.domain = f.domain;
    one.terms = {ThetaTerm::monomial(1.0, std::vector<int>(f.p, 0))};
    one.matrices = {f.matrices[q]};
    VecR plus(1), minus(1);
    plus << 1.0;
    minus << -1.0;
    const std::uint64_t seed = opt.seed + 17 * q;
    auto lo = smallest_k_theta(one, plus, 1, opt, seed);
    auto hi = smallest_k_theta(one, minus, 1, opt, seed + 1);
    ex.emplace_back(lo.values[0] - lo.residual - pad, -hi.values[0] + hi.residual + pad);
  }
  return ex;
}

}  // namespace eigengreedy
