// eigengreedy command line: model generation, offline builds, online
// evaluation with conditional certification, oracle verification, timing.
//
// Exit codes: 0 ok, 1 operational error, 2 a certified claim was violated.

#include <eigengreedy/eigengreedy.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <complex>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

namespace eg = eigengreedy;
using eg::detail::fmt17;

namespace {

constexpr int kOk = 0, kError = 1, kViolation = 2;

struct Common {
  int threads = 0;
  double eig_tol = 1e-14;
  double cluster_rel = 1e-8;
  double cluster_abs = 1e-14;
  std::uint64_t seed = 0;
  bool force_complex = false;
  bool verbose = false, quiet = false;

  eg::EigOptions eig() const {
    eg::EigOptions o;
    o.tol = eig_tol;
    o.cluster = cluster();
    o.seed = seed;
    return o;
  }
  eg::ClusterTol cluster() const { return {cluster_abs, cluster_rel}; }
  eg::BoundOptions bounds() const {
    eg::BoundOptions b;
    b.cluster = cluster();
    return b;
  }
};

// stdout unless a path is given
struct Out {
  std::ofstream file;
  std::ostream* os = &std::cout;
  explicit Out(const std::string& path) {
    if (path.empty() || path == "-") return;
    file.open(path);
    if (!file) throw std::runtime_error("cannot open " + path + " for writing");
    os = &file;
  }
  std::ostream& operator*() { return *os; }
};

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t pos = 0;
      v.push_back(std::stod(cell, &pos));
      if (cell.find_first_not_of(" \t", pos) != std::string::npos) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw eg::parse_error(std::string("cannot parse ") + what + " entry '" + cell + "'");
    }
  }
  if (v.empty()) throw eg::parse_error(std::string("empty ") + what);
  return v;
}

eg::VecR to_vec(const std::vector<double>& v) { return Eigen::Map<const eg::VecR>(v.data(), static_cast<Eigen::Index>(v.size())); }

bool use_complex(const Common& c, const std::string& model) { return c.force_complex || eg::model_is_complex(model); }

template <class Scalar>
void write_trace(const std::vector<eg::TraceRow>& trace, const std::string& path) {
  if (path.empty()) return;
  Out o(path);
  const int p = trace.empty() ? 0 : static_cast<int>(trace[0].mu.size());
  *o << "iteration,phase,index";
  for (int d = 0; d < p; ++d) *o << ",mu" << d + 1;
  *o << ",estimator,H,residual,r,ell,after\n";
  for (const auto& t : trace) {
    *o << t.iteration << ',' << t.phase << ',' << t.index;
    for (int d = 0; d < p; ++d) *o << ',' << fmt17(t.mu[d]);
    *o << ',' << fmt17(t.estimator) << ',' << fmt17(t.H) << ',' << fmt17(t.residual) << ',' << t.r << ',' << t.ell << ','
       << fmt17(t.after) << '\n';
  }
}

eg::ParameterGrid load_grid(const std::string& path, int p) {
  auto g = eg::read_grid(path, p);
  if (g.empty()) throw eg::precondition_error("grid " + path + " is empty");
  return g;
}

// ---------------------------------------------------------------------------
// gen

struct GenArgs {
  std::string kind, out;
  int L = 0, n = 0;
  std::uint64_t seed = 0;
  std::string nodes;
};

template <class Scalar>
int gen_write(const eg::AffineFamily<Scalar>& f, const std::string& out) {
  Out o(out);
  eg::save_model(f, *o);
  return kOk;
}

int run_gen(const GenArgs& a, const Common& c) {
  if (a.kind == "xxz" || a.kind == "blbq") {
    if (a.L < 2) throw eg::precondition_error("gen " + a.kind + ": --L must be >= 2");
    if (c.force_complex)
      return gen_write(a.kind == "xxz" ? eg::xxz_family<std::complex<double>>(a.L) : eg::blbq_family<std::complex<double>>(a.L), a.out);
    return gen_write(a.kind == "xxz" ? eg::xxz_family<double>(a.L) : eg::blbq_family<double>(a.L), a.out);
  }
  if (a.kind == "random") {
    if (a.n < 2) throw eg::precondition_error("gen random: --n must be >= 2");
    return gen_write(eg::random_quadratic_family(a.n, a.seed), a.out);
  }
  if (a.kind == "example1") return gen_write(eg::example1_family<double>(), a.out);
  if (a.kind == "lagrange") {
    if (a.nodes.empty()) throw eg::precondition_error("gen lagrange: --nodes is required");
    return gen_write(eg::lagrange_rank_one_family<double>(parse_list(a.nodes, "node")), a.out);
  }
  throw eg::precondition_error("gen: unknown family '" + a.kind + "'");
}

// ---------------------------------------------------------------------------
// grid

struct GridArgs {
  std::string model, box, counts, out;
  std::vector<std::string> points;
};

int run_grid(const GridArgs& a) {
  eg::Box box;
  if (!a.model.empty()) {
    box = eg::model_is_complex(a.model) ? eg::load_model<std::complex<double>>(a.model).domain
                                        : eg::load_model<double>(a.model).domain;
  } else if (!a.box.empty()) {
    std::stringstream ss(a.box);
    std::string ax;
    while (std::getline(ss, ax, ',')) {
      auto colon = ax.find(':');
      if (colon == std::string::npos) throw eg::parse_error("--box axes are lo:hi, got '" + ax + "'");
      auto lo = parse_list(ax.substr(0, colon), "box"), hi = parse_list(ax.substr(colon + 1), "box");
      if (lo.size() != 1 || hi.size() != 1 || !(lo[0] <= hi[0])) throw eg::parse_error("bad --box axis '" + ax + "'");
      box.emplace_back(lo[0], hi[0]);
    }
  } else {
    throw eg::precondition_error("grid: give --model or --box");
  }
  std::vector<int> counts;
  for (double v : parse_list(a.counts, "count")) {
    if (v != std::floor(v)) throw eg::parse_error("counts must be integers");
    counts.push_back(static_cast<int>(v));
  }
  if (counts.size() == 1 && box.size() > 1) counts.assign(box.size(), counts[0]);
  auto g = eg::chebyshev_grid(box, counts);
  if (!a.points.empty()) {
    std::vector<eg::VecR> extra;
    for (const auto& s : a.points) {
      auto v = to_vec(parse_list(s, "point"));
      if (v.size() != static_cast<Eigen::Index>(box.size())) throw eg::parse_error("--point has wrong dimension: " + s);
      extra.push_back(v);
    }
    g = eg::with_points(g, extra);
    if (box.size() == 1) g = eg::sorted_1d(g);
  }
  eg::check_grid(g, box);
  Out o(a.out);
  eg::write_grid(g, *o);
  return kOk;
}

// ---------------------------------------------------------------------------
// build-gap / build-eig

struct BuildArgs {
  std::string model, grid, gap_rom, out, trace;
  double tol = 1e-6, eps_gamma = 0;
  int max_iterations = 2000, initial_index = 0;
  bool store_basis = false;
};

template <class Scalar>
eg::GreedyConfig greedy_config(const BuildArgs& a, const Common& c, const eg::AffineFamily<Scalar>& f) {
  eg::GreedyConfig cfg;
  cfg.grid = load_grid(a.grid, f.p);
  cfg.tol = a.tol;
  cfg.max_iterations = a.max_iterations;
  cfg.initial_index = a.initial_index;
  cfg.bounds = c.bounds();
  cfg.eig = c.eig();
  cfg.threads = c.threads;
  cfg.eps_gamma = a.eps_gamma;
  return cfg;
}

template <class Scalar>
void report_build(const eg::GreedyResult<Scalar>& res, const char* what) {
  std::cerr << what << ": r = " << res.state.r << ", snapshots = " << res.state.snapshots.size()
            << ", insertions = " << res.trace.size() << ", final max estimator = " << fmt17(res.final_max) << '\n';
}

template <class Scalar>
int build_gap(const BuildArgs& a, const Common& c) {
  auto f = eg::load_model<Scalar>(a.model);
  auto res = eg::greedy_gap(f, greedy_config(a, c, f));
  write_trace<Scalar>(res.trace, a.trace);
  eg::save_rom(res.state, a.out, a.store_basis);
  report_build(res, "build-gap");
  return kOk;
}

template <class Scalar>
int build_eig(const BuildArgs& a, const Common& c) {
  auto f = eg::load_model<Scalar>(a.model);
  auto gap = eg::load_rom<Scalar>(a.gap_rom);
  if (gap.kind != "gap") eg::warn(a.gap_rom + " is not tagged as a gap ROM (kind '" + gap.kind + "')");
  auto res = eg::greedy_eigenspace(f, gap, greedy_config(a, c, f));
  write_trace<Scalar>(res.trace, a.trace);
  eg::save_rom(res.state, a.out, a.store_basis);
  report_build(res, "build-eig");
  return kOk;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string eig_rom, gap_rom, grid, out, coeffs, lift;
  std::vector<std::string> mus;
  bool absolute = false;
};

template <class Scalar>
int eval(const EvalArgs& a, const Common& c) {
  auto eig = eg::load_rom<Scalar>(a.eig_rom);
  auto gap = eg::load_rom<Scalar>(a.gap_rom);
  if (eig.p != gap.p || eig.n != gap.n) throw eg::precondition_error("eval: ROM files describe different families");
  if (!a.lift.empty() && !eig.has_basis()) throw eg::precondition_error("eval: --lift needs an eigenspace ROM built with --store-basis");
  std::vector<eg::VecR> mus;
  for (const auto& s : a.mus) {
    auto v = to_vec(parse_list(s, "mu"));
    if (v.size() != eig.p) throw eg::parse_error("--mu has " + std::to_string(v.size()) + " entries, expected " + std::to_string(eig.p));
    mus.push_back(v);
  }
  if (!a.grid.empty())
    for (const auto& m : load_grid(a.grid, eig.p).points) mus.push_back(m);
  if (mus.empty()) throw eg::precondition_error("eval: no parameters given (use --mu or --grid)");

  const auto mode = a.absolute ? eg::EpsMode::absolute : eg::EpsMode::relative;
  const auto bo = c.bounds();
  struct Row {
    eg::CertifyResult cert;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> Y;
  };
  auto rows = eg::parallel_map<Row>(mus.size(), [&](std::size_t i) {
    Row r;
    r.cert = eg::conditional_certify_online(gap, eig, mus[i], mode, bo);
    auto red = eg::reduced_smallest(eig, mus[i], bo.cluster);
    r.Y = red.Y.leftCols(red.m1());
    return r;
  }, c.threads);

  Out o(a.out);
  *o << "index";
  for (int d = 0; d < eig.p; ++d) *o << ",mu" << d + 1;
  *o << ",lambda1V,m1,status,bound,eps_mu,gamma_V,H,residual\n";
  for (std::size_t i = 0; i < mus.size(); ++i) {
    const auto& r = rows[i].cert;
    *o << i;
    for (int d = 0; d < eig.p; ++d) *o << ',' << fmt17(mus[i][d]);
    *o << ',' << fmt17(r.lambda1V) << ',' << r.m1 << ',' << eg::to_string(r.status) << ',' << fmt17(r.bound) << ','
       << fmt17(r.eps_mu) << ',' << fmt17(r.gap.reduced_gap) << ',' << fmt17(r.parts.H) << ',' << fmt17(r.parts.residual)
       << '\n';
  }
  auto dump_block = [&](const std::string& path, bool lifted) {
    Out b(path);
    *b << "index,column,row,re,im\n";
    for (std::size_t i = 0; i < mus.size(); ++i) {
      eg::Mat<Scalar> B = lifted ? eg::lift(eig, rows[i].Y) : rows[i].Y;
      for (Eigen::Index k = 0; k < B.cols(); ++k)
        for (Eigen::Index j = 0; j < B.rows(); ++j) {
          const std::complex<double> v(B(j, k));
          *b << i << ',' << k << ',' << j << ',' << fmt17(v.real()) << ',' << fmt17(v.imag()) << '\n';
        }
    }
  };
  if (!a.coeffs.empty()) dump_block(a.coeffs, false);
  if (!a.lift.empty()) dump_block(a.lift, true);
  return kOk;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyArgs {
  std::string model, gap_rom, eig_rom, grid, out;
  double eps_gamma = 0;
  bool no_tol_claim = false;
  double slack = 1e-8;
};

struct VerifyRow {
  std::string error;
  double lambda1V = 0, slb1 = 0, gap_sub = 0, gap_slb = 0, Gamma = 0, F = 0;
  bool dim_gap = false, dim_eig = false;
  int m1_gap = 0, m1_eig = 0, m1_true = 0;
  double lambda1 = 0, gamma = 0, E = 0, proj = 0, Delta = 0, H = 0;
  std::string status;
  std::vector<std::string> violations;
};

template <class Scalar>
int verify(const VerifyArgs& a, const Common& c) {
  auto f = eg::load_model<Scalar>(a.model);
  auto gap = eg::load_rom<Scalar>(a.gap_rom);
  auto eig = eg::load_rom<Scalar>(a.eig_rom);
  if (gap.n != f.n || eig.n != f.n || gap.Q() != f.Q() || eig.Q() != f.Q())
    throw eg::precondition_error("verify: ROM files do not match the model");
  if (!eig.has_basis()) throw eg::precondition_error("verify: the eigenspace ROM must store its basis (--store-basis)");
  auto grid = load_grid(a.grid, f.p);
  const double eps_gamma = a.eps_gamma > 0 ? a.eps_gamma : gap.tol;
  if (!(eps_gamma > 0 && eps_gamma < 1)) throw eg::precondition_error("verify: eps_gamma must lie in (0,1)");
  const auto bo = c.bounds();
  const auto eo = c.eig();

  auto rows = eg::parallel_map<VerifyRow>(grid.size(), [&](std::size_t i) {
    VerifyRow v;
    const auto& mu = grid[i];
    try {
      auto pg = eg::evaluate_point(gap, mu, bo);
      auto pe = eg::evaluate_point(eig, mu, bo);
      auto gb = eg::gap_bounds(gap, pg, bo);
      auto cs = eg::lowest_clusters(f, mu, 1, eo);
      v.lambda1 = cs.pairs.values[0];
      v.gamma = cs.next_value - v.lambda1;
      v.m1_true = cs.ell;
      v.lambda1V = pe.red.values[0];
      v.m1_eig = pe.red.m1();
      v.m1_gap = pg.red.m1();
      v.slb1 = eg::slb_1(eig, pe, v.m1_eig, bo);
      auto viol = [&](const std::string& s) { v.violations.push_back(s); };
      const double scale = pe.scale;
      if (v.slb1 > v.lambda1 + a.slack * scale) viol("slb_above_lambda1");
      if (v.lambda1 > v.lambda1V + a.slack * scale) viol("sub_below_lambda1");
      if (gb.degenerate) {
        v.status = "degenerate";
        viol("gap_rom_degenerate");
        return v;
      }
      v.gap_sub = gb.sub;
      v.gap_slb = gb.slb;
      v.Gamma = gb.indicator;
      v.F = eg::f_diagnostic(gap, pg, bo);
      v.dim_gap = eg::check_dim_condition(gap, pg, 1, bo).all();
      v.dim_eig = eg::check_dim_condition(eig, pe, 1, bo).all();
      v.E = std::abs(gb.reduced_gap - v.gamma) / gb.reduced_gap;
      v.H = eg::h_surrogate(eig, pe, bo);
      v.Delta = eg::delta_from_parts(v.H, eg::ground_residual(eig, pe), gb.reduced_gap, eps_gamma);
      eg::Mat<Scalar> WV = eg::lift(eig, eg::Mat<Scalar>(pe.red.Y.leftCols(v.m1_eig)));
      v.proj = eg::projector_distance(cs.pairs.vectors, WV);
      if (v.dim_gap && v.m1_gap != v.m1_true) viol("gap_dimension_mismatch");
      if (v.dim_eig && v.m1_eig != v.m1_true) viol("eig_dimension_mismatch");
      if (v.dim_gap && v.gamma > gb.reduced_gap * (1 + a.slack) + a.slack * scale) viol("gap_above_sub");
      if (v.dim_gap && v.E > v.Gamma + a.slack) viol("gap_error_above_indicator");
      // Delta bounds the projection error whenever the gap state is within
      // eps_gamma here and both dimension tests pass
      if (v.dim_gap && v.dim_eig && v.Gamma <= eps_gamma && v.proj > v.Delta + a.slack) viol("projection_error_above_delta");
      auto cert = eg::conditional_certify_online(gap, eig, mu, eg::EpsMode::relative, bo);
      v.status = eg::to_string(cert.status);
      if (cert.status == eg::CertStatus::certified && v.proj > cert.bound + a.slack) viol("certified_bound_violated");
      if (!a.no_tol_claim) {
        if (!(v.Gamma <= gap.tol)) viol("gap_indicator_above_build_tol");
        if (!(v.Delta <= eig.tol)) viol("delta_above_build_tol");
        if (!v.dim_gap) viol("gap_dim_condition_failed");
        if (!v.dim_eig) viol("eig_dim_condition_failed");
      }
    } catch (const std::exception& e) {
      v.error = e.what();
    }
    return v;
  }, c.threads);

  Out o(a.out);
  *o << "index";
  for (int d = 0; d < f.p; ++d) *o << ",mu" << d + 1;
  *o << ",lambda1V,slb1,gap_sub,gap_slb,Gamma,F,dim_gap,dim_eig,m1_gap,m1_eig,m1_true,lambda1,gamma,E,proj_error,Delta,H,"
        "status,violations\n";
  int nviol = 0, nerr = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& v = rows[i];
    *o << i;
    for (int d = 0; d < f.p; ++d) *o << ',' << fmt17(grid[i][d]);
    if (!v.error.empty()) {
      ++nerr;
      *o << std::string(17, ',') << ",error,\"" << v.error << "\"\n";
      continue;
    }
    *o << ',' << fmt17(v.lambda1V) << ',' << fmt17(v.slb1) << ',' << fmt17(v.gap_sub) << ',' << fmt17(v.gap_slb) << ','
       << fmt17(v.Gamma) << ',' << fmt17(v.F) << ',' << v.dim_gap << ',' << v.dim_eig << ',' << v.m1_gap << ',' << v.m1_eig
       << ',' << v.m1_true << ',' << fmt17(v.lambda1) << ',' << fmt17(v.gamma) << ',' << fmt17(v.E) << ',' << fmt17(v.proj)
       << ',' << fmt17(v.Delta) << ',' << fmt17(v.H) << ',' << v.status << ',';
    for (std::size_t k = 0; k < v.violations.size(); ++k) *o << (k ? ";" : "") << v.violations[k];
    *o << '\n';
    if (!v.violations.empty()) ++nviol;
  }
  std::cerr << "verify: " << grid.size() << " points, " << nviol << " with violations, " << nerr << " errors\n";
  if (nviol) return kViolation;
  return nerr ? kError : kOk;
}

// ---------------------------------------------------------------------------
// bench

struct BenchArgs {
  std::string model, rom, grid, out;
  int repetitions = 3;
  bool rom_only = false;
};

template <class Scalar>
int bench(const BenchArgs& a, const Common& c) {
  if (a.repetitions < 1) throw eg::precondition_error("bench: --repetitions must be >= 1");
  auto rom = eg::load_rom<Scalar>(a.rom);
  std::unique_ptr<eg::AffineFamily<Scalar>> f;
  if (!a.rom_only) {
    if (a.model.empty()) throw eg::precondition_error("bench: --model is required unless --rom-only");
    f = std::make_unique<eg::AffineFamily<Scalar>>(eg::load_model<Scalar>(a.model));
    if (f->n != rom.n) throw eg::precondition_error("bench: ROM does not match the model");
  }
  auto grid = load_grid(a.grid, rom.p);
  const auto bo = c.bounds();
  const auto eo = c.eig();
  using clk = std::chrono::steady_clock;
  auto time_it = [&](auto&& fn) {
    const auto t0 = clk::now();
    for (int k = 0; k < a.repetitions; ++k) fn();
    return std::chrono::duration<double>(clk::now() - t0).count() / a.repetitions;
  };
  Out o(a.out);
  *o << "index";
  for (int d = 0; d < rom.p; ++d) *o << ",mu" << d + 1;
  *o << (a.rom_only ? ",rom_seconds\n" : ",fom_seconds,rom_seconds,ratio\n");
  double fom_total = 0, rom_total = 0;
  volatile double sink = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& mu = grid[i];
    const double tr = time_it([&] {
      auto pe = eg::evaluate_point(rom, mu, bo);
      sink = sink + eg::ground_residual(rom, pe) + eg::h_surrogate(rom, pe, bo);
    });
    rom_total += tr;
    *o << i;
    for (int d = 0; d < rom.p; ++d) *o << ',' << fmt17(mu[d]);
    if (a.rom_only) {
      *o << ',' << fmt17(tr) << '\n';
      continue;
    }
    const double tf = time_it([&] { sink = sink + eg::lowest_clusters(*f, mu, 1, eo).pairs.values[0]; });
    fom_total += tf;
    *o << ',' << fmt17(tf) << ',' << fmt17(tr) << ',' << fmt17(tf / tr) << '\n';
  }
  const double m = static_cast<double>(grid.size());
  std::cerr << "bench: mean ROM " << fmt17(rom_total / m) << " s";
  if (!a.rom_only) std::cerr << ", mean FOM " << fmt17(fom_total / m) << " s, ratio " << fmt17(fom_total / rom_total);
  std::cerr << '\n';
  return kOk;
}

template <template <class> class Fn, class Args>
int dispatch(bool cplx, const Args& a, const Common& c) {
  return cplx ? Fn<std::complex<double>>::run(a, c) : Fn<double>::run(a, c);
}

template <class S> struct BuildGapFn { static int run(const BuildArgs& a, const Common& c) { return build_gap<S>(a, c); } };
template <class S> struct BuildEigFn { static int run(const BuildArgs& a, const Common& c) { return build_eig<S>(a, c); } };
template <class S> struct EvalFn { static int run(const EvalArgs& a, const Common& c) { return eval<S>(a, c); } };
template <class S> struct VerifyFn { static int run(const VerifyArgs& a, const Common& c) { return verify<S>(a, c); } };
template <class S> struct BenchFn { static int run(const BenchArgs& a, const Common& c) { return bench<S>(a, c); } };

bool rom_complex(const std::string& path) { return eg::rom_scalar(path) == "complex"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certified reduced models for parametric Hermitian eigenproblems"};
  app.require_subcommand(1);
  Common com;
  app.add_option("--threads", com.threads, "worker cap (default: EIGENGREEDY_THREADS or all cores)")->check(CLI::NonNegativeNumber);
  app.add_option("--eig-tol", com.eig_tol, "relative residual tolerance of the full-order eigensolver")->check(CLI::PositiveNumber);
  app.add_option("--cluster-rel", com.cluster_rel, "relative coalescence tolerance")->check(CLI::PositiveNumber);
  app.add_option("--cluster-abs", com.cluster_abs, "absolute coalescence tolerance")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", com.seed, "seed of the iterative eigensolver start blocks");
  app.add_flag("--complex", com.force_complex, "use complex arithmetic even for real models");
  app.add_flag("-v,--verbose", com.verbose, "progress messages");
  app.add_flag("-q,--quiet", com.quiet, "suppress warnings");

  std::function<int()> action;

  GenArgs ga;
  auto* gen = app.add_subcommand("gen", "write a model file for a built-in family");
  gen->add_option("family", ga.kind, "xxz | blbq | random | example1 | lagrange")->required()
      ->check(CLI::IsMember({"xxz", "blbq", "random", "example1", "lagrange"}));
  gen->add_option("--L", ga.L, "chain length (xxz, blbq)");
  gen->add_option("--n", ga.n, "dimension (random)");
  gen->add_option("--seed", ga.seed, "seed (random)");
  gen->add_option("--nodes", ga.nodes, "comma-separated nodes in [-1,1] (lagrange)");
  gen->add_option("-o,--out", ga.out, "output path (default stdout)");
  gen->callback([&] { action = [&] { return run_gen(ga, com); }; });

  GridArgs gr;
  auto* grid = app.add_subcommand("grid", "write a Chebyshev-with-endpoints tensor grid");
  grid->add_option("--model", gr.model, "take the box from this model");
  grid->add_option("--box", gr.box, "box as lo:hi[,lo:hi...]");
  grid->add_option("--counts", gr.counts, "points per axis, comma-separated (one value applies to all)")->required();
  grid->add_option("--point", gr.points, "extra point, comma-separated (repeatable)");
  grid->add_option("-o,--out", gr.out, "output CSV (default stdout)");
  grid->callback([&] { action = [&] { return run_grid(gr); }; });

  BuildArgs bg;
  auto* bgap = app.add_subcommand("build-gap", "greedy construction of the gap ROM");
  bgap->add_option("--model", bg.model)->required()->check(CLI::ExistingFile);
  bgap->add_option("--grid", bg.grid)->required()->check(CLI::ExistingFile);
  bgap->add_option("--tol", bg.tol, "target for the relative gap indicator")->check(CLI::PositiveNumber);
  bgap->add_option("--out", bg.out)->required();
  bgap->add_option("--trace", bg.trace, "trace CSV");
  bgap->add_option("--max-iterations", bg.max_iterations)->check(CLI::PositiveNumber);
  bgap->add_option("--initial-index", bg.initial_index)->check(CLI::NonNegativeNumber);
  bgap->add_flag("--store-basis", bg.store_basis, "keep V in the ROM file");
  bgap->callback([&] { action = [&] { return dispatch<BuildGapFn>(use_complex(com, bg.model), bg, com); }; });

  BuildArgs be;
  auto* beig = app.add_subcommand("build-eig", "greedy construction of the eigenspace ROM");
  beig->add_option("--model", be.model)->required()->check(CLI::ExistingFile);
  beig->add_option("--grid", be.grid)->required()->check(CLI::ExistingFile);
  beig->add_option("--gap-rom", be.gap_rom)->required()->check(CLI::ExistingFile);
  beig->add_option("--tol", be.tol, "target for the projection error estimator")->check(CLI::PositiveNumber);
  beig->add_option("--eps-gamma", be.eps_gamma, "gap tolerance used in the estimator (default: the gap ROM's)");
  beig->add_option("--out", be.out)->required();
  beig->add_option("--trace", be.trace, "trace CSV");
  beig->add_option("--max-iterations", be.max_iterations)->check(CLI::PositiveNumber);
  beig->add_option("--initial-index", be.initial_index)->check(CLI::NonNegativeNumber);
  beig->add_flag("--store-basis", be.store_basis, "keep V in the ROM file (needed by verify and --lift)");
  beig->callback([&] { action = [&] { return dispatch<BuildEigFn>(use_complex(com, be.model), be, com); }; });

  EvalArgs ev;
  auto* evc = app.add_subcommand("eval", "online evaluation with conditional certification");
  evc->add_option("--eig-rom", ev.eig_rom)->required()->check(CLI::ExistingFile);
  evc->add_option("--gap-rom", ev.gap_rom)->required()->check(CLI::ExistingFile);
  evc->add_option("--mu", ev.mus, "parameter, comma-separated (repeatable)");
  evc->add_option("--grid", ev.grid, "parameters from a grid CSV")->check(CLI::ExistingFile);
  evc->add_option("-o,--out", ev.out, "report CSV (default stdout)");
  evc->add_option("--coeffs", ev.coeffs, "write reduced ground coefficients here");
  evc->add_option("--lift", ev.lift, "write lifted ground vectors here (needs a stored basis)");
  evc->add_flag("--absolute-eps", ev.absolute, "absolute gap width instead of the relative indicator");
  evc->callback([&] { action = [&] { return dispatch<EvalFn>(rom_complex(ev.eig_rom), ev, com); }; });

  VerifyArgs va;
  auto* ver = app.add_subcommand("verify", "oracle sweep of all certified claims");
  ver->add_option("--model", va.model)->required()->check(CLI::ExistingFile);
  ver->add_option("--gap-rom", va.gap_rom)->required()->check(CLI::ExistingFile);
  ver->add_option("--eig-rom", va.eig_rom)->required()->check(CLI::ExistingFile);
  ver->add_option("--grid", va.grid)->required()->check(CLI::ExistingFile);
  ver->add_option("--eps-gamma", va.eps_gamma, "gap tolerance in Delta (default: the gap ROM's)");
  ver->add_option("--slack", va.slack, "numerical slack for the claims")->check(CLI::NonNegativeNumber);
  ver->add_flag("--no-tol-claim", va.no_tol_claim, "do not require the build tolerances on this grid");
  ver->add_option("-o,--out", va.out, "report CSV (default stdout)");
  ver->callback([&] { action = [&] { return dispatch<VerifyFn>(use_complex(com, va.model), va, com); }; });

  BenchArgs ba;
  auto* ben = app.add_subcommand("bench", "time full-order vs reduced solves");
  ben->add_option("--model", ba.model)->check(CLI::ExistingFile);
  ben->add_option("--rom", ba.rom)->required()->check(CLI::ExistingFile);
  ben->add_option("--grid", ba.grid)->required()->check(CLI::ExistingFile);
  ben->add_option("--repetitions", ba.repetitions, "solves per point");
  ben->add_flag("--rom-only", ba.rom_only, "skip the full-order solves");
  ben->add_option("-o,--out", ba.out, "timing CSV (default stdout)");
  ben->callback([&] { action = [&] { return dispatch<BenchFn>(rom_complex(ba.rom), ba, com); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kError;
  }
  eg::logger().level = com.quiet ? eg::LogLevel::quiet : (com.verbose ? eg::LogLevel::info : eg::LogLevel::warn);
  try {
    return action();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  }
}
