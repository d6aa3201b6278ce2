#pragma once

// Text formats for affine families and parameter grids.
//
// model file:
//   n Q p
//   axis lo hi            (p lines)
//   term <kind> <coef> <params...>
//   nnz <count>
//   i j re im             (count lines, 0-based, i <= j)
//   ...                   (Q term blocks)
// Blank lines and '#' comments are ignored.

#include "affine_model.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace eigengreedy {

namespace detail {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct LineReader {
  std::istream& in;
  std::string where;
  int lineno = 0;

  // Next non-empty, non-comment line split into tokens; false at EOF.
  bool next(std::vector<std::string>& tok) {
    std::string line;
    while (std::getline(in, line)) {
      ++lineno;
      auto h = line.find('#');
      if (h != std::string::npos) line.resize(h);
      std::istringstream ss(line);
      tok.clear();
      std::string t;
      while (ss >> t) tok.push_back(t);
      if (!tok.empty()) return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw parse_error(where + ":" + std::to_string(lineno) + ": " + msg);
  }

  void expect(std::vector<std::string>& tok, const char* what) {
    if (!next(tok)) fail(std::string("unexpected end of file, expected ") + what);
  }

  double num(const std::string& s, const char* field) const {
    try {
      std::size_t pos = 0;
      double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      fail(std::string("field '") + field + "': cannot parse number '" + s + "'");
    }
  }

  long integer(const std::string& s, const char* field) const {
    try {
      std::size_t pos = 0;
      long v = std::stol(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      fail(std::string("field '") + field + "': cannot parse integer '" + s + "'");
    }
  }
};

}  // namespace detail

inline void write_term(std::ostream& os, const ThetaTerm& t) {
  using detail::fmt17;
  os << "term " << to_string(t.kind) << ' ' << fmt17(t.coefficient);
  switch (t.kind) {
    case ThetaKind::monomial:
      for (int e : t.exponents) os << ' ' << e;
      break;
    case ThetaKind::cosine:
    case ThetaKind::sine:
      os << ' ' << fmt17(t.frequency) << ' ' << t.axis;
      break;
    case ThetaKind::lagrange:
      os << ' ' << t.i << ' ' << t.k << ' ' << t.nodes.size();
      for (double x : t.nodes) os << ' ' << fmt17(x);
      break;
  }
  os << '\n';
}

namespace detail {

// Parses the tokens of a 'term ...' line for parameter dimension p.
inline ThetaTerm parse_term(const std::vector<std::string>& tok, long p, const LineReader& rd) {
  if (tok.size() < 3 || tok[0] != "term") rd.fail("expected 'term <kind> <coefficient> ...'");
  ThetaTerm t;
  t.coefficient = rd.num(tok[2], "coefficient");
  const std::string& kind = tok[1];
  if (kind == "monomial") {
    t.kind = ThetaKind::monomial;
    if (static_cast<long>(tok.size()) != 3 + p) rd.fail("monomial term needs p exponents");
    for (long d = 0; d < p; ++d) t.exponents.push_back(static_cast<int>(rd.integer(tok[3 + d], "exponent")));
  } else if (kind == "cosine" || kind == "sine") {
    t.kind = kind == "cosine" ? ThetaKind::cosine : ThetaKind::sine;
    if (tok.size() != 5) rd.fail(kind + " term needs '<frequency> <axis>'");
    t.frequency = rd.num(tok[3], "frequency");
    t.axis = static_cast<int>(rd.integer(tok[4], "axis"));
  } else if (kind == "lagrange") {
    t.kind = ThetaKind::lagrange;
    if (tok.size() < 6) rd.fail("lagrange term needs '<i> <k> <m> nodes...'");
    t.i = static_cast<int>(rd.integer(tok[3], "i"));
    t.k = static_cast<int>(rd.integer(tok[4], "k"));
    const long m = rd.integer(tok[5], "m");
    if (m < 1 || static_cast<long>(tok.size()) != 6 + m) rd.fail("lagrange term: node count mismatch");
    for (long a = 0; a < m; ++a) t.nodes.push_back(rd.num(tok[6 + a], "node"));
  } else {
    rd.fail("unknown term kind '" + kind + "'");
  }
  try {
    t.check(static_cast<int>(p));
  } catch (const precondition_error& e) {
    rd.fail(e.what());
  }
  return t;
}

}  // namespace detail

/// Parses a single term descriptor line.
inline ThetaTerm parse_term(const std::string& line, int p) {
  std::istringstream in(line);
  detail::LineReader rd{in, "<term>"};
  std::vector<std::string> tok;
  if (!rd.next(tok)) rd.fail("empty term line");
  return detail::parse_term(tok, p, rd);
}

template <class Scalar>
void save_model(const AffineFamily<Scalar>& f, std::ostream& os) {
  using detail::fmt17;
  f.validate();
  os << f.n << ' ' << f.Q() << ' ' << f.p << '\n';
  for (auto& [lo, hi] : f.domain) os << "axis " << fmt17(lo) << ' ' << fmt17(hi) << '\n';
  for (int q = 0; q < f.Q(); ++q) {
    write_term(os, f.terms[q]);
    const auto& A = f.matrices[q];
    os << "nnz " << A.nonZeros() << '\n';
    for (int c = 0; c < A.outerSize(); ++c)
      for (typename SpMat<Scalar>::InnerIterator it(A, c); it; ++it) {
        double re, im = 0.0;
        if constexpr (is_complex<Scalar>::value) {
          re = it.value().real();
          im = it.value().imag();
        } else {
          re = it.value();
        }
        os << it.row() << ' ' << it.col() << ' ' << fmt17(re) << ' ' << fmt17(im) << '\n';
      }
  }
}

template <class Scalar>
void save_model(const AffineFamily<Scalar>& f, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  save_model(f, os);
}

template <class Scalar>
AffineFamily<Scalar> load_model(std::istream& in, const std::string& where = "<model>") {
  detail::LineReader rd{in, where};
  std::vector<std::string> tok;
  AffineFamily<Scalar> f;

  rd.expect(tok, "header 'n Q p'");
  if (tok.size() != 3) rd.fail("header must be 'n Q p'");
  const long n = rd.integer(tok[0], "n"), Q = rd.integer(tok[1], "Q"), p = rd.integer(tok[2], "p");
  if (n < 2) rd.fail("n must be >= 2");
  if (Q < 1) rd.fail("Q must be >= 1");
  if (p < 1) rd.fail("p must be >= 1");
  f.n = static_cast<int>(n);
  f.p = static_cast<int>(p);

  for (long d = 0; d < p; ++d) {
    rd.expect(tok, "axis line");
    if (tok.size() != 3) rd.fail("axis line must be 'axis lo hi'");
    if (tok[0] != "axis" && rd.integer(tok[0], "axis") != d) rd.fail("axis line must start with 'axis'");
    const double lo = rd.num(tok[1], "lo"), hi = rd.num(tok[2], "hi");
    if (!(lo <= hi)) rd.fail("axis lo > hi");
    f.domain.emplace_back(lo, hi);
  }

  for (long q = 0; q < Q; ++q) {
    rd.expect(tok, "term line");
    ThetaTerm t = detail::parse_term(tok, p, rd);
    f.terms.push_back(t);

    rd.expect(tok, "nnz line");
    if (tok.size() != 2 || tok[0] != "nnz") rd.fail("expected 'nnz <count>'");
    const long nnz = rd.integer(tok[1], "nnz");
    if (nnz < 0) rd.fail("negative nnz");
    std::map<std::pair<int, int>, Scalar> entries;
    for (long e = 0; e < nnz; ++e) {
      rd.expect(tok, "matrix entry");
      if (tok.size() != 4) rd.fail("matrix entry must be 'i j re im'");
      const long i = rd.integer(tok[0], "i"), j = rd.integer(tok[1], "j");
      if (i < 0 || j < 0 || i >= n || j >= n) rd.fail("matrix index out of range");
      const double re = rd.num(tok[2], "re"), im = rd.num(tok[3], "im");
      Scalar v;
      if constexpr (is_complex<Scalar>::value) {
        v = Scalar(re, im);
      } else {
        if (im != 0.0) rd.fail("complex entry in a model loaded as real");
        v = re;
      }
      int r = static_cast<int>(i), c = static_cast<int>(j);
      if (r > c) {  // lower entry: store its conjugate mirror
        std::swap(r, c);
        if constexpr (is_complex<Scalar>::value) v = std::conj(v);
      }
      if (r == c && im != 0.0) rd.fail("non-Hermitian entry: diagonal with nonzero imaginary part");
      auto [it, fresh] = entries.emplace(std::make_pair(r, c), v);
      if (!fresh && it->second != v) rd.fail("non-Hermitian entry: (" + std::to_string(i) + "," + std::to_string(j) + ") conflicts with its mirror");
    }
    std::vector<Eigen::Triplet<Scalar>> trip;
    trip.reserve(entries.size());
    for (auto& [ij, v] : entries) trip.emplace_back(ij.first, ij.second, v);
    SpMat<Scalar> A(f.n, f.n);
    A.setFromTriplets(trip.begin(), trip.end());
    A.makeCompressed();
    f.matrices.push_back(std::move(A));
  }
  if (rd.next(tok)) rd.fail("trailing content after " + std::to_string(Q) + " declared term blocks");
  f.validate();
  return f;
}

template <class Scalar>
AffineFamily<Scalar> load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file " + path);
  return load_model<Scalar>(in, path);
}

/// True if any stored entry has a nonzero imaginary part.
inline bool model_is_complex(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file " + path);
  detail::LineReader rd{in, path};
  std::vector<std::string> tok;
  while (rd.next(tok))
    if (tok.size() == 4 && tok[0] != "term" && tok[0] != "axis")
      if (rd.num(tok[3], "im") != 0.0) return true;
  return false;
}

// ----------------------------------------------------------------------------
// grid CSV: one point per row, p comma-separated columns

inline ParameterGrid read_grid(std::istream& in, int p, const std::string& where = "<grid>") {
  ParameterGrid g;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto h = line.find('#');
    if (h != std::string::npos) line.resize(h);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t pos = 0;
        row.push_back(std::stod(cell, &pos));
        if (cell.find_first_not_of(" \t\r", pos) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw parse_error(where + ":" + std::to_string(lineno) + ": cannot parse '" + cell + "'");
      }
    }
    if (p > 0 && static_cast<int>(row.size()) != p)
      throw parse_error(where + ":" + std::to_string(lineno) + ": expected " + std::to_string(p) + " columns");
    g.points.push_back(Eigen::Map<VecR>(row.data(), static_cast<Eigen::Index>(row.size())));
  }
  return g;
}

inline ParameterGrid read_grid(const std::string& path, int p) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open grid file " + path);
  return read_grid(in, p, path);
}

inline void write_grid(const ParameterGrid& g, std::ostream& os) {
  for (const auto& mu : g.points) {
    for (Eigen::Index d = 0; d < mu.size(); ++d) os << (d ? "," : "") << detail::fmt17(mu[d]);
    os << '\n';
  }
}

}  // namespace eigengreedy
