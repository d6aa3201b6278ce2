#pragma once

// ROM container (JSON). Holds everything the online phase needs: reduced
// terms, Gramians, the residual QR factor, term enclosures and snapshot
// data. The basis V is included only on request.

#include "model_io.hpp"
#include "subspace.hpp"

#include <json.hpp>

#include <fstream>

namespace eigengreedy {

namespace detail {

using json = nlohmann::json;

template <class Scalar>
json mat_to_json(const Mat<Scalar>& A) {
  json j;
  j["rows"] = A.rows();
  j["cols"] = A.cols();
  std::vector<double> re(A.size()), im;
  for (Eigen::Index i = 0; i < A.size(); ++i) re[i] = std::real(A.data()[i]);
  j["re"] = re;
  if constexpr (is_complex<Scalar>::value) {
    im.resize(A.size());
    for (Eigen::Index i = 0; i < A.size(); ++i) im[i] = std::imag(A.data()[i]);
    j["im"] = im;
  }
  return j;
}

template <class Scalar>
Mat<Scalar> mat_from_json(const json& j, const std::string& what) {
  try {
    const Eigen::Index r = j.at("rows").get<Eigen::Index>(), c = j.at("cols").get<Eigen::Index>();
    const auto re = j.at("re").get<std::vector<double>>();
    if (r < 0 || c < 0 || static_cast<Eigen::Index>(re.size()) != r * c) throw parse_error(what + ": size mismatch");
    Mat<Scalar> A(r, c);
    if constexpr (is_complex<Scalar>::value) {
      std::vector<double> im(re.size(), 0.0);
      if (j.contains("im")) im = j.at("im").get<std::vector<double>>();
      if (im.size() != re.size()) throw parse_error(what + ": imaginary part size mismatch");
      for (std::size_t i = 0; i < re.size(); ++i) A.data()[i] = Scalar(re[i], im[i]);
    } else {
      if (j.contains("im")) throw parse_error(what + ": complex data in a real ROM");
      for (std::size_t i = 0; i < re.size(); ++i) A.data()[i] = re[i];
    }
    return A;
  } catch (const json::exception& e) {
    throw parse_error(what + ": " + e.what());
  }
}

inline json vec_to_json(const VecR& v) { return std::vector<double>(v.data(), v.data() + v.size()); }
inline VecR vec_from_json(const json& j) {
  auto x = j.get<std::vector<double>>();
  return Eigen::Map<VecR>(x.data(), static_cast<Eigen::Index>(x.size()));
}

}  // namespace detail

template <class Scalar>
void save_rom(const RomState<Scalar>& s, std::ostream& os, bool store_basis = false) {
  using detail::json;
  json j;
  j["format"] = "eigengreedy-rom";
  j["version"] = 1;
  j["scalar"] = is_complex<Scalar>::value ? "complex" : "real";
  j["kind"] = s.kind;
  j["tol"] = s.tol;
  j["n"] = s.n;
  j["p"] = s.p;
  j["r"] = s.r;
  std::vector<std::string> terms;
  for (const auto& t : s.terms) {
    std::ostringstream ts;
    write_term(ts, t);
    std::string line = ts.str();
    if (!line.empty() && line.back() == '\n') line.pop_back();
    terms.push_back(line);
  }
  j["terms"] = terms;
  json dom = json::array(), ext = json::array();
  for (auto& [lo, hi] : s.domain) dom.push_back({lo, hi});
  for (auto& [lo, hi] : s.extrema) ext.push_back({lo, hi});
  j["domain"] = dom;
  j["term_extrema"] = ext;
  json red = json::array(), G = json::array();
  for (const auto& A : s.reduced) red.push_back(detail::mat_to_json(A));
  for (const auto& A : s.G) G.push_back(detail::mat_to_json(A));
  j["reduced_terms"] = red;
  j["second_order"] = G;
  j["residual_factor"] = detail::mat_to_json(s.T);
  json snaps = json::array();
  for (const auto& sn : s.snapshots) {
    json x;
    x["mu"] = detail::vec_to_json(sn.mu);
    x["ell"] = sn.ell;
    x["values"] = detail::vec_to_json(sn.values);
    x["next_value"] = sn.next_value;
    x["M"] = detail::mat_to_json(sn.M);
    snaps.push_back(x);
  }
  j["snapshots"] = snaps;
  if (store_basis) {
    if (!s.has_basis()) throw precondition_error("save_rom: basis requested but not available");
    j["basis"] = detail::mat_to_json(s.V);
  }
  // max_digits10 keeps the round trip exact
  os << j.dump();
}

template <class Scalar>
void save_rom(const RomState<Scalar>& s, const std::string& path, bool store_basis = false) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  save_rom(s, os, store_basis);
}

template <class Scalar>
RomState<Scalar> load_rom(std::istream& in, const std::string& where = "<rom>") {
  using detail::json;
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw parse_error(where + ": not a ROM container: " + e.what());
  }
  RomState<Scalar> s;
  try {
    if (j.at("format") != "eigengreedy-rom") throw parse_error(where + ": unknown format tag");
    const std::string scalar = j.at("scalar");
    if ((scalar == "complex") != is_complex<Scalar>::value) throw parse_error(where + ": scalar type mismatch (" + scalar + ")");
    s.kind = j.value("kind", "");
    s.tol = j.value("tol", 0.0);
    s.n = j.at("n");
    s.p = j.at("p");
    s.r = j.at("r");
    for (const auto& line : j.at("terms")) s.terms.push_back(parse_term(line.get<std::string>(), s.p));
    for (const auto& d : j.at("domain")) s.domain.emplace_back(d.at(0).get<double>(), d.at(1).get<double>());
    for (const auto& d : j.at("term_extrema")) s.extrema.emplace_back(d.at(0).get<double>(), d.at(1).get<double>());
    const int Q = s.Q();
    if (static_cast<int>(s.extrema.size()) != Q) throw parse_error(where + ": term_extrema count != Q");
    if (static_cast<int>(s.domain.size()) != s.p) throw parse_error(where + ": domain dimension != p");
    for (const auto& A : j.at("reduced_terms")) s.reduced.push_back(detail::mat_from_json<Scalar>(A, where + " reduced_terms"));
    for (const auto& A : j.at("second_order")) s.G.push_back(detail::mat_from_json<Scalar>(A, where + " second_order"));
    if (static_cast<int>(s.reduced.size()) != Q || static_cast<int>(s.G.size()) != Q * Q)
      throw parse_error(where + ": reduced term counts do not match Q");
    for (const auto& A : s.reduced)
      if (A.rows() != s.r || A.cols() != s.r) throw parse_error(where + ": reduced term shape != r x r");
    for (const auto& A : s.G)
      if (A.rows() != s.r || A.cols() != s.r) throw parse_error(where + ": Gramian shape != r x r");
    s.T = detail::mat_from_json<Scalar>(j.at("residual_factor"), where + " residual_factor");
    if (s.T.cols() != static_cast<Eigen::Index>(s.r) * (Q + 1)) throw parse_error(where + ": residual factor shape");
    for (const auto& x : j.at("snapshots")) {
      Snapshot<Scalar> sn;
      sn.mu = detail::vec_from_json(x.at("mu"));
      sn.ell = x.at("ell");
      sn.values = detail::vec_from_json(x.at("values"));
      sn.next_value = x.at("next_value");
      sn.M = detail::mat_from_json<Scalar>(x.at("M"), where + " snapshot M");
      if (sn.mu.size() != s.p || sn.values.size() != sn.ell || sn.M.rows() != sn.ell || sn.M.cols() != s.r)
        throw parse_error(where + ": inconsistent snapshot record");
      s.snapshots.push_back(std::move(sn));
    }
    if (j.contains("basis")) {
      s.V = detail::mat_from_json<Scalar>(j.at("basis"), where + " basis");
      if (s.V.rows() != s.n || s.V.cols() != s.r) throw parse_error(where + ": basis shape");
    }
  } catch (const json::exception& e) {
    throw parse_error(where + ": " + e.what());
  }
  return s;
}

template <class Scalar>
RomState<Scalar> load_rom(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open ROM file " + path);
  return load_rom<Scalar>(in, path);
}

/// Scalar tag stored in a ROM file ("real" or "complex").
inline std::string rom_scalar(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open ROM file " + path);
  try {
    auto j = nlohmann::json::parse(in);
    return j.at("scalar").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(path + ": not a ROM container: " + e.what());
  }
}

}  // namespace eigengreedy
