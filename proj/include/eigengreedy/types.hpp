#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <functional>
#include <iostream>
#include <mutex>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace eigengreedy {

template <class T> struct is_complex : std::false_type {};
template <class T> struct is_complex<std::complex<T>> : std::true_type {};

template <class Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <class Scalar>
using SpMat = Eigen::SparseMatrix<Scalar, Eigen::ColMajor, int>;

using MatR = Eigen::MatrixXd;
using VecR = Eigen::VectorXd;

/// Thrown when an operation is called outside its contract.
struct precondition_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Thrown by file readers; message carries line/field context.
struct parse_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical failure (solver non-convergence, infeasible LP after relaxation).
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Warning sink. Defaults to stderr; tests and the CLI may swap it.
enum class LogLevel { quiet = 0, warn = 1, info = 2, debug = 3 };

struct Logger {
  LogLevel level = LogLevel::warn;
  std::function<void(LogLevel, const std::string&)> sink;
};

inline Logger& logger() {
  static Logger l;
  return l;
}

inline void log(LogLevel lv, const std::string& msg) {
  auto& l = logger();
  if (static_cast<int>(lv) > static_cast<int>(l.level)) return;
  if (l.sink) {
    l.sink(lv, msg);
    return;
  }
  static std::mutex m;
  std::lock_guard<std::mutex> g(m);
  const char* tag = lv == LogLevel::warn ? "warning" : (lv == LogLevel::info ? "info" : "debug");
  std::cerr << "[eigengreedy " << tag << "] " << msg << '\n';
}

inline void warn(const std::string& msg) { log(LogLevel::warn, msg); }
inline void info(const std::string& msg) { log(LogLevel::info, msg); }

}  // namespace eigengreedy
