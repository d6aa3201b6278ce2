#include <gtest/gtest.h>

#include "oracles.hpp"

#include <sstream>

using namespace eigengreedy;

namespace {

VecR v1(double a) { return (VecR(1) << a).finished(); }
VecR v2(double a, double b) { return (VecR(2) << a, b).finished(); }

}  // namespace

TEST(Theta, Example1Monomials) {
  auto f = example1_family<double>();
  VecR th = evaluate_theta(f, v1(2.0));
  ASSERT_EQ(th.size(), 3);
  EXPECT_DOUBLE_EQ(th[0], 2.0);
  EXPECT_DOUBLE_EQ(th[1], 4.0);
  EXPECT_DOUBLE_EQ(th[2], 1.0);
}

TEST(Theta, BlbqCosSinAndField) {
  auto f = blbq_family<double>(2);
  VecR th = evaluate_theta(f, v2(0.0, 0.5));
  EXPECT_NEAR(th[0], 1.0, 1e-15);
  EXPECT_NEAR(th[1], 0.0, 1e-15);
  EXPECT_NEAR(th[2], 0.5, 1e-15);
}

TEST(Theta, XxzCoefficients) {
  auto f = xxz_family<double>(2);
  VecR th = evaluate_theta(f, v2(-1.0, 0.0));
  EXPECT_DOUBLE_EQ(th[0], 1.0);
  EXPECT_DOUBLE_EQ(th[1], -1.0);
  EXPECT_DOUBLE_EQ(th[2], 0.0);
}

TEST(Theta, WrongDimensionRejected) {
  auto f = xxz_family<double>(2);
  EXPECT_THROW(evaluate_theta(f, v1(0.0)), precondition_error);
}

TEST(Theta, OutsideDomainWarnsButEvaluates) {
  auto f = example1_family<double>();
  std::vector<std::string> msgs;
  auto old = logger().sink;
  logger().sink = [&](LogLevel, const std::string& m) { msgs.push_back(m); };
  VecR th = evaluate_theta(f, v1(3.0));
  logger().sink = old;
  EXPECT_DOUBLE_EQ(th[1], 9.0);
  EXPECT_FALSE(msgs.empty());
}

TEST(Assemble, Example1Diagonals) {
  auto f = example1_family<double>();
  Mat<double> A1 = assemble_dense(f, v1(1.0));
  Mat<double> E1 = Mat<double>::Zero(3, 3);
  E1.diagonal() << 1, -1, -1;
  EXPECT_LT((A1 - E1).norm(), 1e-15);
  Mat<double> A0 = assemble_dense(f, v1(0.0));
  Mat<double> E0 = Mat<double>::Zero(3, 3);
  E0.diagonal() << 0, -2, 0;
  EXPECT_LT((A0 - E0).norm(), 1e-15);
}

TEST(Assemble, ZeroThetaGivesZeroMatrix) {
  auto f = xxz_family<double>(3);
  VecR th = VecR::Zero(f.Q());
  EXPECT_EQ(Mat<double>(assemble_theta(f, th)).norm(), 0.0);
}

TEST(Assemble, IsHermitian) {
  auto f = blbq_family<std::complex<double>>(3);
  Mat<std::complex<double>> A = assemble_dense(f, v2(0.7, 0.3));
  EXPECT_LT((A - A.adjoint()).norm(), 1e-14);
}

TEST(Apply, Example1OnE1) {
  auto f = example1_family<double>();
  Vec<double> x = Vec<double>::Unit(3, 0);
  Vec<double> y = apply(f, v1(2.0), x);
  EXPECT_LT((y - 2.0 * x).norm(), 1e-15);
}

TEST(Apply, XxzFieldOnAllUp) {
  auto f = xxz_family<double>(2);
  Vec<double> x = Vec<double>::Unit(4, 0);
  Vec<double> y = apply(f, v2(0.0, 1.0), x);
  EXPECT_LT((y + x).norm(), 1e-15);
}

TEST(Apply, MatchesAssembledMatrix) {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 5; ++rep) {
    auto f = random_quadratic_family(40, rng());
    VecR mu = oracle::random_mu(f, rng);
    Vec<double> x = Vec<double>::Random(40);
    Vec<double> ref = assemble_dense(f, mu) * x;
    EXPECT_LT((apply(f, mu, x) - ref).norm(), 1e-12 * ref.norm());
  }
}

TEST(Grid, ChebyshevThreePoints) {
  auto g = chebyshev_grid({{-1.0, 1.0}}, {3});
  ASSERT_EQ(g.size(), 3u);
  EXPECT_DOUBLE_EQ(g[0][0], -1.0);
  EXPECT_NEAR(g[1][0], 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(g[2][0], 1.0);
}

TEST(Grid, TensorWithCorners) {
  auto g = chebyshev_grid({{-1.0, 1.0}, {0.0, 1.0}}, {3, 2});
  ASSERT_EQ(g.size(), 6u);
  auto has = [&](double a, double b) {
    for (auto& p : g.points)
      if (std::abs(p[0] - a) < 1e-15 && std::abs(p[1] - b) < 1e-15) return true;
    return false;
  };
  EXPECT_TRUE(has(-1, 0));
  EXPECT_TRUE(has(-1, 1));
  EXPECT_TRUE(has(1, 0));
  EXPECT_TRUE(has(1, 1));
}

TEST(Grid, ThirtyThreeInteriorPerAxis) {
  auto g = chebyshev_grid({{-1.0, 2.5}, {0.0, 3.5}}, {35, 35});
  EXPECT_EQ(g.size(), 1225u);
  auto ax = chebyshev_axis(-1.0, 2.5, 35);
  int interior = 0;
  for (double x : ax) interior += (x > -1.0 && x < 2.5);
  EXPECT_EQ(interior, 33);
}

TEST(Grid, TooFewPointsRejected) { EXPECT_THROW(chebyshev_axis(0, 1, 1), precondition_error); }

TEST(Grid, ExtraPointsAndCheck) {
  auto g = sorted_1d(with_points(chebyshev_grid({{-2.0, 2.0}}, {19}), {v1(1.0), v1(-1.0), v1(2.0)}));
  EXPECT_EQ(g.size(), 21u);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_LT(g[i - 1][0], g[i][0]);
  EXPECT_NO_THROW(check_grid(g, {{-2.0, 2.0}}));
  EXPECT_THROW(check_grid(with_points(g, {v1(3.0)}), {{-2.0, 2.0}}), precondition_error);
}

TEST(ModelIo, RoundTripExample1) {
  auto f = example1_family<double>();
  std::stringstream ss;
  save_model(f, ss);
  auto g = load_model<double>(ss);
  ASSERT_EQ(g.n, f.n);
  ASSERT_EQ(g.Q(), f.Q());
  ASSERT_EQ(g.domain, f.domain);
  for (int q = 0; q < f.Q(); ++q) {
    EXPECT_EQ(Mat<double>(g.matrices[q]), Mat<double>(f.matrices[q]));
    EXPECT_EQ(g.terms[q].kind, f.terms[q].kind);
    EXPECT_EQ(g.terms[q].exponents, f.terms[q].exponents);
    EXPECT_EQ(g.terms[q].coefficient, f.terms[q].coefficient);
  }
}

TEST(ModelIo, RoundTripComplexBlbq) {
  auto f = blbq_family<std::complex<double>>(2);
  std::stringstream ss;
  save_model(f, ss);
  auto g = load_model<std::complex<double>>(ss);
  VecR mu = v2(0.4, -0.2);
  EXPECT_EQ(assemble_dense(f, mu), assemble_dense(g, mu));
}

TEST(ModelIo, MirrorConflictRejected) {
  std::stringstream ss(
      "2 1 1\n"
      "axis 0 1\n"
      "term monomial 1 1\n"
      "nnz 2\n"
      "0 1 1.0 0\n"
      "1 0 2.0 0\n");
  EXPECT_THROW(load_model<double>(ss), parse_error);
}

TEST(ModelIo, ConsistentMirrorAccepted) {
  std::stringstream ss(
      "2 1 1\n"
      "axis 0 1\n"
      "term monomial 1 1\n"
      "nnz 3\n"
      "0 1 1.0 2.0\n"
      "1 0 1.0 -2.0\n"
      "0 0 3 0\n");
  auto f = load_model<std::complex<double>>(ss);
  Mat<std::complex<double>> A = assemble_dense(f, v1(1.0));
  EXPECT_EQ(A(1, 0), std::complex<double>(1.0, -2.0));
  EXPECT_EQ(A(0, 1), std::complex<double>(1.0, 2.0));
}

TEST(ModelIo, TooManyBlocksRejected) {
  auto f = example1_family<double>();
  std::stringstream one;
  save_model(f, one);
  std::string text = one.str();
  // declare Q = 2 while three blocks follow
  text.replace(0, text.find('\n'), "3 2 1");
  std::stringstream ss(text);
  EXPECT_THROW(load_model<double>(ss), parse_error);
}

TEST(ModelIo, ImaginaryDiagonalRejected) {
  std::stringstream ss("2 1 1\naxis 0 1\nterm monomial 1 1\nnnz 1\n0 0 1 0.5\n");
  EXPECT_THROW(load_model<std::complex<double>>(ss), parse_error);
}

TEST(ModelIo, GridCsv) {
  std::stringstream ss("# header\n0.5, 1\n-1,2\n");
  auto g = read_grid(ss, 2);
  ASSERT_EQ(g.size(), 2u);
  EXPECT_DOUBLE_EQ(g[1][1], 2.0);
  std::stringstream bad("1,2,3\n");
  EXPECT_THROW(read_grid(bad, 2), parse_error);
  std::stringstream out;
  write_grid(g, out);
  auto h = read_grid(out, 2);
  EXPECT_EQ(h[0], g[0]);
}
