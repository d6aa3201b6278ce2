#include <gtest/gtest.h>

#include "oracles.hpp"

#include <sstream>

using namespace eigengreedy;
using cd = std::complex<double>;

namespace {

VecR v1(double a) { return (VecR(1) << a).finished(); }

Mat<double> cols(std::initializer_list<Vec<double>> c) {
  Mat<double> M(c.begin()->size(), static_cast<Eigen::Index>(c.size()));
  Eigen::Index j = 0;
  for (const auto& v : c) M.col(j++) = v;
  return M;
}

Vec<double> e(int i) { return Vec<double>::Unit(3, i); }

RomState<double> ex1_state(const Mat<double>& V) {
  auto f = example1_family<double>();
  auto st = make_state(f);
  orth_extend(st, f, V);
  return st;
}

}  // namespace

TEST(OrthExtend, EmptyPlusE1) {
  auto st = ex1_state(cols({e(0)}));
  EXPECT_EQ(st.r, 1);
  EXPECT_LT((st.V.col(0) - e(0)).norm(), 1e-15);
}

TEST(OrthExtend, DuplicateDropped) {
  auto f = example1_family<double>();
  auto st = ex1_state(cols({e(0)}));
  EXPECT_EQ(orth_extend(st, f, cols({e(0)})), 0);
  EXPECT_EQ(st.r, 1);
}

TEST(OrthExtend, GramSchmidtDirection) {
  auto f = example1_family<double>();
  auto st = ex1_state(cols({e(0)}));
  orth_extend(st, f, cols({(e(0) + e(1)) / std::sqrt(2.0)}));
  EXPECT_EQ(st.r, 2);
  EXPECT_NEAR(std::abs(st.V(1, 1)), 1.0, 1e-15);
  EXPECT_NEAR(st.V(0, 1), 0.0, 1e-15);
}

TEST(OrthExtend, CannotExceedN) {
  auto f = example1_family<double>();
  auto st = ex1_state(Mat<double>::Identity(3, 3));
  EXPECT_EQ(orth_extend(st, f, cols({Vec<double>::Ones(3)})), 0);
  EXPECT_EQ(st.r, 3);
}

TEST(OrthExtend, IncrementalDataMatchesRecomputation) {
  std::mt19937_64 rng(3);
  auto f = blbq_family<double>(4);
  auto st = oracle::random_state(f, rng, 4, 2, 3);
  EXPECT_LT((st.V.transpose() * st.V - Mat<double>::Identity(st.r, st.r)).norm(), 1e-10);
  EXPECT_LT(consistency_error(st, f), 1e-10);
  auto fc = xxz_family<cd>(5);
  auto sc = oracle::random_state(fc, rng, 3, 1, 2);
  EXPECT_LT(consistency_error(sc, fc), 1e-10);
}

TEST(Reduced, AssembleOnE2E3) {
  auto st = ex1_state(cols({e(1), e(2)}));
  Mat<double> H = reduced_assemble(st, v1(2.0));
  Mat<double> E = Mat<double>::Zero(2, 2);
  E.diagonal() << 2, -2;
  EXPECT_LT((H - E).norm(), 1e-15);
}

TEST(Reduced, EmptyBasisRejected) {
  auto st = make_state(example1_family<double>());
  EXPECT_THROW(reduced_assemble(st, v1(0.0)), precondition_error);
}

TEST(Reduced, SmallestOnE2E3) {
  auto st = ex1_state(cols({e(1), e(2)}));
  auto red = reduced_smallest(st, v1(2.0));
  EXPECT_NEAR(red.lambda1(), -2.0, 1e-15);
  EXPECT_EQ(red.m1(), 1);
}

TEST(Reduced, FullBasisSeesMultiplicity) {
  auto st = ex1_state(Mat<double>::Identity(3, 3));
  auto red = reduced_smallest(st, v1(1.0));
  EXPECT_NEAR(red.lambda1(), -1.0, 1e-15);
  EXPECT_EQ(red.m1(), 2);
  EXPECT_FALSE(red.degenerate);
}

TEST(Reduced, ScalarMatrixFlaggedDegenerate) {
  AffineFamily<double> f;
  f.n = 3;
  f.p = 1;
  f.domain = {{0.0, 1.0}};
  f.terms = {ThetaTerm::monomial(1.0, {0})};
  SpMat<double> A(3, 3);
  for (int i = 0; i < 3; ++i) A.insert(i, i) = 3.0;
  f.matrices = {A};
  auto st = make_state(f);
  orth_extend(st, f, Mat<double>(Mat<double>::Identity(3, 3)));
  EXPECT_TRUE(reduced_smallest(st, v1(0.5)).degenerate);
}

TEST(Residual, ExactVectorGivesZero) {
  auto st = ex1_state(cols({e(0)}));
  auto red = reduced_smallest(st, v1(1.0));
  EXPECT_NEAR(red.lambda1(), 1.0, 1e-15);
  EXPECT_LT(residual_norm(st, v1(1.0), Mat<double>(red.Y.leftCols(1)), red.lambda1()), 1e-15);
}

TEST(Residual, HandComputedValue) {
  auto st = ex1_state(cols({(e(0) + e(1)) / std::sqrt(2.0)}));
  auto red = reduced_smallest(st, v1(0.0));
  EXPECT_NEAR(red.lambda1(), -1.0, 1e-15);
  EXPECT_NEAR(residual_norm(st, v1(0.0), Mat<double>(red.Y.leftCols(1)), red.lambda1()), 1.0, 1e-14);
  EXPECT_NEAR(residual_norm(st, v1(0.0), Mat<double>(red.Y.leftCols(1)), red.lambda1(), ResidualMethod::gramian), 1.0, 1e-7);
}

TEST(Residual, AgreesWithDirectComputation) {
  std::mt19937_64 rng(9);
  auto check = [&](const auto& f, int snaps, int extra) {
    using S = typename std::decay_t<decltype(f)>::scalar_type;
    auto st = oracle::random_state(f, rng, snaps, 1, extra);
    for (int i = 0; i < 5; ++i) {
      VecR mu = oracle::random_mu(f, rng);
      auto red = reduced_smallest(st, mu);
      const int m1 = red.m1();
      Mat<S> Y = red.Y.leftCols(m1);
      const double direct = oracle::direct_residual(f, mu, Mat<S>(st.V * Y), VecR::Constant(m1, red.lambda1()));
      const double fast = residual_norm(st, mu, Y, red.lambda1());
      EXPECT_NEAR(fast, direct, 1e-8 * std::max(1.0, direct));
    }
  };
  check(xxz_family<double>(6), 3, 2);
  check(random_quadratic_family(120, 4), 3, 1);
  check(blbq_family<cd>(4), 2, 2);
}

TEST(ProjectorDistance, Basics) {
  Mat<double> E1 = Mat<double>::Identity(4, 4).leftCols(1);
  Mat<double> E2 = Mat<double>::Identity(4, 4).col(1);
  Mat<double> E12 = Mat<double>::Identity(4, 4).leftCols(2);
  EXPECT_NEAR(projector_distance(E1, E1), 0.0, 1e-15);
  EXPECT_NEAR(projector_distance(E1, E2), 1.0, 1e-15);
  EXPECT_EQ(projector_distance(E1, E12), 1.0);
  EXPECT_THROW(projector_distance(Mat<double>(2 * E1), E1), precondition_error);
}

TEST(ProjectorDistance, SymmetricAndUnitarilyInvariant) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 20; ++t) {
    Mat<double> A = Mat<double>::Random(8, 3), B = Mat<double>::Random(8, 3), U = Mat<double>::Random(3, 3);
    Mat<double> W = Eigen::HouseholderQR<Mat<double>>(A).householderQ() * Mat<double>::Identity(8, 3);
    Mat<double> Wp = Eigen::HouseholderQR<Mat<double>>(B).householderQ() * Mat<double>::Identity(8, 3);
    Mat<double> Q = Eigen::HouseholderQR<Mat<double>>(U).householderQ();
    const double d = projector_distance(W, Wp);
    EXPECT_NEAR(d, projector_distance(Wp, W), 1e-12);
    EXPECT_NEAR(d, projector_distance(Mat<double>(W * Q), Wp), 1e-12);
    EXPECT_NEAR(d, projector_distance(W, Mat<double>(Wp * Q)), 1e-12);
  }
}

TEST(Lift, BasisTimesCoefficients) {
  auto st = ex1_state(cols({e(1), e(2)}));
  Mat<double> y = Mat<double>::Zero(2, 1);
  y(0, 0) = 1;
  EXPECT_LT((lift(st, y) - Mat<double>(e(1))).norm(), 1e-15);
  EXPECT_LT((lift(st, Mat<double>(Mat<double>::Identity(2, 2))) - st.V).norm(), 1e-15);
  EXPECT_THROW(lift(st, Mat<double>(Mat<double>::Identity(3, 3))), precondition_error);
}

TEST(Truncate, MatchesStateBuiltFromLeadingColumns) {
  std::mt19937_64 rng(21);
  auto f = xxz_family<double>(5);
  auto st = oracle::random_state(f, rng, 3, 1, 3);
  ASSERT_GE(st.r, 4);
  auto tr = truncate(st, 3);
  auto ref = make_state(f, st.extrema);
  orth_extend(ref, f, Mat<double>(st.V.leftCols(3)));
  VecR mu = oracle::random_mu(f, rng);
  EXPECT_LT((reduced_assemble(tr, mu) - reduced_assemble(ref, mu)).norm(), 1e-12);
  auto red = reduced_smallest(tr, mu);
  Mat<double> Y = red.Y.leftCols(1);
  EXPECT_NEAR(residual_norm(tr, mu, Y, red.lambda1()), residual_norm(ref, mu, Y, red.lambda1()), 1e-10);
  EXPECT_FALSE(tr.extendable());
  EXPECT_THROW(truncate(st, 0), precondition_error);
}

TEST(RomIo, RoundTripPreservesOnlineResults) {
  std::mt19937_64 rng(8);
  auto f = blbq_family<cd>(3);
  auto st = oracle::random_state(f, rng, 3, 2, 0);
  st.kind = "gap";
  st.tol = 1e-6;
  std::stringstream ss;
  save_rom(st, ss, true);
  auto ld = load_rom<cd>(ss);
  EXPECT_EQ(ld.r, st.r);
  EXPECT_EQ(ld.kind, "gap");
  EXPECT_TRUE(ld.has_basis());
  EXPECT_FALSE(ld.extendable());
  VecR mu = oracle::random_mu(f, rng);
  EXPECT_EQ(reduced_assemble(ld, mu), reduced_assemble(st, mu));
  ASSERT_EQ(ld.snapshots.size(), st.snapshots.size());
  EXPECT_EQ(ld.snapshots[1].M, st.snapshots[1].M);
  EXPECT_EQ(ld.snapshots[1].next_value, st.snapshots[1].next_value);
}

TEST(RomIo, CorruptFileRejected) {
  std::stringstream bad("{\"format\":\"eigengreedy-rom\",\"scalar\":\"real\"}");
  EXPECT_THROW(load_rom<double>(bad), parse_error);
  std::stringstream junk("not json");
  EXPECT_THROW(load_rom<double>(junk), parse_error);
  auto st = ex1_state(Mat<double>::Identity(3, 3));
  std::stringstream ss;
  save_rom(st, ss);
  EXPECT_THROW(load_rom<cd>(ss), parse_error);
}
