#include "sglr/lowrank/coefficient_space.hpp"
#include "sglr/lowrank/factored_matrix.hpp"
#include "sglr/lowrank/jacobi_svd.hpp"
#include "sglr/lowrank/operator_stack.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace sglr::lowrank {
namespace {

using testing::Gen;
using testing::oracle_singular_values;
using testing::rel_diff;

SparseMatrix identity(Eigen::Index n) {
  SparseMatrix I(n, n);
  I.setIdentity();
  return I;
}

// Builds X with prescribed singular values through random orthonormal factors.
FactoredMatrix with_singular_values(Gen& gen, Eigen::Index r, Eigen::Index c, const Eigen::VectorXd& s) {
  const Eigen::Index k = s.size();
  Eigen::HouseholderQR<Eigen::MatrixXd> qa(gen.matrix(r, k));
  Eigen::HouseholderQR<Eigen::MatrixXd> qb(gen.matrix(c, k));
  Eigen::MatrixXd U = qa.householderQ() * Eigen::MatrixXd::Identity(r, k);
  Eigen::MatrixXd V = qb.householderQ() * Eigen::MatrixXd::Identity(c, k);
  return {U, V * s.asDiagonal()};
}

TEST(JacobiSvd, MatchesDenseOracleOnTallWideAndDeficientInputs) {
  Gen gen(7);
  for (auto [r, c, k] : {std::tuple{9, 4, 4}, {4, 9, 4}, {6, 6, 6}, {12, 7, 3}, {5, 11, 2}}) {
    const Eigen::MatrixXd A = gen.matrix(r, k) * gen.matrix(k, c);
    const SvdResult svd = jacobi_svd(A);
    const Eigen::VectorXd ref = oracle_singular_values(A);
    const Eigen::Index n = std::min(r, c);
    ASSERT_EQ(svd.s.size(), n);
    EXPECT_LT((svd.s - ref).norm(), 1e-12 * ref(0));
    EXPECT_LT(rel_diff(svd.U * svd.s.asDiagonal() * svd.V.transpose(), A), 1e-13);
    for (Eigen::Index i = 1; i < n; ++i) EXPECT_GE(svd.s(i - 1), svd.s(i));
  }
}

TEST(Truncate, RankOneIsNeverDroppedByRelativeRule) {
  Gen gen(1);
  const FactoredMatrix X = gen.factored(7, 5, 1);
  for (double eps : {0.0, 0.3, 0.999}) {
    const FactoredMatrix T = truncate(X, TruncationSpec::relative(eps));
    EXPECT_EQ(T.rank(), 1);
    EXPECT_LT(rel_diff(to_dense(T), to_dense(X)), 1e-14);
  }
}

TEST(Truncate, AbsoluteDropsSingularValuesBelowThreshold) {
  Gen gen(2);
  Eigen::VectorXd s(2);
  s << 10.0, 1e-9;
  const FactoredMatrix X = with_singular_values(gen, 8, 6, s);
  const FactoredMatrix T = truncate(X, TruncationSpec::absolute(1e-8));
  EXPECT_EQ(T.rank(), 1);
  EXPECT_NEAR((to_dense(X) - to_dense(T)).norm(), 1e-9, 1e-14);
}

TEST(Truncate, RankCapErrorMatchesDiscardedSingularValues) {
  Gen gen(3);
  const FactoredMatrix X = gen.factored(10, 8, 6);
  const Eigen::VectorXd ref = oracle_singular_values(to_dense(X));
  const FactoredMatrix T = truncate(X, TruncationSpec::relative(0.0, 2));
  EXPECT_EQ(T.rank(), 2);
  const double expected = ref.segment(2, 4).norm();
  EXPECT_NEAR((to_dense(X) - to_dense(T)).norm(), expected, 1e-12 * ref(0));
}

TEST(Truncate, AbsoluteTieIsRetained) {
  Gen gen(4);
  Eigen::VectorXd s(3);
  s << 4.0, 2.0, 1.0;
  const Eigen::VectorXd exact = s;
  EXPECT_EQ(retained_rank(exact, TruncationSpec::absolute(2.0)), 2);
  EXPECT_EQ(retained_rank(exact, TruncationSpec::absolute(2.0 + 1e-12)), 1);
}

TEST(Truncate, ZeroRankPassesThrough) {
  const FactoredMatrix Z0(5, 3);
  const FactoredMatrix T = truncate(Z0, TruncationSpec::relative(0.1));
  EXPECT_EQ(T.rank(), 0);
  EXPECT_EQ(T.rows(), 5);
  EXPECT_EQ(T.cols(), 3);
}

TEST(Add, IdentityInverseAndDenseOracle) {
  Gen gen(5);
  const FactoredMatrix X = gen.factored(6, 4, 3);
  const FactoredMatrix zero(6, 4);
  EXPECT_LT(rel_diff(to_dense(add(X, zero)), to_dense(X)), 1e-15);

  const FactoredMatrix diff = add(X, scaled(X, -1.0));
  EXPECT_EQ(diff.rank(), 6);
  EXPECT_LT(to_dense(diff).norm(), 1e-13 * to_dense(X).norm());

  const FactoredMatrix W = gen.factored(6, 4, 3);
  const FactoredMatrix S = add(X, W);
  EXPECT_EQ(S.rank(), 6);
  EXPECT_LT(rel_diff(to_dense(S), to_dense(X) + to_dense(W)), 1e-14);

  EXPECT_THROW(add(X, gen.factored(5, 4, 1)), DimensionError);
}

TEST(ApplyOperator, IdentitySingleTermAndDenseKroneckerOracle) {
  Gen gen(6);
  const FactoredMatrix X = gen.factored(5, 4, 2);

  const OperatorStack id({{identity(4), identity(5)}});
  EXPECT_LT(rel_diff(to_dense(apply_operator(id, X)), to_dense(X)), 1e-15);

  const SparseMatrix A0 = gen.sparse(5, 0.4);
  const FactoredMatrix single = apply_operator(OperatorStack({{identity(4), A0}}), X);
  EXPECT_EQ(single.rank(), 2);
  EXPECT_LT(rel_diff(single.Y(), Eigen::MatrixXd(A0 * X.Y())), 1e-15);

  std::vector<OperatorTerm> terms{{identity(4), gen.sparse(5, 0.5)},
                                  {gen.sparse(4, 0.5), gen.sparse(5, 0.5)},
                                  {gen.sparse(4, 0.5), gen.sparse(5, 0.5)}};
  const OperatorStack ops(terms);
  Eigen::MatrixXd ref = Eigen::MatrixXd::Zero(5, 4);
  for (const auto& t : terms) ref += Eigen::MatrixXd(t.A) * to_dense(X) * Eigen::MatrixXd(t.G).transpose();
  const FactoredMatrix out = apply_operator(ops, X);
  EXPECT_EQ(out.rank(), 6);
  EXPECT_LT(rel_diff(to_dense(out), ref), 1e-12);

  // Same operator through the assembled Kronecker sum on vec(X).
  const Eigen::MatrixXd dense = to_dense(X);
  const Eigen::VectorXd vx = Eigen::Map<const Eigen::VectorXd>(dense.data(), dense.size());
  const Eigen::VectorXd kv = ops.kronecker_sum() * vx;
  EXPECT_LT((kv - Eigen::Map<const Eigen::VectorXd>(ref.data(), ref.size())).norm(), 1e-12 * ref.norm());

  // Full-rank representation agrees with the factored one.
  const DenseCoefficients D = apply_operator(ops, DenseCoefficients{dense});
  EXPECT_LT(rel_diff(D.X, ref), 1e-13);
}

TEST(Inner, ZeroScaledRankOneAndDenseOracle) {
  Gen gen(8);
  const FactoredMatrix X = gen.factored(7, 5, 2);
  EXPECT_EQ(inner(X, FactoredMatrix(7, 5)), 0.0);

  Eigen::VectorXd y = gen.matrix(7, 1).col(0).normalized();
  Eigen::VectorXd z = gen.matrix(5, 1).col(0).normalized();
  const double s = 3.5;
  const FactoredMatrix R1 = FactoredMatrix::outer(s * y, z);
  EXPECT_NEAR(inner(R1, R1), s * s, 1e-13);

  const FactoredMatrix W = gen.factored(7, 5, 3);
  const double ref = (to_dense(X).transpose() * to_dense(W)).trace();
  EXPECT_NEAR(inner(X, W), ref, 1e-12 * std::abs(ref));
  EXPECT_NEAR(frobenius_norm(W), to_dense(W).norm(), 1e-12 * to_dense(W).norm());
}

TEST(DenseConversion, ZeroRankOneAndRoundTrip) {
  Gen gen(9);
  EXPECT_EQ(from_dense(Eigen::MatrixXd::Zero(4, 3), TruncationSpec::relative(0.0)).rank(), 0);

  // Trailing singular values of a computed outer product are rounding noise;
  // eps = 0 keeps them, any tiny tolerance drops them.
  const Eigen::MatrixXd outer = gen.matrix(6, 1) * gen.matrix(1, 5);
  EXPECT_EQ(from_dense(outer, TruncationSpec::relative(1e-14)).rank(), 1);
  EXPECT_LT((to_dense(from_dense(outer, TruncationSpec::relative(1e-14))) - outer).norm(), 1e-13 * outer.norm());

  const Eigen::MatrixXd D = gen.matrix(8, 6);
  const FactoredMatrix F = from_dense(D, TruncationSpec::relative(0.0));
  EXPECT_LT((to_dense(F) - D).norm(), 1e-13 * D.norm());
  const Eigen::MatrixXd Dw = gen.matrix(3, 9);
  EXPECT_LT((to_dense(from_dense(Dw, TruncationSpec::relative(0.0))) - Dw).norm(), 1e-13 * Dw.norm());
}

// Randomized property suite over shapes, ranks and tolerances, including
// zero-rank operands.
TEST(LowRankProperties, TruncationBoundsLinearityAndCauchySchwarz) {
  Gen gen(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const int r = gen.integer(1, 12);
    const int c = gen.integer(1, 10);
    const int k = gen.integer(0, 8);
    const FactoredMatrix X = gen.factored(r, c, k);
    const Eigen::MatrixXd D = to_dense(X);

    const double eps = gen.uniform(0.0, 0.5);
    const FactoredMatrix Tr = truncate(X, TruncationSpec::relative(eps));
    EXPECT_LE((D - to_dense(Tr)).norm(), eps * D.norm() * (1 + 1e-10) + 1e-13);
    EXPECT_LE(Tr.rank(), std::min<Eigen::Index>({k, r, c}));

    const double eabs = gen.uniform(0.0, 2.0);
    const FactoredMatrix Ta = truncate(X, TruncationSpec::absolute(eabs));
    const Eigen::VectorXd sv = oracle_singular_values(to_dense(Ta));
    for (Eigen::Index i = 0; i < Ta.rank(); ++i) EXPECT_GE(sv(i), eabs * (1 - 1e-10));

    const FactoredMatrix W = gen.factored(r, c, gen.integer(0, 5));
    const double a = gen.uniform(-2, 2);
    const double b = gen.uniform(-2, 2);
    std::vector<OperatorTerm> terms{{identity(c), gen.sparse(r, 0.3)}, {gen.sparse(c, 0.3), gen.sparse(r, 0.3)}};
    const OperatorStack ops(terms);
    const FactoredMatrix lhs = apply_operator(ops, lincomb({{a, &X}, {b, &W}}));
    const FactoredMatrix ax = apply_operator(ops, X);
    const FactoredMatrix aw = apply_operator(ops, W);
    const FactoredMatrix rhs = lincomb({{a, &ax}, {b, &aw}});
    const double scale = std::max(1.0, to_dense(rhs).norm());
    EXPECT_LE((to_dense(lhs) - to_dense(rhs)).norm(), 1e-12 * scale);

    const double xw = inner(X, W);
    EXPECT_NEAR(inner(W, X), xw, 1e-12 * std::max(1.0, std::abs(xw)));
    EXPECT_LE(xw * xw, inner(X, X) * inner(W, W) * (1 + 1e-12) + 1e-14);
  }
}

}  // namespace
}  // namespace sglr::lowrank
