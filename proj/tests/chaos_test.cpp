#include "sglr/chaos/chaos_basis.hpp"
#include "sglr/chaos/legendre.hpp"
#include "sglr/chaos/multi_index.hpp"
#include "sglr/chaos/smolyak.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

namespace sglr::chaos {
namespace {

// Full tensor Gauss rule on [-sqrt3, sqrt3]^m for the uniform density; an
// independent route to expectations of polynomials.
QuadratureRule tensor_gauss(int m, int n) {
  const Rule1D r = gauss_legendre(n);
  Eigen::Index total = 1;
  for (int l = 0; l < m; ++l) total *= n;
  QuadratureRule q;
  q.points.resize(m, total);
  q.weights.resize(total);
  for (Eigen::Index i = 0; i < total; ++i) {
    Eigen::Index c = i;
    double w = 1.0;
    for (int l = 0; l < m; ++l) {
      const auto k = static_cast<std::size_t>(c % n);
      c /= n;
      q.points(l, i) = sqrt3 * r.nodes[k];
      w *= 0.5 * r.weights[k];
    }
    q.weights(i) = w;
  }
  return q;
}

TEST(MultiIndexSet, CountsMatchBinomial) {
  EXPECT_EQ(MultiIndexSet(11, 3).size(), 364);
  EXPECT_EQ(MultiIndexSet(8, 3).size(), 165);
  EXPECT_EQ(MultiIndexSet(16, 3).size(), 969);
  const MultiIndexSet s(2, 0);
  ASSERT_EQ(s.size(), 1);
  EXPECT_EQ(s[0][0], 0);
  EXPECT_EQ(s[0][1], 0);
}

TEST(MultiIndexSet, GradedOrderingAndUniqueness) {
  const MultiIndexSet s(4, 3);
  std::set<std::vector<int>> seen;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (i > 0) {
      EXPECT_LE(s.total_degree(i - 1), s.total_degree(i));
    }
    seen.emplace(s[i].begin(), s[i].end());
    EXPECT_EQ(*s.find({s[i].begin(), s[i].end()}), i);
  }
  EXPECT_EQ(static_cast<Eigen::Index>(seen.size()), s.size());
  for (int l = 0; l < 4; ++l) {
    for (int c = 0; c < 4; ++c) {
      EXPECT_EQ(s[l + 1][c], c == l ? 1 : 0);
    }
  }
  EXPECT_THROW(MultiIndexSet(0, 2), ConfigError);
}

TEST(ChaosBasis, EvaluationAtOriginAndLinearTerms) {
  const ChaosBasis basis(3, 3);
  const Eigen::VectorXd at0 = basis.eval(Eigen::VectorXd::Zero(3));
  EXPECT_EQ(at0(0), 1.0);
  for (int l = 1; l <= 3; ++l) EXPECT_EQ(at0(l), 0.0);

  Eigen::VectorXd xi(3);
  xi << 0.3, -1.2, 1.7;
  const Eigen::VectorXd v = basis.eval(xi);
  for (int l = 0; l < 3; ++l) EXPECT_DOUBLE_EQ(v(l + 1), xi(l));
}

TEST(ChaosBasis, MonteCarloOrthonormality) {
  const ChaosBasis basis(2, 3);
  const Eigen::Index n = basis.size();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-sqrt3, sqrt3);
  const int N = 100000;
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd sumsq = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd xi(2);
  for (int s = 0; s < N; ++s) {
    xi << u(rng), u(rng);
    const Eigen::VectorXd v = basis.eval(xi);
    const Eigen::MatrixXd P = v * v.transpose();
    sum += P;
    sumsq += P.cwiseProduct(P);
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const double mean = sum(j, k) / N;
      const double var = sumsq(j, k) / N - mean * mean;
      const double se = std::sqrt(std::max(var, 0.0) / N);
      EXPECT_LE(std::abs(mean - (j == k ? 1.0 : 0.0)), 3.0 * se + 1e-14) << j << "," << k;
    }
  }
}

TEST(ChaosBasis, GMatricesAnalyticStructure) {
  const ChaosBasis one(1, 1);
  Eigen::MatrixXd expected(2, 2);
  expected << 0, 1, 1, 0;
  EXPECT_EQ(Eigen::MatrixXd(one.G()[1]), expected);

  const ChaosBasis basis(3, 3);
  const Eigen::Index n = basis.size();
  EXPECT_EQ(Eigen::MatrixXd(basis.G()[0]), Eigen::MatrixXd::Identity(n, n));

  // <xi_l psi_k psi_j> by tensor Gauss quadrature, exact for degree 2p+1.
  const QuadratureRule q = tensor_gauss(3, 5);
  const Eigen::MatrixXd Psi = basis.eval_many(q.points);
  for (int l = 1; l <= 3; ++l) {
    const Eigen::MatrixXd G = basis.G()[static_cast<std::size_t>(l)];
    EXPECT_EQ((G - G.transpose()).norm(), 0.0);
    EXPECT_EQ(G.diagonal().norm(), 0.0);
    const Eigen::MatrixXd ref = Psi * (q.weights.array() * q.points.row(l - 1).transpose().array()).matrix().asDiagonal() *
                                Psi.transpose();
    EXPECT_LT((G - ref).norm(), 1e-13);
  }
}

TEST(ChaosBasis, GtildeCandidateCountAndIdentity) {
  EXPECT_EQ(ChaosBasis(11, 3).gtilde().size(), 31098u);

  const ChaosBasis basis(3, 2);
  const Eigen::Index n = basis.size();
  EXPECT_LT((Eigen::MatrixXd(basis.gtilde_matrix(0)) - Eigen::MatrixXd::Identity(n, n)).norm(), 1e-14);
  for (Eigen::Index r = 0; r < n; ++r) {
    const Eigen::MatrixXd Gr = basis.gtilde_matrix(r);
    EXPECT_EQ((Gr - Gr.transpose()).norm(), 0.0);
  }
}

TEST(ChaosBasis, GtildeSingleVariableValue) {
  const ChaosBasis basis(1, 2);
  // psi_1 = x and psi_2 = sqrt5 (x^2 - 1) / 2, so <psi_1 psi_1 psi_2> =
  // sqrt5/2 (E[x^4] - E[x^2]) = sqrt5/2 (9/5 - 1) = 2/sqrt5.
  const double analytic = 2.0 / std::sqrt(5.0);
  const double stored = Eigen::MatrixXd(basis.gtilde_matrix(2))(1, 1);
  EXPECT_NEAR(stored, analytic, 1e-14);

  const Rule1D r = gauss_legendre(10);
  double quad = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    const Eigen::VectorXd v = legendre_values(2, sqrt3 * r.nodes[i]);
    quad += 0.5 * r.weights[i] * v(1) * v(1) * v(2);
  }
  EXPECT_NEAR(stored, quad, 1e-14);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-sqrt3, sqrt3);
  const int N = 1000000;
  double s = 0.0;
  double s2 = 0.0;
  for (int i = 0; i < N; ++i) {
    const Eigen::VectorXd v = legendre_values(2, u(rng));
    const double f = v(1) * v(1) * v(2);
    s += f;
    s2 += f * f;
  }
  const double mean = s / N;
  const double se = std::sqrt((s2 / N - mean * mean) / N);
  EXPECT_LE(std::abs(mean - stored), 3.0 * se);
}

TEST(ChaosBasis, SparsityRuleIsSupersetOfSupport) {
  for (auto [m, p] : {std::pair{2, 3}, {3, 2}, {1, 4}}) {
    const ChaosBasis basis(m, p);
    const Eigen::Index n = basis.size();
    const QuadratureRule q = tensor_gauss(m, (3 * p) / 2 + 1);
    const Eigen::MatrixXd Psi = basis.eval_many(q.points);
    std::set<std::tuple<Eigen::Index, Eigen::Index, Eigen::Index>> passing;
    for (const auto& e : basis.gtilde()) passing.emplace(e.r, e.j, e.k);
    for (Eigen::Index r = 0; r < n; ++r) {
      for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index k = 0; k < n; ++k) {
          const double v = (q.weights.array() * Psi.row(r).transpose().array() * Psi.row(j).transpose().array() *
                            Psi.row(k).transpose().array())
                               .sum();
          if (!passing.count({r, j, k})) {
            EXPECT_LE(std::abs(v), 1e-14);
          }
        }
      }
    }
    for (const auto& e : basis.gtilde()) {
      const double v = (q.weights.array() * Psi.row(e.r).transpose().array() * Psi.row(e.j).transpose().array() *
                        Psi.row(e.k).transpose().array())
                           .sum();
      EXPECT_NEAR(e.value, v, 1e-13);
    }
  }
}

TEST(ChaosBasis, ContractGtildeMatchesDenseTripleSum) {
  const ChaosBasis basis(3, 2);
  const Eigen::Index n = basis.size();
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  Eigen::MatrixXd H(n, n);
  for (Eigen::Index i = 0; i < H.size(); ++i) H.data()[i] = g(rng);
  const Eigen::VectorXd fast = basis.contract_gtilde(H);
  for (Eigen::Index r = 0; r < n; ++r) {
    double ref = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index k = 0; k < n; ++k) ref += basis.triple(r, j, k) * H(j, k);
    EXPECT_NEAR(fast(r), ref, 1e-12);
  }
}

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
  for (int n = 1; n <= 8; ++n) {
    const Rule1D r = gauss_legendre(n);
    for (int d = 0; d <= 2 * n - 1; ++d) {
      double s = 0.0;
      for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], d);
      const double exact = d % 2 ? 0.0 : 2.0 / (d + 1);
      EXPECT_NEAR(s, exact, 1e-14) << n << " " << d;
    }
  }
}

TEST(Smolyak, WeightsPointsAndExactness) {
  const QuadratureRule q = smolyak_rule(3, 4);
  EXPECT_NEAR(q.weights.sum(), 1.0, 1e-14);
  EXPECT_LE(q.points.cwiseAbs().maxCoeff(), sqrt3);

  const ChaosBasis basis(3, 2);
  const Eigen::MatrixXd Psi = basis.eval_many(q.points);
  const Eigen::MatrixXd gram = Psi * q.weights.asDiagonal() * Psi.transpose();
  EXPECT_LT((gram - Eigen::MatrixXd::Identity(basis.size(), basis.size())).cwiseAbs().maxCoeff(), 1e-12);

  // Level-1 rule is the single point at the origin.
  const QuadratureRule q1 = smolyak_rule(5, 1);
  EXPECT_EQ(q1.size(), 1);
  EXPECT_EQ(q1.points.norm(), 0.0);
}

TEST(Smolyak, PointCountForElevenVariablesLevelFour) {
  // Count produced by the n_i = i growth rule; see README for the discussion
  // of the published count.
  const QuadratureRule q = smolyak_rule(11, 4);
  EXPECT_EQ(q.size(), 2069);
  EXPECT_NEAR(q.weights.sum(), 1.0, 1e-12);
}

}  // namespace
}  // namespace sglr::chaos
