#include <gtest/gtest.h>

#include <cmath>

#include "cocycle/error.hpp"
#include "cocycle/kernels.hpp"
#include "oracles.hpp"

using namespace cocycle;

namespace {

double square(const GroupElement& g) { return double(g.coords[0]) * double(g.coords[0]); }

}  // namespace

TEST(CndCheck, QuadraticOnZ) {
  auto z = GroupModel::free_abelian(1);
  auto psi = tabulate(z, 8, square, KernelKind::cnd_candidate);
  auto v = cnd_check(psi, 1e-9, 4);
  EXPECT_TRUE(v.pass);
  EXPECT_EQ(v.test_size, 9u);
  EXPECT_GE(v.min_eigenvalue, -1e-9 * (1 + v.scale));
}

TEST(CndCheck, WordLengthOnFreeGroupMatchesEigenOracle) {
  auto f2 = GroupModel::free_group(2);
  auto psi = tabulate(f2, 6, [&](const GroupElement& g) { return double(f2.word_length(g)); },
                      KernelKind::cnd_candidate);
  auto v = cnd_check(psi, 1e-9, 3);
  EXPECT_TRUE(v.pass);
  // Independent Gram matrix over the radius-3 ball.
  Ball b = enumerate_ball(f2, 3);
  Eigen::MatrixXd k(b.size(), b.size());
  for (std::size_t i = 0; i < b.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      k(i, j) = f2.word_length(b[i]) + f2.word_length(b[j]) -
                f2.word_length(f2.multiply(f2.inverse(b[i]), b[j]));
  EXPECT_NEAR(v.min_eigenvalue, oracle::min_eigenvalue(k), 1e-9);
  EXPECT_GE(oracle::min_eigenvalue(k), -1e-9);
}

TEST(CndCheck, NegativeQuadraticFailsWithWitness) {
  auto z = GroupModel::free_abelian(1);
  auto psi = tabulate(z, 8, [](const GroupElement& g) { return -square(g); }, KernelKind::cnd_candidate);
  auto v = cnd_check(psi, 1e-9, 4);
  ASSERT_FALSE(v.pass);
  ASSERT_TRUE(v.witness.has_value());
  double sum = 0;
  for (double l : *v.witness) sum += l;
  EXPECT_NEAR(sum, 0.0, 1e-12);
  EXPECT_GT(v.witness_value, 0.0);
  // Recompute the quadratic form directly.
  Ball b = enumerate_ball(z, 4);
  double q = 0;
  for (std::size_t i = 0; i < b.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) {
      double d = double(b[j].coords[0] - b[i].coords[0]);
      q += (*v.witness)[i] * (*v.witness)[j] * (-d * d);
    }
  EXPECT_NEAR(q, v.witness_value, 1e-9);
}

TEST(CndCheck, MissingPairIsDomainError) {
  auto z = GroupModel::free_abelian(1);
  auto psi = tabulate(z, 4, square, KernelKind::cnd_candidate);
  try {
    cnd_check(psi, 1e-9, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::domain);
    EXPECT_NE(std::string(e.what()).find("("), std::string::npos);
  }
}

TEST(CndCheck, ConvexConeClosure) {
  auto z2 = GroupModel::free_abelian(2);
  auto a = tabulate(z2, 6, [&](const GroupElement& g) { return double(z2.word_length(g)); },
                    KernelKind::cnd_candidate);
  auto b = tabulate(z2, 6, [](const GroupElement& g) {
    return double(g.coords[0] * g.coords[0] + g.coords[1] * g.coords[1]);
  }, KernelKind::cnd_candidate);
  EXPECT_TRUE(cnd_check(add(a, b)).pass);
}

TEST(Schoenberg, GaussianOnZIsPositiveDefinite) {
  auto z = GroupModel::free_abelian(1);
  auto psi = tabulate(z, 8, square, KernelKind::cnd_candidate);
  auto f = schoenberg_transform(psi, 1.0);
  EXPECT_DOUBLE_EQ(f.at(z.identity()), 1.0);
  EXPECT_NEAR(f.at(z.vec({2})), std::exp(-4.0), 1e-15);
  EXPECT_TRUE(pd_check(f, 1e-9, 4).pass);
  Eigen::MatrixXd g(9, 9);
  for (int i = -4; i <= 4; ++i)
    for (int j = -4; j <= 4; ++j) g(i + 4, j + 4) = std::exp(-double((i - j) * (i - j)));
  EXPECT_GE(oracle::min_eigenvalue(g), -1e-12);
}

TEST(Schoenberg, ZeroKernelGivesConstantOne) {
  auto h = GroupModel::heisenberg();
  auto psi = tabulate(h, 4, [](const GroupElement&) { return 0.0; }, KernelKind::cnd_candidate);
  auto f = schoenberg_transform(psi, 3.0);
  for (double v : f.values) EXPECT_EQ(v, 1.0);
  EXPECT_TRUE(pd_check(f).pass);
}

TEST(Schoenberg, RejectsNonPositiveT) {
  auto z = GroupModel::free_abelian(1);
  auto psi = tabulate(z, 2, square, KernelKind::cnd_candidate);
  EXPECT_THROW(schoenberg_transform(psi, 0.0), Error);
}

TEST(Schoenberg, PassesWheneverCndPasses) {
  auto f2 = GroupModel::free_group(2);
  auto psi = tabulate(f2, 6, [&](const GroupElement& g) { return double(f2.word_length(g)); },
                      KernelKind::cnd_candidate);
  ASSERT_TRUE(cnd_check(psi).pass);
  for (double t : {0.1, 0.5, 2.0}) EXPECT_TRUE(pd_check(schoenberg_transform(psi, t)).pass) << t;
}

TEST(GnsEmbed, TranslationCocycleOnZ) {
  auto z = GroupModel::free_abelian(1);
  auto psi = tabulate(z, 8, square, KernelKind::cnd_candidate);
  auto emb = gns_embed(psi, 1e-9, 4);
  ASSERT_EQ(emb.dimension(), 1);
  for (int k = -4; k <= 4; ++k) EXPECT_NEAR(std::abs(emb.at(z.vec({k}))(0)), std::abs(k), 1e-9);
  EXPECT_LE(emb.achieved_tolerance, 1e-8);
}

TEST(GnsEmbed, EuclideanNormOnZ2) {
  auto z2 = GroupModel::free_abelian(2);
  auto psi = tabulate(z2, 6, [](const GroupElement& g) {
    return double(g.coords[0] * g.coords[0] + g.coords[1] * g.coords[1]);
  }, KernelKind::cnd_candidate);
  auto emb = gns_embed(psi, 1e-9, 3);
  EXPECT_EQ(emb.dimension(), 2);
  EXPECT_TRUE(emb.at(z2.identity()).isZero());
  // Direct factorisation: Gram of b(g) = g is <g,h>, compare pairwise distances.
  for (std::size_t i = 0; i < emb.ball->size(); ++i)
    for (std::size_t j = 0; j < emb.ball->size(); ++j) {
      const auto& g = (*emb.ball)[i];
      const auto& h = (*emb.ball)[j];
      double dx = double(g.coords[0] - h.coords[0]), dy = double(g.coords[1] - h.coords[1]);
      double d2 = (emb.vectors.row(i) - emb.vectors.row(j)).squaredNorm();
      ASSERT_NEAR(d2, dx * dx + dy * dy, 1e-8);
    }
}

TEST(GnsEmbed, ZeroKernel) {
  auto z2 = GroupModel::free_abelian(2);
  auto psi = tabulate(z2, 4, [](const GroupElement&) { return 0.0; }, KernelKind::cnd_candidate);
  auto emb = gns_embed(psi);
  EXPECT_EQ(emb.dimension(), 0);
  for (std::size_t i = 0; i < emb.ball->size(); ++i) EXPECT_EQ(emb.norm_at(i), 0.0);
}

TEST(GnsEmbed, RejectsNonCndKernel) {
  auto z = GroupModel::free_abelian(1);
  auto psi = tabulate(z, 6, [](const GroupElement& g) { return -square(g); }, KernelKind::cnd_candidate);
  try {
    gns_embed(psi);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_input);
  }
}

TEST(GnsEmbed, FreeGroupRoundTripAndLinearBound) {
  auto f2 = GroupModel::free_group(2);
  auto psi = tabulate(f2, 6, [&](const GroupElement& g) { return double(f2.word_length(g)); },
                      KernelKind::cnd_candidate);
  auto emb = gns_embed(psi);
  EXPECT_LE(emb.achieved_tolerance, 1e-8);
  auto p = compression_profile(emb);
  for (std::size_t i = 0; i < p.xs.size(); ++i) EXPECT_LE(p.delta[i], p.xs[i] * p.delta[1] + 1e-9);
}

TEST(Compression, IsometricEmbeddingOfZ) {
  auto z = GroupModel::free_abelian(1);
  auto emb = sample_embedding(z, 100, [](const GroupElement& g) {
    return Eigen::VectorXd::Constant(1, double(g.coords[0]));
  });
  auto p = compression_profile(emb);
  for (std::size_t i = 0; i < p.xs.size(); ++i) {
    EXPECT_DOUBLE_EQ(p.rho[i], p.xs[i]);
    EXPECT_DOUBLE_EQ(p.delta[i], p.xs[i]);
  }
  EXPECT_NEAR(p.exponent_fit.alpha, 1.0, 0.01);
}

TEST(Compression, SquareRootFromAbsoluteValue) {
  auto z = GroupModel::free_abelian(1);
  auto psi = tabulate(z, 80, [](const GroupElement& g) { return std::abs(double(g.coords[0])); },
                      KernelKind::cnd_candidate);
  auto emb = gns_embed(psi);
  for (std::size_t i = 0; i < emb.ball->size(); ++i)
    EXPECT_NEAR(emb.vectors.row(i).squaredNorm(), std::abs(double((*emb.ball)[i].coords[0])), 1e-7);
  auto p = compression_profile(emb);
  EXPECT_NEAR(p.exponent_fit.alpha, 0.5, 0.02);
  for (std::size_t i = 0; i < p.xs.size(); ++i) EXPECT_NEAR(p.rho[i], std::sqrt(p.xs[i]), 1e-7);
}

TEST(Compression, ZeroEmbedding) {
  auto z2 = GroupModel::free_abelian(2);
  auto emb = sample_embedding(z2, 5, [](const GroupElement&) { return Eigen::VectorXd::Zero(3); });
  auto p = compression_profile(emb);
  for (std::size_t i = 0; i < p.xs.size(); ++i) {
    EXPECT_EQ(p.rho[i], 0.0);
    EXPECT_EQ(p.delta[i], 0.0);
  }
}

TEST(Compression, MonotoneAndOrdered) {
  for (auto m : {GroupModel::heisenberg(), GroupModel::lamplighter(2), GroupModel::free_group(2)}) {
    auto psi = tabulate(m, 6, [&](const GroupElement& g) { return double(m.word_length(g)); },
                        KernelKind::cnd_candidate);
    if (!cnd_check(psi).pass) continue;
    auto p = compression_profile(gns_embed(psi));
    for (std::size_t i = 1; i < p.xs.size(); ++i) {
      EXPECT_LE(p.rho[i - 1], p.rho[i] + 1e-12);
      EXPECT_LE(p.delta[i - 1], p.delta[i] + 1e-12);
    }
    for (std::size_t i = 0; i < p.xs.size(); ++i) EXPECT_LE(p.rho[i], p.delta[i] + 1e-9);
  }
}

TEST(Compression, EmptyEmbeddingRejected) {
  auto z = GroupModel::free_abelian(1);
  auto emb = sample_embedding(z, 0, [](const GroupElement&) { return Eigen::VectorXd::Zero(1); });
  EXPECT_THROW(compression_profile(emb), Error);
}
