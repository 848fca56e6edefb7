#include <gtest/gtest.h>

#include "cocycle/error.hpp"
#include "cocycle/group.hpp"
#include "oracles.hpp"

using namespace cocycle;

namespace {

std::vector<GroupModel> all_models() {
  return {GroupModel::free_abelian(1), GroupModel::free_abelian(2), GroupModel::free_group(2),
          GroupModel::heisenberg(),    GroupModel::lamplighter(2),  GroupModel::lamplighter(3),
          GroupModel::baumslag_solitar(2), GroupModel::baumslag_solitar(3)};
}

}  // namespace

TEST(ElementOps, FreeAbelianAddition) {
  auto z2 = GroupModel::free_abelian(2);
  EXPECT_EQ(z2.multiply(z2.vec({1, 0}), z2.vec({0, 1})), z2.vec({1, 1}));
}

TEST(ElementOps, FreeReduction) {
  auto f2 = GroupModel::free_group(2);
  EXPECT_EQ(f2.multiply(f2.word("ab"), f2.word("B")), f2.word("a"));
  EXPECT_EQ(f2.word("aAbB"), f2.identity());
}

TEST(ElementOps, HeisenbergMatchesMatrixProduct) {
  auto h = GroupModel::heisenberg();
  EXPECT_EQ(h.multiply(h.heis(1, 0, 0), h.heis(0, 1, 0)), h.heis(1, 1, 1));
  for (int x = -2; x <= 2; ++x)
    for (int y = -2; y <= 2; ++y)
      for (int z = -1; z <= 1; ++z)
        for (int u = -1; u <= 2; ++u) {
          auto a = h.heis(x, y, z);
          auto b = h.heis(u, -y + 1, x - z);
          auto c = h.multiply(a, b);
          auto m = oracle::matmul(oracle::heisenberg_matrix(x, y, z),
                                  oracle::heisenberg_matrix(u, -y + 1, x - z));
          EXPECT_EQ(c, h.heis(m[0][1], m[1][2], m[0][2]));
        }
}

TEST(ElementOps, BaumslagSolitarRelation) {
  auto bs = GroupModel::baumslag_solitar(2);
  auto a = bs.bs(1, 1, 0);
  auto t = bs.bs(0, 1, 1);
  auto lhs = bs.multiply(bs.multiply(t, a), bs.inverse(t));
  EXPECT_EQ(lhs, bs.multiply(a, a));
}

TEST(ElementOps, InverseAndIdentityAxioms) {
  for (const auto& m : all_models()) {
    Ball b = enumerate_ball(m, 3);
    for (const auto& g : b.elements()) {
      EXPECT_EQ(m.multiply(m.inverse(g), g), m.identity()) << m.short_name() << " " << m.format(g);
      EXPECT_EQ(m.multiply(g, m.identity()), g);
    }
  }
}

TEST(ElementOps, Associativity) {
  for (const auto& m : all_models()) {
    Ball b = enumerate_ball(m, 2);
    for (std::size_t i = 0; i < b.size(); i += 3)
      for (std::size_t j = 0; j < b.size(); j += 2)
        for (std::size_t k = 0; k < b.size(); k += 5) {
          auto lhs = m.multiply(m.multiply(b[i], b[j]), b[k]);
          auto rhs = m.multiply(b[i], m.multiply(b[j], b[k]));
          ASSERT_EQ(lhs, rhs) << m.short_name();
        }
  }
}

TEST(ElementOps, MalformedNormalFormRejected) {
  auto f2 = GroupModel::free_group(2);
  EXPECT_THROW(f2.validate(GroupElement{{1, -1}}), Error);
  auto l2 = GroupModel::lamplighter(2);
  EXPECT_THROW(l2.validate(GroupElement{{0, 3, 1, 1, 1}}), Error);
  auto z2 = GroupModel::free_abelian(2);
  try {
    z2.multiply(GroupElement{{1}}, z2.identity());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::validation);
  }
}

TEST(ElementOps, FormatParseRoundTrip) {
  for (const auto& m : all_models()) {
    Ball b = enumerate_ball(m, 3);
    for (const auto& g : b.elements()) EXPECT_EQ(m.parse(m.format(g)), g) << m.format(g);
  }
}

TEST(WordLength, Examples) {
  auto z2 = GroupModel::free_abelian(2);
  EXPECT_EQ(z2.word_length(z2.vec({3, -4})), 7);
  auto f2 = GroupModel::free_group(2);
  EXPECT_EQ(f2.word_length(f2.word("abAAb")), 5);
  auto l2 = GroupModel::lamplighter(2);
  EXPECT_EQ(l2.word_length(l2.lamps(0, {{0, 1}})), 1);
  auto dist = oracle::bfs_distances(l2, 4);
  EXPECT_EQ(dist.at(l2.lamps(0, {{0, 1}})), 1);
}

TEST(WordLength, AgreesWithBfsOracle) {
  for (const auto& m : all_models()) {
    auto dist = oracle::bfs_distances(m, 4);
    for (const auto& [g, d] : dist) ASSERT_EQ(m.word_length(g), d) << m.short_name() << " " << m.format(g);
  }
}

TEST(WordLength, LamplighterFormulaBeyondRadiusFour) {
  auto l3 = GroupModel::lamplighter(3);
  auto dist = oracle::bfs_distances(l3, 7);
  for (const auto& [g, d] : dist) ASSERT_EQ(l3.word_length(g), d) << l3.format(g);
}

TEST(WordLength, SymmetricAndSubadditive) {
  for (const auto& m : all_models()) {
    Ball b = enumerate_ball(m, 3);
    for (const auto& g : b.elements()) {
      EXPECT_EQ(m.word_length(g), m.word_length(m.inverse(g)));
      for (const auto& h : b.elements())
        ASSERT_LE(m.word_length(m.multiply(g, h)), m.word_length(g) + m.word_length(h));
    }
  }
}

TEST(EnumerateBall, Sizes) {
  auto z2 = GroupModel::free_abelian(2);
  EXPECT_EQ(enumerate_ball(z2, 2).size(), 13u);
  auto f2 = GroupModel::free_group(2);
  Ball b = enumerate_ball(f2, 2);
  EXPECT_EQ(b.sphere_size(0), 1u);
  EXPECT_EQ(b.sphere_size(1), 4u);
  EXPECT_EQ(b.sphere_size(2), 12u);
  for (const auto& m : all_models()) {
    Ball b0 = enumerate_ball(m, 0);
    ASSERT_EQ(b0.size(), 1u);
    EXPECT_EQ(b0[0], m.identity());
  }
}

TEST(EnumerateBall, MatchesBfsAndPartition) {
  for (const auto& m : all_models()) {
    Ball b = enumerate_ball(m, 4);
    auto dist = oracle::bfs_distances(m, 4);
    ASSERT_EQ(b.size(), dist.size()) << m.short_name();
    for (int n = 0; n <= 4; ++n) {
      auto sphere = b.sphere(n);
      for (std::size_t i = 0; i < sphere.size(); ++i) {
        EXPECT_EQ(dist.at(sphere[i]), n);
        if (i > 0) EXPECT_LT(sphere[i - 1], sphere[i]);
      }
    }
    EXPECT_EQ(b.sphere_offsets().front(), 0u);
    EXPECT_EQ(b.sphere_offsets().back(), b.size());
  }
}

TEST(EnumerateBall, Deterministic) {
  for (const auto& m : all_models()) {
    auto fresh = m.short_name() == "H3" ? GroupModel::heisenberg() : m;
    EXPECT_EQ(enumerate_ball(m, 3).elements(), enumerate_ball(fresh, 3).elements());
  }
}

TEST(EnumerateBall, BudgetExceeded) {
  auto f2 = GroupModel::free_group(2);
  f2.set_element_budget(100);
  try {
    enumerate_ball(f2, 6);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::resource);
    EXPECT_NE(std::string(e.what()).find("radius"), std::string::npos);
  }
}

TEST(EnumerateBall, SubBall) {
  auto h = GroupModel::heisenberg();
  Ball b = enumerate_ball(h, 4);
  Ball s = sub_ball(b, 2);
  EXPECT_EQ(s.elements(), enumerate_ball(h, 2).elements());
}

TEST(GroupModel, FromName) {
  EXPECT_EQ(GroupModel::from_name("Z2").family(), Family::free_abelian);
  EXPECT_EQ(GroupModel::from_name("F2").param(), 2);
  EXPECT_EQ(GroupModel::from_name("BaumslagSolitar", 3).param(), 3);
  EXPECT_THROW(GroupModel::from_name("Q8"), Error);
  EXPECT_FALSE(GroupModel::free_group(2).is_amenable());
}
