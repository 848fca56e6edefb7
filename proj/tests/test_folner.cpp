#include <gtest/gtest.h>

#include <cmath>

#include "cocycle/error.hpp"
#include "cocycle/folner.hpp"

using namespace cocycle;

namespace {

// Direct count of |sF triangle F| / |F| with sets as sorted vectors.
Rational defect_by_count(const GroupModel& m, std::vector<GroupElement> f) {
  std::sort(f.begin(), f.end());
  std::int64_t worst = 0;
  for (const auto& s : m.generators()) {
    std::vector<GroupElement> sf;
    for (const auto& g : f) sf.push_back(m.multiply(s, g));
    std::sort(sf.begin(), sf.end());
    std::vector<GroupElement> diff;
    std::set_symmetric_difference(f.begin(), f.end(), sf.begin(), sf.end(), std::back_inserter(diff));
    worst = std::max<std::int64_t>(worst, diff.size());
  }
  return Rational(worst, static_cast<std::int64_t>(f.size()));
}

}  // namespace

TEST(StandardFolner, IntegerBox) {
  auto z = GroupModel::free_abelian(1);
  auto f = standard_folner(z, 10);
  EXPECT_EQ(f.elements.size(), 21u);
  EXPECT_EQ(f.epsilon, Rational(2, 21));
  EXPECT_EQ(f.radius_bound, 10);
}

TEST(StandardFolner, PlaneBox) {
  auto z2 = GroupModel::free_abelian(2);
  auto f = standard_folner(z2, 10);
  EXPECT_EQ(f.elements.size(), 441u);
  EXPECT_EQ(f.epsilon, Rational(2 * 21, 21 * 21));
  EXPECT_EQ(f.epsilon, defect_by_count(z2, f.elements));
}

TEST(StandardFolner, FreeGroupRefused) {
  try {
    standard_folner(GroupModel::free_group(2), 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::not_amenable);
  }
}

TEST(StandardFolner, DefectMatchesDirectCount) {
  for (auto m : {GroupModel::heisenberg(), GroupModel::lamplighter(2), GroupModel::lamplighter(3),
                 GroupModel::baumslag_solitar(2)}) {
    for (int n = 1; n <= 3; ++n) {
      auto f = standard_folner(m, n);
      EXPECT_EQ(f.epsilon, defect_by_count(m, f.elements)) << m.short_name() << " n=" << n;
      int r = 0;
      for (const auto& g : f.elements) r = std::max(r, m.word_length(g));
      EXPECT_EQ(f.radius_bound, r);
    }
  }
}

TEST(StandardFolner, DefectTendsToZero) {
  auto z = GroupModel::free_abelian(1);
  auto z2 = GroupModel::free_abelian(2);
  for (int n : {10, 25, 50}) {
    EXPECT_EQ(standard_folner(z, n).epsilon, Rational(2, 2 * n + 1));
    EXPECT_EQ(standard_folner(z2, n).epsilon, Rational(2, 2 * n + 1));
  }
  auto h = GroupModel::heisenberg();
  double prev = 10;
  for (int n = 1; n <= 6; ++n) {
    double e = to_double(standard_folner(h, n).epsilon);
    EXPECT_LT(e, prev);
    prev = e;
  }
  EXPECT_LT(prev, 0.4);
  for (auto m : {GroupModel::lamplighter(2), GroupModel::baumslag_solitar(2)}) {
    prev = 10;
    for (int n = 1; n <= 5; ++n) {
      double e = to_double(standard_folner(m, n).epsilon);
      EXPECT_LT(e, prev) << m.short_name();
      prev = e;
    }
    EXPECT_LT(prev, 0.4) << m.short_name();
  }
}

TEST(FolnerDefect, Examples) {
  auto z = GroupModel::free_abelian(1);
  std::vector<GroupElement> f;
  for (int k = 0; k < 10; ++k) f.push_back(z.vec({k}));
  EXPECT_EQ(folner_defect(z, f), Rational(2, 10));
  EXPECT_EQ(folner_defect(z, {z.identity()}), Rational(2));
  auto z2 = GroupModel::free_abelian(2);
  std::vector<GroupElement> sq;
  for (int x = 0; x < 21; ++x)
    for (int y = 0; y < 21; ++y) sq.push_back(z2.vec({x, y}));
  EXPECT_EQ(folner_defect(z2, sq), Rational(2, 21));
}

TEST(ControlledCheck, IntegerBoxesPass) {
  auto z = GroupModel::free_abelian(1);
  std::vector<FolnerSet> seq;
  for (int n = 5; n <= 50; n += 5) seq.push_back(standard_folner(z, n));
  auto v = controlled_check(seq);
  EXPECT_TRUE(v.pass);
  EXPECT_LT(v.c_hat, 1.0);
  EXPECT_NEAR(v.c_hat, 100.0 / 101.0, 1e-12);
}

TEST(ControlledCheck, LamplighterPasses) {
  auto l = GroupModel::lamplighter(2);
  std::vector<FolnerSet> seq;
  for (int n = 1; n <= 5; ++n) seq.push_back(standard_folner(l, n));
  auto v = controlled_check(seq);
  EXPECT_TRUE(v.pass) << v.c_hat << " " << v.kendall_z << " " << v.tail_slope;
  EXPECT_GT(v.c_hat, 0);
}

TEST(ControlledCheck, PaddedSequenceFails) {
  auto z = GroupModel::free_abelian(1);
  std::vector<FolnerSet> seq;
  for (int n = 5; n <= 50; n += 5) {
    auto f = standard_folner(z, n).elements;
    f.push_back(z.vec({std::int64_t(n) * n}));
    seq.push_back(make_folner_set(z, f, n));
  }
  EXPECT_FALSE(controlled_check(seq).pass);
}

TEST(AffineDemo, RejectsNonOrthogonalAndInconsistentData) {
  auto z = GroupModel::free_abelian(1);
  Eigen::MatrixXd bad = 2 * Eigen::MatrixXd::Identity(1, 1);
  EXPECT_THROW(free_abelian_demo(z, 3, {bad}, {Eigen::VectorXd::Ones(1)}), Error);
  // Two non-commuting rotations cannot act as Z^2.
  auto z2 = GroupModel::free_abelian(2);
  Eigen::Matrix3d rx = Eigen::AngleAxisd(0.7, Eigen::Vector3d::UnitX()).toRotationMatrix();
  Eigen::Matrix3d ry = Eigen::AngleAxisd(0.4, Eigen::Vector3d::UnitY()).toRotationMatrix();
  EXPECT_THROW(free_abelian_demo(z2, 3, {Eigen::MatrixXd(rx), Eigen::MatrixXd(ry)},
                                 {Eigen::VectorXd(Eigen::Vector3d(1, 0, 0)), Eigen::VectorXd(Eigen::Vector3d(0, 1, 0))}),
               Error);
}

TEST(AffineDemo, CocycleIdentityOnBall) {
  auto z2 = GroupModel::free_abelian(2);
  auto demo = rotation_coboundary_demo(z2, 5, {0.3, 1.0}, Eigen::Vector2d(1, 0));
  const auto& ball = *demo.cocycle.ball;
  for (std::size_t i = 0; i < ball.size(); ++i) {
    const auto& g = ball[i];
    // Coboundary closed form: b(g) = v0 - R(0.3 x + 1.0 y) v0.
    Eigen::Vector2d expect = Eigen::Vector2d(1, 0) - rotation2(0.3 * g.coords[0] + 1.0 * g.coords[1]) * Eigen::Vector2d(1, 0);
    EXPECT_NEAR((demo.cocycle.at(g) - expect).norm(), 0.0, 1e-12);
  }
}

TEST(AverageCocycle, LinearCocycleIsNotAlmostCoboundary) {
  auto z = GroupModel::free_abelian(1);
  auto demo = translation_demo(z, 45, {Eigen::VectorXd::Ones(1)});
  for (int n : {5, 10, 20, 40}) {
    auto r = average_cocycle(demo, standard_folner(z, n));
    EXPECT_NEAR(r.v.norm(), 0.0, 1e-12);
    for (double res : r.residuals) EXPECT_NEAR(res, 1.0, 1e-12);
    for (double res : r.residuals) EXPECT_LE(res, r.bound + 1e-9);
  }
}

TEST(AverageCocycle, RotationCoboundaryResidualsVanish) {
  auto z = GroupModel::free_abelian(1);
  const double theta = 0.3;
  auto demo = rotation_coboundary_demo(z, 45, {theta}, Eigen::Vector2d(1, 0));
  std::vector<double> res;
  for (int n : {5, 10, 20, 40}) {
    auto r = average_cocycle(demo, standard_folner(z, n));
    // Closed form mean: v0 - (1/(2n+1)) sum_k R(k theta) v0; R sum is real: Dirichlet kernel.
    double dirichlet = std::sin((n + 0.5) * theta) / ((2 * n + 1) * std::sin(theta / 2));
    EXPECT_NEAR((r.v - Eigen::Vector2d(1 - dirichlet, 0)).norm(), 0.0, 1e-12);
    res.push_back(r.residuals[0]);
    for (double x : r.residuals) EXPECT_LE(x, r.bound + 1e-9);
  }
  EXPECT_LT(res.back(), 0.1 * res.front());
  // Without pi the residual is recomputed from translated means.
  auto r1 = average_cocycle(demo, standard_folner(z, 10));
  auto r2 = average_cocycle(demo.cocycle, standard_folner(z, 10));
  for (std::size_t s = 0; s < r1.residuals.size(); ++s) EXPECT_NEAR(r1.residuals[s], r2.residuals[s], 1e-12);
}

TEST(AverageCocycle, SingletonSet) {
  auto z = GroupModel::free_abelian(1);
  auto demo = rotation_coboundary_demo(z, 3, {1.0}, Eigen::Vector2d(1, 0));
  auto r = average_cocycle(demo, make_folner_set(z, {z.identity()}, 0));
  EXPECT_EQ(r.v.norm(), 0.0);
  for (std::size_t s = 0; s < r.residuals.size(); ++s)
    EXPECT_NEAR(r.residuals[s], demo.b[s].norm(), 1e-15);
  for (double x : r.residuals) EXPECT_LE(x, r.bound + 1e-9);
}

TEST(AverageCocycle, BallTooSmall) {
  auto z = GroupModel::free_abelian(1);
  auto demo = translation_demo(z, 5, {Eigen::VectorXd::Ones(1)});
  try {
    average_cocycle(demo, standard_folner(z, 5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::domain);
    EXPECT_NE(std::string(e.what()).find("needs radius 6"), std::string::npos);
  }
}

TEST(AverageCocycle, BoundHoldsAcrossDemos) {
  auto z2 = GroupModel::free_abelian(2);
  std::vector<AffineActionDemo> demos{
      translation_demo(z2, 12, {Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)}),
      rotation_coboundary_demo(z2, 12, {0.3, 1.0}, Eigen::Vector2d(1, 0)),
      rotation_coboundary_demo(z2, 12, {1.0, 0.3}, Eigen::Vector2d(0.5, -2))};
  for (const auto& d : demos)
    for (int n : {1, 2, 5}) {
      auto r = average_cocycle(d, standard_folner(z2, n));
      for (double x : r.residuals) EXPECT_LE(x, r.bound + 1e-9);
    }
}

TEST(SlowGrowthThreshold, IntegerBoxes) {
  auto z = GroupModel::free_abelian(1);
  std::vector<FolnerSet> seq;
  for (int n = 0; n <= 20; ++n) seq.push_back(standard_folner(z, n));
  auto t = slow_growth_threshold(z, seq);
  for (int k = -20; k <= 20; ++k) EXPECT_DOUBLE_EQ(t.at(z.vec({k})), (2.0 * std::abs(k) + 1) / 2);
  EXPECT_TRUE(std::isinf(t.at(z.vec({21}))));
}

TEST(SlowGrowthThreshold, PlaneBoxes) {
  auto z2 = GroupModel::free_abelian(2);
  std::vector<FolnerSet> seq;
  for (int n = 0; n <= 6; ++n) seq.push_back(standard_folner(z2, n));
  auto t = slow_growth_threshold(z2, seq);
  for (std::size_t i = 0; i < t.ball->size(); ++i) {
    const auto& g = (*t.ball)[i];
    long inf = std::max(std::abs(g.coords[0]), std::abs(g.coords[1]));
    if (inf <= 6) EXPECT_DOUBLE_EQ(t.u[i], (2.0 * inf + 1) / 2);
    else EXPECT_TRUE(std::isinf(t.u[i]));
  }
}

TEST(SphereSubsequence, Plane) {
  auto s = sphere_subsequence(GroupModel::free_abelian(2), 30);
  EXPECT_EQ(s.c, 3);
  for (int n = 1; n <= 30; ++n) {
    EXPECT_EQ(s.ball_sizes[n], 2 * n * n + 2 * n + 1);
    EXPECT_EQ(s.ratios[n], Rational(4 * (n + 1), 2 * n * n + 2 * n + 1));
    EXPECT_LE(s.ratios[n], Rational(3, n));
  }
  EXPECT_EQ(s.indices.size(), 30u);
}

TEST(SphereSubsequence, Line) {
  auto s = sphere_subsequence(GroupModel::free_abelian(1), 40);
  EXPECT_EQ(s.c, 2);
  for (int n = 1; n <= 40; ++n) EXPECT_EQ(s.ratios[n], Rational(2, 2 * n + 1));
  EXPECT_EQ(s.indices.size(), 40u);
}

TEST(SphereSubsequence, HeisenbergBallsFormControlledFamily) {
  auto h = GroupModel::heisenberg();
  auto s = sphere_subsequence(h, 20);
  EXPECT_FALSE(s.indices.empty());
  std::vector<FolnerSet> seq;
  for (int n : s.indices)
    if (n >= 4 && n <= 10) seq.push_back(ball_folner_set(h, n));
  ASSERT_GE(seq.size(), 3u);
  EXPECT_TRUE(controlled_check(seq).pass);
  EXPECT_THROW(sphere_subsequence(GroupModel::free_group(2), 5), Error);
}

TEST(SphereSubsequence, AveragingOverBalls) {
  auto z2 = GroupModel::free_abelian(2);
  auto demo = rotation_coboundary_demo(z2, 42, {0.3, 1.0}, Eigen::Vector2d(1, 0));
  auto s = sphere_subsequence(z2, 30);
  double first = -1, last = -1;
  for (int n : {s.indices.front(), s.indices.back()}) {
    auto r = average_cocycle(demo, ball_folner_set(z2, n));
    for (double x : r.residuals) EXPECT_LE(x, r.bound + 1e-9);
    (first < 0 ? first : last) = *std::max_element(r.residuals.begin(), r.residuals.end());
  }
  EXPECT_LT(last, first);
}
