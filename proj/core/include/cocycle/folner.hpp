#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <boost/rational.hpp>

#include "cocycle/group.hpp"
#include "cocycle/kernels.hpp"

namespace cocycle {

using Rational = boost::rational<std::int64_t>;

double to_double(const Rational& r);

struct FolnerSet {
  std::vector<GroupElement> elements;  // sorted, distinct
  int n = 0;
  Rational epsilon;
  int radius_bound = 0;
};

/// max_s |sF triangle F| / |F| over the generating set, with sF the left translate.
Rational folner_defect(const GroupModel& model, const std::vector<GroupElement>& set);

/// Sorts, deduplicates and measures `elements`.
FolnerSet make_folner_set(const GroupModel& model, std::vector<GroupElement> elements, int n);

/// Family-specific Folner sets:
///   free_abelian      box [-n, n]^d
///   heisenberg        |x|, |y| <= n, |z| <= n^2
///   lamplighter       inverses of {supp f in [-n, n], cursor in [-n, n]}
///   baumslag_solitar  inverses of {(r, k): k in [0, n], r in Z, 0 <= r < (n+1) m^n}
/// Throws Error(not_amenable) on free groups of rank >= 2.
FolnerSet standard_folner(const GroupModel& model, int n);

/// The word-metric ball of radius n as a Folner candidate.
FolnerSet ball_folner_set(const GroupModel& model, int n);

struct ControlledVerdict {
  double c_hat = 0;
  std::vector<double> products;  // radius_bound * epsilon per set
  double kendall_z = 0;
  double tail_slope = 0;
  bool pass = false;
};

/// c_hat = max radius_bound(F_n) epsilon(F_n). Fails only when a one-sided
/// Kendall test (5%) finds an increasing trend in the products and their
/// log-log slope against n over the second half exceeds 0.1.
ControlledVerdict controlled_check(const std::vector<FolnerSet>& sequence);

/// A finite-dimensional orthogonal representation with a cocycle, tabulated on a ball.
struct AffineActionDemo {
  GnsEmbedding cocycle;               // b on the ball
  std::vector<Eigen::MatrixXd> pi;    // pi(s) per generator
  std::vector<Eigen::VectorXd> b;     // b(s) per generator
  std::vector<Eigen::MatrixXd> pi_ball;  // pi(g) per ball element
  int dimension() const { return static_cast<int>(b.empty() ? 0 : b.front().size()); }
};

/// Extends b(gs) = b(g) + pi(g) b(s) over the ball and verifies the cocycle
/// identity on every in-ball product (Error(validation) otherwise).
AffineActionDemo make_affine_demo(const GroupModel& model, int radius, std::vector<Eigen::MatrixXd> pi,
                                  std::vector<Eigen::VectorXd> b);

/// Z^d helpers: data are given for +e_i; -e_i is derived.
AffineActionDemo free_abelian_demo(const GroupModel& model, int radius,
                                   const std::vector<Eigen::MatrixXd>& pi_basis,
                                   const std::vector<Eigen::VectorXd>& b_basis);

Eigen::MatrixXd rotation2(double angle);

/// b(g) = v0 - pi(g) v0 with pi(e_i) the plane rotation by angles[i].
AffineActionDemo rotation_coboundary_demo(const GroupModel& model, int radius,
                                          const std::vector<double>& angles, const Eigen::Vector2d& v0);

/// Trivial pi, b(e_i) = translations[i].
AffineActionDemo translation_demo(const GroupModel& model, int radius,
                                  const std::vector<Eigen::VectorXd>& translations);

struct AverageResult {
  Eigen::VectorXd v;
  std::vector<double> residuals;  // per generator, |alpha(s) v - v|
  double sup_norm = 0;            // sup over F of |b|
  double generator_norm = 0;      // max over s of |b(s)|
  /// 2 eps max(sup_F |b|, max_s |b(s)| / 2); always >= residuals.
  double bound = 0;
  /// The textbook form 2 eps sup_F |b|.
  double lemma_bound = 0;
  Rational epsilon;
};

/// v = mean of b over F. Residuals use pi(s) when given, otherwise
/// mean_F b(s g) - mean_F b(g). Throws Error(domain) naming the needed radius
/// when sF leaves the sampled ball.
AverageResult average_cocycle(const GnsEmbedding& b, const FolnerSet& set,
                              const std::vector<Eigen::MatrixXd>* pi = nullptr);
AverageResult average_cocycle(const AffineActionDemo& demo, const FolnerSet& set);

struct ThresholdTable {
  std::shared_ptr<const Ball> ball;
  std::vector<double> u;  // +inf off the union of the sets
  double at(const GroupElement& g) const;
};

/// u(g) = 1 / max { eps_n : g in F_n } over the ball covering every F_n.
ThresholdTable slow_growth_threshold(const GroupModel& model, const std::vector<FolnerSet>& sequence);

struct SphereSubsequence {
  std::vector<std::int64_t> ball_sizes;  // |S^n|, n = 0..horizon+1
  std::vector<Rational> ratios;          // |S^{n+1} \ S^n| / |S^n|, n = 0..horizon
  int c = 0;
  std::vector<int> indices;              // n in [1, horizon] with ratio <= c / n
};

/// Radii where the ball grows by at most c/n, c = round(fitted growth degree) + 1.
/// Defined for free abelian groups and the Heisenberg group.
SphereSubsequence sphere_subsequence(const GroupModel& model, int horizon);

}  // namespace cocycle
