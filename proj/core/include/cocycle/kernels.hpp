#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "cocycle/group.hpp"

namespace cocycle {

enum class KernelKind { cnd_candidate, pd_candidate };

/// A function on the group sampled on a word-metric ball, stored in ball order.
struct KernelTable {
  GroupModel model;
  std::shared_ptr<const Ball> ball;
  std::vector<double> values;
  KernelKind kind = KernelKind::cnd_candidate;

  std::optional<double> find(const GroupElement& g) const;
  /// Throws Error(domain) naming `g` when it lies outside the ball.
  double at(const GroupElement& g) const;
};

KernelTable tabulate(const GroupModel& model, std::shared_ptr<const Ball> ball,
                     const std::function<double(const GroupElement&)>& fn, KernelKind kind);
KernelTable tabulate(const GroupModel& model, int radius,
                     const std::function<double(const GroupElement&)>& fn, KernelKind kind);

/// Outcome of a positive-semidefiniteness test on a Gram matrix.
struct PsdVerdict {
  bool pass = false;
  double min_eigenvalue = 0;
  double scale = 0;      // max |K_ij|
  double threshold = 0;  // -tol * (1 + scale)
  int test_radius = 0;
  std::size_t test_size = 0;
  /// On a failed CND check: lambda with sum(lambda) = 0 over the test set.
  std::optional<std::vector<double>> witness;
  /// sum_ij lambda_i lambda_j psi(g_i^{-1} g_j), positive on failure.
  double witness_value = 0;
};

constexpr double kDefaultPsdTolerance = 1e-9;

/// Conditionally-negative-definite test through the centered Gram matrix
/// K(g,h) = psi(g) + psi(h) - psi(g^{-1}h) on the sub-ball of `test_radius`
/// (default: half the table radius, so every g^{-1}h is tabulated).
PsdVerdict cnd_check(const KernelTable& psi, double tol = kDefaultPsdTolerance,
                     std::optional<int> test_radius = std::nullopt);

/// Positive-definiteness test of the Gram matrix [f(g^{-1}h)].
PsdVerdict pd_check(const KernelTable& f, double tol = kDefaultPsdTolerance,
                    std::optional<int> test_radius = std::nullopt);

/// f_t = exp(-t psi).
KernelTable schoenberg_transform(const KernelTable& psi, double t);

/// Pointwise sum, for the convex-cone property.
KernelTable add(const KernelTable& a, const KernelTable& b);

/// Vectors b(g) on a ball, one row per ball element (ball order).
struct GnsEmbedding {
  GroupModel model;
  std::shared_ptr<const Ball> ball;
  Eigen::MatrixXd vectors;
  double achieved_tolerance = 0;

  int dimension() const noexcept { return static_cast<int>(vectors.cols()); }
  Eigen::VectorXd at(const GroupElement& g) const;
  std::optional<Eigen::VectorXd> find(const GroupElement& g) const;
  double norm_at(std::size_t index) const { return vectors.row(static_cast<Eigen::Index>(index)).norm(); }
};

/// Factorises K/2 = B B^T on the half-radius sub-ball so that
/// |b(g) - b(h)|^2 = psi(g^{-1}h). Columns follow descending eigenvalues; each
/// column's first significant coordinate is positive.
GnsEmbedding gns_embed(const KernelTable& psi, double tol = kDefaultPsdTolerance,
                       std::optional<int> radius = std::nullopt);

/// Wraps an explicit map (e.g. b(k) = k) as an embedding on a ball.
GnsEmbedding sample_embedding(const GroupModel& model, int radius,
                              const std::function<Eigen::VectorXd(const GroupElement&)>& fn);

/// Largest |(|b(g)-b(h)|^2) - psi(g^{-1}h)| over in-ball pairs.
double round_trip_error(const GnsEmbedding& emb, const KernelTable& psi);

struct ExponentFit {
  double alpha = 0;
  double half_width = std::numeric_limits<double>::infinity();  // ~95% band on the slope
  double x_lo = 0;
  double x_hi = 0;
  std::size_t points = 0;
};

/// Least-squares slope of log y against log x over points with x in
/// [x_lo, x_hi] and y > 0.
ExponentFit fit_loglog(const std::vector<double>& xs, const std::vector<double>& ys, double x_lo,
                       double x_hi);

struct CompressionProfile {
  std::vector<double> xs;
  std::vector<double> rho;    // inf over the ball of |b(g)|, |g| >= x (censored at horizon)
  std::vector<double> delta;  // sup of |b(g)-b(h)|, g^{-1}h in the ball, |g^{-1}h| <= x
  ExponentFit exponent_fit;
  int horizon = 0;
};

CompressionProfile compression_profile(const GnsEmbedding& emb);

}  // namespace cocycle
