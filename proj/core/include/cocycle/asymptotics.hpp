#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "cocycle/folner.hpp"
#include "cocycle/kernels.hpp"

namespace cocycle {

enum class GrowthClass { linear, sublinear, indeterminate };

std::string to_string(GrowthClass c);

struct GrowthSample {
  int radius = 0;
  double min_norm = 0;  // over the sphere
  double max_norm = 0;
};

struct GrowthVerdict {
  GrowthClass growth = GrowthClass::indeterminate;
  /// Slope of log rho(r) on the top decade, rho(r) = min |b(g)| over |g| >= r.
  double alpha_hat = 0;
  ExponentFit fit;
  int horizon = 0;
  std::vector<GrowthSample> evidence;
  /// (max_{|g|<=R} |b| / R) / (max_{|g|<=m} |b| / m) with m = round(sqrt R).
  double sublinear_ratio = 0;
};

constexpr double kLinearSlope = 0.9;
constexpr double kLinearEnvelope = 0.1;
constexpr double kSublinearRatio = 0.5;

/// linear: slope >= 0.9 and rho(r) >= 0.1 r on [R/10, R];
/// sublinear: sublinear_ratio <= 0.5; otherwise indeterminate.
/// Throws Error(precondition) with fewer than 3 populated spheres.
GrowthVerdict classify_growth(const GnsEmbedding& emb);

struct GkWitness {
  double t = 0;
  std::vector<double> sphere_sums;      // sum over S_n of f_t^2, f_t = exp(-t |b|^2)
  std::vector<double> log_sphere_sums;  // exact logs (no underflow)
  std::vector<std::int64_t> sphere_sizes;
  /// Least-squares slope of log sphere sum against n on the second half of the spheres.
  double tail_rate = 0;
  bool summable = false;
  /// Slope of log |S_n| against n on the same range.
  double a_hat = 0;
};

/// Summable iff the tail rate is negative and the sums decrease at every step
/// of the tail.
GkWitness gk_witness(const GnsEmbedding& emb, double t);

struct FourierSqrtOptions {
  /// Period per axis (power of two); 0 picks the smallest power of two that
  /// leaves under 1e-12 of |f| outside and covers the table radius.
  int window = 0;
  double tail_tol = 1e-12;
  double positivity_tol = 1e-10;
};

struct FourierSqrt {
  int dimension = 0;
  int window = 0;
  std::vector<double> phi;  // torus values, axis 0 fastest, index k mod window
  double min_transform = 0;
  double max_transform = 0;
  double tail_mass = 0;
  double norm_sq = 0;
  /// sup over the half-radius ball of |phi * phi - f|, by direct summation.
  double reconstruction_error = 0;
  /// per generator s, sum_g phi(g - s) phi(g).
  std::vector<double> invariance;

  double at(const std::vector<std::int64_t>& k) const;
};

/// phi = inverse transform of sqrt(transform of f) on the d-torus.
/// Throws Error(not_positive_definite) if the transform dips below
/// -positivity_tol * max transform, Error(parameter) off Z^d.
FourierSqrt fourier_sqrt_abelian(const KernelTable& f, const FourierSqrtOptions& options = {});

enum class MeanKind { uniform, smoothed };

struct GromovOptions {
  int output_radius = 6;
  MeanKind mean = MeanKind::smoothed;
  /// Number of uniform factors convolved in the smoothed mean.
  int order = 6;
  double stabilization_tol = 1e-6;
};

struct GromovAverage {
  KernelTable psi;  // from the last set
  std::vector<double> successive_diff;  // sup |psi_n - psi_{n-1}| on the output ball
  bool stabilized = false;
  /// max_g |sqrt psi_N(g) - sqrt psi_{N-1}(g)|
  double slack = 0;
  /// Over the pairs (h, hg) averaged in the last step, by word length of g:
  /// rho[l] = inf over |g| >= l, delta[l] = sup over |g| <= l of |f(hg) - f(h)|.
  std::vector<double> rho;
  std::vector<double> delta;
  std::vector<std::size_t> support_sizes;
};

/// psi_n(g) = sum_h mu_n(h) |f(hg) - f(h)|^2 with mu_n uniform on F_n^{-1}
/// (uniform) or its `order`-fold self-convolution (smoothed). Throws
/// Error(domain) naming the required radius when f is sampled too small.
GromovAverage gromov_average(const GnsEmbedding& f, const std::vector<FolnerSet>& sequence,
                             const GromovOptions& options = {});

struct GridSpec {
  std::vector<double> lo;
  std::vector<double> hi;
  double step = 0.01;
};

/// A map sampled on an axis-aligned grid of R^d, axis 0 fastest.
struct GridMap {
  int dimension = 0;
  std::vector<double> lo;
  double step = 0;
  std::vector<int> counts;
  Eigen::MatrixXd values;  // one row per grid point

  std::size_t size() const { return static_cast<std::size_t>(values.rows()); }
  Eigen::VectorXd point(std::size_t index) const;
};

GridMap sample_grid(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f, const GridSpec& grid);

/// phi(y) = prod_i trap(y_i): 1 for |y_i| <= inner, linear down to 0 at outer.
struct TrapezoidBump {
  double inner = 1;
  double outer = 2;
  double operator()(const Eigen::VectorXd& y) const;
};

struct SmoothedMap {
  GridMap original;
  GridMap smoothed;
  int overlap = 0;             // max number of net points active at a grid point
  double displacement = 0;     // M: sup |f(g) - f(x)| with phi(g - x) > 0
  double net_spread = 0;       // M': sup |f(x) - f(y)| over net points active together
  double sup_distance = 0;     // measured sup |f~ - f|
  double min_cover = 0;        // min Phi over the grid
  std::vector<int> gap_steps;  // gaps in grid steps, per axis
  std::vector<double> modulus;        // measured sup |f~(g) - f~(g + h e_i)|
  std::vector<double> modulus_bound;  // 2 n (u_phi(h) + u_{1/Phi}(h)) M'
  double lipschitz = 0;        // max modulus[k] / (k step)
  double lipschitz_bound = 0;  // modulus_bound[0] / step
};

/// f~(g) = Phi(g)^{-1} sum_{x in X} phi(g - x) f(x), X = spacing Z^d inside the box.
/// Throws Error(net) where Phi < 1.
SmoothedMap smooth_uniform_map(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                               const GridSpec& grid, double net_spacing, const TrapezoidBump& bump = {},
                               int max_gap_steps = 0);

}  // namespace cocycle
