#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cocycle/kernels.hpp"

namespace cocycle {

struct Atom {
  double x = 0;
  double weight = 0;
};

enum class DensityKind {
  power,     // c s^{-p} on [lo, hi]; lo may be 0 and hi may be +inf
  exp_over_s,  // c e^{-s} / s on (0, inf), the measure of c log(1 + t)
  envelope,  // c (-u'(1/s)) / s^3 on [lo, hi], u a monotone cubic in log x
};

/// A Levy density on the half line. `params` meaning per kind:
///   power       {c, p}
///   exp_over_s  {c}
///   envelope    {c, n, log_x[0..n), u[0..n)}
struct Density {
  DensityKind kind = DensityKind::power;
  std::vector<double> params;
  double lo = 0;
  double hi = 0;

  /// log(m(e^y) e^y), -inf where the density vanishes.
  double log_weight(double y) const;
  double value(double s) const;
};

/// F(t) = drift t + sum_n w_n (1 - e^{-t x_n}) + sum_k int (1 - e^{-ts}) m_k(s) ds.
struct BernsteinSpec {
  double drift = 0;
  std::vector<Atom> atoms;
  std::vector<Density> densities;
  /// Analytic bound on |F - F_exact| for truncated representations.
  double truncation_error = 0;

  bool empty() const { return drift == 0 && atoms.empty() && densities.empty(); }
};

/// Throws Error(integrability) if some density has int min(1,s) m(s) ds = inf,
/// Error(parameter) on nonpositive atoms or negative drift.
void validate(const BernsteinSpec& spec);

BernsteinSpec power_density_spec(double c, double p, double lo, double hi);

/// Representation of t^a, 0 < a < 1, with support truncated to [lo, hi], the
/// mass below lo folded into the drift and the mass above hi into an atom at hi.
BernsteinSpec power_spec(double a, double lo = 1e-8, double hi = 1e8);

/// Exact representation of c log(1 + t).
BernsteinSpec log1p_spec(double c = 1);

BernsteinSpec scaled(BernsteinSpec spec, double factor);

constexpr double kQuadratureRelTol = 1e-8;

double evaluate(const BernsteinSpec& spec, double t);

/// Pointwise F(psi(g)).
KernelTable compose_cnd(const BernsteinSpec& spec, const KernelTable& psi);

struct ProperFunctionOracle {
  std::function<double(double)> u;
  /// hints[m-1] = t_m with u(t) >= m for t >= t_m (optional, may be shorter).
  std::vector<double> horizon_hints;
};

struct MinorizeStep {
  int n = 0;
  double k = 0;
  double x = 0;
};

struct ProperMinorant {
  BernsteinSpec spec;
  std::vector<MinorizeStep> steps;
};

/// Atoms x_1..x_N with 0 < x_n < 2^{-n} and F = sum (1 - e^{-t x_n}) <= u.
/// k_n is certified by an exponential scan t = 2^j: u(t) > F_{n-1}(t) + 2 must
/// hold at 8 consecutive scan points.
ProperMinorant minorize_proper(const ProperFunctionOracle& oracle, int atom_count);

struct MajorizeOptions {
  /// Initial envelope horizon; extended while u(x_max) > u(verify_max) / 10.
  double x_max = 1e8;
  int points_per_decade = 20;
  double verify_max = 1e6;
  int verify_points = 1000;
};

struct SublinearMajorant {
  /// Already multiplied by (1 - e^{-1})^{-1}.
  BernsteinSpec spec;
  /// Smallest verification grid point beyond which spec >= w; +inf if none.
  double threshold = 0;
  std::vector<double> grid;
  std::vector<double> envelope;
};

/// Decreasing C^1 envelope u >= w(x)/x and the measure -u'(1/s)/s^3 on
/// [1/x_max, 1]. Throws Error(precondition) if w(x)/x does not decay on the grid.
SublinearMajorant majorize_sublinear(const std::function<double(double)>& w,
                                     const MajorizeOptions& options = {});

struct SlowCocycle {
  KernelTable psi;
  ProperMinorant construction;
  /// F is built for u / scale and multiplied back by scale (scale = 1 when f >= 1).
  double scale = 1;
  bool dominated = false;        // F(psi0(g)) <= f(g) on the whole ball
  bool u_increasing = false;     // u is not constant over the sampled range
  bool horizon_used = false;     // some k_n lies beyond max psi0 on the ball
  PsdVerdict verdict;
};

/// F o psi0 with F <= u, u(t) = inf { f(g) : psi0(g) >= t } over the ball.
/// Properness is only observed as a trend on a finite ball.
SlowCocycle slow_cocycle(const KernelTable& f, const KernelTable& psi0, int atom_count = 8,
                         double tol = kDefaultPsdTolerance,
                         std::size_t max_test_size = 1500);

std::string to_string(DensityKind kind);
DensityKind density_kind_from_string(const std::string& name);

}  // namespace cocycle
