#include "cocycle/bernstein.hpp"

#include <math.h>  // boost pchip calls isnan unqualified

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "cocycle/error.hpp"

namespace cocycle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Curve = boost::math::interpolators::pchip<std::vector<double>>;

// Monotone cubic through (log x_i, u_i), flat beyond the last knot.
Curve envelope_curve(const Density& d) {
  const auto n = static_cast<std::size_t>(d.params.at(1));
  std::vector<double> lx(d.params.begin() + 2, d.params.begin() + 2 + n);
  std::vector<double> u(d.params.begin() + 2 + n, d.params.begin() + 2 + 2 * n);
  return Curve(std::move(lx), std::move(u), std::numeric_limits<double>::quiet_NaN(), 0.0);
}

double log_weight_with(const Density& d, const Curve* curve, double y) {
  switch (d.kind) {
    case DensityKind::power:
      return std::log(d.params[0]) + (1.0 - d.params[1]) * y;
    case DensityKind::exp_over_s:
      return std::log(d.params[0]) - std::exp(y);
    case DensityKind::envelope: {
      const auto n = static_cast<std::size_t>(d.params[1]);
      const double l = std::clamp(-y, d.params[2], d.params[2 + n - 1]);
      const double slope = -curve->prime(l);
      if (!(slope > 0)) return -kInf;
      return std::log(d.params[0]) + std::log(slope) - y;
    }
  }
  return -kInf;
}

}  // namespace

double Density::log_weight(double y) const {
  if (kind != DensityKind::envelope) return log_weight_with(*this, nullptr, y);
  const Curve c = envelope_curve(*this);
  return log_weight_with(*this, &c, y);
}

double Density::value(double s) const {
  if (!(s > 0) || s < lo || s > hi) return 0;
  const double lw = log_weight(std::log(s));
  return std::exp(lw) / s;
}

std::string to_string(DensityKind kind) {
  switch (kind) {
    case DensityKind::power: return "power";
    case DensityKind::exp_over_s: return "exp_over_s";
    case DensityKind::envelope: return "envelope";
  }
  return "?";
}

DensityKind density_kind_from_string(const std::string& name) {
  if (name == "power") return DensityKind::power;
  if (name == "exp_over_s") return DensityKind::exp_over_s;
  if (name == "envelope") return DensityKind::envelope;
  fail(ErrorKind::validation, "unknown density kind '" + name + "'");
}

void validate(const BernsteinSpec& spec) {
  if (!(spec.drift >= 0) || !std::isfinite(spec.drift))
    fail(ErrorKind::parameter, "drift must be finite and nonnegative");
  for (const auto& a : spec.atoms)
    if (!(a.x > 0) || !(a.weight > 0) || !std::isfinite(a.x) || !std::isfinite(a.weight))
      fail(ErrorKind::parameter, "atoms need positive finite position and weight");
  for (const auto& d : spec.densities) {
    if (!(d.lo >= 0) || !(d.hi > d.lo))
      fail(ErrorKind::parameter, "density support must satisfy 0 <= lo < hi");
    switch (d.kind) {
      case DensityKind::power: {
        if (d.params.size() != 2 || !(d.params[0] > 0))
          fail(ErrorKind::parameter, "power density needs {c > 0, p}");
        const double p = d.params[1];
        if (d.lo == 0 && p >= 2)
          fail(ErrorKind::integrability,
               "density s^-" + std::to_string(p) + " is not integrable against s near 0");
        if (std::isinf(d.hi) && p <= 1)
          fail(ErrorKind::integrability,
               "density s^-" + std::to_string(p) + " has infinite mass near infinity");
        break;
      }
      case DensityKind::exp_over_s:
        if (d.params.size() != 1 || !(d.params[0] > 0))
          fail(ErrorKind::parameter, "exp_over_s density needs {c > 0}");
        break;
      case DensityKind::envelope: {
        if (d.params.size() < 2) fail(ErrorKind::parameter, "envelope density needs {c, n, ...}");
        const auto n = static_cast<std::size_t>(d.params[1]);
        if (n < 4 || d.params.size() != 2 + 2 * n || !(d.params[0] > 0) || !(d.lo > 0) ||
            std::isinf(d.hi))
          fail(ErrorKind::parameter, "malformed envelope density");
        for (std::size_t i = 1; i < n; ++i) {
          if (!(d.params[2 + i] > d.params[1 + i]))
            fail(ErrorKind::parameter, "envelope knots must increase");
          if (d.params[2 + n + i] > d.params[1 + n + i])
            fail(ErrorKind::parameter, "envelope must be nonincreasing");
        }
        break;
      }
    }
  }
}

BernsteinSpec power_density_spec(double c, double p, double lo, double hi) {
  BernsteinSpec s;
  s.densities.push_back(Density{DensityKind::power, {c, p}, lo, hi});
  validate(s);
  return s;
}

BernsteinSpec power_spec(double a, double lo, double hi) {
  if (!(a > 0 && a < 1)) fail(ErrorKind::parameter, "t^a is Bernstein only for 0 < a <= 1");
  if (!(lo > 0 && hi > lo && std::isfinite(hi)))
    fail(ErrorKind::parameter, "truncated support must satisfy 0 < lo < hi < inf");
  const double c = a / boost::math::tgamma(1.0 - a);
  BernsteinSpec s;
  s.drift = c * std::pow(lo, 1.0 - a) / (1.0 - a);
  s.densities.push_back(Density{DensityKind::power, {c, 1.0 + a}, lo, hi});
  // Mass beyond hi, c hi^{-a} / a, sits in an atom at hi.
  s.atoms.push_back(Atom{hi, c * std::pow(hi, -a) / a});
  s.truncation_error = c * std::pow(hi, -a) / a;
  validate(s);
  return s;
}

BernsteinSpec log1p_spec(double c) {
  BernsteinSpec s;
  s.densities.push_back(Density{DensityKind::exp_over_s, {c}, 0.0, kInf});
  validate(s);
  return s;
}

BernsteinSpec scaled(BernsteinSpec spec, double factor) {
  if (!(factor > 0)) fail(ErrorKind::parameter, "scale factor must be positive");
  spec.drift *= factor;
  for (auto& a : spec.atoms) a.weight *= factor;
  for (auto& d : spec.densities) d.params[0] *= factor;
  spec.truncation_error *= factor;
  return spec;
}

namespace {

double density_integral(const Density& d, double t) {
  const double log_t = std::log(t);
  std::optional<Curve> curve;
  if (d.kind == DensityKind::envelope) curve.emplace(envelope_curve(d));
  const Curve* cp = curve ? &*curve : nullptr;
  auto integrand = [&](double y) {
    const double lw = log_weight_with(d, cp, y);
    if (lw == -kInf) return 0.0;
    const double u = std::exp(log_t + y);
    if (u < 1e-5) return std::exp(log_t + y + lw) * (1.0 - u / 2.0 + u * u / 6.0);
    return -std::expm1(-u) * std::exp(lw);
  };

  const double ya = d.lo > 0 ? std::log(d.lo) : -kInf;
  const double yb = std::isinf(d.hi) ? kInf : std::log(d.hi);
  // Break points: the transition of 1 - e^{-ts} near s = 1/t, and a unit-ish
  // mesh across finite supports.
  std::vector<double> cuts{ya, yb};
  for (double c : {-log_t - 6, -log_t - 2, -log_t, -log_t + 2, -log_t + 6})
    if (c > ya && c < yb) cuts.push_back(c);
  if (d.kind == DensityKind::envelope) {
    // u' is only continuous at the knots; integrate knot to knot.
    const auto n = static_cast<std::size_t>(d.params[1]);
    for (std::size_t i = 0; i < n; ++i) {
      const double c = -d.params[2 + i];
      if (c > ya && c < yb) cuts.push_back(c);
    }
  } else if (std::isfinite(ya) && std::isfinite(yb)) {
    for (double c = ya + 2; c < yb; c += 2) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  double total = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    total += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        integrand, cuts[i], cuts[i + 1], 15, kQuadratureRelTol);
  }
  return total;
}

}  // namespace

double evaluate(const BernsteinSpec& spec, double t) {
  if (!(t >= 0)) fail(ErrorKind::parameter, "Bernstein functions are evaluated at t >= 0");
  if (t == 0) return 0;
  if (std::isinf(t)) return kInf;
  double f = spec.drift * t;
  for (const auto& a : spec.atoms) f += a.weight * -std::expm1(-t * a.x);
  for (const auto& d : spec.densities) {
    double v = density_integral(d, t);
    if (!std::isfinite(v))
      fail(ErrorKind::integrability, "density integral diverges at t = " + std::to_string(t));
    f += v;
  }
  return f;
}

KernelTable compose_cnd(const BernsteinSpec& spec, const KernelTable& psi) {
  KernelTable out = psi;
  out.kind = KernelKind::cnd_candidate;
  for (auto& v : out.values) {
    if (v < 0) fail(ErrorKind::parameter, "compose_cnd needs psi >= 0, got " + std::to_string(v));
    v = evaluate(spec, v);
  }
  return out;
}

ProperMinorant minorize_proper(const ProperFunctionOracle& oracle, int atom_count) {
  if (atom_count < 1) fail(ErrorKind::parameter, "atom count must be at least 1");
  if (!oracle.u) fail(ErrorKind::parameter, "proper function oracle has no callback");
  for (std::size_t m = 0; m < oracle.horizon_hints.size(); ++m) {
    const double t = oracle.horizon_hints[m];
    if (!(t >= 0) || oracle.u(t) < double(m + 1))
      fail(ErrorKind::parameter, "horizon hint t_" + std::to_string(m + 1) +
                                     " is inconsistent with u(t_m) >= m");
  }

  constexpr int kRun = 8;
  constexpr int kMaxExponent = 62;
  ProperMinorant out;
  auto partial = [&](double t) {
    double f = 0;
    for (const auto& a : out.spec.atoms) f += -std::expm1(-t * a.x);
    return f;
  };

  for (int n = 1; n <= atom_count; ++n) {
    double start = 1;
    if (!oracle.horizon_hints.empty()) {
      std::size_t idx = std::min<std::size_t>(n, oracle.horizon_hints.size() - 1);
      start = std::max(1.0, oracle.horizon_hints[idx]);
    }
    int j = std::max(0, static_cast<int>(std::floor(std::log2(start))));
    int run = 0;
    std::optional<double> k;
    for (; j <= kMaxExponent; ++j) {
      const double t = std::ldexp(1.0, j);
      if (oracle.u(t) > partial(t) + 2.0) {
        if (++run == kRun) {
          k = std::ldexp(1.0, j - kRun + 1);
          break;
        }
      } else {
        run = 0;
      }
    }
    if (!k)
      fail(ErrorKind::construction,
           "induction stalled at step n=" + std::to_string(n) +
               ": no k_n with u(t) > F_{n-1}(t) + 2 on 8 consecutive points up to t = 2^62");
    const double bound = std::ldexp(1.0, -n);
    const double x = std::min(-std::log1p(-bound) / *k, 0.5 * bound);
    out.spec.atoms.push_back(Atom{x, 1.0});
    out.steps.push_back(MinorizeStep{n, *k, x});
  }
  return out;
}

SublinearMajorant majorize_sublinear(const std::function<double(double)>& w,
                                     const MajorizeOptions& options) {
  if (!(options.x_max > 10) || options.points_per_decade < 2 || !(options.verify_max > 1) ||
      options.verify_points < 2)
    fail(ErrorKind::parameter, "invalid majorant grid options");
  SublinearMajorant out;
  std::vector<double> ratio;
  auto sample = [&](int i) {
    const double x = std::pow(10.0, double(i) / options.points_per_decade);
    const double wx = w(x);
    if (!std::isfinite(wx) || wx < 0)
      fail(ErrorKind::precondition, "w must be finite and nonnegative, w(" + std::to_string(x) +
                                        ") = " + std::to_string(wx));
    out.grid.push_back(x);
    ratio.push_back(wx / x);
  };
  // The density lives on [1/x_max, 1] and u is frozen beyond x_max, which costs
  // about t u(x_max). x_max is pushed out until u(x_max) <= u(verify_max) / 10.
  const int ppd = options.points_per_decade;
  const int verify_index = static_cast<int>(std::ceil(std::log10(options.verify_max) * ppd));
  int n = std::max(verify_index, static_cast<int>(std::lround(std::log10(options.x_max) * ppd)));
  const int n_limit = 300 * ppd;
  for (int i = 0; i <= n; ++i) sample(i);
  while (true) {
    out.envelope = ratio;
    for (std::size_t i = out.envelope.size() - 1; i-- > 0;)
      out.envelope[i] = std::max(out.envelope[i], out.envelope[i + 1]);
    if (out.envelope.back() <= 0.1 * out.envelope[verify_index] * (1 + 1e-12) || n >= n_limit) break;
    const int next = std::min(n_limit, n + 4 * ppd);
    for (int i = n + 1; i <= next; ++i) sample(i);
    n = next;
  }

  if (out.envelope.front() == 0) {
    out.threshold = 0;
    return out;
  }
  if (!(out.envelope.back() <= 0.5 * out.envelope.front()))
    fail(ErrorKind::precondition,
         "w(x)/x does not decay on [1, " + std::to_string(options.x_max) + "]: sup ratio " +
             std::to_string(out.envelope.front()) + " at 1 vs " + std::to_string(out.envelope.back()) +
             " at the top");

  Density d;
  d.kind = DensityKind::envelope;
  d.lo = 1.0 / out.grid.back();
  d.hi = 1.0;
  d.params.reserve(2 + 2 * out.grid.size());
  d.params.push_back(1.0 / -std::expm1(-1.0));
  d.params.push_back(double(out.grid.size()));
  for (double x : out.grid) d.params.push_back(std::log(x));
  for (double u : out.envelope) d.params.push_back(u);
  out.spec.densities.push_back(std::move(d));
  validate(out.spec);

  const int m = options.verify_points;
  double threshold = 1.0;
  for (int i = 0; i < m; ++i) {
    const double t = std::pow(options.verify_max, double(i) / (m - 1));
    if (evaluate(out.spec, t) < w(t)) {
      threshold = i + 1 < m ? std::pow(options.verify_max, double(i + 1) / (m - 1)) : kInf;
    }
  }
  out.threshold = threshold;
  return out;
}

SlowCocycle slow_cocycle(const KernelTable& f, const KernelTable& psi0, int atom_count, double tol,
                         std::size_t max_test_size) {
  if (f.ball->elements() != psi0.ball->elements())
    fail(ErrorKind::validation, "f and psi0 must be sampled on the same ball");

  const Ball& ball = *psi0.ball;
  int test_radius = 0;
  while (test_radius + 1 <= ball.radius() / 2 && ball.ball_size(test_radius + 1) <= max_test_size)
    ++test_radius;
  PsdVerdict base = cnd_check(psi0, tol, test_radius);
  if (!base.pass)
    fail(ErrorKind::invalid_input, "psi0 is not conditionally negative definite: min eigenvalue " +
                                       std::to_string(base.min_eigenvalue));

  std::vector<std::pair<double, double>> levels;  // (psi0, f) for psi0 > 0
  for (std::size_t i = 0; i < ball.size(); ++i)
    if (psi0.values[i] > 0) levels.emplace_back(psi0.values[i], f.values[i]);
  if (levels.empty()) fail(ErrorKind::construction, "psi0 vanishes on the whole ball");
  std::sort(levels.begin(), levels.end());
  std::vector<double> suffix_min(levels.size());
  double running = kInf;
  for (std::size_t i = levels.size(); i-- > 0;) {
    running = std::min(running, levels[i].second);
    suffix_min[i] = running;
  }
  const double floor_f = suffix_min.front();
  if (!(floor_f > 0))
    fail(ErrorKind::construction, "f must be positive where psi0 > 0 (min " + std::to_string(floor_f) + ")");
  const double max_psi = levels.back().first;

  const double scale = std::min(1.0, floor_f);
  auto u = [&](double t) {
    if (t > max_psi) return kInf;
    auto it = std::lower_bound(levels.begin(), levels.end(), std::make_pair(t, -kInf));
    return suffix_min[static_cast<std::size_t>(it - levels.begin())] / scale;
  };
  ProperMinorant construction = minorize_proper(ProperFunctionOracle{u, {}}, atom_count);
  if (scale != 1) construction.spec = scaled(construction.spec, scale);
  KernelTable out_psi = compose_cnd(construction.spec, psi0);

  bool dominated = true;
  for (std::size_t i = 0; i < ball.size(); ++i)
    if (out_psi.values[i] > f.values[i] + 1e-12 * (1 + std::abs(f.values[i]))) dominated = false;
  bool horizon_used = false;
  for (const auto& s : construction.steps)
    if (s.k * 128 > max_psi) horizon_used = true;
  PsdVerdict verdict = cnd_check(out_psi, tol, test_radius);
  return SlowCocycle{std::move(out_psi), std::move(construction), scale, dominated,
                     suffix_min.back() > suffix_min.front(), horizon_used, std::move(verdict)};
}

}  // namespace cocycle
