#include "cocycle/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include <unsupported/Eigen/FFT>

#include "cocycle/error.hpp"

namespace cocycle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double linear_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  if (xs.size() < 2) return 0;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  return sxx > 0 ? sxy / sxx : 0;
}

int populated_spheres(const Ball& ball) {
  int count = 0;
  for (int n = 0; n <= ball.radius(); ++n)
    if (ball.sphere_size(n) > 0) ++count;
  return count;
}

}  // namespace

std::string to_string(GrowthClass c) {
  switch (c) {
    case GrowthClass::linear: return "linear";
    case GrowthClass::sublinear: return "sublinear";
    case GrowthClass::indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

GrowthVerdict classify_growth(const GnsEmbedding& emb) {
  const Ball& ball = *emb.ball;
  if (populated_spheres(ball) < 3)
    fail(ErrorKind::precondition, "growth classification needs at least 3 populated spheres, got " +
                                      std::to_string(populated_spheres(ball)));
  int horizon = ball.radius();
  while (ball.sphere_size(horizon) == 0) --horizon;

  GrowthVerdict v;
  v.horizon = horizon;
  for (int n = 0; n <= horizon; ++n) {
    GrowthSample s{n, kInf, 0};
    for (std::size_t i = ball.sphere_offsets()[n]; i < ball.sphere_offsets()[n + 1]; ++i) {
      double norm = emb.norm_at(i);
      s.min_norm = std::min(s.min_norm, norm);
      s.max_norm = std::max(s.max_norm, norm);
    }
    if (ball.sphere_size(n) == 0) s.min_norm = kInf;
    v.evidence.push_back(s);
  }

  std::vector<double> xs(horizon + 1), rho(horizon + 1), cummax(horizon + 1);
  double running = kInf;
  for (int n = horizon; n >= 0; --n) {
    running = std::min(running, v.evidence[n].min_norm);
    rho[n] = running;
    xs[n] = n;
  }
  double acc = 0;
  for (int n = 0; n <= horizon; ++n) {
    acc = std::max(acc, v.evidence[n].max_norm);
    cummax[n] = acc;
  }

  const double lo = std::max(1.0, horizon / 10.0);
  v.fit = fit_loglog(xs, rho, lo, horizon);
  v.alpha_hat = v.fit.alpha;
  bool envelope = true;
  for (int n = static_cast<int>(std::ceil(lo)); n <= horizon; ++n)
    if (rho[n] < kLinearEnvelope * n) envelope = false;

  const int mid = std::max(1, static_cast<int>(std::lround(std::sqrt(double(horizon)))));
  const double mid_rate = cummax[mid] / mid;
  const double top_rate = cummax[horizon] / horizon;
  v.sublinear_ratio = mid_rate > 0 ? top_rate / mid_rate : 0;

  if (v.fit.points >= 2 && v.fit.alpha >= kLinearSlope && envelope)
    v.growth = GrowthClass::linear;
  else if (mid < horizon && v.sublinear_ratio <= kSublinearRatio)
    v.growth = GrowthClass::sublinear;
  return v;
}

GkWitness gk_witness(const GnsEmbedding& emb, double t) {
  if (!(t > 0)) fail(ErrorKind::parameter, "gk_witness needs t > 0");
  const Ball& ball = *emb.ball;
  GkWitness w;
  w.t = t;
  for (int n = 0; n <= ball.radius(); ++n) {
    const std::size_t begin = ball.sphere_offsets()[n], end = ball.sphere_offsets()[n + 1];
    w.sphere_sizes.push_back(static_cast<std::int64_t>(end - begin));
    double top = -kInf;
    for (std::size_t i = begin; i < end; ++i) {
      double nb = emb.norm_at(i);
      top = std::max(top, -2 * t * nb * nb);
    }
    double acc = 0;
    for (std::size_t i = begin; i < end; ++i) {
      double nb = emb.norm_at(i);
      acc += std::exp(-2 * t * nb * nb - top);
    }
    double log_sum = end > begin ? top + std::log(acc) : -kInf;
    w.log_sphere_sums.push_back(log_sum);
    w.sphere_sums.push_back(end > begin ? acc * std::exp(top) : 0.0);
  }

  std::vector<double> ns, logs, log_sizes;
  const int last = ball.radius();
  const int first = std::max(1, last / 2);
  for (int n = first; n <= last; ++n) {
    if (w.sphere_sizes[n] == 0) continue;
    ns.push_back(n);
    logs.push_back(w.log_sphere_sums[n]);
    log_sizes.push_back(std::log(double(w.sphere_sizes[n])));
  }
  w.tail_rate = linear_slope(ns, logs);
  w.a_hat = linear_slope(ns, log_sizes);
  bool decreasing = ns.size() >= 2;
  for (std::size_t i = 1; i < logs.size(); ++i)
    if (!(logs[i] < logs[i - 1])) decreasing = false;
  w.summable = decreasing && w.tail_rate < 0;
  return w;
}

double FourierSqrt::at(const std::vector<std::int64_t>& k) const {
  if (static_cast<int>(k.size()) != dimension) fail(ErrorKind::validation, "coordinate count mismatch");
  std::size_t index = 0, stride = 1;
  for (int a = 0; a < dimension; ++a) {
    std::int64_t r = ((k[a] % window) + window) % window;
    index += static_cast<std::size_t>(r) * stride;
    stride *= static_cast<std::size_t>(window);
  }
  return phi[index];
}

namespace {

// In-place multi-dimensional transform, axis 0 fastest.
void transform(std::vector<std::complex<double>>& data, int dim, int n, bool inverse) {
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> line(n), out(n);
  std::size_t stride = 1;
  const std::size_t total = data.size();
  for (int a = 0; a < dim; ++a) {
    const std::size_t block = stride * static_cast<std::size_t>(n);
    for (std::size_t base = 0; base < total; base += block)
      for (std::size_t off = 0; off < stride; ++off) {
        for (int i = 0; i < n; ++i) line[i] = data[base + off + static_cast<std::size_t>(i) * stride];
        if (inverse)
          fft.inv(out, line);
        else
          fft.fwd(out, line);
        for (int i = 0; i < n; ++i) data[base + off + static_cast<std::size_t>(i) * stride] = out[i];
      }
    stride = block;
  }
}

}  // namespace

FourierSqrt fourier_sqrt_abelian(const KernelTable& f, const FourierSqrtOptions& options) {
  if (f.model.family() != Family::free_abelian)
    fail(ErrorKind::parameter, "fourier_sqrt_abelian needs a free abelian group");
  const int d = f.model.param();
  const Ball& ball = *f.ball;

  auto inside = [](const GroupElement& g, int n) {
    for (auto c : g.coords)
      if (c < -n / 2 || c >= n / 2 + (n % 2)) return false;
    return true;
  };
  auto tail = [&](int n) {
    double mass = 0;
    for (std::size_t i = 0; i < ball.size(); ++i)
      if (!inside(ball[i], n)) mass += std::abs(f.values[i]);
    return mass;
  };

  int n = options.window;
  if (n == 0) {
    n = 2;
    const int cover = 2 * (ball.radius() / 2) + 1;
    while (n < cover || tail(n) >= options.tail_tol) {
      if (n > (1 << 24)) fail(ErrorKind::resource, "no window up to 2^24 leaves the tail below tolerance");
      n *= 2;
    }
  } else if (n < 2 || (n & (n - 1)) != 0) {
    fail(ErrorKind::parameter, "window must be a power of two, got " + std::to_string(n));
  }
  double total = std::pow(double(n), d);
  if (total > double(f.model.element_budget()) * 32)
    fail(ErrorKind::resource, "torus of " + std::to_string(static_cast<long long>(total)) + " points is over budget");

  FourierSqrt out;
  out.dimension = d;
  out.window = n;
  out.tail_mass = tail(n);

  const std::size_t size = static_cast<std::size_t>(total);
  auto torus_index = [&](const std::vector<std::int64_t>& k) {
    std::size_t index = 0, stride = 1;
    for (int a = 0; a < d; ++a) {
      std::int64_t r = ((k[a] % n) + n) % n;
      index += static_cast<std::size_t>(r) * stride;
      stride *= static_cast<std::size_t>(n);
    }
    return index;
  };

  std::vector<std::complex<double>> data(size, 0.0);
  for (std::size_t i = 0; i < ball.size(); ++i)
    if (inside(ball[i], n)) data[torus_index(ball[i].coords)] = f.values[i];
  transform(data, d, n, false);

  out.min_transform = kInf;
  out.max_transform = -kInf;
  for (const auto& c : data) {
    out.min_transform = std::min(out.min_transform, c.real());
    out.max_transform = std::max(out.max_transform, c.real());
  }
  if (out.min_transform < -options.positivity_tol * std::max(out.max_transform, 0.0))
    fail(ErrorKind::not_positive_definite,
         "transform has minimum " + std::to_string(out.min_transform) + " against maximum " +
             std::to_string(out.max_transform));
  for (auto& c : data) c = std::sqrt(std::max(c.real(), 0.0));
  transform(data, d, n, true);
  out.phi.resize(size);
  for (std::size_t i = 0; i < size; ++i) out.phi[i] = data[i].real();

  auto correlate = [&](const std::vector<std::int64_t>& shift) {
    // sum_x phi(x) phi(shift - x), with phi even this equals sum_x phi(x - shift) phi(x)
    std::vector<std::int64_t> x(d, 0), y(d);
    double acc = 0;
    for (std::size_t i = 0; i < size; ++i) {
      std::size_t r = i;
      for (int a = 0; a < d; ++a) {
        x[a] = static_cast<std::int64_t>(r % static_cast<std::size_t>(n));
        r /= static_cast<std::size_t>(n);
        y[a] = shift[a] - x[a];
      }
      acc += out.phi[i] * out.phi[torus_index(y)];
    }
    return acc;
  };
  auto shifted_inner = [&](const std::vector<std::int64_t>& s) {
    std::vector<std::int64_t> x(d, 0), y(d);
    double acc = 0;
    for (std::size_t i = 0; i < size; ++i) {
      std::size_t r = i;
      for (int a = 0; a < d; ++a) {
        x[a] = static_cast<std::int64_t>(r % static_cast<std::size_t>(n));
        r /= static_cast<std::size_t>(n);
        y[a] = x[a] - s[a];
      }
      acc += out.phi[torus_index(y)] * out.phi[i];
    }
    return acc;
  };

  for (double p : out.phi) out.norm_sq += p * p;
  const int half = ball.radius() / 2;
  for (std::size_t i = 0; i < ball.ball_size(half); ++i)
    out.reconstruction_error =
        std::max(out.reconstruction_error, std::abs(correlate(ball[i].coords) - f.values[i]));
  for (const auto& s : f.model.generators()) out.invariance.push_back(shifted_inner(s.coords));
  return out;
}

namespace {

using Measure = std::vector<std::pair<GroupElement, double>>;

Measure folner_measure(const GroupModel& model, const FolnerSet& set, const GromovOptions& options) {
  std::vector<GroupElement> support;
  for (const auto& g : set.elements) support.push_back(model.inverse(g));
  std::sort(support.begin(), support.end());
  const double w = 1.0 / double(support.size());
  Measure nu;
  for (const auto& g : support) nu.emplace_back(g, w);
  if (options.mean == MeanKind::uniform || options.order <= 1) return nu;

  Measure mu = nu;
  for (int k = 1; k < options.order; ++k) {
    ElementMap<double> acc;
    double budget = double(mu.size()) * double(nu.size());
    if (budget > 1e9) fail(ErrorKind::resource, "smoothed mean convolution is over budget");
    for (const auto& [x, wx] : mu)
      for (const auto& [y, wy] : nu) acc[model.multiply(x, y)] += wx * wy;
    if (acc.size() > model.element_budget())
      fail(ErrorKind::resource, "smoothed mean support exceeds the element budget");
    mu.assign(acc.begin(), acc.end());
    std::sort(mu.begin(), mu.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  }
  return mu;
}

}  // namespace

GromovAverage gromov_average(const GnsEmbedding& f, const std::vector<FolnerSet>& sequence,
                             const GromovOptions& options) {
  if (sequence.empty()) fail(ErrorKind::parameter, "gromov_average needs at least one Folner set");
  if (!f.model.is_amenable()) fail(ErrorKind::not_amenable, f.model.short_name() + " is not amenable");
  const GroupModel& model = f.model;
  const int r = options.output_radius;
  auto out_ball = std::make_shared<const Ball>(sub_ball(*f.ball, std::min(r, f.ball->radius())));
  if (out_ball->radius() < r)
    fail(ErrorKind::domain, "map sampled on radius " + std::to_string(f.ball->radius()) +
                                " but the output ball needs radius " + std::to_string(r));

  GromovAverage result{KernelTable{model, out_ball, {}, KernelKind::cnd_candidate}, {}, false, 0, {}, {}, {}};
  std::vector<double> previous;
  for (const auto& set : sequence) {
    Measure mu = folner_measure(model, set, options);
    int reach = 0;
    for (const auto& [h, w] : mu) reach = std::max(reach, model.word_length(h));
    if (reach + r > f.ball->radius())
      fail(ErrorKind::domain, "map sampled on radius " + std::to_string(f.ball->radius()) +
                                  " but averaging over F_" + std::to_string(set.n) + " needs radius " +
                                  std::to_string(reach + r));
    result.support_sizes.push_back(mu.size());

    std::vector<double> values(out_ball->size(), 0.0);
    std::vector<double> sphere_lo(r + 1, kInf), sphere_hi(r + 1, 0.0);
    for (std::size_t j = 0; j < out_ball->size(); ++j) {
      const GroupElement& g = (*out_ball)[j];
      const int len = out_ball->length_at(j);
      double acc = 0;
      for (const auto& [h, w] : mu) {
        auto fh = f.find(h);
        auto fhg = f.find(model.multiply(h, g));
        double d = (*fhg - *fh).norm();
        acc += w * d * d;
        sphere_lo[len] = std::min(sphere_lo[len], d);
        sphere_hi[len] = std::max(sphere_hi[len], d);
      }
      values[j] = acc;
    }
    if (!previous.empty()) {
      double diff = 0, slack = 0;
      for (std::size_t j = 0; j < values.size(); ++j) {
        diff = std::max(diff, std::abs(values[j] - previous[j]));
        slack = std::max(slack, std::abs(std::sqrt(values[j]) - std::sqrt(previous[j])));
      }
      result.successive_diff.push_back(diff);
      result.slack = slack;
    }
    previous = values;

    result.rho.assign(r + 1, kInf);
    result.delta.assign(r + 1, 0.0);
    double running = kInf;
    for (int l = r; l >= 0; --l) result.rho[l] = running = std::min(running, sphere_lo[l]);
    double acc = 0;
    for (int l = 0; l <= r; ++l) result.delta[l] = acc = std::max(acc, sphere_hi[l]);
  }
  result.stabilized =
      !result.successive_diff.empty() && result.successive_diff.back() < options.stabilization_tol;
  result.psi.values = std::move(previous);
  return result;
}

Eigen::VectorXd GridMap::point(std::size_t index) const {
  Eigen::VectorXd p(dimension);
  for (int a = 0; a < dimension; ++a) {
    p[a] = lo[a] + step * double(index % static_cast<std::size_t>(counts[a]));
    index /= static_cast<std::size_t>(counts[a]);
  }
  return p;
}

GridMap sample_grid(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f, const GridSpec& grid) {
  if (grid.lo.empty() || grid.lo.size() != grid.hi.size())
    fail(ErrorKind::parameter, "grid bounds must be nonempty and of equal dimension");
  if (!(grid.step > 0)) fail(ErrorKind::parameter, "grid step must be positive");
  GridMap m;
  m.dimension = static_cast<int>(grid.lo.size());
  m.lo = grid.lo;
  m.step = grid.step;
  double total = 1;
  for (int a = 0; a < m.dimension; ++a) {
    if (!(grid.hi[a] >= grid.lo[a])) fail(ErrorKind::parameter, "grid upper bound below lower bound");
    m.counts.push_back(static_cast<int>(std::lround((grid.hi[a] - grid.lo[a]) / grid.step)) + 1);
    total *= m.counts.back();
  }
  if (total > 5e7) fail(ErrorKind::resource, "grid has too many points");
  const auto size = static_cast<std::size_t>(total);
  Eigen::VectorXd first = f(m.point(0));
  m.values.resize(static_cast<Eigen::Index>(size), first.size());
  for (std::size_t i = 0; i < size; ++i)
    m.values.row(static_cast<Eigen::Index>(i)) = (i == 0 ? first : f(m.point(i))).transpose();
  return m;
}

double TrapezoidBump::operator()(const Eigen::VectorXd& y) const {
  double v = 1;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    double a = std::abs(y[i]);
    if (a >= outer) return 0;
    if (a > inner) v *= (outer - a) / (outer - inner);
  }
  return v;
}

SmoothedMap smooth_uniform_map(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                               const GridSpec& grid, double net_spacing, const TrapezoidBump& bump,
                               int max_gap_steps) {
  if (!(net_spacing > 0)) fail(ErrorKind::parameter, "net spacing must be positive");
  if (!(bump.outer > bump.inner) || !(bump.inner > 0))
    fail(ErrorKind::parameter, "bump needs 0 < inner < outer");
  SmoothedMap out;
  out.original = sample_grid(f, grid);
  const GridMap& g = out.original;
  const int d = g.dimension;

  // Net X = spacing Z^d inside the box.
  std::vector<std::int64_t> jlo(d), jcount(d);
  std::size_t net_size = 1;
  for (int a = 0; a < d; ++a) {
    jlo[a] = static_cast<std::int64_t>(std::ceil(grid.lo[a] / net_spacing - 1e-12));
    std::int64_t jhi = static_cast<std::int64_t>(std::floor(grid.hi[a] / net_spacing + 1e-12));
    if (jhi < jlo[a]) fail(ErrorKind::net, "net has no points inside the box");
    jcount[a] = jhi - jlo[a] + 1;
    net_size *= static_cast<std::size_t>(jcount[a]);
  }
  auto net_point = [&](std::size_t index) {
    Eigen::VectorXd p(d);
    for (int a = 0; a < d; ++a) {
      p[a] = net_spacing * double(jlo[a] + std::int64_t(index % std::size_t(jcount[a])));
      index /= std::size_t(jcount[a]);
    }
    return p;
  };
  std::vector<Eigen::VectorXd> net_values(net_size);
  for (std::size_t i = 0; i < net_size; ++i) net_values[i] = f(net_point(i));

  out.smoothed = g;
  std::vector<double> cover(g.size());
  out.min_cover = kInf;
  std::vector<std::int64_t> from(d), to(d);
  for (std::size_t i = 0; i < g.size(); ++i) {
    Eigen::VectorXd p = g.point(i);
    std::size_t active_count = 1;
    for (int a = 0; a < d; ++a) {
      from[a] = std::max<std::int64_t>(jlo[a], static_cast<std::int64_t>(std::floor((p[a] - bump.outer) / net_spacing)));
      to[a] = std::min<std::int64_t>(jlo[a] + jcount[a] - 1,
                                     static_cast<std::int64_t>(std::ceil((p[a] + bump.outer) / net_spacing)));
      active_count *= static_cast<std::size_t>(std::max<std::int64_t>(0, to[a] - from[a] + 1));
    }
    Eigen::VectorXd num = Eigen::VectorXd::Zero(g.values.cols());
    double phi_sum = 0;
    int active = 0;
    std::vector<std::int64_t> j(from);
    for (std::size_t c = 0; c < active_count; ++c) {
      std::size_t index = 0, stride = 1;
      Eigen::VectorXd x(d);
      for (int a = 0; a < d; ++a) {
        x[a] = net_spacing * double(j[a]);
        index += static_cast<std::size_t>(j[a] - jlo[a]) * stride;
        stride *= static_cast<std::size_t>(jcount[a]);
      }
      double w = bump(p - x);
      if (w > 0) {
        ++active;
        phi_sum += w;
        num += w * net_values[index];
        out.displacement =
            std::max(out.displacement, (g.values.row(static_cast<Eigen::Index>(i)).transpose() - net_values[index]).norm());
      }
      for (int a = 0; a < d; ++a) {
        if (++j[a] <= to[a]) break;
        j[a] = from[a];
      }
    }
    out.overlap = std::max(out.overlap, active);
    cover[i] = phi_sum;
    out.min_cover = std::min(out.min_cover, phi_sum);
    if (phi_sum < 1)
      fail(ErrorKind::net, "net does not cover the grid: Phi = " + std::to_string(phi_sum) +
                               " < 1 near grid point " + std::to_string(i));
    out.smoothed.values.row(static_cast<Eigen::Index>(i)) = (num / phi_sum).transpose();
  }
  for (std::size_t i = 0; i < g.size(); ++i)
    out.sup_distance = std::max(out.sup_distance, (out.smoothed.values.row(static_cast<Eigen::Index>(i)) -
                                                   g.values.row(static_cast<Eigen::Index>(i))).norm());

  if (max_gap_steps <= 0) max_gap_steps = std::max(1, static_cast<int>(std::ceil(bump.outer / g.step)));
  for (int k = 1; k <= max_gap_steps; k *= 2) out.gap_steps.push_back(k);
  const double reach = 2 * bump.outer + max_gap_steps * g.step;

  // M': spread of f over net points that can be active at two points within the largest gap.
  const auto span = static_cast<std::int64_t>(std::ceil(reach / net_spacing));
  for (std::size_t i = 0; i < net_size; ++i) {
    std::vector<std::int64_t> ji(d);
    std::size_t r = i;
    for (int a = 0; a < d; ++a) {
      ji[a] = std::int64_t(r % std::size_t(jcount[a]));
      r /= std::size_t(jcount[a]);
    }
    for (std::size_t k = i + 1; k < net_size; ++k) {
      std::size_t s = k;
      bool near = true;
      for (int a = 0; a < d; ++a) {
        std::int64_t jk = std::int64_t(s % std::size_t(jcount[a]));
        s /= std::size_t(jcount[a]);
        if (std::abs(jk - ji[a]) > span) near = false;
      }
      if (near) out.net_spread = std::max(out.net_spread, (net_values[i] - net_values[k]).norm());
      else if (d == 1) break;
    }
  }

  for (int k : out.gap_steps) {
    double measured = 0, inv_cover = 0;
    for (int a = 0; a < d; ++a) {
      std::size_t stride = 1;
      for (int b = 0; b < a; ++b) stride *= static_cast<std::size_t>(g.counts[b]);
      for (std::size_t i = 0; i < g.size(); ++i) {
        std::size_t pos = (i / stride) % static_cast<std::size_t>(g.counts[a]);
        if (pos + static_cast<std::size_t>(k) >= static_cast<std::size_t>(g.counts[a])) continue;
        std::size_t j = i + static_cast<std::size_t>(k) * stride;
        measured = std::max(measured, (out.smoothed.values.row(static_cast<Eigen::Index>(i)) -
                                       out.smoothed.values.row(static_cast<Eigen::Index>(j))).norm());
        inv_cover = std::max(inv_cover, std::abs(1 / cover[i] - 1 / cover[j]));
      }
    }
    const double h = k * g.step;
    const double u_phi = std::min(1.0, h / (bump.outer - bump.inner));
    out.modulus.push_back(measured);
    out.modulus_bound.push_back(2.0 * out.overlap * (u_phi + inv_cover) * out.net_spread);
    out.lipschitz = std::max(out.lipschitz, measured / h);
  }
  out.lipschitz_bound = out.modulus_bound.front() / g.step;
  return out;
}

}  // namespace cocycle
