#include "cocycle/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "cocycle/error.hpp"

namespace cocycle {

std::optional<double> KernelTable::find(const GroupElement& g) const {
  auto i = ball->find(g);
  if (!i) return std::nullopt;
  return values[*i];
}

double KernelTable::at(const GroupElement& g) const {
  auto v = find(g);
  if (!v) fail(ErrorKind::domain, "kernel table has no value at " + model.format(g));
  return *v;
}

KernelTable tabulate(const GroupModel& model, std::shared_ptr<const Ball> ball,
                     const std::function<double(const GroupElement&)>& fn, KernelKind kind) {
  KernelTable t{model, ball, {}, kind};
  t.values.reserve(ball->size());
  for (const auto& g : ball->elements()) {
    double v = fn(g);
    if (!std::isfinite(v)) fail(ErrorKind::validation, "non-finite kernel value at " + model.format(g));
    t.values.push_back(v);
  }
  return t;
}

KernelTable tabulate(const GroupModel& model, int radius,
                     const std::function<double(const GroupElement&)>& fn, KernelKind kind) {
  return tabulate(model, std::make_shared<const Ball>(enumerate_ball(model, radius)), fn, kind);
}

namespace {

int resolve_test_radius(const KernelTable& table, std::optional<int> test_radius) {
  int r = test_radius.value_or(table.ball->radius() / 2);
  if (r < 0 || r > table.ball->radius())
    fail(ErrorKind::parameter, "test radius " + std::to_string(r) + " outside the table ball");
  return r;
}

// Matrix of table values at g_i^{-1} g_j over the first n ball elements.
Eigen::MatrixXd difference_matrix(const KernelTable& table, std::size_t n) {
  Eigen::MatrixXd m(n, n);
  const auto& el = table.ball->elements();
  for (std::size_t i = 0; i < n; ++i) {
    GroupElement inv = table.model.inverse(el[i]);
    for (std::size_t j = i; j < n; ++j) {
      double v = table.at(table.model.multiply(inv, el[j]));
      m(i, j) = v;
      m(j, i) = v;
    }
  }
  return m;
}

PsdVerdict psd_verdict(const Eigen::MatrixXd& k, double tol) {
  PsdVerdict v;
  v.scale = k.size() ? k.cwiseAbs().maxCoeff() : 0.0;
  v.threshold = -tol * (1.0 + v.scale);
  if (k.size() == 0) {
    v.pass = true;
    return v;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k, Eigen::EigenvaluesOnly);
  v.min_eigenvalue = es.eigenvalues()(0);
  v.pass = v.min_eigenvalue >= v.threshold;
  return v;
}

Eigen::MatrixXd centered_gram(const KernelTable& psi, std::size_t n) {
  Eigen::MatrixXd d = difference_matrix(psi, n);
  Eigen::MatrixXd k(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) k(i, j) = psi.values[i] + psi.values[j] - d(i, j);
  return k;
}

}  // namespace

PsdVerdict cnd_check(const KernelTable& psi, double tol, std::optional<int> test_radius) {
  const int r = resolve_test_radius(psi, test_radius);
  const std::size_t n = psi.ball->ball_size(r);
  if (std::abs(psi.values[0]) > tol * (1.0 + std::abs(psi.values[0]))) {
    // psi(1) != 0 already breaks the CND property; witness on {1, s}.
    PsdVerdict v;
    v.test_radius = r;
    v.test_size = n;
    v.min_eigenvalue = -std::abs(psi.values[0]);
    v.pass = false;
    return v;
  }
  Eigen::MatrixXd k = centered_gram(psi, n);
  PsdVerdict v = psd_verdict(k, tol);
  v.test_radius = r;
  v.test_size = n;
  if (!v.pass) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
    Eigen::VectorXd u = es.eigenvectors().col(0);
    // The identity row of K vanishes, so moving its weight to balance the sum
    // keeps the quadratic form and enforces sum(lambda) = 0.
    u(0) = 0;
    u(0) = -u.sum();
    std::vector<double> lambda(u.data(), u.data() + u.size());
    Eigen::MatrixXd d = difference_matrix(psi, n);
    v.witness_value = u.dot(d * u);
    v.witness = std::move(lambda);
  }
  return v;
}

PsdVerdict pd_check(const KernelTable& f, double tol, std::optional<int> test_radius) {
  const int r = resolve_test_radius(f, test_radius);
  const std::size_t n = f.ball->ball_size(r);
  PsdVerdict v = psd_verdict(difference_matrix(f, n), tol);
  v.test_radius = r;
  v.test_size = n;
  return v;
}

KernelTable schoenberg_transform(const KernelTable& psi, double t) {
  if (!(t > 0)) fail(ErrorKind::parameter, "Schoenberg transform needs t > 0");
  KernelTable f = psi;
  f.kind = KernelKind::pd_candidate;
  for (auto& v : f.values) v = std::exp(-t * v);
  return f;
}

KernelTable add(const KernelTable& a, const KernelTable& b) {
  if (a.ball->size() != b.ball->size() || a.ball->elements() != b.ball->elements())
    fail(ErrorKind::validation, "kernel tables live on different balls");
  KernelTable s = a;
  for (std::size_t i = 0; i < s.values.size(); ++i) s.values[i] += b.values[i];
  return s;
}

std::optional<Eigen::VectorXd> GnsEmbedding::find(const GroupElement& g) const {
  auto i = ball->find(g);
  if (!i) return std::nullopt;
  return Eigen::VectorXd(vectors.row(static_cast<Eigen::Index>(*i)).transpose());
}

Eigen::VectorXd GnsEmbedding::at(const GroupElement& g) const {
  auto v = find(g);
  if (!v) fail(ErrorKind::domain, "embedding has no vector at " + model.format(g));
  return *v;
}

GnsEmbedding gns_embed(const KernelTable& psi, double tol, std::optional<int> radius) {
  PsdVerdict verdict = cnd_check(psi, tol, radius);
  if (!verdict.pass)
    fail(ErrorKind::invalid_input,
         "kernel is not conditionally negative definite: min eigenvalue " +
             std::to_string(verdict.min_eigenvalue) + ", witness quadratic form " +
             std::to_string(verdict.witness_value));
  const std::size_t n = verdict.test_size;
  Eigen::MatrixXd half = 0.5 * centered_gram(psi, n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(half);
  const double cutoff = tol * (1.0 + verdict.scale);

  std::vector<Eigen::Index> keep;
  for (Eigen::Index c = es.eigenvalues().size() - 1; c >= 0; --c)
    if (es.eigenvalues()(c) > cutoff) keep.push_back(c);

  GnsEmbedding emb{psi.model, std::make_shared<const Ball>(sub_ball(*psi.ball, verdict.test_radius)),
                   Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(keep.size())),
                   0.0};
  for (std::size_t c = 0; c < keep.size(); ++c) {
    Eigen::VectorXd col = es.eigenvectors().col(keep[c]) * std::sqrt(es.eigenvalues()(keep[c]));
    const double significant = 1e-10 * col.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      if (std::abs(col(i)) > significant) {
        if (col(i) < 0) col = -col;
        break;
      }
    }
    emb.vectors.col(static_cast<Eigen::Index>(c)) = col;
  }
  emb.vectors.row(0).setZero();
  emb.achieved_tolerance = round_trip_error(emb, psi);
  return emb;
}

GnsEmbedding sample_embedding(const GroupModel& model, int radius,
                              const std::function<Eigen::VectorXd(const GroupElement&)>& fn) {
  auto ball = std::make_shared<const Ball>(enumerate_ball(model, radius));
  Eigen::VectorXd first = fn((*ball)[0]);
  GnsEmbedding emb{model, ball, Eigen::MatrixXd(static_cast<Eigen::Index>(ball->size()), first.size()), 0.0};
  for (std::size_t i = 0; i < ball->size(); ++i) {
    Eigen::VectorXd v = i == 0 ? first : fn((*ball)[i]);
    if (v.size() != first.size()) fail(ErrorKind::validation, "embedding vectors differ in dimension");
    emb.vectors.row(static_cast<Eigen::Index>(i)) = v.transpose();
  }
  return emb;
}

double round_trip_error(const GnsEmbedding& emb, const KernelTable& psi) {
  double worst = 0;
  const auto& el = emb.ball->elements();
  for (std::size_t i = 0; i < el.size(); ++i) {
    GroupElement inv = emb.model.inverse(el[i]);
    for (std::size_t j = i + 1; j < el.size(); ++j) {
      auto target = psi.find(emb.model.multiply(inv, el[j]));
      if (!target) continue;
      double d2 = (emb.vectors.row(static_cast<Eigen::Index>(i)) -
                   emb.vectors.row(static_cast<Eigen::Index>(j))).squaredNorm();
      worst = std::max(worst, std::abs(d2 - *target));
    }
  }
  return worst;
}

ExponentFit fit_loglog(const std::vector<double>& xs, const std::vector<double>& ys, double x_lo,
                       double x_hi) {
  ExponentFit fit;
  fit.x_lo = x_lo;
  fit.x_hi = x_hi;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < xs.size() && i < ys.size(); ++i) {
    if (xs[i] >= x_lo && xs[i] <= x_hi && xs[i] > 0 && ys[i] > 0 && std::isfinite(ys[i])) {
      lx.push_back(std::log(xs[i]));
      ly.push_back(std::log(ys[i]));
    }
  }
  fit.points = lx.size();
  if (lx.size() < 2) {
    fit.alpha = 0;
    return fit;
  }
  const double n = static_cast<double>(lx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx <= 0) return fit;
  fit.alpha = sxy / sxx;
  if (lx.size() > 2) {
    double sse = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      double r = ly[i] - (my + fit.alpha * (lx[i] - mx));
      sse += r * r;
    }
    fit.half_width = 2.0 * std::sqrt(sse / (n - 2) / sxx);
  }
  return fit;
}

CompressionProfile compression_profile(const GnsEmbedding& emb) {
  if (emb.ball->size() == 0 || emb.vectors.rows() == 0)
    fail(ErrorKind::parameter, "empty embedding");
  const int horizon = emb.ball->radius();
  if (horizon < 1) fail(ErrorKind::parameter, "compression profile needs at least two spheres");

  CompressionProfile p;
  p.horizon = horizon;
  const auto& el = emb.ball->elements();

  std::vector<double> sphere_min(horizon + 1, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < el.size(); ++i) {
    int len = emb.ball->length_at(i);
    sphere_min[len] = std::min(sphere_min[len], emb.norm_at(i));
  }
  std::vector<double> pair_max(horizon + 1, 0.0);
  for (std::size_t i = 0; i < el.size(); ++i) {
    GroupElement inv = emb.model.inverse(el[i]);
    for (std::size_t j = i; j < el.size(); ++j) {
      auto k = emb.ball->find(emb.model.multiply(inv, el[j]));
      if (!k) continue;
      int len = emb.ball->length_at(*k);
      double d = (emb.vectors.row(static_cast<Eigen::Index>(i)) -
                  emb.vectors.row(static_cast<Eigen::Index>(j))).norm();
      pair_max[len] = std::max(pair_max[len], d);
    }
  }

  p.xs.resize(horizon + 1);
  p.rho.resize(horizon + 1);
  p.delta.resize(horizon + 1);
  double running = std::numeric_limits<double>::infinity();
  for (int x = horizon; x >= 0; --x) {
    running = std::min(running, sphere_min[x]);
    p.rho[x] = running;
  }
  double acc = 0;
  for (int x = 0; x <= horizon; ++x) {
    p.xs[x] = x;
    acc = std::max(acc, pair_max[x]);
    p.delta[x] = acc;
  }
  p.exponent_fit = fit_loglog(p.xs, p.rho, std::max(1.0, horizon / 10.0), horizon);
  return p;
}

}  // namespace cocycle
