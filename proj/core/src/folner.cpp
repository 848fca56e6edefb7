#include "cocycle/folner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "cocycle/error.hpp"

namespace cocycle {

double to_double(const Rational& r) { return double(r.numerator()) / double(r.denominator()); }

Rational folner_defect(const GroupModel& model, const std::vector<GroupElement>& set) {
  if (set.empty()) fail(ErrorKind::parameter, "Folner defect of an empty set");
  std::unordered_set<GroupElement, GroupElementHash> members(set.begin(), set.end());
  std::int64_t worst = 0;
  for (const auto& s : model.generators()) {
    std::int64_t escaped = 0;
    for (const auto& g : members)
      if (!members.count(model.multiply(s, g))) ++escaped;
    // |sF \ F| = |F \ sF| for a bijection s.
    worst = std::max(worst, 2 * escaped);
  }
  return Rational(worst, static_cast<std::int64_t>(members.size()));
}

FolnerSet make_folner_set(const GroupModel& model, std::vector<GroupElement> elements, int n) {
  std::sort(elements.begin(), elements.end());
  elements.erase(std::unique(elements.begin(), elements.end()), elements.end());
  FolnerSet f;
  f.n = n;
  f.epsilon = folner_defect(model, elements);
  for (const auto& g : elements) f.radius_bound = std::max(f.radius_bound, model.word_length(g));
  f.elements = std::move(elements);
  return f;
}

namespace {

void check_size(const GroupModel& model, double count, int n) {
  if (count > double(model.element_budget()))
    fail(ErrorKind::resource, "Folner set at n=" + std::to_string(n) + " has " +
                                  std::to_string(static_cast<long double>(count)) +
                                  " elements, over the budget");
}

std::vector<GroupElement> box(int d, int n) {
  std::vector<GroupElement> out;
  std::vector<std::int64_t> x(d, -n);
  while (true) {
    out.push_back(GroupElement{x});
    int i = d - 1;
    while (i >= 0 && x[i] == n) x[i--] = -n;
    if (i < 0) break;
    ++x[i];
  }
  return out;
}

}  // namespace

FolnerSet standard_folner(const GroupModel& model, int n) {
  if (n < 0) fail(ErrorKind::parameter, "Folner index must be nonnegative");
  if (!model.is_amenable())
    fail(ErrorKind::not_amenable, model.short_name() + " is not amenable; no Folner sets exist");
  std::vector<GroupElement> elements;
  switch (model.family()) {
    case Family::free_abelian:
      check_size(model, std::pow(2.0 * n + 1, model.param()), n);
      elements = box(model.param(), n);
      break;
    case Family::free_group:  // rank <= 1: the integers
      check_size(model, 2.0 * n + 1, n);
      elements.push_back(model.identity());
      for (int k = 1; k <= n; ++k) {
        elements.push_back(GroupElement{std::vector<std::int64_t>(k, 1)});
        elements.push_back(GroupElement{std::vector<std::int64_t>(k, -1)});
      }
      break;
    case Family::heisenberg: {
      const std::int64_t zn = std::int64_t(n) * n;
      check_size(model, (2.0 * n + 1) * (2.0 * n + 1) * (2.0 * zn + 1), n);
      for (std::int64_t x = -n; x <= n; ++x)
        for (std::int64_t y = -n; y <= n; ++y)
          for (std::int64_t z = -zn; z <= zn; ++z) elements.push_back(GroupElement{{x, y, z}});
      break;
    }
    case Family::lamplighter: {
      const int q = model.param();
      const int width = 2 * n + 1;
      check_size(model, std::pow(double(q), width) * width, n);
      std::vector<int> vals(width, 0);
      while (true) {
        for (std::int64_t c = -n; c <= n; ++c) {
          GroupElement g{{c}};
          for (int i = 0; i < width; ++i)
            if (vals[i]) {
              g.coords.push_back(i - n);
              g.coords.push_back(vals[i]);
            }
          elements.push_back(model.inverse(g));
        }
        int i = 0;
        while (i < width && vals[i] == q - 1) vals[i++] = 0;
        if (i == width) break;
        ++vals[i];
      }
      break;
    }
    case Family::baumslag_solitar: {
      const double top = (n + 1) * std::pow(double(model.param()), n);
      check_size(model, top * (n + 1), n);
      for (std::int64_t k = 0; k <= n; ++k)
        for (std::int64_t r = 0; r < static_cast<std::int64_t>(top); ++r)
          elements.push_back(model.inverse(model.bs(r, 1, k)));
      break;
    }
  }
  return make_folner_set(model, std::move(elements), n);
}

FolnerSet ball_folner_set(const GroupModel& model, int n) {
  Ball b = enumerate_ball(model, n);
  FolnerSet f;
  f.n = n;
  f.elements = b.elements();
  f.epsilon = folner_defect(model, f.elements);
  f.radius_bound = n;
  while (f.radius_bound > 0 && b.sphere_size(f.radius_bound) == 0) --f.radius_bound;
  std::sort(f.elements.begin(), f.elements.end());
  return f;
}

ControlledVerdict controlled_check(const std::vector<FolnerSet>& sequence) {
  if (sequence.size() < 3) fail(ErrorKind::parameter, "controlled check needs at least 3 sets");
  ControlledVerdict v;
  std::vector<double> ns;
  for (const auto& f : sequence) {
    v.products.push_back(f.radius_bound * to_double(f.epsilon));
    ns.push_back(f.n);
  }
  v.c_hat = *std::max_element(v.products.begin(), v.products.end());

  const std::size_t m = v.products.size();
  double s = 0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      const double d = v.products[j] - v.products[i];
      s += (d > 0) - (d < 0);
    }
  const double var = double(m) * (m - 1) * (2 * m + 5) / 18.0;
  v.kendall_z = s > 0 ? (s - 1) / std::sqrt(var) : 0.0;

  const double mid = ns[m / 2];
  v.tail_slope = fit_loglog(ns, v.products, std::max(mid, 1.0), ns.back()).alpha;
  constexpr double kZ95 = 1.6448536269514722;
  v.pass = !(v.kendall_z > kZ95 && v.tail_slope > 0.1);
  return v;
}

Eigen::MatrixXd rotation2(double angle) {
  Eigen::Matrix2d r;
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

AffineActionDemo make_affine_demo(const GroupModel& model, int radius, std::vector<Eigen::MatrixXd> pi,
                                  std::vector<Eigen::VectorXd> b) {
  const auto& gens = model.generators();
  if (pi.size() != gens.size() || b.size() != gens.size())
    fail(ErrorKind::validation, "one (pi, b) pair per generator is required");
  const Eigen::Index d = b.front().size();
  for (std::size_t i = 0; i < gens.size(); ++i) {
    if (pi[i].rows() != d || pi[i].cols() != d || b[i].size() != d)
      fail(ErrorKind::validation, "demo data dimensions disagree");
    if (((pi[i].transpose() * pi[i]) - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-12)
      fail(ErrorKind::validation, "pi(" + model.generator_labels()[i] + ") is not orthogonal");
  }

  auto ball = std::make_shared<const Ball>(enumerate_ball(model, radius));
  Eigen::MatrixXd vectors = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ball->size()), d);
  std::vector<Eigen::MatrixXd> pi_ball(ball->size(), Eigen::MatrixXd::Identity(d, d));
  for (std::size_t idx = 1; idx < ball->size(); ++idx) {
    const GroupElement& g = (*ball)[idx];
    bool done = false;
    for (std::size_t s = 0; s < gens.size() && !done; ++s) {
      // g = h s with |h| = |g| - 1
      auto h = ball->find(model.multiply(g, model.inverse(gens[s])));
      if (!h || ball->length_at(*h) + 1 != ball->length_at(idx)) continue;
      vectors.row(static_cast<Eigen::Index>(idx)) =
          vectors.row(static_cast<Eigen::Index>(*h)) + (pi_ball[*h] * b[s]).transpose();
      pi_ball[idx] = pi_ball[*h] * pi[s];
      done = true;
    }
    if (!done) fail(ErrorKind::validation, "ball element without a predecessor");
  }

  auto row = [&](std::size_t i) -> Eigen::VectorXd {
    return vectors.row(static_cast<Eigen::Index>(i)).transpose();
  };
  auto mismatch = [&](const Eigen::VectorXd& lhs, const Eigen::VectorXd& rhs) {
    return (lhs - rhs).cwiseAbs().maxCoeff() > 1e-9 * (1 + lhs.cwiseAbs().maxCoeff());
  };
  // b(gs) = pi(g) b(s) + b(g) along every Cayley edge inside the ball; the
  // full identity b(gh) = pi(g) b(h) + b(g) follows by induction on |h|.
  for (std::size_t i = 0; i < ball->size(); ++i)
    for (std::size_t s = 0; s < gens.size(); ++s) {
      auto k = ball->find(model.multiply((*ball)[i], gens[s]));
      if (!k) continue;
      if (mismatch(row(*k), pi_ball[i] * b[s] + row(i)) ||
          (pi_ball[*k] - pi_ball[i] * pi[s]).cwiseAbs().maxCoeff() > 1e-9)
        fail(ErrorKind::validation, "generator data do not define an affine action: cocycle identity fails at " +
                                        model.format((*ball)[i]) + " * " + model.generator_labels()[s]);
    }
  const std::size_t direct = ball->ball_size(std::min(radius, 4));
  for (std::size_t i = 0; i < direct; ++i)
    for (std::size_t j = 0; j < direct; ++j) {
      auto k = ball->find(model.multiply((*ball)[i], (*ball)[j]));
      if (k && mismatch(row(*k), pi_ball[i] * row(j) + row(i)))
        fail(ErrorKind::validation, "cocycle identity fails at " + model.format((*ball)[i]) + " * " +
                                        model.format((*ball)[j]));
    }

  AffineActionDemo demo{GnsEmbedding{model, ball, std::move(vectors), 0.0}, std::move(pi), std::move(b),
                        std::move(pi_ball)};
  return demo;
}

AffineActionDemo free_abelian_demo(const GroupModel& model, int radius,
                                   const std::vector<Eigen::MatrixXd>& pi_basis,
                                   const std::vector<Eigen::VectorXd>& b_basis) {
  if (model.family() != Family::free_abelian)
    fail(ErrorKind::validation, "free_abelian_demo needs a free abelian group");
  const auto d = static_cast<std::size_t>(model.param());
  if (pi_basis.size() != d || b_basis.size() != d)
    fail(ErrorKind::validation, "one (pi, b) pair per basis vector is required");
  std::vector<Eigen::MatrixXd> pi;
  std::vector<Eigen::VectorXd> b;
  for (std::size_t i = 0; i < d; ++i) {
    pi.push_back(pi_basis[i]);
    b.push_back(b_basis[i]);
    pi.push_back(pi_basis[i].transpose());
    b.push_back(-(pi_basis[i].transpose() * b_basis[i]));
  }
  return make_affine_demo(model, radius, std::move(pi), std::move(b));
}

AffineActionDemo rotation_coboundary_demo(const GroupModel& model, int radius,
                                          const std::vector<double>& angles, const Eigen::Vector2d& v0) {
  std::vector<Eigen::MatrixXd> pi;
  std::vector<Eigen::VectorXd> b;
  for (double a : angles) {
    Eigen::MatrixXd r = rotation2(a);
    pi.push_back(r);
    b.push_back(v0 - r * v0);
  }
  return free_abelian_demo(model, radius, pi, b);
}

AffineActionDemo translation_demo(const GroupModel& model, int radius,
                                  const std::vector<Eigen::VectorXd>& translations) {
  std::vector<Eigen::MatrixXd> pi;
  for (const auto& t : translations) pi.push_back(Eigen::MatrixXd::Identity(t.size(), t.size()));
  return free_abelian_demo(model, radius, pi, translations);
}

AverageResult average_cocycle(const GnsEmbedding& b, const FolnerSet& set,
                              const std::vector<Eigen::MatrixXd>* pi) {
  if (set.elements.empty()) fail(ErrorKind::parameter, "empty Folner set");
  const GroupModel& model = b.model;
  const auto& gens = model.generators();
  const int needed = set.radius_bound + 1;
  auto lookup = [&](const GroupElement& g) -> Eigen::VectorXd {
    auto v = b.find(g);
    if (!v)
      fail(ErrorKind::domain, "cocycle sampled on radius " + std::to_string(b.ball->radius()) +
                                  " but averaging over F_" + std::to_string(set.n) +
                                  " needs radius " + std::to_string(needed) + " (missing " +
                                  model.format(g) + ")");
    return *v;
  };
  if (pi && pi->size() != gens.size()) fail(ErrorKind::validation, "pi must be given per generator");
  if (b.ball->radius() < needed)
    fail(ErrorKind::domain, "cocycle sampled on radius " + std::to_string(b.ball->radius()) +
                                " but averaging over F_" + std::to_string(set.n) + " needs radius " +
                                std::to_string(needed));

  AverageResult r;
  r.epsilon = set.epsilon;
  const Eigen::Index d = b.vectors.cols();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
  for (const auto& g : set.elements) {
    Eigen::VectorXd bg = lookup(g);
    sum += bg;
    r.sup_norm = std::max(r.sup_norm, bg.norm());
  }
  const double count = double(set.elements.size());
  r.v = sum / count;

  for (std::size_t s = 0; s < gens.size(); ++s) {
    Eigen::VectorXd bs = lookup(gens[s]);
    r.generator_norm = std::max(r.generator_norm, bs.norm());
    Eigen::VectorXd moved;
    if (pi) {
      moved = (*pi)[s] * r.v + bs;
    } else {
      Eigen::VectorXd shifted = Eigen::VectorXd::Zero(d);
      for (const auto& g : set.elements) shifted += lookup(model.multiply(gens[s], g));
      moved = shifted / count;
    }
    r.residuals.push_back((moved - r.v).norm());
  }
  const double eps = to_double(set.epsilon);
  r.lemma_bound = 2 * eps * r.sup_norm;
  r.bound = 2 * eps * std::max(r.sup_norm, r.generator_norm / 2);
  return r;
}

AverageResult average_cocycle(const AffineActionDemo& demo, const FolnerSet& set) {
  return average_cocycle(demo.cocycle, set, &demo.pi);
}

double ThresholdTable::at(const GroupElement& g) const {
  auto i = ball->find(g);
  return i ? u[*i] : std::numeric_limits<double>::infinity();
}

ThresholdTable slow_growth_threshold(const GroupModel& model, const std::vector<FolnerSet>& sequence) {
  int radius = 0;
  for (const auto& f : sequence) radius = std::max(radius, f.radius_bound);
  ThresholdTable t;
  t.ball = std::make_shared<const Ball>(enumerate_ball(model, radius));
  std::vector<Rational> best(t.ball->size(), Rational(0));
  for (const auto& f : sequence)
    for (const auto& g : f.elements) {
      auto i = t.ball->find(g);
      if (i && f.epsilon > best[*i]) best[*i] = f.epsilon;
    }
  t.u.resize(t.ball->size());
  for (std::size_t i = 0; i < best.size(); ++i)
    t.u[i] = best[i].numerator() == 0 ? std::numeric_limits<double>::infinity() : to_double(1 / best[i]);
  return t;
}

SphereSubsequence sphere_subsequence(const GroupModel& model, int horizon) {
  if (model.family() != Family::free_abelian && model.family() != Family::heisenberg)
    fail(ErrorKind::parameter, "sphere subsequence needs a polynomial-growth family (Z^d or Heisenberg)");
  if (horizon < 2) fail(ErrorKind::parameter, "sphere subsequence horizon must be at least 2");
  Ball ball = enumerate_ball(model, horizon + 1);
  SphereSubsequence out;
  for (int n = 0; n <= horizon + 1; ++n) out.ball_sizes.push_back(static_cast<std::int64_t>(ball.ball_size(n)));
  for (int n = 0; n <= horizon; ++n)
    out.ratios.emplace_back(out.ball_sizes[n + 1] - out.ball_sizes[n], out.ball_sizes[n]);

  std::vector<double> xs, ys;
  for (int n = 1; n <= horizon; ++n) {
    xs.push_back(n);
    ys.push_back(double(out.ball_sizes[n]));
  }
  const double degree = fit_loglog(xs, ys, std::max(1.0, horizon / 10.0), horizon).alpha;
  out.c = static_cast<int>(std::lround(degree)) + 1;
  for (int n = 1; n <= horizon; ++n)
    if (out.ratios[n] <= Rational(out.c, n)) out.indices.push_back(n);
  return out;
}

}  // namespace cocycle
