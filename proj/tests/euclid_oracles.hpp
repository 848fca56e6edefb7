#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "cocycle/euclid.hpp"

namespace oracle {

using cocycle::EuclideanIsometry;

// Independent minimiser of |g v - v| by repeated grid refinement (the map is convex).
inline double zoom_grid_displacement(const EuclideanIsometry& g, double half_width = 200) {
  const int n = g.dimension();
  const int steps = n == 2 ? 40 : 16;
  Eigen::VectorXd center = Eigen::VectorXd::Zero(n);
  double best = (g.apply(center) - center).norm();
  double width = half_width;
  for (int round = 0; round < 80; ++round) {
    Eigen::VectorXd best_point = center;
    std::vector<int> idx(n, 0);
    while (true) {
      Eigen::VectorXd v(n);
      for (int a = 0; a < n; ++a) v[a] = center[a] + width * (2.0 * idx[a] / steps - 1);
      double d = (g.apply(v) - v).norm();
      if (d < best) {
        best = d;
        best_point = v;
      }
      int a = 0;
      while (a < n && idx[a] == steps) idx[a++] = 0;
      if (a == n) break;
      ++idx[a];
    }
    center = best_point;
    width *= 0.6;
  }
  return best;
}

// Orbit of the origin under group elements reachable by words of length <= `length`
// that keep the origin inside the box, checked for eps-density in [-r, r]^2.
inline bool orbit_is_dense(const std::vector<EuclideanIsometry>& gens, double eps, double r, int length) {
  auto key = [](const EuclideanIsometry& g) {
    std::vector<long long> k;
    for (Eigen::Index i = 0; i < g.rotation.size(); ++i) k.push_back(std::llround(g.rotation.data()[i] * 1e6));
    for (Eigen::Index i = 0; i < g.translation.size(); ++i) k.push_back(std::llround(g.translation[i] * 1e6));
    return k;
  };
  std::vector<EuclideanIsometry> letters;
  for (const auto& g : gens) {
    letters.push_back(g);
    letters.push_back(inverse(g));
  }
  std::set<std::vector<long long>> seen{key(cocycle::identity_isometry(2))};
  std::vector<Eigen::VectorXd> orbit{Eigen::VectorXd::Zero(2)};
  std::vector<EuclideanIsometry> frontier{cocycle::identity_isometry(2)};
  for (int k = 0; k < length && !frontier.empty(); ++k) {
    std::vector<EuclideanIsometry> next;
    for (const auto& w : frontier)
      for (const auto& l : letters) {
        auto p = compose(w, l);
        Eigen::VectorXd o = p.apply(Eigen::VectorXd::Zero(2));
        if (o.cwiseAbs().maxCoeff() > r + 2 * eps || !seen.insert(key(p)).second) continue;
        orbit.push_back(o);
        next.push_back(p);
      }
    frontier = std::move(next);
  }
  for (double x = -r; x <= r; x += eps / 2)
    for (double y = -r; y <= r; y += eps / 2) {
      double d = 1e300;
      for (const auto& q : orbit) d = std::min(d, (q - Eigen::Vector2d(x, y)).norm());
      if (d > eps) return false;
    }
  return true;
}

}  // namespace oracle
