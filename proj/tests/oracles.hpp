#pragma once

// Independent reference computations used only by the tests.

#include <array>
#include <cmath>
#include <complex>
#include <deque>
#include <vector>

#include <Eigen/Dense>

#include "cocycle/group.hpp"

namespace oracle {

/// Plain breadth-first search on the Cayley graph with edges g -> g s.
inline cocycle::ElementMap<int> bfs_distances(const cocycle::GroupModel& model, int radius) {
  cocycle::ElementMap<int> dist;
  std::deque<cocycle::GroupElement> queue;
  dist.emplace(model.identity(), 0);
  queue.push_back(model.identity());
  while (!queue.empty()) {
    cocycle::GroupElement g = queue.front();
    queue.pop_front();
    int d = dist.at(g);
    if (d == radius) continue;
    for (const auto& s : model.generators()) {
      cocycle::GroupElement h = model.multiply(g, s);
      if (dist.emplace(h, d + 1).second) queue.push_back(h);
    }
  }
  return dist;
}

/// Heisenberg element (x, y, z) as the unipotent matrix [[1,x,z],[0,1,y],[0,0,1]].
using Mat3 = std::array<std::array<long long, 3>, 3>;

inline Mat3 heisenberg_matrix(long long x, long long y, long long z) {
  return {{{1, x, z}, {0, 1, y}, {0, 0, 1}}};
}

inline Mat3 matmul(const Mat3& a, const Mat3& b) {
  Mat3 c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) c[i][j] += a[i][k] * b[k][j];
  return c;
}

inline double min_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

/// Naive O(n^2) circular convolution.
inline std::vector<double> circular_convolution(const std::vector<double>& a,
                                                const std::vector<double>& b) {
  const std::size_t n = a.size();
  std::vector<double> c(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) c[(i + j) % n] += a[i] * b[j];
  return c;
}

/// Naive DFT, real input.
inline std::vector<std::complex<double>> dft(const std::vector<double>& a) {
  const std::size_t n = a.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> s = 0;
    for (std::size_t j = 0; j < n; ++j)
      s += a[j] * std::polar(1.0, -2.0 * M_PI * double(k * j % n) / double(n));
    out[k] = s;
  }
  return out;
}

}  // namespace oracle
