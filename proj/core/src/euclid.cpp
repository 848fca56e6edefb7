#include "cocycle/euclid.hpp"

#include <algorithm>
#include <cmath>

namespace cocycle {

namespace {

// Orthonormal basis of the column span, rank decided relative to the largest column.
Eigen::MatrixXd orthonormal_span(const Eigen::MatrixXd& columns, int n) {
  if (columns.cols() == 0) return Eigen::MatrixXd(n, 0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(columns, Eigen::ComputeFullU);
  const auto& s = svd.singularValues();
  const double cut = 1e-9 * std::max(1.0, s.size() ? s[0] : 0.0);
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > cut) ++rank;
  return svd.matrixU().leftCols(rank);
}

Eigen::MatrixXd complement(const Eigen::MatrixXd& basis, int n) {
  if (basis.cols() == 0) return Eigen::MatrixXd::Identity(n, n);
  if (basis.cols() == n) return Eigen::MatrixXd(n, 0);
  Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(n, n) - basis * basis.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(proj);
  // Eigenvalues are 0 (on the span) or 1 (on the complement), ascending.
  return es.eigenvectors().rightCols(n - basis.cols());
}

Eigen::MatrixXd rotation_closure(Eigen::MatrixXd basis, const std::vector<EuclideanIsometry>& gens, int n) {
  while (true) {
    Eigen::MatrixXd stacked(n, basis.cols() * static_cast<Eigen::Index>(gens.size() + 1));
    stacked.leftCols(basis.cols()) = basis;
    for (std::size_t i = 0; i < gens.size(); ++i)
      stacked.middleCols(basis.cols() * static_cast<Eigen::Index>(i + 1), basis.cols()) = gens[i].rotation * basis;
    Eigen::MatrixXd next = orthonormal_span(stacked, n);
    if (next.cols() == basis.cols()) return next;
    basis = next;
  }
}

}  // namespace

void validate(const EuclideanIsometry& g) {
  const auto n = g.translation.size();
  if (n == 0) fail(ErrorKind::validation, "isometry of R^0");
  if (g.rotation.rows() != n || g.rotation.cols() != n)
    fail(ErrorKind::validation, "rotation must be " + std::to_string(n) + "x" + std::to_string(n));
  if (!g.rotation.allFinite() || !g.translation.allFinite())
    fail(ErrorKind::validation, "isometry has non-finite entries");
  double err = (g.rotation.transpose() * g.rotation - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
  if (err > kOrthogonalityTol)
    fail(ErrorKind::validation, "rotation part is not orthogonal (|R^T R - I| = " + std::to_string(err) + ")");
}

EuclideanIsometry compose(const EuclideanIsometry& a, const EuclideanIsometry& b) {
  return {a.rotation * b.rotation, a.rotation * b.translation + a.translation};
}

EuclideanIsometry inverse(const EuclideanIsometry& g) {
  Eigen::MatrixXd rt = g.rotation.transpose();
  return {rt, -(rt * g.translation)};
}

EuclideanIsometry identity_isometry(int n) {
  return {Eigen::MatrixXd::Identity(n, n), Eigen::VectorXd::Zero(n)};
}

EuclideanIsometry translation(const Eigen::VectorXd& t) {
  return {Eigen::MatrixXd::Identity(t.size(), t.size()), t};
}

EuclideanIsometry plane_rotation(double angle, const Eigen::Vector2d& center) {
  Eigen::Matrix2d r;
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  // Snap exact quarter turns so rational inputs stay rational.
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      double v = std::round(r(i, j));
      if (std::abs(r(i, j) - v) < 1e-15) r(i, j) = v;
    }
  return {r, center - r * center};
}

Eigen::VectorXd AffineFlat::project(const Eigen::VectorXd& v) const {
  return basepoint + directions * (directions.transpose() * (v - basepoint));
}

AffineFlat whole_space(int n) { return {Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Identity(n, n)}; }

Displacement displacement(const EuclideanIsometry& g) {
  validate(g);
  const int n = g.dimension();
  Eigen::MatrixXd a = g.rotation - Eigen::MatrixXd::Identity(n, n);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > kSingularCutoff) ++rank;
  Eigen::MatrixXd kernel = svd.matrixV().rightCols(n - rank);
  Eigen::VectorXd t_par = kernel * (kernel.transpose() * g.translation);
  Eigen::VectorXd t_perp = g.translation - t_par;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < rank; ++i)
    v += (svd.matrixU().col(i).dot(-t_perp) / s[i]) * svd.matrixV().col(i);
  Displacement d;
  d.length = t_par.norm();
  d.axis = t_par;
  d.min_set = {v, kernel};
  return d;
}

bool is_invariant(const AffineFlat& flat, const EuclideanIsometry& g, double tol) {
  const double scale = 1 + flat.basepoint.norm() + g.translation.norm();
  if (!flat.contains(g.apply(flat.basepoint), tol * scale)) return false;
  for (int i = 0; i < flat.dimension(); ++i)
    if (!flat.contains(g.apply(flat.basepoint + flat.directions.col(i)), tol * scale)) return false;
  return true;
}

FlatSearch minimal_invariant_flat(const std::vector<EuclideanIsometry>& generators,
                                  const FlatSearchOptions& options) {
  if (generators.empty()) fail(ErrorKind::parameter, "minimal_invariant_flat needs at least one generator");
  const int n = generators.front().dimension();
  for (const auto& g : generators) {
    validate(g);
    if (g.dimension() != n) fail(ErrorKind::validation, "generators act on different dimensions");
  }
  std::vector<EuclideanIsometry> letters;
  for (const auto& g : generators) {
    letters.push_back(g);
    letters.push_back(inverse(g));
  }

  FlatSearch out;
  Eigen::MatrixXd dirs(n, 0);
  struct Word {
    EuclideanIsometry g;
    std::size_t last;
  };
  std::vector<Word> frontier{{identity_isometry(n), letters.size()}};
  out.dimension_by_length.push_back(0);
  bool budget_hit = false;
  for (int len = 1; len <= options.max_length; ++len) {
    std::vector<Word> next;
    Eigen::MatrixXd found(n, 0);
    for (const auto& w : frontier) {
      for (std::size_t l = 0; l < letters.size() && !budget_hit; ++l) {
        if (w.last < letters.size() && (l ^ 1) == w.last) continue;  // no x x^{-1}
        if (++out.products > options.max_products) {
          budget_hit = true;
          break;
        }
        EuclideanIsometry p = compose(w.g, letters[l]);
        Eigen::VectorXd axis = displacement(p).axis;
        if (axis.norm() > kFlatTol) {
          found.conservativeResize(n, found.cols() + 1);
          found.col(found.cols() - 1) = axis;
        }
        next.push_back({std::move(p), l});
      }
      if (budget_hit) break;
    }
    if (found.cols() > 0) {
      Eigen::MatrixXd stacked(n, dirs.cols() + found.cols());
      stacked << dirs, found;
      dirs = orthonormal_span(stacked, n);
    }
    dirs = rotation_closure(dirs, generators, n);
    out.dimension_by_length.push_back(static_cast<int>(dirs.cols()));
    if (budget_hit || dirs.cols() == n) break;
    frontier = std::move(next);
  }
  const int final_dim = out.dimension_by_length.back();
  out.stabilized_at = static_cast<int>(out.dimension_by_length.size()) - 1;
  while (out.stabilized_at > 0 && out.dimension_by_length[out.stabilized_at - 1] == final_dim) --out.stabilized_at;

  // Common fixed point of the induced action on D-perp.
  Eigen::MatrixXd q = complement(dirs, n);
  Eigen::VectorXd base = Eigen::VectorXd::Zero(n);
  if (q.cols() > 0) {
    const Eigen::Index m = q.cols();
    Eigen::MatrixXd a(m * static_cast<Eigen::Index>(generators.size()), m);
    Eigen::VectorXd b(a.rows());
    for (std::size_t i = 0; i < generators.size(); ++i) {
      a.middleRows(m * static_cast<Eigen::Index>(i), m) =
          q.transpose() * generators[i].rotation * q - Eigen::MatrixXd::Identity(m, m);
      b.segment(m * static_cast<Eigen::Index>(i), m) = -(q.transpose() * generators[i].translation);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(kSingularCutoff);
    Eigen::VectorXd c = svd.solve(b);
    out.fixed_point_residual = (a * c - b).cwiseAbs().maxCoeff();
    base = q * c;
  }
  out.flat = {base, dirs};

  const bool reached_whole = dirs.cols() == n;
  const bool stable = reached_whole || (!budget_hit && 2 * out.stabilized_at <= options.max_length);
  bool solved = out.fixed_point_residual <= kFlatTol;
  for (const auto& g : generators) solved = solved && is_invariant(out.flat, g);
  if (!solved)
    throw InconclusiveFlat("no common fixed point transverse to the translation span found within " +
                               std::to_string(options.max_length) + " letters (residual " +
                               std::to_string(out.fixed_point_residual) + ")",
                           whole_space(n));
  if (!stable)
    throw InconclusiveFlat(std::string(budget_hit ? "product budget exhausted" : "translation span still growing") +
                               " at length " + std::to_string(out.dimension_by_length.size() - 1) +
                               "; returning the best invariant flat found",
                           out.flat);
  return out;
}

std::string to_string(CocompactVerdict v) {
  switch (v) {
    case CocompactVerdict::cocompact: return "cocompact";
    case CocompactVerdict::not_cocompact: return "not-cocompact";
    case CocompactVerdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

CocompactResult cocompact_check(const std::vector<EuclideanIsometry>& generators,
                                const FlatSearchOptions& options) {
  CocompactResult r;
  r.budget = options;
  try {
    auto search = minimal_invariant_flat(generators, options);
    r.flat = search.flat;
    r.verdict = search.flat.is_whole_space() ? CocompactVerdict::cocompact : CocompactVerdict::not_cocompact;
  } catch (const InconclusiveFlat& e) {
    r.flat = e.best();
    r.verdict = CocompactVerdict::inconclusive;
    r.note = e.what();
  }
  return r;
}

}  // namespace cocycle
