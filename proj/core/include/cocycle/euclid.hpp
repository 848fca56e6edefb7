#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cocycle/error.hpp"

namespace cocycle {

/// v -> R v + t with R orthogonal.
struct EuclideanIsometry {
  Eigen::MatrixXd rotation;
  Eigen::VectorXd translation;

  int dimension() const { return static_cast<int>(translation.size()); }
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const { return rotation * v + translation; }
};

constexpr double kOrthogonalityTol = 1e-12;
constexpr double kSingularCutoff = 1e-10;
constexpr double kFlatTol = 1e-9;

/// Throws Error(validation) unless R^T R = I to 1e-12 and shapes agree.
void validate(const EuclideanIsometry& g);

EuclideanIsometry compose(const EuclideanIsometry& a, const EuclideanIsometry& b);  // a after b
EuclideanIsometry inverse(const EuclideanIsometry& g);
EuclideanIsometry identity_isometry(int n);
EuclideanIsometry translation(const Eigen::VectorXd& t);
/// Rotation by `angle` about `center` in R^2.
EuclideanIsometry plane_rotation(double angle, const Eigen::Vector2d& center = Eigen::Vector2d::Zero());

struct AffineFlat {
  Eigen::VectorXd basepoint;
  Eigen::MatrixXd directions;  // orthonormal columns

  int ambient_dimension() const { return static_cast<int>(basepoint.size()); }
  int dimension() const { return static_cast<int>(directions.cols()); }
  bool is_whole_space() const { return dimension() == ambient_dimension(); }
  Eigen::VectorXd project(const Eigen::VectorXd& v) const;
  double distance(const Eigen::VectorXd& v) const { return (v - project(v)).norm(); }
  bool contains(const Eigen::VectorXd& v, double tol = kFlatTol) const { return distance(v) <= tol; }
};

AffineFlat whole_space(int n);

struct Displacement {
  double length = 0;
  AffineFlat min_set;
  /// Component of t along ker(R - I); g v - v equals it on the min set.
  Eigen::VectorXd axis;
};

/// d_g = |t_par| with t_par the projection of t on ker(R - I); the minimal set
/// solves (R - I) v = -t_perp and its basepoint is the solution nearest the origin.
Displacement displacement(const EuclideanIsometry& g);

/// True when g maps every sampled point of the flat back into it.
bool is_invariant(const AffineFlat& flat, const EuclideanIsometry& g, double tol = kFlatTol);

struct FlatSearchOptions {
  int max_length = 8;
  std::size_t max_products = 200000;
};

struct FlatSearch {
  AffineFlat flat;
  /// Direction dimension reached after products of each length 0..max_length.
  std::vector<int> dimension_by_length;
  int stabilized_at = 0;
  std::size_t products = 0;
  double fixed_point_residual = 0;
};

/// Error(inconclusive) that still carries an invariant flat.
class InconclusiveFlat : public Error {
 public:
  InconclusiveFlat(const std::string& message, AffineFlat best)
      : Error(ErrorKind::inconclusive, message), best_(std::move(best)) {}
  const AffineFlat& best() const noexcept { return best_; }

 private:
  AffineFlat best_;
};

/// D = smallest rotation-invariant subspace holding the translation parts
/// along ker(R - I) of all products up to max_length; the flat is p + D with p
/// the least-norm common fixed point of the induced action on D-perp.
/// Throws InconclusiveFlat when D keeps growing in the second half of the
/// length range, the product budget runs out first, or no common fixed point exists.
FlatSearch minimal_invariant_flat(const std::vector<EuclideanIsometry>& generators,
                                  const FlatSearchOptions& options = {});

enum class CocompactVerdict { cocompact, not_cocompact, inconclusive };

std::string to_string(CocompactVerdict v);

struct CocompactResult {
  CocompactVerdict verdict = CocompactVerdict::inconclusive;
  AffineFlat flat;
  FlatSearchOptions budget;
  std::string note;
};

CocompactResult cocompact_check(const std::vector<EuclideanIsometry>& generators,
                                const FlatSearchOptions& options = {});

}  // namespace cocycle
