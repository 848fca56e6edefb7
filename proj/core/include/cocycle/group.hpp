#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cocycle {

enum class Family {
  free_abelian,       // Z^d, param = d
  free_group,         // F_k, param = k
  heisenberg,         // integer Heisenberg group, param unused
  lamplighter,        // Z/q wr Z, param = q
  baumslag_solitar,   // BS(1, m), param = m
};

/// Exact normal form of a group element. The meaning of the coordinates is
/// family specific:
///   free_abelian      (x_1, ..., x_d)
///   free_group        reduced word, letters +-(i+1)
///   heisenberg        (x, y, z) with (x,y,z)(x',y',z') = (x+x', y+y', z+z'+xy')
///   lamplighter       (cursor, pos_1, val_1, pos_2, val_2, ...), positions
///                     strictly increasing, values in [1, q-1]
///   baumslag_solitar  (p, e, n) for the pair (p / m^e, n), e >= 0 minimal
struct GroupElement {
  std::vector<std::int64_t> coords;

  friend auto operator<=>(const GroupElement&, const GroupElement&) = default;
  friend bool operator==(const GroupElement&, const GroupElement&) = default;
};

struct GroupElementHash {
  std::size_t operator()(const GroupElement& g) const noexcept;
};

template <class T>
using ElementMap = std::unordered_map<GroupElement, T, GroupElementHash>;

class Ball;

/// A concrete finitely generated group with a fixed symmetric generating set.
/// Copies share the breadth-first-search cache used for word lengths.
class GroupModel {
 public:
  static constexpr std::size_t kDefaultElementBudget = 1'000'000;

  static GroupModel free_abelian(int d);
  static GroupModel free_group(int k);
  static GroupModel heisenberg();
  static GroupModel lamplighter(int q);
  static GroupModel baumslag_solitar(int m);

  /// Accepts "Z", "Z2", "F2", "H3", "L2", "BS2" and the long family names
  /// "FreeAbelian", "FreeGroup", "Heisenberg3Z", "Lamplighter",
  /// "BaumslagSolitar" combined with `param`.
  static GroupModel from_name(std::string_view name, std::optional<int> param = {});

  Family family() const noexcept { return family_; }
  int param() const noexcept { return param_; }
  std::string family_name() const;
  std::string short_name() const;
  bool is_amenable() const noexcept { return family_ != Family::free_group || param_ < 2; }

  const std::vector<GroupElement>& generators() const noexcept { return generators_; }
  const std::vector<std::string>& generator_labels() const noexcept { return labels_; }

  GroupElement identity() const;
  GroupElement multiply(const GroupElement& a, const GroupElement& b) const;
  GroupElement inverse(const GroupElement& a) const;
  /// g^{-1} h, the left-invariant difference used throughout.
  GroupElement difference(const GroupElement& g, const GroupElement& h) const {
    return multiply(inverse(g), h);
  }

  /// Throws Error(validation) if `g` is not a normal form of this family.
  void validate(const GroupElement& g) const;
  bool is_valid(const GroupElement& g) const;

  int word_length(const GroupElement& g) const;

  std::string format(const GroupElement& g) const;
  GroupElement parse(std::string_view text) const;

  // Convenience constructors; all return validated normal forms.
  GroupElement vec(std::vector<std::int64_t> x) const;
  GroupElement word(std::string_view letters) const;
  GroupElement heis(std::int64_t x, std::int64_t y, std::int64_t z) const;
  GroupElement lamps(std::int64_t cursor,
                     std::vector<std::pair<std::int64_t, std::int64_t>> lit) const;
  GroupElement bs(std::int64_t numerator, std::int64_t denominator, std::int64_t height) const;

  std::size_t element_budget() const noexcept { return budget_; }
  void set_element_budget(std::size_t budget) noexcept { budget_ = budget; }

  /// Breadth-first ball of the Cayley graph (edges g -- g s). Exposed so the
  /// ball enumerator and the word-length cache agree by construction.
  void grow_cache(int radius) const;

 private:
  struct BfsCache;

  GroupModel(Family family, int param);
  int cached_length(const GroupElement& g) const;

  Family family_;
  int param_;
  std::vector<GroupElement> generators_;
  std::vector<std::string> labels_;
  std::size_t budget_ = kDefaultElementBudget;
  std::shared_ptr<BfsCache> cache_;

  friend Ball enumerate_ball(const GroupModel& model, int radius);
};

/// The word-metric ball {g : |g| <= radius}, ordered sphere by sphere and
/// lexicographically on normal forms inside each sphere.
class Ball {
 public:
  Ball(int radius, std::vector<GroupElement> elements, std::vector<std::size_t> sphere_offsets);

  int radius() const noexcept { return radius_; }
  std::size_t size() const noexcept { return elements_.size(); }
  const std::vector<GroupElement>& elements() const noexcept { return elements_; }
  const GroupElement& operator[](std::size_t i) const { return elements_[i]; }

  /// sphere_offsets()[n] .. sphere_offsets()[n+1] is the sphere of radius n.
  const std::vector<std::size_t>& sphere_offsets() const noexcept { return offsets_; }
  std::span<const GroupElement> sphere(int n) const;
  std::size_t sphere_size(int n) const;
  /// Number of elements of word length <= n (n clamped to the radius).
  std::size_t ball_size(int n) const;

  std::optional<std::size_t> find(const GroupElement& g) const;
  bool contains(const GroupElement& g) const { return find(g).has_value(); }
  int length_at(std::size_t index) const;

 private:
  int radius_;
  std::vector<GroupElement> elements_;
  std::vector<std::size_t> offsets_;
  ElementMap<std::size_t> index_;
};

Ball enumerate_ball(const GroupModel& model, int radius);

/// The leading spheres of `ball` up to `radius`.
Ball sub_ball(const Ball& ball, int radius);

}  // namespace cocycle
