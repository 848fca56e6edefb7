#include "cocycle/group.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <limits>
#include <map>
#include <mutex>

#include "cocycle/error.hpp"

namespace cocycle {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::validation: return "validation";
    case ErrorKind::domain: return "domain";
    case ErrorKind::resource: return "resource";
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::integrability: return "integrability";
    case ErrorKind::construction: return "construction";
    case ErrorKind::invalid_input: return "invalid_input";
    case ErrorKind::not_amenable: return "not_amenable";
    case ErrorKind::not_positive_definite: return "not_positive_definite";
    case ErrorKind::net: return "net";
    case ErrorKind::inconclusive: return "inconclusive";
    case ErrorKind::precondition: return "precondition";
  }
  return "unknown";
}

std::size_t GroupElementHash::operator()(const GroupElement& g) const noexcept {
  // FNV-1a over the coordinate words.
  std::uint64_t h = 1469598103934665603ull;
  for (std::int64_t c : g.coords) {
    auto u = static_cast<std::uint64_t>(c);
    for (int i = 0; i < 8; ++i) {
      h ^= (u >> (8 * i)) & 0xffu;
      h *= 1099511628211ull;
    }
  }
  return static_cast<std::size_t>(h);
}

namespace {

using i128 = __int128;

std::int64_t narrow(i128 v) {
  if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min())
    fail(ErrorKind::resource, "coordinate overflow in group arithmetic");
  return static_cast<std::int64_t>(v);
}

i128 ipow(i128 base, std::int64_t exp) {
  i128 r = 1;
  for (std::int64_t i = 0; i < exp; ++i) {
    r *= base;
    if (r > (i128(1) << 100) || r < -(i128(1) << 100))
      fail(ErrorKind::resource, "coordinate overflow in group arithmetic");
  }
  return r;
}

// p / m^e with e >= 0 minimal.
struct MAdic {
  i128 p;
  std::int64_t e;
};

MAdic normalize(MAdic x, std::int64_t m) {
  if (x.e < 0) {
    x.p *= ipow(m, -x.e);
    x.e = 0;
  }
  if (x.p == 0) return {0, 0};
  while (x.e > 0 && x.p % m == 0) {
    x.p /= m;
    --x.e;
  }
  return x;
}

MAdic add(MAdic a, MAdic b, std::int64_t m) {
  std::int64_t e = std::max(a.e, b.e);
  i128 p = a.p * ipow(m, e - a.e) + b.p * ipow(m, e - b.e);
  return normalize({p, e}, m);
}

// m^k * x
MAdic scale(MAdic x, std::int64_t k, std::int64_t m) { return normalize({x.p, x.e - k}, m); }

std::string letter(std::int64_t l) {
  char c = static_cast<char>((l > 0 ? 'a' : 'A') + (std::llabs(l) - 1));
  return std::string(1, c);
}

std::vector<std::int64_t> parse_ints(std::string_view text) {
  std::vector<std::int64_t> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == ',')) ++i;
    if (i >= text.size()) break;
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data() + i, text.data() + text.size(), v);
    if (ec != std::errc()) fail(ErrorKind::validation, "malformed integer in '" + std::string(text) + "'");
    out.push_back(v);
    i = static_cast<std::size_t>(ptr - text.data());
  }
  return out;
}

std::string_view strip(std::string_view s, char open, char close) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (s.size() < 2 || s.front() != open || s.back() != close)
    fail(ErrorKind::validation, "expected " + std::string(1, open) + "..." + std::string(1, close) +
                                    " around '" + std::string(s) + "'");
  return s.substr(1, s.size() - 2);
}

}  // namespace

struct GroupModel::BfsCache {
  std::mutex mutex;
  ElementMap<int> distance;
  std::vector<std::vector<GroupElement>> spheres;
};

GroupModel::GroupModel(Family family, int param)
    : family_(family), param_(param), cache_(std::make_shared<BfsCache>()) {
  auto unit = [](std::size_t size, std::size_t i, std::int64_t v) {
    std::vector<std::int64_t> c(size, 0);
    c[i] = v;
    return GroupElement{std::move(c)};
  };
  switch (family) {
    case Family::free_abelian:
      for (int i = 0; i < param; ++i) {
        generators_.push_back(unit(param, i, 1));
        generators_.push_back(unit(param, i, -1));
        labels_.push_back("+e" + std::to_string(i + 1));
        labels_.push_back("-e" + std::to_string(i + 1));
      }
      break;
    case Family::free_group:
      for (int i = 1; i <= param; ++i) {
        generators_.push_back(GroupElement{{i}});
        generators_.push_back(GroupElement{{-i}});
        labels_.push_back(letter(i));
        labels_.push_back(letter(-i));
      }
      break;
    case Family::heisenberg:
      generators_ = {GroupElement{{1, 0, 0}}, GroupElement{{-1, 0, 0}}, GroupElement{{0, 1, 0}},
                     GroupElement{{0, -1, 0}}};
      labels_ = {"x", "X", "y", "Y"};
      break;
    case Family::lamplighter:
      generators_.push_back(GroupElement{{0, 0, 1}});
      labels_.push_back("t");
      if (param > 2) {
        generators_.push_back(GroupElement{{0, 0, param - 1}});
        labels_.push_back("T");
      }
      generators_.push_back(GroupElement{{1}});
      generators_.push_back(GroupElement{{-1}});
      labels_.push_back("s");
      labels_.push_back("S");
      break;
    case Family::baumslag_solitar:
      generators_ = {GroupElement{{1, 0, 0}}, GroupElement{{-1, 0, 0}}, GroupElement{{0, 0, 1}},
                     GroupElement{{0, 0, -1}}};
      labels_ = {"a", "A", "t", "T"};
      break;
  }
}

GroupModel GroupModel::free_abelian(int d) {
  if (d < 1) fail(ErrorKind::parameter, "FreeAbelian needs d >= 1");
  return GroupModel(Family::free_abelian, d);
}

GroupModel GroupModel::free_group(int k) {
  if (k < 1 || k > 26) fail(ErrorKind::parameter, "FreeGroup needs 1 <= k <= 26");
  return GroupModel(Family::free_group, k);
}

GroupModel GroupModel::heisenberg() { return GroupModel(Family::heisenberg, 3); }

GroupModel GroupModel::lamplighter(int q) {
  if (q < 2) fail(ErrorKind::parameter, "Lamplighter needs lamp order q >= 2");
  return GroupModel(Family::lamplighter, q);
}

GroupModel GroupModel::baumslag_solitar(int m) {
  if (m < 2) fail(ErrorKind::parameter, "BaumslagSolitar(1,m) needs m >= 2");
  return GroupModel(Family::baumslag_solitar, m);
}

GroupModel GroupModel::from_name(std::string_view name, std::optional<int> param) {
  auto suffix = [&](std::size_t prefix, int fallback) {
    if (name.size() == prefix) return param.value_or(fallback);
    int v = 0;
    auto [ptr, ec] = std::from_chars(name.data() + prefix, name.data() + name.size(), v);
    if (ec != std::errc() || ptr != name.data() + name.size())
      fail(ErrorKind::validation, "unknown group family '" + std::string(name) + "'");
    return v;
  };
  if (name == "FreeAbelian") return free_abelian(param.value_or(1));
  if (name == "FreeGroup") return free_group(param.value_or(2));
  if (name == "Heisenberg3Z" || name == "Heisenberg" || name == "H3") return heisenberg();
  if (name == "Lamplighter") return lamplighter(param.value_or(2));
  if (name == "BaumslagSolitar") return baumslag_solitar(param.value_or(2));
  if (name.starts_with("BS")) return baumslag_solitar(suffix(2, 2));
  if (name.starts_with("Z")) return free_abelian(suffix(1, 1));
  if (name.starts_with("F")) return free_group(suffix(1, 2));
  if (name.starts_with("L")) return lamplighter(suffix(1, 2));
  fail(ErrorKind::validation, "unknown group family '" + std::string(name) + "'");
}

std::string GroupModel::family_name() const {
  switch (family_) {
    case Family::free_abelian: return "FreeAbelian";
    case Family::free_group: return "FreeGroup";
    case Family::heisenberg: return "Heisenberg3Z";
    case Family::lamplighter: return "Lamplighter";
    case Family::baumslag_solitar: return "BaumslagSolitar";
  }
  return "?";
}

std::string GroupModel::short_name() const {
  switch (family_) {
    case Family::free_abelian: return param_ == 1 ? "Z" : "Z" + std::to_string(param_);
    case Family::free_group: return "F" + std::to_string(param_);
    case Family::heisenberg: return "H3";
    case Family::lamplighter: return "L" + std::to_string(param_);
    case Family::baumslag_solitar: return "BS" + std::to_string(param_);
  }
  return "?";
}

GroupElement GroupModel::identity() const {
  switch (family_) {
    case Family::free_abelian: return GroupElement{std::vector<std::int64_t>(param_, 0)};
    case Family::free_group: return GroupElement{};
    case Family::heisenberg: return GroupElement{{0, 0, 0}};
    case Family::lamplighter: return GroupElement{{0}};
    case Family::baumslag_solitar: return GroupElement{{0, 0, 0}};
  }
  return {};
}

bool GroupModel::is_valid(const GroupElement& g) const {
  const auto& c = g.coords;
  switch (family_) {
    case Family::free_abelian:
      return c.size() == static_cast<std::size_t>(param_);
    case Family::free_group:
      for (std::size_t i = 0; i < c.size(); ++i) {
        if (c[i] == 0 || std::llabs(c[i]) > param_) return false;
        if (i > 0 && c[i] == -c[i - 1]) return false;
      }
      return true;
    case Family::heisenberg:
      return c.size() == 3;
    case Family::lamplighter:
      if (c.empty() || c.size() % 2 != 1) return false;
      for (std::size_t i = 1; i < c.size(); i += 2) {
        if (c[i + 1] < 1 || c[i + 1] >= param_) return false;
        if (i > 1 && c[i] <= c[i - 2]) return false;
      }
      return true;
    case Family::baumslag_solitar:
      if (c.size() != 3 || c[1] < 0) return false;
      if (c[0] == 0) return c[1] == 0;
      return c[1] == 0 || c[0] % param_ != 0;
  }
  return false;
}

void GroupModel::validate(const GroupElement& g) const {
  if (!is_valid(g))
    fail(ErrorKind::validation, "malformed " + family_name() + " normal form with " +
                                    std::to_string(g.coords.size()) + " coordinates");
}

GroupElement GroupModel::multiply(const GroupElement& a, const GroupElement& b) const {
  validate(a);
  validate(b);
  const auto& x = a.coords;
  const auto& y = b.coords;
  switch (family_) {
    case Family::free_abelian: {
      GroupElement r{x};
      for (std::size_t i = 0; i < y.size(); ++i) r.coords[i] = narrow(i128(x[i]) + y[i]);
      return r;
    }
    case Family::free_group: {
      std::vector<std::int64_t> w = x;
      for (std::int64_t l : y) {
        if (!w.empty() && w.back() == -l)
          w.pop_back();
        else
          w.push_back(l);
      }
      return GroupElement{std::move(w)};
    }
    case Family::heisenberg:
      return GroupElement{{narrow(i128(x[0]) + y[0]), narrow(i128(x[1]) + y[1]),
                           narrow(i128(x[2]) + y[2] + i128(x[0]) * y[1])}};
    case Family::lamplighter: {
      // (f, c)(f', c') = (f + f'(. - c), c + c')
      std::map<std::int64_t, std::int64_t> lamps;
      for (std::size_t i = 1; i < x.size(); i += 2) lamps[x[i]] = x[i + 1];
      for (std::size_t i = 1; i < y.size(); i += 2) {
        auto& v = lamps[narrow(i128(y[i]) + x[0])];
        v = (v + y[i + 1]) % param_;
      }
      GroupElement r{{narrow(i128(x[0]) + y[0])}};
      for (auto [pos, val] : lamps) {
        if (val == 0) continue;
        r.coords.push_back(pos);
        r.coords.push_back(val);
      }
      return r;
    }
    case Family::baumslag_solitar: {
      // (r, n)(r', n') = (r + m^n r', n + n')
      MAdic r = add({x[0], x[1]}, scale({y[0], y[1]}, x[2], param_), param_);
      return GroupElement{{narrow(r.p), r.e, narrow(i128(x[2]) + y[2])}};
    }
  }
  return {};
}

GroupElement GroupModel::inverse(const GroupElement& a) const {
  validate(a);
  const auto& x = a.coords;
  switch (family_) {
    case Family::free_abelian: {
      GroupElement r{x};
      for (auto& v : r.coords) v = narrow(-i128(v));
      return r;
    }
    case Family::free_group: {
      GroupElement r;
      for (auto it = x.rbegin(); it != x.rend(); ++it) r.coords.push_back(-*it);
      return r;
    }
    case Family::heisenberg:
      return GroupElement{{-x[0], -x[1], narrow(-i128(x[2]) + i128(x[0]) * x[1])}};
    case Family::lamplighter: {
      // (f, c)^{-1} = (-f(. + c), -c)
      GroupElement r{{-x[0]}};
      for (std::size_t i = 1; i < x.size(); i += 2) {
        r.coords.push_back(narrow(i128(x[i]) - x[0]));
        r.coords.push_back(param_ - x[i + 1]);
      }
      return r;
    }
    case Family::baumslag_solitar: {
      // (r, n)^{-1} = (-m^{-n} r, -n)
      MAdic r = scale({-i128(x[0]), x[1]}, -x[2], param_);
      return GroupElement{{narrow(r.p), r.e, -x[2]}};
    }
  }
  return {};
}

void GroupModel::grow_cache(int radius) const {
  std::lock_guard lock(cache_->mutex);
  auto& c = *cache_;
  if (c.spheres.empty()) {
    c.spheres.push_back({identity()});
    c.distance.emplace(identity(), 0);
  }
  while (static_cast<int>(c.spheres.size()) <= radius) {
    const int n = static_cast<int>(c.spheres.size());
    std::vector<GroupElement> next;
    for (const auto& g : c.spheres.back()) {
      for (const auto& s : generators_) {
        GroupElement h = multiply(g, s);
        if (c.distance.emplace(h, n).second) next.push_back(std::move(h));
        if (c.distance.size() > budget_) {
          // Leave the cache consistent with the spheres already completed.
          for (const auto& e : next) c.distance.erase(e);
          fail(ErrorKind::resource, "ball of radius " + std::to_string(n) + " in " + short_name() +
                                        " exceeds the element budget of " + std::to_string(budget_));
        }
      }
    }
    std::sort(next.begin(), next.end());
    c.spheres.push_back(std::move(next));
  }
}

int GroupModel::cached_length(const GroupElement& g) const {
  for (int r = 0;; ++r) {
    grow_cache(r);
    std::lock_guard lock(cache_->mutex);
    auto it = cache_->distance.find(g);
    if (it != cache_->distance.end()) return it->second;
  }
}

int GroupModel::word_length(const GroupElement& g) const {
  validate(g);
  const auto& c = g.coords;
  switch (family_) {
    case Family::free_abelian: {
      std::int64_t s = 0;
      for (auto v : c) s += std::llabs(v);
      return static_cast<int>(s);
    }
    case Family::free_group:
      return static_cast<int>(c.size());
    case Family::lamplighter: {
      // toggles + shortest cursor tour from 0 through every lit lamp ending at the cursor
      std::int64_t lo = std::min<std::int64_t>(0, c[0]);
      std::int64_t hi = std::max<std::int64_t>(0, c[0]);
      std::int64_t toggles = 0;
      for (std::size_t i = 1; i < c.size(); i += 2) {
        lo = std::min(lo, c[i]);
        hi = std::max(hi, c[i]);
        toggles += std::min(c[i + 1], param_ - c[i + 1]);
      }
      return static_cast<int>(toggles + 2 * (hi - lo) - std::llabs(c[0]));
    }
    case Family::heisenberg:
    case Family::baumslag_solitar:
      return cached_length(g);
  }
  return 0;
}

std::string GroupModel::format(const GroupElement& g) const {
  validate(g);
  const auto& c = g.coords;
  std::string out;
  switch (family_) {
    case Family::free_abelian:
    case Family::heisenberg:
      out = "(";
      for (std::size_t i = 0; i < c.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(c[i]);
      }
      return out + ")";
    case Family::free_group:
      if (c.empty()) return "e";
      for (auto l : c) out += letter(l);
      return out;
    case Family::lamplighter:
      out = "{";
      for (std::size_t i = 1; i < c.size(); i += 2) {
        if (i > 1) out += ",";
        out += std::to_string(c[i]) + ":" + std::to_string(c[i + 1]);
      }
      return out + "}@" + std::to_string(c[0]);
    case Family::baumslag_solitar: {
      auto den = narrow(ipow(param_, c[1]));
      out = "(" + std::to_string(c[0]);
      if (den != 1) out += "/" + std::to_string(den);
      return out + "," + std::to_string(c[2]) + ")";
    }
  }
  return out;
}

GroupElement GroupModel::parse(std::string_view text) const {
  GroupElement g;
  switch (family_) {
    case Family::free_abelian:
    case Family::heisenberg:
      g.coords = parse_ints(strip(text, '(', ')'));
      break;
    case Family::free_group:
      if (text == "e") break;
      for (char ch : text) {
        std::int64_t l = 0;
        if (ch >= 'a' && ch <= 'z') l = ch - 'a' + 1;
        else if (ch >= 'A' && ch <= 'Z') l = -(ch - 'A' + 1);
        else fail(ErrorKind::validation, "bad letter in free group word '" + std::string(text) + "'");
        g.coords.push_back(l);
      }
      break;
    case Family::lamplighter: {
      auto at = text.rfind('@');
      if (at == std::string_view::npos) fail(ErrorKind::validation, "lamplighter form needs '@cursor'");
      auto cursor = parse_ints(text.substr(at + 1));
      if (cursor.size() != 1) fail(ErrorKind::validation, "bad lamplighter cursor");
      g.coords.push_back(cursor[0]);
      std::string body(strip(text.substr(0, at), '{', '}'));
      std::replace(body.begin(), body.end(), ':', ',');
      for (auto v : parse_ints(body)) g.coords.push_back(v);
      break;
    }
    case Family::baumslag_solitar: {
      std::string body(strip(text, '(', ')'));
      auto slash = body.find('/');
      std::int64_t den = 1;
      if (slash != std::string::npos) {
        auto comma = body.find(',', slash);
        if (comma == std::string::npos) fail(ErrorKind::validation, "bad BS form");
        auto d = parse_ints(std::string_view(body).substr(slash + 1, comma - slash - 1));
        if (d.size() != 1) fail(ErrorKind::validation, "bad BS denominator");
        den = d[0];
        body.erase(slash, comma - slash);
      }
      auto v = parse_ints(body);
      if (v.size() != 2) fail(ErrorKind::validation, "BS form is (p[/m^e],n)");
      return bs(v[0], den, v[1]);
    }
  }
  validate(g);
  return g;
}

GroupElement GroupModel::vec(std::vector<std::int64_t> x) const {
  GroupElement g{std::move(x)};
  validate(g);
  return g;
}

GroupElement GroupModel::word(std::string_view letters) const {
  if (family_ != Family::free_group) fail(ErrorKind::validation, "word() is for free groups");
  GroupElement g = identity();
  for (char ch : letters) {
    std::int64_t l = (ch >= 'a' && ch <= 'z') ? ch - 'a' + 1 : -(ch - 'A' + 1);
    g = multiply(g, GroupElement{{l}});
  }
  return g;
}

GroupElement GroupModel::heis(std::int64_t x, std::int64_t y, std::int64_t z) const {
  return vec({x, y, z});
}

GroupElement GroupModel::lamps(std::int64_t cursor,
                               std::vector<std::pair<std::int64_t, std::int64_t>> lit) const {
  if (family_ != Family::lamplighter) fail(ErrorKind::validation, "lamps() is for lamplighters");
  std::sort(lit.begin(), lit.end());
  GroupElement g{{cursor}};
  for (auto [pos, val] : lit) {
    val = ((val % param_) + param_) % param_;
    if (val == 0) continue;
    g.coords.push_back(pos);
    g.coords.push_back(val);
  }
  validate(g);
  return g;
}

GroupElement GroupModel::bs(std::int64_t numerator, std::int64_t denominator, std::int64_t height) const {
  if (family_ != Family::baumslag_solitar) fail(ErrorKind::validation, "bs() is for BaumslagSolitar");
  std::int64_t e = 0;
  std::int64_t d = denominator;
  while (d > 1 && d % param_ == 0) {
    d /= param_;
    ++e;
  }
  if (d != 1) fail(ErrorKind::validation, "BS denominator must be a power of m");
  MAdic r = normalize({numerator, e}, param_);
  return GroupElement{{narrow(r.p), r.e, height}};
}

Ball::Ball(int radius, std::vector<GroupElement> elements, std::vector<std::size_t> sphere_offsets)
    : radius_(radius), elements_(std::move(elements)), offsets_(std::move(sphere_offsets)) {
  index_.reserve(elements_.size());
  for (std::size_t i = 0; i < elements_.size(); ++i) index_.emplace(elements_[i], i);
}

std::span<const GroupElement> Ball::sphere(int n) const {
  if (n < 0 || n > radius_) return {};
  return std::span<const GroupElement>(elements_).subspan(offsets_[n], offsets_[n + 1] - offsets_[n]);
}

std::size_t Ball::sphere_size(int n) const { return sphere(n).size(); }

std::size_t Ball::ball_size(int n) const {
  if (n < 0) return 0;
  return offsets_[std::min(n, radius_) + 1];
}

std::optional<std::size_t> Ball::find(const GroupElement& g) const {
  auto it = index_.find(g);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int Ball::length_at(std::size_t index) const {
  auto it = std::upper_bound(offsets_.begin(), offsets_.end(), index);
  return static_cast<int>(it - offsets_.begin()) - 1;
}

Ball enumerate_ball(const GroupModel& model, int radius) {
  if (radius < 0) fail(ErrorKind::parameter, "ball radius must be nonnegative");
  model.grow_cache(radius);
  std::lock_guard lock(model.cache_->mutex);
  std::vector<GroupElement> elements;
  std::vector<std::size_t> offsets{0};
  for (int n = 0; n <= radius; ++n) {
    const auto& s = model.cache_->spheres[n];
    elements.insert(elements.end(), s.begin(), s.end());
    offsets.push_back(elements.size());
  }
  return Ball(radius, std::move(elements), std::move(offsets));
}

Ball sub_ball(const Ball& ball, int radius) {
  if (radius < 0 || radius > ball.radius())
    fail(ErrorKind::parameter, "sub-ball radius " + std::to_string(radius) + " outside [0, " +
                                   std::to_string(ball.radius()) + "]");
  std::vector<GroupElement> elements(ball.elements().begin(),
                                     ball.elements().begin() + ball.ball_size(radius));
  std::vector<std::size_t> offsets(ball.sphere_offsets().begin(),
                                   ball.sphere_offsets().begin() + radius + 2);
  return Ball(radius, std::move(elements), std::move(offsets));
}

}  // namespace cocycle
