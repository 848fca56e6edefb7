#include "cocycle/experiment.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cocycle/asymptotics.hpp"
#include "cocycle/bernstein.hpp"
#include "cocycle/error.hpp"
#include "cocycle/euclid.hpp"
#include "cocycle/folner.hpp"
#include "cocycle/group.hpp"
#include "cocycle/kernels.hpp"

namespace cocycle {

namespace {

using json = nlohmann::json;

enum class Type { string, integer, number, boolean, numbers, integers, any };

struct Field {
  const char* name;
  Type type;
  json fallback;  // null: required; "__optional__": may be absent
};

const json kOptional = "__optional__";

const std::vector<Field> kCommon = {
    {"command", Type::string, nullptr},
    {"output", Type::string, kOptional},
    {"summary", Type::string, kOptional},
    {"seed", Type::integer, 0},
    {"strict", Type::boolean, false},
    {"description", Type::string, kOptional},
    {"name", Type::string, kOptional},
};

const std::map<std::string, std::vector<Field>>& schemas() {
  static const std::map<std::string, std::vector<Field>> s = {
      {"ball", {{"family", Type::string, nullptr}, {"param", Type::integer, kOptional}, {"radius", Type::integer, nullptr}}},
      {"cnd-check",
       {{"family", Type::string, nullptr},
        {"param", Type::integer, kOptional},
        {"psi", Type::string, nullptr},
        {"radius", Type::integer, nullptr},
        {"tol", Type::number, kDefaultPsdTolerance},
        {"t", Type::numbers, json::array()},
        {"compose", Type::string, "none"},
        {"atoms", Type::integer, 8},
        {"expect", Type::string, "pass"}}},
      {"embed",
       {{"family", Type::string, nullptr},
        {"param", Type::integer, kOptional},
        {"psi", Type::string, nullptr},
        {"radius", Type::integer, nullptr},
        {"tol", Type::number, kDefaultPsdTolerance}}},
      {"compression",
       {{"family", Type::string, nullptr},
        {"param", Type::integer, kOptional},
        {"psi", Type::string, nullptr},
        {"radius", Type::integer, nullptr},
        {"tol", Type::number, kDefaultPsdTolerance}}},
      {"bernstein-minorize",
       {{"u", Type::string, "1+log1p"},
        {"atoms", Type::integer, 8},
        {"grid_points", Type::integer, 1000},
        {"grid_max", Type::number, 1e6}}},
      {"bernstein-majorize",
       {{"w", Type::string, "sqrt"},
        {"x_max", Type::number, 1e8},
        {"points_per_decade", Type::integer, 20},
        {"verify_max", Type::number, 1e6},
        {"verify_points", Type::integer, 1000}}},
      {"slow-cocycle",
       {{"family", Type::string, nullptr},
        {"param", Type::integer, kOptional},
        {"radius", Type::integer, nullptr},
        {"f", Type::string, "log-word-length"},
        {"psi0", Type::string, "word-length"},
        {"atoms", Type::integer, 8},
        {"tol", Type::number, kDefaultPsdTolerance}}},
      {"folner",
       {{"family", Type::string, nullptr},
        {"param", Type::integer, kOptional},
        {"mode", Type::string, "standard"},
        {"n", Type::integers, json::array()},
        {"horizon", Type::integer, 30}}},
      {"average",
       {{"family", Type::string, nullptr},
        {"param", Type::integer, kOptional},
        {"demo", Type::string, nullptr},
        {"angles", Type::numbers, json::array()},
        {"v0", Type::numbers, json::array({1.0, 0.0})},
        {"translations", Type::any, json::array()},
        {"n", Type::integers, nullptr}}},
      {"gk-witness",
       {{"family", Type::string, nullptr},
        {"param", Type::integer, kOptional},
        {"embedding", Type::string, "identity"},
        {"psi", Type::string, "word-length"},
        {"radius", Type::integer, nullptr},
        {"t", Type::numbers, nullptr},
        {"tol", Type::number, kDefaultPsdTolerance}}},
      {"fourier-sqrt",
       {{"family", Type::string, "Z"},
        {"param", Type::integer, kOptional},
        {"radius", Type::integer, nullptr},
        {"t", Type::numbers, nullptr},
        {"window", Type::integer, 0}}},
      {"gromov-average",
       {{"family", Type::string, nullptr},
        {"param", Type::integer, kOptional},
        {"map", Type::string, nullptr},
        {"sample_radius", Type::integer, nullptr},
        {"output_radius", Type::integer, 12},
        {"cnd_radius", Type::integer, 6},
        {"n", Type::integers, nullptr},
        {"mean", Type::string, "smoothed"},
        {"order", Type::integer, 6},
        {"tol", Type::number, kDefaultPsdTolerance}}},
      {"smooth",
       {{"map", Type::string, nullptr},
        {"lo", Type::numbers, nullptr},
        {"hi", Type::numbers, nullptr},
        {"step", Type::number, 0.01},
        {"spacing", Type::number, 1.0},
        {"inner", Type::number, 1.0},
        {"outer", Type::number, 2.0},
        {"max_gap_steps", Type::integer, 0}}},
      {"euclid",
       {{"input", Type::string, kOptional},
        {"isometries", Type::any, kOptional},
        {"random", Type::integer, 0},
        {"dimension", Type::integer, 2},
        {"max_length", Type::integer, 8},
        {"max_products", Type::integer, 200000}}},
  };
  return s;
}

std::string type_name(Type t) {
  switch (t) {
    case Type::string: return "string";
    case Type::integer: return "integer";
    case Type::number: return "number";
    case Type::boolean: return "boolean";
    case Type::numbers: return "array of numbers";
    case Type::integers: return "array of integers";
    case Type::any: return "json";
  }
  return "json";
}

bool has_type(const json& v, Type t) {
  switch (t) {
    case Type::string: return v.is_string();
    case Type::integer: return v.is_number_integer();
    case Type::number: return v.is_number();
    case Type::boolean: return v.is_boolean();
    case Type::numbers:
      return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); });
    case Type::integers:
      return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number_integer(); });
    case Type::any: return true;
  }
  return false;
}

json normalize(const json& raw) {
  if (!raw.is_object()) fail(ErrorKind::validation, "config must be a JSON object");
  if (!raw.contains("command") || !raw["command"].is_string())
    fail(ErrorKind::validation, "config needs a string \"command\"");
  const std::string command = raw["command"];
  auto it = schemas().find(command);
  if (it == schemas().end()) fail(ErrorKind::validation, "unknown command \"" + command + "\"");
  std::vector<Field> fields = kCommon;
  fields.insert(fields.end(), it->second.begin(), it->second.end());

  for (const auto& [key, value] : raw.items()) {
    bool known = std::any_of(fields.begin(), fields.end(), [&](const Field& f) { return key == f.name; });
    if (!known) fail(ErrorKind::validation, "unknown key \"" + key + "\" for command " + command);
  }
  json out = json::object();
  for (const auto& f : fields) {
    if (raw.contains(f.name)) {
      const json& v = raw[f.name];
      if (!has_type(v, f.type))
        fail(ErrorKind::validation, std::string("key \"") + f.name + "\" must be a " + type_name(f.type));
      out[f.name] = v;
    } else if (f.fallback.is_null()) {
      fail(ErrorKind::validation, std::string("missing required key \"") + f.name + "\" for command " + command);
    } else if (f.fallback != kOptional) {
      out[f.name] = f.fallback;
    }
  }
  return out;
}

std::string fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

std::string canonical(json c) {
  c.erase("output");
  c.erase("summary");
  c.erase("strict");
  c.erase("name");
  return c.dump();
}

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\" ") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// JSON cannot hold inf; summaries carry it as a string.
json jnum(double x) { return std::isfinite(x) ? json(x) : json(num(x)); }

struct Table {
  std::ostringstream body;
  void header(const std::vector<std::string>& cols) { row(cols); }
  void row(const std::vector<std::string>& cols) {
    for (std::size_t i = 0; i < cols.size(); ++i) body << (i ? "," : "") << quote(cols[i]);
    body << '\n';
  }
};

struct Context {
  json config;
  std::filesystem::path base_dir;
  Table table;
  json summary = json::object();
  std::vector<std::string> violations;

  void check(bool ok, const std::string& what) {
    if (!ok) violations.push_back(what);
  }
};

GroupModel group_of(const json& c) {
  std::optional<int> param;
  if (c.contains("param")) param = c["param"].get<int>();
  return GroupModel::from_name(c["family"].get<std::string>(), param);
}

double sq_euclid(const GroupElement& g) {
  double s = 0;
  for (auto x : g.coords) s += double(x) * double(x);
  return s;
}

std::function<double(const GroupElement&)> psi_function(const GroupModel& m, const std::string& name) {
  if (name == "word-length") return [m](const GroupElement& g) { return double(m.word_length(g)); };
  if (name == "sqrt-word-length") return [m](const GroupElement& g) { return std::sqrt(double(m.word_length(g))); };
  if (name == "log-word-length") return [m](const GroupElement& g) { return std::log(2.0 + m.word_length(g)); };
  const bool euclidean = name == "sq-euclid" || name == "neg-sq-euclid" || name == "euclid";
  if (euclidean && m.family() != Family::free_abelian)
    fail(ErrorKind::validation, "psi \"" + name + "\" needs a free abelian family");
  if (name == "sq-euclid") return sq_euclid;
  if (name == "neg-sq-euclid") return [](const GroupElement& g) { return -sq_euclid(g); };
  if (name == "euclid") return [](const GroupElement& g) { return std::sqrt(sq_euclid(g)); };
  fail(ErrorKind::validation, "unknown psi \"" + name + "\"");
}

json verdict_json(const PsdVerdict& v) {
  json j = {{"pass", v.pass},
            {"min_eigenvalue", jnum(v.min_eigenvalue)},
            {"scale", jnum(v.scale)},
            {"threshold", jnum(v.threshold)},
            {"test_radius", v.test_radius},
            {"test_size", v.test_size}};
  j["witness_value"] = v.witness ? jnum(v.witness_value) : json(nullptr);
  return j;
}

BernsteinSpec log_minorant(int atoms) {
  return minorize_proper({[](double t) { return 1 + std::log1p(t); }, {}}, atoms).spec;
}

BernsteinSpec named_bernstein(const std::string& name, int atoms) {
  if (name == "minorant") return log_minorant(atoms);
  if (name == "sqrt-majorant") return majorize_sublinear([](double x) { return std::sqrt(x); }).spec;
  if (name == "log1p") return log1p_spec();
  if (name.rfind("power-", 0) == 0) return power_spec(std::stod(name.substr(6)));
  fail(ErrorKind::validation, "unknown Bernstein function \"" + name + "\"");
}

void run_ball(Context& cx) {
  auto m = group_of(cx.config);
  Ball b = enumerate_ball(m, cx.config["radius"].get<int>());
  cx.table.header({"index", "length", "element"});
  json spheres = json::array();
  for (std::size_t i = 0; i < b.size(); ++i)
    cx.table.row({std::to_string(i), std::to_string(b.length_at(i)), m.format(b[i])});
  for (int n = 0; n <= b.radius(); ++n) spheres.push_back(b.sphere_size(n));
  cx.summary["size"] = b.size();
  cx.summary["sphere_sizes"] = spheres;
}

void run_cnd_check(Context& cx) {
  const auto& c = cx.config;
  auto m = group_of(c);
  const int r = c["radius"];
  const double tol = c["tol"];
  auto psi = tabulate(m, 2 * r, psi_function(m, c["psi"]), KernelKind::cnd_candidate);
  cx.table.header({"kernel", "t", "pass", "min_eigenvalue", "scale", "threshold", "test_size", "witness_value"});
  json checks = json::array();
  auto record = [&](const std::string& kernel, double t, const PsdVerdict& v) {
    cx.table.row({kernel, num(t), v.pass ? "true" : "false", num(v.min_eigenvalue), num(v.scale), num(v.threshold),
                  std::to_string(v.test_size), v.witness ? num(v.witness_value) : ""});
    json j = verdict_json(v);
    j["kernel"] = kernel;
    j["t"] = t;
    checks.push_back(j);
    return v.pass;
  };
  const std::string psi_name = c["psi"];
  const std::string compose = c["compose"];
  bool all = true;
  bool first_pass = true;
  double first_witness = 0;
  if (compose == "none") {
    auto v = cnd_check(psi, tol, r);
    first_pass = v.pass;
    first_witness = v.witness ? v.witness_value : 0;
    all = record(psi_name, 0, v) && all;
    for (double t : c["t"]) {
      auto f = tabulate(m, psi.ball, [&](const GroupElement& g) { return std::exp(-t * psi.at(g)); },
                        KernelKind::pd_candidate);
      all = record("exp(-t*" + psi_name + ")", t, pd_check(f, tol, r)) && all;
    }
  } else {
    auto spec = named_bernstein(compose, c["atoms"]);
    auto v = cnd_check(compose_cnd(spec, psi), tol, r);
    first_pass = v.pass;
    all = record(compose + "(" + psi_name + ")", 0, v) && all;
  }
  cx.summary["checks"] = checks;
  cx.summary["all_pass"] = all;
  if (c["expect"] == "pass") {
    cx.check(all, "some positivity check failed");
  } else if (c["expect"] == "fail") {
    cx.check(!first_pass, "cnd_check was expected to fail");
    cx.check(first_witness > 1e-6, "no witness with quadratic form above 1e-6");
  } else {
    fail(ErrorKind::validation, "expect must be \"pass\" or \"fail\"");
  }
}

void run_embed(Context& cx) {
  const auto& c = cx.config;
  auto m = group_of(c);
  const int r = c["radius"];
  auto psi = tabulate(m, 2 * r, psi_function(m, c["psi"]), KernelKind::cnd_candidate);
  auto emb = gns_embed(psi, c["tol"].get<double>(), r);
  std::vector<std::string> head{"element", "norm"};
  for (int k = 0; k < emb.dimension(); ++k) head.push_back("b" + std::to_string(k));
  cx.table.header(head);
  for (std::size_t i = 0; i < emb.ball->size(); ++i) {
    std::vector<std::string> row{m.format((*emb.ball)[i]), num(emb.norm_at(i))};
    for (int k = 0; k < emb.dimension(); ++k) row.push_back(num(emb.vectors(static_cast<Eigen::Index>(i), k)));
    cx.table.row(row);
  }
  const double err = round_trip_error(emb, psi);
  cx.summary["dimension"] = emb.dimension();
  cx.summary["round_trip_error"] = err;
  cx.summary["achieved_tolerance"] = emb.achieved_tolerance;
  cx.summary["points"] = emb.ball->size();
}

void run_compression(Context& cx) {
  const auto& c = cx.config;
  auto m = group_of(c);
  const int r = c["radius"];
  auto psi = tabulate(m, 2 * r, psi_function(m, c["psi"]), KernelKind::cnd_candidate);
  auto prof = compression_profile(gns_embed(psi, c["tol"].get<double>(), r));
  cx.table.header({"x", "rho", "delta"});
  for (std::size_t i = 0; i < prof.xs.size(); ++i) cx.table.row({num(prof.xs[i]), num(prof.rho[i]), num(prof.delta[i])});
  cx.summary["alpha"] = prof.exponent_fit.alpha;
  cx.summary["half_width"] = jnum(prof.exponent_fit.half_width);
  cx.summary["fit_points"] = prof.exponent_fit.points;
}

void run_minorize(Context& cx) {
  const auto& c = cx.config;
  if (c["u"] != "1+log1p") fail(ErrorKind::validation, "u must be \"1+log1p\"");
  auto u = [](double t) { return 1 + std::log1p(t); };
  const int atoms = c["atoms"];
  auto r = minorize_proper({u, {}}, atoms);
  cx.table.header({"n", "k", "x", "bound"});
  bool strict = true;
  json steps = json::array();
  for (const auto& s : r.steps) {
    const double bound = std::ldexp(1.0, -s.n);
    strict = strict && s.x < bound;
    cx.table.row({std::to_string(s.n), num(s.k), num(s.x), num(bound)});
    steps.push_back({{"n", s.n}, {"k", s.k}, {"x", s.x}});
  }
  const int points = c["grid_points"];
  const double top = c["grid_max"];
  double excess = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < points; ++i) {
    double t = top * i / (points - 1);
    excess = std::max(excess, evaluate(r.spec, t) - u(t));
  }
  const double at_top = evaluate(r.spec, top);
  json atoms_json = json::array();
  for (const auto& a : r.spec.atoms) atoms_json.push_back({{"x", a.x}, {"weight", a.weight}});
  cx.summary["steps"] = steps;
  cx.summary["drift"] = r.spec.drift;
  cx.summary["atoms"] = atoms_json;
  cx.summary["densities"] = r.spec.densities.size();
  cx.summary["atoms_below_dyadic"] = strict;
  cx.summary["max_excess"] = excess;
  cx.summary["F_at_grid_max"] = at_top;
  cx.check(strict, "some atom has x_n >= 2^-n");
  cx.check(excess <= 0, "F exceeds u on the grid");
}

void run_majorize(Context& cx) {
  const auto& c = cx.config;
  std::function<double(double)> w;
  if (c["w"] == "sqrt")
    w = [](double x) { return std::sqrt(x); };
  else if (c["w"] == "x-over-log")
    w = [](double x) { return x / std::log(2 + x); };
  else
    fail(ErrorKind::validation, "w must be \"sqrt\" or \"x-over-log\"");
  MajorizeOptions o;
  o.x_max = c["x_max"];
  o.points_per_decade = c["points_per_decade"];
  o.verify_max = c["verify_max"];
  o.verify_points = c["verify_points"];
  auto r = majorize_sublinear(w, o);
  cx.table.header({"t", "F", "w"});
  double margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < o.verify_points; ++i) {
    const double t = std::pow(o.verify_max, double(i) / (o.verify_points - 1));
    const double f = evaluate(r.spec, t);
    cx.table.row({num(t), num(f), num(w(t))});
    if (t >= r.threshold) margin = std::min(margin, f - w(t));
  }
  const double ratio = evaluate(r.spec, o.verify_max) / o.verify_max;
  cx.summary["threshold"] = jnum(r.threshold);
  cx.summary["min_margin_beyond_threshold"] = jnum(margin);
  cx.summary["ratio_at_verify_max"] = ratio;
  cx.summary["envelope_points"] = r.grid.size();
  cx.check(std::isfinite(r.threshold), "F never dominates w on the verification grid");
  cx.check(margin >= 0, "F falls below w beyond the threshold");
}

void run_slow(Context& cx) {
  const auto& c = cx.config;
  auto m = group_of(c);
  auto ball = std::make_shared<const Ball>(enumerate_ball(m, c["radius"].get<int>()));
  auto psi0 = tabulate(m, ball, psi_function(m, c["psi0"]), KernelKind::cnd_candidate);
  auto f = tabulate(m, ball, psi_function(m, c["f"]), KernelKind::cnd_candidate);
  auto r = slow_cocycle(f, psi0, c["atoms"], c["tol"].get<double>());
  cx.table.header({"element", "psi0", "f", "F_psi0"});
  for (std::size_t i = 0; i < ball->size(); ++i)
    cx.table.row({m.format((*ball)[i]), num(psi0.values[i]), num(f.values[i]), num(r.psi.values[i])});
  cx.summary["dominated"] = r.dominated;
  cx.summary["u_increasing"] = r.u_increasing;
  cx.summary["horizon_used"] = r.horizon_used;
  cx.summary["scale"] = r.scale;
  cx.summary["cnd"] = verdict_json(r.verdict);
  cx.check(r.dominated, "F(psi0) exceeds f somewhere");
  cx.check(r.verdict.pass, "F(psi0) fails cnd_check");
}

std::string rational(const Rational& q) {
  return std::to_string(q.numerator()) + "/" + std::to_string(q.denominator());
}

void run_folner(Context& cx) {
  const auto& c = cx.config;
  auto m = group_of(c);
  const std::string mode = c["mode"];
  if (mode == "sphere") {
    auto s = sphere_subsequence(m, c["horizon"]);
    cx.table.header({"n", "ball_size", "ratio", "within"});
    bool closed_form = m.family() == Family::free_abelian && m.param() == 2;
    bool all_within = true;
    json ratios = json::array();
    for (int n = 1; n < static_cast<int>(s.ratios.size()); ++n) {
      bool within = s.ratios[n] <= Rational(s.c, n);
      all_within = all_within && within;
      ratios.push_back(rational(s.ratios[n]));
      cx.table.row({std::to_string(n), std::to_string(s.ball_sizes[n]), rational(s.ratios[n]), within ? "true" : "false"});
      if (closed_form)
        closed_form = s.ratios[n] == Rational(4 * (n + 1), 2 * std::int64_t(n) * n + 2 * n + 1);
    }
    cx.summary["c"] = s.c;
    cx.summary["ratios"] = ratios;
    cx.summary["indices"] = s.indices;
    cx.summary["all_within"] = all_within;
    if (m.family() == Family::free_abelian && m.param() == 2) {
      cx.summary["matches_closed_form"] = closed_form;
      cx.check(closed_form, "ratios differ from 4(n+1)/(2n^2+2n+1)");
    }
    return;
  }
  if (mode != "standard" && mode != "ball") fail(ErrorKind::validation, "mode must be standard, ball or sphere");
  std::vector<FolnerSet> seq;
  cx.table.header({"n", "size", "epsilon", "epsilon_value", "radius_bound", "product"});
  json rows = json::array();
  for (int n : c["n"]) {
    seq.push_back(mode == "ball" ? ball_folner_set(m, n) : standard_folner(m, n));
    const auto& f = seq.back();
    cx.table.row({std::to_string(n), std::to_string(f.elements.size()), rational(f.epsilon), num(to_double(f.epsilon)),
                  std::to_string(f.radius_bound), num(f.radius_bound * to_double(f.epsilon))});
    rows.push_back({{"n", n}, {"size", f.elements.size()}, {"epsilon", rational(f.epsilon)}, {"radius_bound", f.radius_bound}});
  }
  cx.summary["sets"] = rows;
  if (seq.size() >= 3) {
    auto v = controlled_check(seq);
    cx.summary["controlled"] = {{"pass", v.pass}, {"c_hat", v.c_hat}, {"kendall_z", v.kendall_z}, {"tail_slope", v.tail_slope}};
  }
}

void run_average(Context& cx) {
  const auto& c = cx.config;
  auto m = group_of(c);
  if (m.family() != Family::free_abelian) fail(ErrorKind::validation, "average demos act on free abelian groups");
  std::vector<int> ns = c["n"];
  if (ns.empty()) fail(ErrorKind::validation, "n must list at least one index");
  const int radius = *std::max_element(ns.begin(), ns.end()) * m.param() + 1;
  const std::string demo = c["demo"];
  std::optional<AffineActionDemo> d;
  if (demo == "rotation") {
    std::vector<double> angles = c["angles"];
    std::vector<double> v0 = c["v0"];
    if (v0.size() != 2) fail(ErrorKind::validation, "v0 must have two entries");
    d = rotation_coboundary_demo(m, radius, angles, Eigen::Vector2d(v0[0], v0[1]));
  } else if (demo == "translation") {
    std::vector<Eigen::VectorXd> ts;
    for (const auto& t : c["translations"]) {
      std::vector<double> v = t;
      ts.push_back(Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
    }
    d = translation_demo(m, radius, ts);
  } else {
    fail(ErrorKind::validation, "demo must be \"rotation\" or \"translation\"");
  }
  cx.table.header({"n", "epsilon", "generator", "residual", "bound", "lemma_bound"});
  bool within = true, eps_closed = true;
  json rows = json::array();
  for (int n : ns) {
    auto set = standard_folner(m, n);
    auto r = average_cocycle(*d, set);
    eps_closed = eps_closed && set.epsilon == Rational(2, 2 * n + 1);
    json res = json::array();
    for (std::size_t s = 0; s < r.residuals.size(); ++s) {
      cx.table.row({std::to_string(n), rational(r.epsilon), m.generator_labels()[s], num(r.residuals[s]), num(r.bound),
                    num(r.lemma_bound)});
      within = within && r.residuals[s] <= r.lemma_bound + 1e-9;
      res.push_back(r.residuals[s]);
    }
    rows.push_back({{"n", n}, {"epsilon", rational(r.epsilon)}, {"residuals", res}, {"lemma_bound", r.lemma_bound},
                    {"bound", r.bound}});
  }
  cx.summary["rows"] = rows;
  cx.summary["within_lemma_bound"] = within;
  cx.summary["epsilon_closed_form"] = eps_closed;
  cx.check(within, "a residual exceeds 2 eps sup_F |b| + 1e-9");
  cx.check(eps_closed, "epsilon differs from 2/(2n+1)");
}

void run_gk(Context& cx) {
  const auto& c = cx.config;
  auto m = group_of(c);
  const int r = c["radius"];
  GnsEmbedding emb = [&] {
    if (c["embedding"] == "identity") {
      if (m.family() != Family::free_abelian) fail(ErrorKind::validation, "identity embedding needs Z^d");
      return sample_embedding(m, r, [](const GroupElement& g) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(g.coords.size()));
        for (std::size_t i = 0; i < g.coords.size(); ++i) v[static_cast<Eigen::Index>(i)] = double(g.coords[i]);
        return v;
      });
    }
    if (c["embedding"] == "gns") {
      auto psi = tabulate(m, 2 * r, psi_function(m, c["psi"]), KernelKind::cnd_candidate);
      return gns_embed(psi, c["tol"].get<double>(), r);
    }
    fail(ErrorKind::validation, "embedding must be \"identity\" or \"gns\"");
  }();
  cx.table.header({"t", "n", "sphere_size", "sum", "log_sum"});
  json per_t = json::array();
  for (double t : c["t"]) {
    auto w = gk_witness(emb, t);
    for (std::size_t n = 0; n < w.sphere_sums.size(); ++n)
      cx.table.row({num(t), std::to_string(n), std::to_string(w.sphere_sizes[n]), num(w.sphere_sums[n]),
                    num(w.log_sphere_sums[n])});
    json logs = json::array();
    for (double l : w.log_sphere_sums) logs.push_back(jnum(l));
    per_t.push_back({{"t", t}, {"summable", w.summable}, {"tail_rate", w.tail_rate}, {"a_hat", w.a_hat},
                     {"log_sphere_sums", logs}});
  }
  cx.summary["witness"] = per_t;
}

void run_fourier(Context& cx) {
  const auto& c = cx.config;
  auto m = group_of(c);
  const int r = c["radius"];
  cx.table.header({"t", "window", "reconstruction_error", "norm_sq", "min_transform", "generator", "invariance"});
  json per_t = json::array();
  for (double t : c["t"]) {
    auto f = tabulate(m, r, [t](const GroupElement& g) { return std::exp(-t * sq_euclid(g)); }, KernelKind::pd_candidate);
    FourierSqrtOptions o;
    o.window = c["window"];
    auto s = fourier_sqrt_abelian(f, o);
    for (std::size_t k = 0; k < s.invariance.size(); ++k)
      cx.table.row({num(t), std::to_string(s.window), num(s.reconstruction_error), num(s.norm_sq), num(s.min_transform),
                    m.generator_labels()[k], num(s.invariance[k])});
    per_t.push_back({{"t", t}, {"window", s.window}, {"reconstruction_error", s.reconstruction_error},
                     {"norm_sq", s.norm_sq}, {"invariance", s.invariance}, {"tail_mass", s.tail_mass}});
  }
  cx.summary["runs"] = per_t;
}

void run_gromov(Context& cx) {
  const auto& c = cx.config;
  auto m = group_of(c);
  const std::string map = c["map"];
  std::function<Eigen::VectorXd(const GroupElement&)> fn;
  if (m.family() != Family::free_abelian) fail(ErrorKind::validation, "gromov-average maps are defined on Z^d");
  if (map == "identity" || map == "k+sin-k") {
    const bool wiggle = map == "k+sin-k";
    fn = [wiggle](const GroupElement& g) {
      Eigen::VectorXd v(static_cast<Eigen::Index>(g.coords.size()));
      for (std::size_t i = 0; i < g.coords.size(); ++i) {
        double k = double(g.coords[i]);
        v[static_cast<Eigen::Index>(i)] = wiggle ? k + std::sin(k) : k;
      }
      return v;
    };
  } else {
    fail(ErrorKind::validation, "map must be \"identity\" or \"k+sin-k\"");
  }
  auto f = sample_embedding(m, c["sample_radius"], fn);
  std::vector<FolnerSet> seq;
  for (int n : c["n"]) seq.push_back(standard_folner(m, n));
  GromovOptions o;
  o.output_radius = c["output_radius"];
  o.order = c["order"];
  if (c["mean"] == "uniform")
    o.mean = MeanKind::uniform;
  else if (c["mean"] != "smoothed")
    fail(ErrorKind::validation, "mean must be \"uniform\" or \"smoothed\"");
  auto r = gromov_average(f, seq, o);
  auto verdict = cnd_check(r.psi, c["tol"].get<double>(), c["cnd_radius"].get<int>());
  cx.table.header({"element", "length", "psi", "rho", "delta"});
  bool sandwich = true;
  json values = json::array();
  for (std::size_t i = 0; i < r.psi.ball->size(); ++i) {
    const int len = r.psi.ball->length_at(i);
    const double v = r.psi.values[i];
    cx.table.row({m.format((*r.psi.ball)[i]), std::to_string(len), num(v), num(r.rho[len]), num(r.delta[len])});
    const double lo = std::max(0.0, r.rho[len] - r.slack);
    const double hi = r.delta[len] + r.slack;
    sandwich = sandwich && lo * lo <= v + 1e-12 && v <= hi * hi + 1e-12;
    values.push_back({{"element", m.format((*r.psi.ball)[i])}, {"length", len}, {"psi", v}});
  }
  cx.summary["stabilized"] = r.stabilized;
  cx.summary["successive_diff"] = r.successive_diff;
  cx.summary["slack"] = r.slack;
  cx.summary["cnd"] = verdict_json(verdict);
  cx.summary["sandwich"] = sandwich;
  cx.summary["psi"] = values;
  cx.check(r.stabilized, "psi_n did not stabilize below 1e-6");
  cx.check(verdict.pass, "averaged kernel fails cnd_check");
  cx.check(sandwich, "sandwich inequality violated");
}

void run_smooth(Context& cx) {
  const auto& c = cx.config;
  GridSpec grid{c["lo"].get<std::vector<double>>(), c["hi"].get<std::vector<double>>(), c["step"].get<double>()};
  const std::string map = c["map"];
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> fn;
  if (map == "floor")
    fn = [](const Eigen::VectorXd& x) { return Eigen::VectorXd(x.array().floor().matrix()); };
  else if (map == "linear")
    fn = [](const Eigen::VectorXd& x) { return Eigen::VectorXd(2 * x); };
  else if (map == "constant")
    fn = [](const Eigen::VectorXd& x) { return Eigen::VectorXd::Constant(x.size(), 1.0); };
  else
    fail(ErrorKind::validation, "map must be floor, linear or constant");
  auto s = smooth_uniform_map(fn, grid, c["spacing"], TrapezoidBump{c["inner"], c["outer"]}, c["max_gap_steps"]);
  cx.table.header({"gap_steps", "h", "modulus", "bound"});
  bool within = true;
  for (std::size_t k = 0; k < s.gap_steps.size(); ++k) {
    cx.table.row({std::to_string(s.gap_steps[k]), num(s.gap_steps[k] * grid.step), num(s.modulus[k]), num(s.modulus_bound[k])});
    within = within && s.modulus[k] <= s.modulus_bound[k];
  }
  cx.summary["sup_distance"] = s.sup_distance;
  cx.summary["displacement"] = s.displacement;
  cx.summary["net_spread"] = s.net_spread;
  cx.summary["overlap"] = s.overlap;
  cx.summary["min_cover"] = s.min_cover;
  cx.summary["lipschitz"] = s.lipschitz;
  cx.summary["lipschitz_bound"] = s.lipschitz_bound;
  cx.summary["modulus_within_bound"] = within;
  cx.check(s.sup_distance <= s.displacement, "sup distance exceeds M");
  cx.check(within, "measured modulus exceeds the certified bound");
}

EuclideanIsometry isometry_from(const json& j) {
  if (!j.is_object() || !j.contains("R") || !j.contains("t"))
    fail(ErrorKind::validation, "isometry must be {\"R\": [...], \"t\": [...]}");
  for (const auto& [key, v] : j.items())
    if (key != "R" && key != "t") fail(ErrorKind::validation, "unknown isometry key \"" + key + "\"");
  if (!has_type(j["R"], Type::numbers) || !has_type(j["t"], Type::numbers))
    fail(ErrorKind::validation, "isometry R and t must be arrays of numbers");
  std::vector<double> t = j["t"], r = j["R"];
  const auto n = static_cast<Eigen::Index>(t.size());
  if (static_cast<Eigen::Index>(r.size()) != n * n) fail(ErrorKind::validation, "R must have n*n entries, row-major");
  EuclideanIsometry g{Eigen::MatrixXd(n, n), Eigen::VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    g.translation[i] = t[static_cast<std::size_t>(i)];
    for (Eigen::Index k = 0; k < n; ++k) g.rotation(i, k) = r[static_cast<std::size_t>(i * n + k)];
  }
  validate(g);
  return g;
}

json isometry_json(const EuclideanIsometry& g) {
  json r = json::array();
  for (Eigen::Index i = 0; i < g.rotation.rows(); ++i)
    for (Eigen::Index k = 0; k < g.rotation.cols(); ++k) r.push_back(g.rotation(i, k));
  json t = json::array();
  for (Eigen::Index i = 0; i < g.translation.size(); ++i) t.push_back(g.translation[i]);
  return {{"R", r}, {"t", t}};
}

json flat_json(const AffineFlat& f) {
  json dirs = json::array();
  for (int k = 0; k < f.dimension(); ++k) {
    json col = json::array();
    for (Eigen::Index i = 0; i < f.directions.rows(); ++i) col.push_back(f.directions(i, k));
    dirs.push_back(col);
  }
  json base = json::array();
  for (Eigen::Index i = 0; i < f.basepoint.size(); ++i) base.push_back(f.basepoint[i]);
  return {{"basepoint", base}, {"directions", dirs}};
}

void run_euclid(Context& cx) {
  const auto& c = cx.config;
  json list;
  if (c.contains("input")) {
    std::filesystem::path p = c["input"].get<std::string>();
    if (p.is_relative()) p = cx.base_dir / p;
    std::ifstream in(p);
    if (!in) fail(ErrorKind::validation, "cannot read input " + p.string());
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      fail(ErrorKind::validation, "input " + p.string() + " is not JSON: " + e.what());
    }
    list = doc.is_object() && doc.contains("isometries") ? doc["isometries"] : doc;
  } else if (c.contains("isometries")) {
    list = c["isometries"];
  }
  std::vector<EuclideanIsometry> gens;
  if (!list.is_null()) {
    if (!list.is_array()) fail(ErrorKind::validation, "isometries must be an array");
    for (const auto& j : list) gens.push_back(isometry_from(j));
  }

  const int random = c["random"];
  if (random > 0) {
    // Seeded random isometries for displacement cross-checks.
    std::mt19937_64 rng(static_cast<std::uint64_t>(c["seed"].get<std::int64_t>()));
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const int n = c["dimension"];
    for (int k = 0; k < random; ++k) {
      Eigen::MatrixXd a(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = unif(rng);
      Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
      Eigen::VectorXd t(n);
      for (int i = 0; i < n; ++i) t[i] = 3 * unif(rng);
      // Re-orthogonalise to full precision.
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(q, Eigen::ComputeFullU | Eigen::ComputeFullV);
      gens.push_back({svd.matrixU() * svd.matrixV().transpose(), t});
    }
  }
  if (gens.empty()) fail(ErrorKind::validation, "euclid needs input, isometries or random");

  cx.table.header({"index", "displacement", "min_set_dimension", "min_set_basepoint"});
  json items = json::array();
  for (std::size_t k = 0; k < gens.size(); ++k) {
    auto d = displacement(gens[k]);
    std::string base;
    for (Eigen::Index i = 0; i < d.min_set.basepoint.size(); ++i) base += (i ? " " : "") + num(d.min_set.basepoint[i]);
    cx.table.row({std::to_string(k), num(d.length), std::to_string(d.min_set.dimension()), base});
    json item = isometry_json(gens[k]);
    item["displacement"] = d.length;
    item["min_set"] = flat_json(d.min_set);
    items.push_back(item);
  }
  cx.summary["isometries"] = items;
  if (random == 0) {
    FlatSearchOptions o;
    o.max_length = c["max_length"];
    o.max_products = static_cast<std::size_t>(c["max_products"].get<std::int64_t>());
    auto r = cocompact_check(gens, o);
    cx.summary["verdict"] = to_string(r.verdict);
    cx.summary["flat"] = flat_json(r.flat);
    cx.summary["note"] = r.note;
    cx.summary["budget"] = {{"max_length", o.max_length}, {"max_products", o.max_products}};
    cx.check(r.verdict != CocompactVerdict::inconclusive, "cocompactness verdict is inconclusive");
  }
}

const std::map<std::string, std::function<void(Context&)>>& runners() {
  static const std::map<std::string, std::function<void(Context&)>> r = {
      {"ball", run_ball},
      {"cnd-check", run_cnd_check},
      {"embed", run_embed},
      {"compression", run_compression},
      {"bernstein-minorize", run_minorize},
      {"bernstein-majorize", run_majorize},
      {"slow-cocycle", run_slow},
      {"folner", run_folner},
      {"average", run_average},
      {"gk-witness", run_gk},
      {"fourier-sqrt", run_fourier},
      {"gromov-average", run_gromov},
      {"smooth", run_smooth},
      {"euclid", run_euclid},
  };
  return r;
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::validation, std::string("config is not valid JSON: ") + e.what());
  }
}

}  // namespace


const std::vector<std::string>& experiment_commands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [k, fn] : runners()) v.push_back(k);
    return v;
  }();
  return names;
}

std::vector<ConfigKey> experiment_keys(const std::string& command) {
  auto it = schemas().find(command);
  if (it == schemas().end()) fail(ErrorKind::validation, "unknown command \"" + command + "\"");
  std::vector<ConfigKey> keys;
  for (const auto* list : {&kCommon, &it->second})
    for (const auto& f : *list)
      if (std::string(f.name) != "command") keys.push_back({f.name, type_name(f.type), f.fallback.is_null()});
  return keys;
}

std::string canonical_config(const std::string& config_json) { return canonical(normalize(parse(config_json))); }

ExperimentOutcome run_experiment(const std::string& config_json, const std::filesystem::path& base_dir) {
  Context cx;
  cx.config = normalize(parse(config_json));
  cx.base_dir = base_dir;
  ExperimentOutcome out;
  out.command = cx.config["command"];
  const std::string canon = canonical(cx.config);
  out.config_hash = fnv1a(canon);

  runners().at(out.command)(cx);

  std::ostringstream csv;
  csv << "# command=" << out.command << '\n'
      << "# version=" << kLibraryVersion << '\n'
      << "# config_hash=" << out.config_hash << '\n'
      << "# seed=" << cx.config["seed"].get<std::int64_t>() << '\n'
      << "# config=" << canon << '\n';
  csv << cx.table.body.str();
  out.csv = csv.str();

  out.property_ok = cx.violations.empty();
  out.violations = cx.violations;
  json summary = cx.summary;
  summary["command"] = out.command;
  summary["version"] = kLibraryVersion;
  summary["config_hash"] = out.config_hash;
  summary["property_ok"] = out.property_ok;
  summary["violations"] = cx.violations;
  out.summary = summary.dump(2) + "\n";

  if (cx.config.contains("output")) out.output_path = cx.config["output"];
  if (cx.config.contains("summary")) out.summary_path = cx.config["summary"];
  out.name = cx.config.value("name", out.command);
  return out;
}

std::vector<ExperimentOutcome> run_batch(const std::string& config_json, const std::filesystem::path& base_dir) {
  json raw = parse(config_json);
  if (!raw.is_object() || !raw.contains("runs")) return {run_experiment(config_json, base_dir)};
  for (const auto& [key, value] : raw.items())
    if (key != "runs" && key != "description") fail(ErrorKind::validation, "unknown batch key \"" + key + "\"");
  if (!raw["runs"].is_array() || raw["runs"].empty()) fail(ErrorKind::validation, "\"runs\" must be a non-empty array");
  std::vector<ExperimentOutcome> out;
  for (std::size_t i = 0; i < raw["runs"].size(); ++i) {
    const json& run = raw["runs"][i];
    try {
      out.push_back(run_experiment(run.dump(), base_dir));
    } catch (const Error& e) {
      throw Error(e.kind(), "run " + std::to_string(i) + ": " + e.what());
    }
    if (!run.contains("name")) {
      char buf[8];
      std::snprintf(buf, sizeof buf, "%02zu", i);
      out.back().name = std::string(buf) + "-" + out.back().command;
    }
  }
  return out;
}

}  // namespace cocycle
