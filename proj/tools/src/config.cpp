#include "smallpar/cli/config.hpp"

#include "smallpar/cli/builtins.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace smallpar::cli {

namespace {

const std::map<std::string, std::vector<std::string>>& schema() {
  static const std::map<std::string, std::vector<std::string>> s = {
      {"system", {"builtin", "name", "k", "period", "phi1..phik", "psi1..psik"}},
      {"parameters", {}},
      {"region", {"shape", "star_center"}},
      {"grids",
       {"s_points", "theta_points", "boundary_samples", "quadrature_panels", "lambda_points",
        "membership_points", "time_points"}},
      {"tolerances",
       {"rel_tol", "abs_tol", "max_step", "max_steps", "a0", "a1", "melnikov", "one", "gap",
        "periodicity"}},
      {"cycle", {"start"}},
      {"periodic",
       {"eps", "seed", "fallback_seed", "eps_list", "strategy", "tol", "max_iterations",
        "max_halvings", "singular_rcond", "reverse_fallback"}},
      {"averaging",
       {"center", "radius", "n_max", "phi_tol", "samples", "xi0", "d", "eps_list", "gamma_tol"}},
      {"resonance",
       {"forcing", "a_min", "a_max", "theta_min", "theta_max", "a_points", "theta_points",
        "newton_tol", "max_iterations", "box_half_width"}},
      {"degree",
       {"field1", "field2", "anchor", "initial_samples", "max_samples", "vanish_tol",
        "residue_tol"}},
      {"run", {"seed", "threads"}},
  };
  return s;
}

bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

bool is_component_key(std::string_view key, std::string_view prefix) {
  if (key.size() <= prefix.size() || key.substr(0, prefix.size()) != prefix) return false;
  const auto digits = key.substr(prefix.size());
  return digits[0] != '0' &&
         std::all_of(digits.begin(), digits.end(),
                     [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

void check_key(const std::string& section, const std::string& key) {
  const auto it = schema().find(section);
  if (it == schema().end()) {
    std::string msg = "unknown config section [" + section + "]; valid sections:";
    for (const auto& [name, keys] : schema()) msg += " [" + name + "]";
    throw ConfigError(msg);
  }
  if (section == "parameters") {
    if (!is_identifier(key) || key == "pi" || key == "t")
      throw ConfigError("invalid parameter name '" + key + "'");
    return;
  }
  if (section == "system" && (is_component_key(key, "phi") || is_component_key(key, "psi")))
    return;
  const auto& keys = it->second;
  if (std::find(keys.begin(), keys.end(), key) == keys.end())
    throw ConfigError("unknown key '" + key + "' in [" + section + "]; valid keys: " +
                      valid_keys(section));
}

std::string strip(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string unquote(std::string s) {
  s = strip(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

// Splits at top-level occurrences of `sep` (outside (), []).
std::vector<std::string> split_top(std::string_view s, char sep) {
  std::vector<std::string> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '(' || c == '[') ++depth;
    if (c == ')' || c == ']') --depth;
    if (depth < 0) throw ConfigError("unbalanced brackets in '" + std::string(s) + "'");
    if (c == sep && depth == 0) {
      out.push_back(strip(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  if (depth != 0) throw ConfigError("unbalanced brackets in '" + std::string(s) + "'");
  out.push_back(strip(s.substr(start)));
  return out;
}

// "(a, b)" -> "a, b" when the outer brackets enclose the whole text.
std::string unwrap(std::string s, char open, char close) {
  s = strip(s);
  if (s.size() < 2 || s.front() != open || s.back() != close) return s;
  int depth = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == open) ++depth;
    if (s[i] == close && --depth == 0 && i + 1 != s.size()) return s;
  }
  return s.substr(1, s.size() - 2);
}

Vec to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Vec2 parse_point(std::string_view text) {
  const auto v = parse_list(text);
  if (v.size() != 2) throw ConfigError("expected a planar point (x, y), got '" + std::string(text) + "'");
  return {v[0], v[1]};
}

PlanarRegion parse_factor(const std::string& spec) {
  const auto open = spec.find('(');
  if (open == std::string::npos || spec.back() != ')')
    throw ConfigError("region must be circle(cx, cy, r[, n]) or polygon([(x, y), ...][, n]), got '" +
                      spec + "'");
  const std::string kind = strip(spec.substr(0, open));
  const auto args = split_top(std::string_view(spec).substr(open + 1, spec.size() - open - 2), ',');
  if (kind == "circle") {
    if (args.size() != 3 && args.size() != 4)
      throw ConfigError("circle(cx, cy, r[, n]) takes 3 or 4 arguments");
    const int res = args.size() == 4 ? static_cast<int>(parse_number(args[3])) : 512;
    return PlanarRegion::circle({parse_number(args[0]), parse_number(args[1])},
                                parse_number(args[2]), res);
  }
  if (kind == "polygon") {
    if (args.empty() || args.size() > 2) throw ConfigError("polygon([(x, y), ...][, n]) takes 1 or 2 arguments");
    const std::string inner = unwrap(args[0], '[', ']');
    std::vector<Vec2> vertices;
    for (const auto& p : split_top(inner, ',')) vertices.push_back(parse_point(p));
    const int res = args.size() == 2 ? static_cast<int>(parse_number(args[1])) : 512;
    return PlanarRegion::polygon(std::move(vertices), res);
  }
  throw ConfigError("unknown region kind '" + kind + "' (expected circle or polygon)");
}

template <class T>
T checked_positive(T v, const char* what) {
  if (!(v > 0)) throw ConfigError(std::string(what) + " must be positive");
  return v;
}

}  // namespace

std::string valid_keys(const std::string& section) {
  const auto it = schema().find(section);
  if (it == schema().end()) return {};
  if (section == "parameters") return "any identifier other than t and pi";
  std::string out;
  for (const auto& k : it->second) out += (out.empty() ? "" : ", ") + k;
  return out;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return from_string(buf.str(), path);
}

RunConfig RunConfig::from_string(std::string_view text, const std::string& origin) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(origin + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  RunConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty())
      throw ConfigError(origin + ": key '" + section + "' appears outside any section");
    for (const auto& [key, value] : body) cfg.set(section, key, value.data());
  }
  return cfg;
}

void RunConfig::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string_view::npos || dot == std::string_view::npos || dot > eq)
    throw ConfigError("--set expects section.key=value, got '" + std::string(assignment) + "'");
  set(strip(assignment.substr(0, dot)), strip(assignment.substr(dot + 1, eq - dot - 1)),
      std::string(assignment.substr(eq + 1)));
}

void RunConfig::set(const std::string& section, const std::string& key, std::string value) {
  check_key(section, key);
  sections_[section][key] = unquote(std::move(value));
}

bool RunConfig::has(const std::string& section, const std::string& key) const {
  return text(section, key).has_value();
}

std::optional<std::string> RunConfig::text(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return std::nullopt;
  const auto k = s->second.find(key);
  if (k == s->second.end()) return std::nullopt;
  return k->second;
}

std::string RunConfig::require(const std::string& section, const std::string& key) const {
  if (auto v = text(section, key)) return *v;
  throw ConfigError("missing required key '" + key + "' in [" + section + "]");
}

double RunConfig::number(const std::string& section, const std::string& key, double fallback) const {
  return has(section, key) ? number(section, key) : fallback;
}

double RunConfig::number(const std::string& section, const std::string& key) const {
  try {
    return parse_number(require(section, key));
  } catch (const ConfigError& e) {
    throw ConfigError("[" + section + "] " + key + ": " + e.what());
  }
}

int RunConfig::integer(const std::string& section, const std::string& key, int fallback) const {
  if (!has(section, key)) return fallback;
  const double v = number(section, key);
  if (v != std::floor(v) || std::abs(v) > 1e9)
    throw ConfigError("[" + section + "] " + key + " must be an integer");
  return static_cast<int>(v);
}

bool RunConfig::boolean(const std::string& section, const std::string& key, bool fallback) const {
  const auto v = text(section, key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  throw ConfigError("[" + section + "] " + key + " must be true or false");
}

std::optional<Vec> RunConfig::vector(const std::string& section, const std::string& key) const {
  const auto v = text(section, key);
  if (!v) return std::nullopt;
  try {
    return to_vec(parse_list(*v));
  } catch (const ConfigError& e) {
    throw ConfigError("[" + section + "] " + key + ": " + e.what());
  }
}

std::vector<double> RunConfig::list(const std::string& section, const std::string& key,
                                    std::vector<double> fallback) const {
  const auto v = text(section, key);
  if (!v) return fallback;
  try {
    return parse_list(*v);
  } catch (const ConfigError& e) {
    throw ConfigError("[" + section + "] " + key + ": " + e.what());
  }
}

std::uint64_t RunConfig::seed() const {
  const auto v = text("run", "seed");
  if (!v) return kDefaultSeed;
  std::uint64_t out = 0;
  std::size_t used = 0;
  try {
    out = std::stoull(*v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v->size() || (*v)[0] == '-')
    throw ConfigError("[run] seed must be a non-negative integer");
  return out;
}

std::string RunConfig::canonical() const {
  std::string out;
  for (const auto& [section, body] : sections_)
    for (const auto& [key, value] : body) out += section + "." + key + "=" + value + "\n";
  return out;
}

std::uint64_t RunConfig::hash() const {
  std::uint64_t h = 14695981039346656037ULL;
  for (const unsigned char c : canonical()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

double parse_number(std::string_view text) {
  const std::string s = strip(text);
  if (s.empty()) throw ConfigError("empty number");
  try {
    const expr::Expr e = expr::parse(s, std::set<std::string>{"pi"});
    if (e.state_dimension() > 0 || e.depends_on_time())
      throw ConfigError("'" + s + "' must not depend on t or x");
    const double v = expr::evaluate(e, 0.0, {}, {{"pi", kPi}});
    if (!std::isfinite(v)) throw ConfigError("'" + s + "' is not finite");
    return v;
  } catch (const expr::ParseError& e) {
    throw ConfigError("cannot parse number '" + s + "': " + e.what());
  } catch (const expr::EvalError& e) {
    throw ConfigError("cannot evaluate '" + s + "': " + e.what());
  }
}

std::vector<double> parse_list(std::string_view text) {
  const std::string inner = unwrap(unwrap(std::string(text), '(', ')'), '[', ']');
  std::vector<double> out;
  if (strip(inner).empty()) return out;
  for (const auto& item : split_top(inner, ',')) out.push_back(parse_number(item));
  return out;
}

ProductRegion parse_region(std::string_view shape, std::optional<std::string_view> star_center) {
  std::vector<PlanarRegion> factors;
  for (const auto& f : split_top(shape, ';')) factors.push_back(parse_factor(f));
  if (star_center) {
    const auto centers = split_top(*star_center, ';');
    if (centers.size() != factors.size())
      throw ConfigError("star_center lists " + std::to_string(centers.size()) +
                        " points for " + std::to_string(factors.size()) + " region factors");
    for (std::size_t i = 0; i < factors.size(); ++i)
      factors[i] = factors[i].with_star_center(parse_point(centers[i]));
  }
  return ProductRegion(std::move(factors));
}

expr::ParamMap build_parameters(const RunConfig& cfg) {
  expr::ParamMap params;
  if (const auto b = cfg.text("system", "builtin"))
    if (const BuiltinSpec* spec = find_builtin(*b)) params = spec->parameters;
  if (const auto it = cfg.sections().find("parameters"); it != cfg.sections().end())
    for (const auto& [name, value] : it->second) params[name] = cfg.number("parameters", name);
  return params;
}

SystemDef build_system(const RunConfig& cfg) {
  if (const auto b = cfg.text("system", "builtin")) {
    for (const char* key : {"k", "period"})
      if (cfg.has("system", key))
        throw ConfigError(std::string("[system] ") + key + " cannot be combined with builtin");
    for (const auto& [key, value] : cfg.sections().at("system"))
      if (is_component_key(key, "phi") || is_component_key(key, "psi"))
        throw ConfigError("[system] " + key + " cannot be combined with builtin");
    expr::ParamMap overrides;
    if (const auto it = cfg.sections().find("parameters"); it != cfg.sections().end())
      for (const auto& [name, value] : it->second) overrides[name] = cfg.number("parameters", name);
    try {
      return make_builtin(*b, overrides);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  if (!cfg.has("system", "k"))
    throw ConfigError("[system] needs either builtin or k with phi1..phik and psi1..psik");
  const int k = cfg.integer("system", "k", 0);
  if (k < 1) throw ConfigError("[system] k must be at least 1");
  std::vector<std::string> phi, psi;
  for (int i = 1; i <= k; ++i) {
    phi.push_back(cfg.require("system", "phi" + std::to_string(i)));
    psi.push_back(cfg.require("system", "psi" + std::to_string(i)));
  }
  for (const auto& [key, value] : cfg.sections().at("system"))
    for (const char* p : {"phi", "psi"})
      if (is_component_key(key, p) && std::stoi(key.substr(3)) > k)
        throw ConfigError("[system] " + key + " exceeds k = " + std::to_string(k));
  const double period = checked_positive(cfg.number("system", "period", kTwoPi), "[system] period");
  const expr::ParamMap params = build_parameters(cfg);
  try {
    const auto phi_e = expr::VectorExpr::parse(phi, params);
    const auto psi_e = expr::VectorExpr::parse(psi, params);
    return make_expr_system(cfg.text("system", "name").value_or("custom"), period, phi_e, psi_e);
  } catch (const expr::ParseError& e) {
    throw ConfigError(std::string("[system] ") + e.what() + " (offset " + std::to_string(e.offset()) + ")");
  } catch (const Error& e) {
    throw ConfigError(std::string("[system] ") + e.what());
  }
}

ProductRegion build_region(const RunConfig& cfg, int k) {
  const auto shape = cfg.text("region", "shape");
  if (!shape) throw ConfigError("missing required key 'shape' in [region]");
  ProductRegion region;
  try {
    const auto sc = cfg.text("region", "star_center");
    region = parse_region(*shape, sc ? std::optional<std::string_view>(*sc) : std::nullopt);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("[region] ") + e.what());
  } catch (const Error& e) {
    throw ConfigError(std::string("[region] ") + e.what());
  }
  if (region.dim() != k)
    throw ConfigError("[region] has dimension " + std::to_string(region.dim()) +
                      " but the system has k = " + std::to_string(k));
  return region;
}

IntegratorConfig build_integrator(const RunConfig& cfg) {
  IntegratorConfig c;
  c.rel_tol = cfg.number("tolerances", "rel_tol", c.rel_tol);
  c.abs_tol = cfg.number("tolerances", "abs_tol", c.abs_tol);
  c.max_step = cfg.number("tolerances", "max_step", c.max_step);
  c.max_steps = static_cast<long>(cfg.number("tolerances", "max_steps", static_cast<double>(c.max_steps)));
  try {
    c.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("[tolerances] ") + e.what());
  }
  return c;
}

ConditionTolerances build_tolerances(const RunConfig& cfg) {
  ConditionTolerances t;
  t.a0_tol = checked_positive(cfg.number("tolerances", "a0", t.a0_tol), "[tolerances] a0");
  t.a1_tol = checked_positive(cfg.number("tolerances", "a1", t.a1_tol), "[tolerances] a1");
  t.melnikov_tol = checked_positive(cfg.number("tolerances", "melnikov", t.melnikov_tol),
                                    "[tolerances] melnikov");
  t.floquet.one_tol = checked_positive(cfg.number("tolerances", "one", t.floquet.one_tol),
                                       "[tolerances] one");
  t.floquet.gap_tol = checked_positive(cfg.number("tolerances", "gap", t.floquet.gap_tol),
                                       "[tolerances] gap");
  return t;
}

ConditionGrids build_grids(const RunConfig& cfg) {
  ConditionGrids g;
  g.s_points = checked_positive(cfg.integer("grids", "s_points", g.s_points), "[grids] s_points");
  g.theta_points =
      checked_positive(cfg.integer("grids", "theta_points", g.theta_points), "[grids] theta_points");
  g.boundary_samples = checked_positive(cfg.integer("grids", "boundary_samples", g.boundary_samples),
                                        "[grids] boundary_samples");
  g.quadrature_panels = checked_positive(
      cfg.integer("grids", "quadrature_panels", g.quadrature_panels), "[grids] quadrature_panels");
  return g;
}

WindingOptions build_winding(const RunConfig& cfg) {
  WindingOptions w;
  w.initial_samples = checked_positive(cfg.integer("degree", "initial_samples", w.initial_samples),
                                       "[degree] initial_samples");
  w.max_samples = static_cast<long>(checked_positive(
      cfg.number("degree", "max_samples", static_cast<double>(w.max_samples)), "[degree] max_samples"));
  w.vanish_tol = checked_positive(cfg.number("degree", "vanish_tol", w.vanish_tol), "[degree] vanish_tol");
  w.residue_tol =
      checked_positive(cfg.number("degree", "residue_tol", w.residue_tol), "[degree] residue_tol");
  return w;
}

ShootOptions build_shoot(const RunConfig& cfg) {
  ShootOptions s;
  s.tol = checked_positive(cfg.number("periodic", "tol", s.tol), "[periodic] tol");
  s.max_iterations = checked_positive(cfg.integer("periodic", "max_iterations", s.max_iterations),
                                      "[periodic] max_iterations");
  s.max_halvings = checked_positive(cfg.integer("periodic", "max_halvings", s.max_halvings),
                                    "[periodic] max_halvings");
  s.singular_rcond = checked_positive(cfg.number("periodic", "singular_rcond", s.singular_rcond),
                                      "[periodic] singular_rcond");
  s.reverse_fallback = cfg.boolean("periodic", "reverse_fallback", s.reverse_fallback);
  return s;
}

AveragingOptions build_averaging(const RunConfig& cfg) {
  AveragingOptions a;
  a.n_max = checked_positive(cfg.integer("averaging", "n_max", a.n_max), "[averaging] n_max");
  a.phi_tol = checked_positive(cfg.number("averaging", "phi_tol", a.phi_tol), "[averaging] phi_tol");
  a.samples = checked_positive(cfg.integer("averaging", "samples", a.samples), "[averaging] samples");
  a.seed = cfg.seed();
  return a;
}

ResonanceOptions build_resonance(const RunConfig& cfg) {
  ResonanceOptions r;
  r.a_min = cfg.number("resonance", "a_min", r.a_min);
  r.a_max = cfg.number("resonance", "a_max", r.a_max);
  r.theta_min = cfg.number("resonance", "theta_min", r.theta_min);
  r.theta_max = cfg.number("resonance", "theta_max", r.theta_max);
  if (!(r.a_max > r.a_min) || !(r.theta_max > r.theta_min))
    throw ConfigError("[resonance] ranges must satisfy min < max");
  r.a_points = checked_positive(cfg.integer("resonance", "a_points", r.a_points), "[resonance] a_points");
  r.theta_points = checked_positive(cfg.integer("resonance", "theta_points", r.theta_points),
                                    "[resonance] theta_points");
  r.newton_tol = checked_positive(cfg.number("resonance", "newton_tol", r.newton_tol),
                                  "[resonance] newton_tol");
  r.max_iterations = checked_positive(cfg.integer("resonance", "max_iterations", r.max_iterations),
                                      "[resonance] max_iterations");
  return r;
}

}  // namespace smallpar::cli
