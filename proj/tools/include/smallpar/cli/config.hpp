#pragma once

#include "smallpar/averaging.hpp"
#include "smallpar/conditions.hpp"
#include "smallpar/ode.hpp"
#include "smallpar/periodic.hpp"
#include "smallpar/system.hpp"
#include "smallpar/topology.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace smallpar::cli {

/// Bad configuration or command line; maps to exit code 1.
class ConfigError : public Error {
 public:
  using Error::Error;
};

inline constexpr std::uint64_t kDefaultSeed = 20240601;

/// Sectioned key-value configuration.
///
///   [system]      builtin | name, k, period, phi1..phik, psi1..psik
///   [parameters]  any identifier = number
///   [region]      shape, star_center
///   [grids]       s_points, theta_points, boundary_samples, ...
///   [tolerances]  rel_tol, abs_tol, ..., a0, a1, melnikov, one, gap
///   [cycle]       start
///   [periodic] [averaging] [resonance] [degree] [run]
///
/// Values may be double-quoted. Numbers are expressions in `pi`, vectors are
/// comma separated and optionally parenthesized, product regions separate
/// factors with ';'.
class RunConfig {
 public:
  using Section = std::map<std::string, std::string>;

  static RunConfig from_file(const std::string& path);
  static RunConfig from_string(std::string_view text, const std::string& origin = "<string>");

  /// "section.key=value".
  void apply_override(std::string_view assignment);
  void set(const std::string& section, const std::string& key, std::string value);

  bool has(const std::string& section, const std::string& key) const;
  std::optional<std::string> text(const std::string& section, const std::string& key) const;
  std::string require(const std::string& section, const std::string& key) const;

  double number(const std::string& section, const std::string& key, double fallback) const;
  double number(const std::string& section, const std::string& key) const;
  int integer(const std::string& section, const std::string& key, int fallback) const;
  bool boolean(const std::string& section, const std::string& key, bool fallback) const;
  std::optional<Vec> vector(const std::string& section, const std::string& key) const;
  std::vector<double> list(const std::string& section, const std::string& key,
                           std::vector<double> fallback = {}) const;

  std::uint64_t seed() const;
  /// Sorted "section.key=value" lines.
  std::string canonical() const;
  /// FNV-1a 64 of canonical().
  std::uint64_t hash() const;

  const std::map<std::string, Section>& sections() const { return sections_; }

 private:
  std::map<std::string, Section> sections_;
};

/// Comma-separated schema keys of a section ("any" for [parameters]).
std::string valid_keys(const std::string& section);

double parse_number(std::string_view text);
/// "(a, b, ...)" or "a, b, ...": top-level commas only.
std::vector<double> parse_list(std::string_view text);
/// "circle(cx, cy, r[, n])" or "polygon([(x, y), ...][, n])", factors
/// separated by ';'. `star_center` lists one point per factor.
ProductRegion parse_region(std::string_view shape, std::optional<std::string_view> star_center);

SystemDef build_system(const RunConfig& cfg);
ProductRegion build_region(const RunConfig& cfg, int k);
IntegratorConfig build_integrator(const RunConfig& cfg);
ConditionTolerances build_tolerances(const RunConfig& cfg);
ConditionGrids build_grids(const RunConfig& cfg);
WindingOptions build_winding(const RunConfig& cfg);
ShootOptions build_shoot(const RunConfig& cfg);
AveragingOptions build_averaging(const RunConfig& cfg);
ResonanceOptions build_resonance(const RunConfig& cfg);
/// Declared parameters merged over the built-in defaults.
expr::ParamMap build_parameters(const RunConfig& cfg);

}  // namespace smallpar::cli
