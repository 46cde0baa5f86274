#pragma once

#include "smallpar/expr.hpp"
#include "smallpar/system.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace smallpar::cli {

struct BuiltinSpec {
  std::string name;
  std::string summary;
  double period = kTwoPi;
  std::vector<std::string> phi;
  std::vector<std::string> psi;
  expr::ParamMap parameters;
  /// Coordinate convention notes printed by `describe`.
  std::string notes;
};

const std::vector<BuiltinSpec>& builtin_specs();
const BuiltinSpec* find_builtin(std::string_view name);

/// Builds a registry system; `overrides` replaces default parameter values
/// and must only name declared parameters.
SystemDef make_builtin(std::string_view name, const expr::ParamMap& overrides = {});

/// e1-circle, e2-resonance, e3-scalar.
std::vector<SystemDef> builtin_registry();

}  // namespace smallpar::cli
