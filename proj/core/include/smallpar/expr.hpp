#pragma once

#include "smallpar/common.hpp"

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace smallpar::expr {

/// Grammar (whitespace-insensitive):
///
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := '-' unary | power
///   power   := primary ('^' unary)?        right-associative
///   primary := number | name | func '(' expr ')' | '(' expr ')'
///
/// Names: `t`, `x1` .. `xk`, or a parameter. Functions: sin cos tan exp log
/// sqrt abs sign. `sign` is not in the user-facing list but is accepted so
/// that printed derivatives of `abs` parse back.
enum class Kind { Const, Time, State, Param, Add, Sub, Mul, Div, Pow, Neg, Func };
enum class Fn { Sin, Cos, Tan, Exp, Log, Sqrt, Abs, Sign };

using ParamMap = std::map<std::string, double, std::less<>>;

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  Kind kind = Kind::Const;
  double value = 0.0;   // Const
  int index = 0;        // State: 0-based component index
  std::string name;     // Param
  Fn fn = Fn::Sin;      // Func
  NodePtr lhs, rhs;     // operands (Neg/Func use lhs only)
  std::size_t pos = 0;  // byte offset in source, 0 for synthesized nodes
};

class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t offset,
             std::vector<std::string> expected)
      : Error(msg), offset_(offset), expected_(std::move(expected)) {}
  std::size_t offset() const { return offset_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

/// Domain error during evaluation (log of non-positive, division by zero,
/// any non-finite intermediate). Carries the offending subexpression.
class EvalError : public Error {
 public:
  EvalError(const std::string& msg, std::string subexpr)
      : Error(msg), subexpr_(std::move(subexpr)) {}
  const std::string& subexpression() const { return subexpr_; }

 private:
  std::string subexpr_;
};

/// Immutable expression handle. Copies share the tree.
class Expr {
 public:
  Expr() : Expr(constant(0.0)) {}
  explicit Expr(NodePtr root) : root_(std::move(root)) {}

  static Expr constant(double v);
  static Expr time();
  static Expr state(int index);  // 0-based
  static Expr param(std::string name);

  const Node& node() const { return *root_; }
  const NodePtr& ptr() const { return root_; }

  bool is_constant() const { return root_->kind == Kind::Const; }
  bool is_constant(double v) const { return is_constant() && root_->value == v; }

  /// Highest referenced state index + 1 (0 when no state appears).
  int state_dimension() const;
  std::set<std::string> parameters() const;
  bool depends_on_time() const;

  std::string str() const;

 private:
  NodePtr root_;
};

/// Differentiation variable.
struct Variable {
  enum class Type { Time, State, Param } type = Type::Time;
  int index = 0;
  std::string name;

  static Variable time() { return {Type::Time, 0, {}}; }
  static Variable state(int i) { return {Type::State, i, {}}; }
  static Variable param(std::string n) { return {Type::Param, 0, std::move(n)}; }
};

/// Parses `src`. When `known_params` is given, any other free name is
/// rejected as an unknown variable.
Expr parse(std::string_view src,
           const std::optional<std::set<std::string>>& known_params = std::nullopt);

/// Minimal-parenthesis printing; parse(print(e)) rebuilds the same tree.
std::string print(const Expr& e);

/// Exact symbolic derivative with constant folding and the identities
/// 0*e = 0, 1*e = e, e+0 = e, e^1 = e, e^0 = 1. d|u|/du is sign(u), which
/// is 0 at u = 0.
Expr differentiate(const Expr& e, const Variable& v);

/// Tree-walking evaluation.
double evaluate(const Expr& e, double t, std::span<const double> x,
                const ParamMap& params = {});

/// Flat stack program with parameters bound at compile time.
class Compiled {
 public:
  Compiled() = default;
  Compiled(const Expr& e, const ParamMap& params);

  double operator()(double t, const double* x) const;
  double operator()(double t, const Vec& x) const { return (*this)(t, x.data()); }
  int state_dimension() const { return state_dim_; }

 private:
  enum class Op : unsigned char { Const, Time, State, Add, Sub, Mul, Div, Pow, Neg, Func };
  struct Instr {
    Op op;
    Fn fn;
    int index;
    double value;
    const Node* src;
  };
  [[noreturn]] void fail(const Instr& ins, const char* what) const;

  std::vector<Instr> code_;
  std::size_t max_depth_ = 0;
  int state_dim_ = 0;
  Expr source_;
};

/// k expressions plus bound parameter values.
class VectorExpr {
 public:
  VectorExpr() = default;
  VectorExpr(std::vector<Expr> components, ParamMap params = {});

  /// Parses each component; parameters must be keys of `params`.
  static VectorExpr parse(const std::vector<std::string>& sources,
                          ParamMap params = {});

  int size() const { return static_cast<int>(components_.size()); }
  const Expr& operator[](int i) const { return components_[i]; }
  const std::vector<Expr>& components() const { return components_; }
  const ParamMap& params() const { return params_; }

  /// Rows: components, columns: d/dx_j for j < k.
  std::vector<std::vector<Expr>> jacobian(int k) const;

  /// Throws Error when a component references x_j with j > k or an unbound
  /// parameter.
  void validate(int k) const;

 private:
  std::vector<Expr> components_;
  ParamMap params_;
};

/// Compiled evaluators for a VectorExpr and its Jacobian.
class CompiledVector {
 public:
  CompiledVector() = default;
  CompiledVector(const VectorExpr& v, int k);

  void eval(double t, const Vec& x, Vec& out) const;
  void jacobian(double t, const Vec& x, Mat& out) const;
  int size() const { return static_cast<int>(comps_.size()); }

 private:
  int k_ = 0;
  std::vector<Compiled> comps_;
  std::vector<Compiled> jac_;  // row-major k x k
};

}  // namespace smallpar::expr
