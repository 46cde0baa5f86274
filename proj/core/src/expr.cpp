#include "smallpar/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <functional>
#include <sstream>

namespace smallpar::expr {

namespace {

struct FnInfo {
  std::string_view name;
  Fn fn;
};

constexpr std::array<FnInfo, 8> kFunctions{{{"sin", Fn::Sin},
                                            {"cos", Fn::Cos},
                                            {"tan", Fn::Tan},
                                            {"exp", Fn::Exp},
                                            {"log", Fn::Log},
                                            {"sqrt", Fn::Sqrt},
                                            {"abs", Fn::Abs},
                                            {"sign", Fn::Sign}}};

std::string_view fn_name(Fn f) {
  for (const auto& info : kFunctions)
    if (info.fn == f) return info.name;
  return "?";
}

std::optional<Fn> lookup_fn(std::string_view name) {
  for (const auto& info : kFunctions)
    if (info.name == name) return info.fn;
  return std::nullopt;
}

NodePtr make(Kind k, NodePtr l = nullptr, NodePtr r = nullptr, std::size_t pos = 0) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->lhs = std::move(l);
  n->rhs = std::move(r);
  n->pos = pos;
  return n;
}

NodePtr make_const(double v, std::size_t pos = 0) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Const;
  n->value = v;
  n->pos = pos;
  return n;
}

NodePtr make_func(Fn f, NodePtr arg, std::size_t pos = 0) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Func;
  n->fn = f;
  n->lhs = std::move(arg);
  n->pos = pos;
  return n;
}

double apply_fn(Fn f, double a) {
  switch (f) {
    case Fn::Sin: return std::sin(a);
    case Fn::Cos: return std::cos(a);
    case Fn::Tan: return std::tan(a);
    case Fn::Exp: return std::exp(a);
    case Fn::Log: return std::log(a);
    case Fn::Sqrt: return std::sqrt(a);
    case Fn::Abs: return std::abs(a);
    case Fn::Sign: return a > 0 ? 1.0 : (a < 0 ? -1.0 : 0.0);
  }
  return 0.0;
}

// Returns nullptr when the function is defined at `a`, else a reason.
const char* fn_domain_error(Fn f, double a) {
  if (f == Fn::Log && !(a > 0)) return "log of non-positive value";
  if (f == Fn::Sqrt && a < 0) return "sqrt of negative value";
  return nullptr;
}

// ---------------------------------------------------------------- parsing

class Parser {
 public:
  Parser(std::string_view src, const std::optional<std::set<std::string>>& known)
      : src_(src), known_(known) {}

  NodePtr run() {
    skip_ws();
    if (pos_ >= src_.size()) fail("empty expression", {"number", "name", "(", "-"});
    NodePtr e = parse_expr();
    skip_ws();
    if (pos_ < src_.size()) fail("unexpected character", {"operator", "end of input"});
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what, std::vector<std::string> expected,
                         std::optional<std::size_t> at = std::nullopt) {
    const std::size_t off = at.value_or(pos_);
    std::ostringstream os;
    os << "syntax error at offset " << off << ": " << what;
    if (!expected.empty()) {
      os << ", expected ";
      for (std::size_t i = 0; i < expected.size(); ++i)
        os << (i ? " or " : "") << '"' << expected[i] << '"';
    }
    throw ParseError(os.str(), off, std::move(expected));
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    while (true) {
      const char c = peek();
      if (c != '+' && c != '-') return lhs;
      const std::size_t at = pos_++;
      NodePtr rhs = parse_term();
      lhs = make(c == '+' ? Kind::Add : Kind::Sub, lhs, rhs, at);
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    while (true) {
      const char c = peek();
      if (c != '*' && c != '/') return lhs;
      const std::size_t at = pos_++;
      NodePtr rhs = parse_unary();
      lhs = make(c == '*' ? Kind::Mul : Kind::Div, lhs, rhs, at);
    }
  }

  NodePtr parse_unary() {
    if (peek() == '-') {
      const std::size_t at = pos_++;
      return make(Kind::Neg, parse_unary(), nullptr, at);
    }
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (peek() == '^') {
      const std::size_t at = pos_++;
      NodePtr exponent = parse_unary();
      return make(Kind::Pow, base, exponent, at);
    }
    return base;
  }

  NodePtr parse_primary() {
    const char c = peek();
    const std::size_t start = pos_;
    if (c == '(') {
      ++pos_;
      NodePtr inner = parse_expr();
      if (!accept(')')) fail("unbalanced parenthesis", {")"});
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
      const std::string_view name = src_.substr(start, pos_ - start);
      if (peek() == '(') {
        const auto fn = lookup_fn(name);
        if (!fn) fail("unknown function '" + std::string(name) + "'", {}, start);
        ++pos_;
        NodePtr arg = parse_expr();
        if (!accept(')')) fail("unbalanced parenthesis", {")"});
        return make_func(*fn, arg, start);
      }
      if (lookup_fn(name)) fail("function '" + std::string(name) + "' needs an argument", {"("});
      return make_name(name, start);
    }
    if (c == '\0') fail("unexpected end of input", {"number", "name", "("});
    fail(std::string("unexpected character '") + c + "'", {"number", "name", "("});
  }

  NodePtr make_name(std::string_view name, std::size_t start) {
    if (name == "t") {
      auto n = make(Kind::Time, nullptr, nullptr, start);
      return n;
    }
    if (name.size() >= 2 && name[0] == 'x' &&
        std::all_of(name.begin() + 1, name.end(),
                    [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
      int idx = 0;
      std::from_chars(name.data() + 1, name.data() + name.size(), idx);
      if (idx < 1) fail("state variables are numbered from x1", {}, start);
      auto n = std::make_shared<Node>();
      n->kind = Kind::State;
      n->index = idx - 1;
      n->pos = start;
      return n;
    }
    if (known_ && !known_->count(std::string(name)))
      fail("unknown variable '" + std::string(name) + "'", {}, start);
    auto n = std::make_shared<Node>();
    n->kind = Kind::Param;
    n->name = std::string(name);
    n->pos = start;
    return n;
  }

  NodePtr parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    };
    digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
        digits();
      else
        pos_ = save;
    }
    double v = 0.0;
    const auto res = std::from_chars(src_.data() + start, src_.data() + pos_, v);
    if (res.ec != std::errc() || res.ptr != src_.data() + pos_)
      fail("malformed number", {"number"}, start);
    return make_const(v, start);
  }

  std::string_view src_;
  const std::optional<std::set<std::string>>& known_;
  std::size_t pos_ = 0;
};

// --------------------------------------------------------------- printing

int precedence(const Node& n) {
  switch (n.kind) {
    case Kind::Add:
    case Kind::Sub: return 1;
    case Kind::Mul:
    case Kind::Div: return 2;
    case Kind::Neg: return 3;
    case Kind::Pow: return 4;
    case Kind::Const: return n.value < 0 || std::signbit(n.value) ? 3 : 5;
    default: return 5;
  }
}

std::string format_number(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

void print_node(const Node& n, std::string& out);

// Right operands get parentheses at equal or lower precedence (keeps the
// tree shape) and when negated (readability: "a - (-b)").
bool rhs_needs_parens(int op_prec, const Node& rhs) {
  const int p = precedence(rhs);
  return p <= op_prec || p == 3;
}

void print_wrapped(const Node& n, bool parens, std::string& out) {
  if (parens) out += '(';
  print_node(n, out);
  if (parens) out += ')';
}

void print_node(const Node& n, std::string& out) {
  switch (n.kind) {
    case Kind::Const:
      if (std::signbit(n.value)) {
        out += '-';
        out += format_number(-n.value);
      } else {
        out += format_number(n.value);
      }
      return;
    case Kind::Time: out += 't'; return;
    case Kind::State:
      out += 'x';
      out += std::to_string(n.index + 1);
      return;
    case Kind::Param: out += n.name; return;
    case Kind::Add:
    case Kind::Sub:
      print_wrapped(*n.lhs, precedence(*n.lhs) < 1, out);
      out += n.kind == Kind::Add ? " + " : " - ";
      print_wrapped(*n.rhs, rhs_needs_parens(1, *n.rhs), out);
      return;
    case Kind::Mul:
    case Kind::Div:
      print_wrapped(*n.lhs, precedence(*n.lhs) < 2, out);
      out += n.kind == Kind::Mul ? '*' : '/';
      print_wrapped(*n.rhs, rhs_needs_parens(2, *n.rhs), out);
      return;
    case Kind::Neg:
      out += '-';
      print_wrapped(*n.lhs, precedence(*n.lhs) < 4, out);
      return;
    case Kind::Pow:
      print_wrapped(*n.lhs, precedence(*n.lhs) < 5, out);
      out += '^';
      print_wrapped(*n.rhs, precedence(*n.rhs) <= 3, out);
      return;
    case Kind::Func:
      out += fn_name(n.fn);
      out += '(';
      print_node(*n.lhs, out);
      out += ')';
      return;
  }
}

std::string node_str(const Node& n) {
  std::string s;
  print_node(n, s);
  return s;
}

// ---------------------------------------------------------- simplification

bool is_const(const NodePtr& n, double v) { return n->kind == Kind::Const && n->value == v; }
bool is_const(const NodePtr& n) { return n->kind == Kind::Const; }

NodePtr fold_or(double v, NodePtr fallback) {
  return std::isfinite(v) ? make_const(v == 0.0 ? 0.0 : v) : std::move(fallback);
}

NodePtr mk_neg(NodePtr a) {
  if (is_const(a)) return fold_or(-a->value, make(Kind::Neg, a));
  if (a->kind == Kind::Neg) return a->lhs;
  return make(Kind::Neg, a);
}

NodePtr mk_add(NodePtr a, NodePtr b) {
  if (is_const(a) && is_const(b)) return fold_or(a->value + b->value, make(Kind::Add, a, b));
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  return make(Kind::Add, a, b);
}

NodePtr mk_sub(NodePtr a, NodePtr b) {
  if (is_const(a) && is_const(b)) return fold_or(a->value - b->value, make(Kind::Sub, a, b));
  if (is_const(b, 0.0)) return a;
  if (is_const(a, 0.0)) return mk_neg(b);
  return make(Kind::Sub, a, b);
}

NodePtr mk_mul(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0);
  if (is_const(a) && is_const(b)) return fold_or(a->value * b->value, make(Kind::Mul, a, b));
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  if (is_const(a, -1.0)) return mk_neg(b);
  if (is_const(b, -1.0)) return mk_neg(a);
  return make(Kind::Mul, a, b);
}

NodePtr mk_div(NodePtr a, NodePtr b) {
  if (is_const(b, 1.0)) return a;
  if (is_const(a, 0.0) && !is_const(b, 0.0)) return make_const(0.0);
  if (is_const(a) && is_const(b) && b->value != 0.0)
    return fold_or(a->value / b->value, make(Kind::Div, a, b));
  return make(Kind::Div, a, b);
}

NodePtr mk_pow(NodePtr a, NodePtr b) {
  if (is_const(b, 1.0)) return a;
  if (is_const(b, 0.0)) return make_const(1.0);
  if (is_const(a) && is_const(b)) return fold_or(std::pow(a->value, b->value), make(Kind::Pow, a, b));
  return make(Kind::Pow, a, b);
}

NodePtr mk_fn(Fn f, NodePtr a) {
  if (is_const(a) && !fn_domain_error(f, a->value))
    return fold_or(apply_fn(f, a->value), make_func(f, a));
  return make_func(f, a);
}

NodePtr derive(const NodePtr& n, const Variable& v) {
  switch (n->kind) {
    case Kind::Const: return make_const(0.0);
    case Kind::Time: return make_const(v.type == Variable::Type::Time ? 1.0 : 0.0);
    case Kind::State:
      return make_const(v.type == Variable::Type::State && v.index == n->index ? 1.0 : 0.0);
    case Kind::Param:
      return make_const(v.type == Variable::Type::Param && v.name == n->name ? 1.0 : 0.0);
    case Kind::Add: return mk_add(derive(n->lhs, v), derive(n->rhs, v));
    case Kind::Sub: return mk_sub(derive(n->lhs, v), derive(n->rhs, v));
    case Kind::Mul:
      return mk_add(mk_mul(derive(n->lhs, v), n->rhs), mk_mul(n->lhs, derive(n->rhs, v)));
    case Kind::Div: {
      NodePtr dl = derive(n->lhs, v), dr = derive(n->rhs, v);
      if (is_const(dr, 0.0)) return mk_div(dl, n->rhs);
      return mk_div(mk_sub(mk_mul(dl, n->rhs), mk_mul(n->lhs, dr)),
                    mk_pow(n->rhs, make_const(2.0)));
    }
    case Kind::Neg: return mk_neg(derive(n->lhs, v));
    case Kind::Pow: {
      NodePtr du = derive(n->lhs, v), dv = derive(n->rhs, v);
      if (is_const(dv, 0.0)) {
        return mk_mul(mk_mul(n->rhs, mk_pow(n->lhs, mk_sub(n->rhs, make_const(1.0)))), du);
      }
      NodePtr inner = mk_add(mk_mul(dv, mk_fn(Fn::Log, n->lhs)),
                             mk_div(mk_mul(n->rhs, du), n->lhs));
      return mk_mul(n, inner);
    }
    case Kind::Func: {
      const NodePtr& u = n->lhs;
      NodePtr du = derive(u, v);
      if (is_const(du, 0.0)) return make_const(0.0);
      switch (n->fn) {
        case Fn::Sin: return mk_mul(mk_fn(Fn::Cos, u), du);
        case Fn::Cos: return mk_neg(mk_mul(mk_fn(Fn::Sin, u), du));
        case Fn::Tan: return mk_div(du, mk_pow(mk_fn(Fn::Cos, u), make_const(2.0)));
        case Fn::Exp: return mk_mul(n, du);
        case Fn::Log: return mk_div(du, u);
        case Fn::Sqrt: return mk_div(du, mk_mul(make_const(2.0), n));
        case Fn::Abs: return mk_mul(mk_fn(Fn::Sign, u), du);
        case Fn::Sign: return make_const(0.0);
      }
    }
  }
  return make_const(0.0);
}

// --------------------------------------------------------------- evaluation

[[noreturn]] void eval_fail(const Node& n, const char* what) {
  const std::string sub = node_str(n);
  throw EvalError(std::string("evaluation error: ") + what + " in '" + sub + "'", sub);
}

double check(const Node& n, double v) {
  if (!std::isfinite(v)) eval_fail(n, "non-finite result");
  return v;
}

double eval_node(const Node& n, double t, std::span<const double> x, const ParamMap& p) {
  switch (n.kind) {
    case Kind::Const: return n.value;
    case Kind::Time: return t;
    case Kind::State:
      if (static_cast<std::size_t>(n.index) >= x.size()) eval_fail(n, "state index out of range");
      return x[n.index];
    case Kind::Param: {
      auto it = p.find(n.name);
      if (it == p.end()) eval_fail(n, "unbound parameter");
      return it->second;
    }
    case Kind::Add: return check(n, eval_node(*n.lhs, t, x, p) + eval_node(*n.rhs, t, x, p));
    case Kind::Sub: return check(n, eval_node(*n.lhs, t, x, p) - eval_node(*n.rhs, t, x, p));
    case Kind::Mul: return check(n, eval_node(*n.lhs, t, x, p) * eval_node(*n.rhs, t, x, p));
    case Kind::Div: {
      const double a = eval_node(*n.lhs, t, x, p), b = eval_node(*n.rhs, t, x, p);
      if (b == 0.0) eval_fail(n, "division by zero");
      return check(n, a / b);
    }
    case Kind::Pow:
      return check(n, std::pow(eval_node(*n.lhs, t, x, p), eval_node(*n.rhs, t, x, p)));
    case Kind::Neg: return -eval_node(*n.lhs, t, x, p);
    case Kind::Func: {
      const double a = eval_node(*n.lhs, t, x, p);
      if (const char* why = fn_domain_error(n.fn, a)) eval_fail(n, why);
      return check(n, apply_fn(n.fn, a));
    }
  }
  return 0.0;
}

void walk(const Node& n, const std::function<void(const Node&)>& f) {
  f(n);
  if (n.lhs) walk(*n.lhs, f);
  if (n.rhs) walk(*n.rhs, f);
}

}  // namespace

// ------------------------------------------------------------------- Expr

Expr Expr::constant(double v) { return Expr(make_const(v)); }
Expr Expr::time() { return Expr(make(Kind::Time)); }
Expr Expr::state(int index) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::State;
  n->index = index;
  return Expr(n);
}
Expr Expr::param(std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Param;
  n->name = std::move(name);
  return Expr(n);
}

int Expr::state_dimension() const {
  int dim = 0;
  walk(*root_, [&](const Node& n) {
    if (n.kind == Kind::State) dim = std::max(dim, n.index + 1);
  });
  return dim;
}

std::set<std::string> Expr::parameters() const {
  std::set<std::string> out;
  walk(*root_, [&](const Node& n) {
    if (n.kind == Kind::Param) out.insert(n.name);
  });
  return out;
}

bool Expr::depends_on_time() const {
  bool dep = false;
  walk(*root_, [&](const Node& n) { dep = dep || n.kind == Kind::Time; });
  return dep;
}

std::string Expr::str() const { return print(*this); }

Expr parse(std::string_view src, const std::optional<std::set<std::string>>& known_params) {
  return Expr(Parser(src, known_params).run());
}

std::string print(const Expr& e) { return node_str(e.node()); }

Expr differentiate(const Expr& e, const Variable& v) { return Expr(derive(e.ptr(), v)); }

double evaluate(const Expr& e, double t, std::span<const double> x, const ParamMap& params) {
  return eval_node(e.node(), t, x, params);
}

// --------------------------------------------------------------- Compiled

Compiled::Compiled(const Expr& e, const ParamMap& params) : source_(e) {
  std::size_t depth = 0;
  std::function<void(const Node&)> emit = [&](const Node& n) {
    auto push = [&](Instr ins) {
      code_.push_back(ins);
      if (ins.op == Op::Const || ins.op == Op::Time || ins.op == Op::State) {
        max_depth_ = std::max(max_depth_, ++depth);
      } else if (ins.op != Op::Neg && ins.op != Op::Func) {
        --depth;
      }
    };
    switch (n.kind) {
      case Kind::Const: push({Op::Const, Fn::Sin, 0, n.value, &n}); return;
      case Kind::Time: push({Op::Time, Fn::Sin, 0, 0.0, &n}); return;
      case Kind::State:
        state_dim_ = std::max(state_dim_, n.index + 1);
        push({Op::State, Fn::Sin, n.index, 0.0, &n});
        return;
      case Kind::Param: {
        auto it = params.find(n.name);
        if (it == params.end())
          throw Error("expression references unbound parameter '" + n.name + "'");
        push({Op::Const, Fn::Sin, 0, it->second, &n});
        return;
      }
      case Kind::Neg:
        emit(*n.lhs);
        push({Op::Neg, Fn::Sin, 0, 0.0, &n});
        return;
      case Kind::Func:
        emit(*n.lhs);
        push({Op::Func, n.fn, 0, 0.0, &n});
        return;
      default: break;
    }
    emit(*n.lhs);
    emit(*n.rhs);
    Op op = Op::Add;
    switch (n.kind) {
      case Kind::Add: op = Op::Add; break;
      case Kind::Sub: op = Op::Sub; break;
      case Kind::Mul: op = Op::Mul; break;
      case Kind::Div: op = Op::Div; break;
      case Kind::Pow: op = Op::Pow; break;
      default: break;
    }
    push({op, Fn::Sin, 0, 0.0, &n});
  };
  emit(e.node());
}

void Compiled::fail(const Instr& ins, const char* what) const { eval_fail(*ins.src, what); }

double Compiled::operator()(double t, const double* x) const {
  std::array<double, 64> small{};
  std::vector<double> big;
  double* st = small.data();
  if (max_depth_ > small.size()) {
    big.resize(max_depth_);
    st = big.data();
  }
  std::size_t sp = 0;
  for (const Instr& ins : code_) {
    switch (ins.op) {
      case Op::Const: st[sp++] = ins.value; break;
      case Op::Time: st[sp++] = t; break;
      case Op::State: st[sp++] = x[ins.index]; break;
      case Op::Neg: st[sp - 1] = -st[sp - 1]; break;
      case Op::Func: {
        const double a = st[sp - 1];
        if (const char* why = fn_domain_error(ins.fn, a)) fail(ins, why);
        const double r = apply_fn(ins.fn, a);
        if (!std::isfinite(r)) fail(ins, "non-finite result");
        st[sp - 1] = r;
        break;
      }
      default: {
        const double b = st[--sp];
        const double a = st[sp - 1];
        double r = 0.0;
        switch (ins.op) {
          case Op::Add: r = a + b; break;
          case Op::Sub: r = a - b; break;
          case Op::Mul: r = a * b; break;
          case Op::Div:
            if (b == 0.0) fail(ins, "division by zero");
            r = a / b;
            break;
          case Op::Pow: r = std::pow(a, b); break;
          default: break;
        }
        if (!std::isfinite(r)) fail(ins, "non-finite result");
        st[sp - 1] = r;
      }
    }
  }
  return st[0];
}

// ------------------------------------------------------------- VectorExpr

VectorExpr::VectorExpr(std::vector<Expr> components, ParamMap params)
    : components_(std::move(components)), params_(std::move(params)) {}

VectorExpr VectorExpr::parse(const std::vector<std::string>& sources, ParamMap params) {
  std::set<std::string> known;
  for (const auto& [name, value] : params) known.insert(name);
  std::vector<Expr> comps;
  comps.reserve(sources.size());
  for (const auto& s : sources) comps.push_back(expr::parse(s, known));
  return VectorExpr(std::move(comps), std::move(params));
}

std::vector<std::vector<Expr>> VectorExpr::jacobian(int k) const {
  std::vector<std::vector<Expr>> jac(components_.size());
  for (std::size_t i = 0; i < components_.size(); ++i)
    for (int j = 0; j < k; ++j) jac[i].push_back(differentiate(components_[i], Variable::state(j)));
  return jac;
}

void VectorExpr::validate(int k) const {
  if (size() != k)
    throw Error("vector expression has " + std::to_string(size()) + " components, expected " +
                std::to_string(k));
  for (const auto& c : components_) {
    if (c.state_dimension() > k)
      throw Error("expression '" + c.str() + "' references x" +
                  std::to_string(c.state_dimension()) + " but the phase dimension is " +
                  std::to_string(k));
    for (const auto& p : c.parameters())
      if (!params_.count(p)) throw Error("expression '" + c.str() + "' uses undefined parameter '" + p + "'");
  }
}

CompiledVector::CompiledVector(const VectorExpr& v, int k) : k_(k) {
  v.validate(k);
  for (const auto& c : v.components()) comps_.emplace_back(c, v.params());
  for (const auto& row : v.jacobian(k))
    for (const auto& d : row) jac_.emplace_back(d, v.params());
}

void CompiledVector::eval(double t, const Vec& x, Vec& out) const {
  out.resize(k_);
  for (int i = 0; i < k_; ++i) out[i] = comps_[i](t, x.data());
}

void CompiledVector::jacobian(double t, const Vec& x, Mat& out) const {
  out.resize(k_, k_);
  for (int i = 0; i < k_; ++i)
    for (int j = 0; j < k_; ++j) out(i, j) = jac_[i * k_ + j](t, x.data());
}

}  // namespace smallpar::expr
