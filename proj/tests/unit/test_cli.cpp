#include "smallpar/cli/app.hpp"
#include "smallpar/cli/builtins.hpp"
#include "smallpar/cli/config.hpp"
#include "smallpar/cli/output.hpp"

#include "systems.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

using namespace smallpar;
using namespace smallpar::cli;

namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string config(const char* name) { return std::string(SMALLPAR_CONFIG_DIR) + "/" + name; }

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "smallpar-cli-tests";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("registry holds exactly the three examples") {
  const auto reg = builtin_registry();
  REQUIRE(reg.size() == 3);
  CHECK(reg[0].name == "e1-circle");
  CHECK(reg[1].name == "e2-resonance");
  CHECK(reg[2].name == "e3-scalar");
  CHECK(reg[0].k == 2);
  CHECK(reg[2].k == 1);
  CHECK(reg[1].parameters.at("lambda") == 1.0);
  CHECK_THROWS_AS(make_builtin("e2-resonance", {{"mu", 1.0}}), Error);
  CHECK(make_builtin("e2-resonance", {{"lambda", 2.0}}).parameters.at("lambda") == 2.0);
}

TEST_CASE("describe") {
  SUBCASE("e2 is divergence-free and flags its convention") {
    const Outcome o = invoke({"describe", "e2-resonance"});
    CHECK(o.code == 0);
    CHECK(o.out.find("Sp psi' = 0\n") != std::string::npos);
    CHECK(o.out.find("phi2 = (1 - (-x1)^2)*x2 + lambda*cos(t)") != std::string::npos);
    CHECK(o.out.find("convention:") != std::string::npos);
  }
  SUBCASE("e1 prints a divergence equal to 2(1 - r^2) - 2 r^2") {
    const Outcome o = invoke({"describe", "e1-circle"});
    REQUIRE(o.code == 0);
    std::smatch m;
    REQUIRE(std::regex_search(o.out, m, std::regex("Sp psi' = ([^\n]+)")));
    const expr::Expr div = expr::parse(m[1].str());
    for (const auto& [x1, x2] : std::vector<std::pair<double, double>>{{0.3, 0.4}, {1.0, 0.0}, {-0.7, 0.2}}) {
      const double r2 = x1 * x1 + x2 * x2;
      CHECK(expr::evaluate(div, 0.0, std::vector<double>{x1, x2}) ==
            doctest::Approx(2 * (1 - r2) - 2 * r2));
    }
  }
  SUBCASE("unknown name") { CHECK(invoke({"describe", "e9"}).code == 1); }
  SUBCASE("from a config") {
    const Outcome o = invoke({"describe", "--config", config("e3.cfg")});
    CHECK(o.code == 0);
    CHECK(o.out.find("phi1 = -x1 + cos(t)") != std::string::npos);
  }
}

TEST_CASE("check A0 on E1") {
  const Outcome o = invoke({"check", "A0", "--config", config("e1.cfg")});
  CHECK(o.code == 0);
  const auto ls = lines(o.out);
  REQUIRE(ls.size() > 3);
  CHECK(ls.back().rfind("A0 holds (max residual ", 0) == 0);
  CHECK(std::regex_match(ls.front(), std::regex("# smallpar [0-9.]+ config-hash=[0-9a-f]{16} seed=20240601")));
}

TEST_CASE("melnikov CSV has 65 rows at the closed-form value") {
  const fs::path out = scratch("melnikov.csv");
  const Outcome o = invoke({"melnikov", "--config", config("e1.cfg"), "--out", out.string()});
  CHECK(o.code == 0);
  CHECK(o.out.rfind("A3_1 holds", 0) == 0);
  const auto ls = lines(slurp(out));
  std::vector<std::string> data;
  bool header_seen = false;
  for (const auto& l : ls) {
    if (l.rfind("#", 0) == 0) continue;
    if (!header_seen) {
      CHECK(l == "theta,M");
      header_seen = true;
      continue;
    }
    data.push_back(l);
  }
  REQUIRE(data.size() == 65);
  const double oracle = smallpar::testing::melnikov_e1_closed_form();
  for (const auto& row : data) {
    const double m = std::stod(row.substr(row.find(',') + 1));
    CHECK(std::abs(m - oracle) <= 1e-6 * std::abs(oracle));
  }
}

TEST_CASE("configuration errors exit with 1") {
  const Outcome missing = invoke({"check", "A0", "--config", "/nonexistent/e1.cfg"});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("/nonexistent/e1.cfg") != std::string::npos);

  const Outcome bad_key = invoke({"check", "A0", "--config", config("e1.cfg"), "--set", "grids.s_pts=3"});
  CHECK(bad_key.code == 1);
  CHECK(bad_key.err.find("valid keys: s_points, theta_points") != std::string::npos);

  const Outcome bad_section = invoke({"melnikov", "--set", "gridz.x=1"});
  CHECK(bad_section.code == 1);
  CHECK(bad_section.err.find("valid sections") != std::string::npos);

  CHECK(invoke({"check", "A7", "--config", config("e1.cfg")}).code == 1);
  CHECK(invoke({"frobnicate"}).code == 1);
  CHECK(invoke({}).code == 1);
  CHECK(invoke({"check", "A0", "--set", "system.builtin=e1-circle"}).code == 1);  // no region
  CHECK(invoke({"check", "A0", "--config", config("e1.cfg"), "--set", "region.shape=circle(0,0,1); circle(0,0,1)"})
            .code == 1);  // k mismatch
  CHECK(invoke({"--help"}).code == 0);
}

TEST_CASE("identical config and seed give byte-identical CSV") {
  const fs::path a = scratch("a.csv"), b = scratch("b.csv"), c = scratch("c.csv");
  const std::vector<std::string> base{"resonance", "--config", config("e2.cfg"), "--out"};
  auto with = [&](const fs::path& p, std::vector<std::string> extra = {}) {
    auto args = base;
    args.push_back(p.string());
    args.insert(args.end(), extra.begin(), extra.end());
    return invoke(args);
  };
  CHECK(with(a).code == 0);
  CHECK(with(b, {"--threads", "1"}).code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(with(c, {"--seed", "7"}).code == 0);
  const std::string sc = slurp(c);
  CHECK(sc != slurp(a));
  CHECK(lines(sc).front().find("seed=7") != std::string::npos);
}

TEST_CASE("SVG output is well-formed with one polyline per series") {
  const fs::path svg = scratch("cauchy.svg");
  const Outcome o = invoke({"verify-cauchy", "--config", config("e3.cfg"), "--plot", svg.string(), "--out",
                            scratch("cauchy.csv").string()});
  CHECK(o.code == 0);
  boost::property_tree::ptree tree;
  REQUIRE_NOTHROW(boost::property_tree::read_xml(svg.string(), tree));
  int polylines = 0;
  for (const auto& [name, child] : tree.get_child("svg"))
    if (name == "polyline") ++polylines;
  CHECK(polylines == 2);  // one per eps
}

TEST_CASE("average exit codes") {
  CHECK(invoke({"average", "--config", config("e3.cfg")}).code == 0);
  const Outcome e1 = invoke({"average", "--config", config("e1.cfg"), "--set", "averaging.n_max=8",
                             "--set", "averaging.samples=2", "--set", "averaging.center=(0.5, 0)"});
  CHECK(e1.code == 2);
  CHECK(e1.out.find("warning: the change of variable") != std::string::npos);
}

TEST_CASE("numbers, lists and regions") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(-2.5e-300) == "-2.5e-300");
  CHECK(format_number(1.0) == "1");
  CHECK(format_number(std::nan("")) == "nan");
  for (double v : {kPi, 1.0 / 3.0, 6.02214076e23, -1e-17})
    CHECK(std::stod(format_number(v)) == v);

  CHECK(parse_number("2*pi") == kTwoPi);
  CHECK(parse_list("(1, -2.5, pi/2)") == std::vector<double>{1.0, -2.5, kPi / 2});
  CHECK(parse_list("[cos(0), 2]") == std::vector<double>{1.0, 2.0});
  CHECK_THROWS_AS(parse_number("x1 + 1"), ConfigError);
  CHECK_THROWS_AS(parse_number("1 +"), ConfigError);

  const ProductRegion poly = parse_region("polygon([(0, 0), (2, 0), (2, 2), (0, 2)], 64)", std::string_view("(1, 1)"));
  REQUIRE(poly.planar());
  CHECK(poly.factors[0].area() == doctest::Approx(4.0));
  CHECK(poly.factors[0].star_center().has_value());
  const ProductRegion prod = parse_region("circle(0, 0, 1); circle(1, 1, 0.5, 64)", std::nullopt);
  CHECK(prod.dim() == 4);
  CHECK_THROWS_AS(parse_region("square(0, 0, 1)", std::nullopt), ConfigError);
  CHECK_THROWS_AS(parse_region("circle(0, 0)", std::nullopt), ConfigError);
  CHECK_THROWS_AS(parse_region("circle(0, 0, 1)", std::string_view("(0, 0); (1, 1)")), ConfigError);
}

TEST_CASE("inline systems from the config text") {
  RunConfig cfg = RunConfig::from_string(R"ini(
[system]
name = scalar
k = 1
period = 2*pi
phi1 = "mu*cos(t)"
psi1 = "-x1"

[parameters]
mu = 0.5
)ini");
  const SystemDef sys = build_system(cfg);
  CHECK(sys.k == 1);
  CHECK(sys.name == "scalar");
  CHECK(sys.eval_phi(0.0, Vec::Zero(1))[0] == 0.5);
  cfg.apply_override("parameters.mu=2");
  CHECK(build_system(cfg).eval_phi(0.0, Vec::Zero(1))[0] == 2.0);

  RunConfig undefined = RunConfig::from_string("[system]\nk = 1\nphi1 = \"nu*x1\"\npsi1 = \"0\"\n");
  CHECK_THROWS_AS(build_system(undefined), ConfigError);
  RunConfig both = RunConfig::from_string("[system]\nbuiltin = e1-circle\nk = 2\n");
  CHECK_THROWS_AS(build_system(both), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_string("[system]\nphi0 = 1\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_string("[run]\nseed = 1\nseed = 2\n"), ConfigError);
  CHECK(RunConfig::from_string("[run]\nseed = 5\n").seed() == 5);
  CHECK(RunConfig{}.seed() == kDefaultSeed);
  RunConfig a = RunConfig::from_string("[run]\nseed = 5\n"), b = a;
  CHECK(a.hash() == b.hash());
  b.apply_override("run.threads=2");
  CHECK(a.hash() != b.hash());
}

TEST_CASE("find-periodic and sweep on the examples") {
  const Outcome e2 = invoke({"find-periodic", "--config", config("e2.cfg")});
  CHECK(e2.code == 0);
  CHECK(e2.out.find("in X") != std::string::npos);
  const Outcome e3 = invoke({"find-periodic", "--config", config("e3.cfg")});
  CHECK(e3.code == 0);
}
