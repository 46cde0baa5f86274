#include "smallpar/cli/app.hpp"

#include "smallpar/cli/builtins.hpp"
#include "smallpar/cli/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>

namespace smallpar::cli {

const char* version() { return SMALLPAR_VERSION; }

namespace {

struct Options {
  std::string config;
  std::vector<std::string> sets;
  std::string out;
  std::string plot;
  unsigned threads = 0;
  std::optional<std::uint64_t> seed;
  std::string condition;
  std::string builtin;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "configuration file (INI-style sections)");
  sub->add_option("--set", o.sets, "override a config entry, section.key=value (repeatable)")
      ->allow_extra_args(false);
  sub->add_option("--out", o.out, "write the CSV here instead of standard output");
  sub->add_option("--plot", o.plot, "write an SVG plot");
  sub->add_option("--threads", o.threads, "cap on worker threads (0 = hardware)");
  sub->add_option("--seed", o.seed, "random seed (overrides [run] seed)");
}

RunConfig load(const Options& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : RunConfig::from_file(o.config);
  for (const auto& s : o.sets) cfg.apply_override(s);
  if (o.seed) cfg.set("run", "seed", std::to_string(*o.seed));
  return cfg;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << text)) throw ConfigError("cannot write '" + path + "'");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"smallpar: periodic solutions of x' = eps*phi(t, x) + psi(t, x) for small eps"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1, 1);
  Options o;

  auto* describe = app.add_subcommand("describe", "print a system: fields, Jacobian, divergence");
  describe->add_option("name", o.builtin, "built-in system (otherwise the config's [system])");
  add_common(describe, o);
  auto* check = app.add_subcommand("check", "check one hypothesis: A0, A1, A2 or A3");
  check->add_option("condition", o.condition)->required()->check(CLI::IsMember({"A0", "A1", "A2", "A3"}));
  add_common(check, o);
  const std::vector<std::pair<const char*, const char*>> simple = {
      {"melnikov", "Melnikov integral M(theta) along the cycle"},
      {"degree", "winding number of a planar field or of the period defect"},
      {"resonance", "zeros of the resonance map H(a, theta) and their box degrees"},
      {"average", "averaged field Phi on a ball"},
      {"verify-cauchy", "compare x_eps with Omega(t, 0, z(eps t)) on [0, d/eps]"},
      {"find-periodic", "shoot for a T-periodic orbit at one eps"},
      {"sweep", "shoot over a list of eps and fit the convergence slope"},
  };
  for (const auto& [name, help] : simple) add_common(app.add_subcommand(name, help), o);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kHolds : kUsageError;
  }
  CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();

  try {
    const RunConfig cfg = load(o);
    const unsigned threads = o.threads ? o.threads : static_cast<unsigned>(cfg.integer("run", "threads", 0));
    set_max_threads(threads);

    if (command == "describe") {
      std::ostringstream text;
      if (!o.builtin.empty()) {
        const BuiltinSpec* spec = find_builtin(o.builtin);
        if (!spec) {
          std::string msg = "unknown built-in system '" + o.builtin + "'; available:";
          for (const auto& s : builtin_specs()) msg += " " + s.name;
          throw ConfigError(msg);
        }
        describe_system(text, make_builtin(o.builtin), spec->summary, spec->notes);
      } else {
        const SystemDef sys = build_system(cfg);
        const BuiltinSpec* spec = find_builtin(cfg.text("system", "builtin").value_or(""));
        describe_system(text, sys, spec ? spec->summary : "", spec ? spec->notes : "");
      }
      if (o.out.empty()) {
        out << text.str();
      } else {
        write_text(o.out, text.str());
      }
      return kHolds;
    }

    const CommandResult res = run_command(command, o.condition, cfg);
    std::ostringstream csv;
    write_csv(csv, res.table, {version(), cfg.hash(), cfg.seed()}, res.comments);
    if (o.out.empty()) {
      out << csv.str();
    } else {
      write_text(o.out, csv.str());
    }
    if (!o.plot.empty() && res.plot) write_text(o.plot, render_svg(*res.plot));
    if (!o.plot.empty() && !res.plot) err << "note: no plot for this result\n";
    out << res.verdict << "\n";
    return res.exit_code;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const Error& e) {
    out << command << " inconclusive (" << e.what() << ")\n";
    return kInconclusive;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }
}

}  // namespace smallpar::cli
