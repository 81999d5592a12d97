#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "xgnn/xgnn.hpp"

namespace fs = std::filesystem;
using namespace xgnn;

namespace {

struct RunArgs {
  std::string preset, config_path, out = "out", seeds;
  std::optional<long long> seed;
  std::optional<std::string> tol;
  std::optional<long long> max_basis;
  std::vector<std::string> sets;
};

Config build_config(const RunArgs& a) {
  std::vector<std::pair<std::string, std::string>> file;
  if (!a.config_path.empty()) file = read_config_file(a.config_path);
  std::string preset = a.preset;
  if (preset.empty())
    for (const auto& [k, v] : file)
      if (k == "preset") preset = detail::trim(v);
  if (preset.empty()) throw ConfigError("config key 'preset' is missing (use --preset or set it in the config file)");
  Config c = preset_defaults(preset);
  for (const auto& [k, v] : file)
    if (k != "preset") c.set(k, v);
  for (const auto& s : a.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    const std::string k = detail::trim(s.substr(0, eq));
    if (k == "preset") throw ConfigError("config key 'preset' cannot be changed with --set");
    c.set(k, s.substr(eq + 1));
  }
  if (a.seed) c.set("seed", std::to_string(*a.seed));
  if (a.tol) c.set("train.tol", *a.tol);
  if (a.max_basis) c.set("train.max_basis", std::to_string(*a.max_basis));
  return c;
}

std::mutex g_print;

void say(const std::string& s) {
  std::lock_guard<std::mutex> lk(g_print);
  std::cout << s << std::flush;
}

void run_one(Config c, const fs::path& dir) {
  Preset p = load_preset(c);
  ensure_dir(dir);
  write_text(dir / "config.txt", emit_config(p.config));
  const Setup setup = make_setup(p);
  const bool fields = p.config.get_bool("output.fields");
  const int grid = static_cast<int>(p.config.get_int("output.grid"));
  HistoryWriter hw(dir / "history.csv");
  RunCallbacks cb;
  cb.on_iteration = [&](const HistoryRow& r, const Subspace& S) {
    hw.append(r);
    if (fields) write_fields(dir, S, setup, r.iter, grid);
    char line[160];
    std::snprintf(line, sizeof line, "[%s] iter %d eta %.6e energy %s\n", dir.string().c_str(), r.iter, r.eta,
                  std::isnan(r.energy_error) ? "-" : csv_real(r.energy_error).c_str());
    say(line);
  };
  RunResult res = run_adaptive(setup, p.train, cb);
  write_mu_trace(dir / "mu_trace.csv", res.history);
  say("[" + dir.string() + "] stop: " + res.history.stop_reason + "\n");
}

std::pair<long long, long long> parse_range(const std::string& s) {
  const auto dots = s.find("..");
  try {
    if (dots == std::string::npos) {
      const long long v = std::stoll(s);
      return {v, v};
    }
    const long long a = std::stoll(s.substr(0, dots)), b = std::stoll(s.substr(dots + 2));
    if (b < a) throw ConfigError("--seeds range '" + s + "' is empty");
    return {a, b};
  } catch (const std::logic_error&) {
    throw ConfigError("--seeds expects N..M, got '" + s + "'");
  }
}

int cmd_run(const RunArgs& a) {
  Config base = build_config(a);
  if (a.seeds.empty()) {
    resolve_config(base);
    run_one(base, a.out);
    return 0;
  }
  const auto [lo, hi] = parse_range(a.seeds);
  std::vector<Config> cfgs;
  for (long long s = lo; s <= hi; ++s) {
    Config c = base;
    c.set("seed", std::to_string(s));
    resolve_config(c);
    cfgs.push_back(c);
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errs(cfgs.size());
  for (std::size_t k = 0; k < cfgs.size(); ++k)
    pool.emplace_back([&, k] {
      try {
        run_one(cfgs[k], fs::path(a.out) / ("seed_" + std::to_string(lo + static_cast<long long>(k))));
      } catch (...) {
        errs[k] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  return 0;
}

int cmd_pencil(double alpha, bool want_complex, int count, const std::string& op, const std::string& out) {
  if (!(alpha > 0.0 && alpha < 2.0 * kPi)) throw ConfigError("--alpha must lie in (0, 2pi)");
  if (count < 1) throw ConfigError("--count must be >= 1");
  std::vector<PencilRoot> roots;
  if (op == "laplace") roots = laplace_exponents(alpha, count);
  else if (op == "biharmonic") roots = biharmonic_exponents(alpha, count, want_complex);
  else throw ConfigError("--op must be laplace or biharmonic");
  std::cout << "alpha,re_lambda,im_lambda,residual\n";
  for (const auto& r : roots)
    std::cout << csv_real(r.alpha) << "," << csv_real(r.xi) << "," << csv_real(r.zeta) << "," << csv_real(r.residual) << "\n";
  if (!out.empty()) {
    ensure_dir(out);
    write_pencil(fs::path(out) / "pencil.csv", roots);
  }
  return 0;
}

int cmd_validate(const std::string& suite) {
  std::vector<CheckResult> results;
  const bool all = suite == "all";
  if (all || suite == "pencil") results.push_back(validate_pencil());
  if (all || suite == "eigenfunctions") results.push_back(validate_eigenfunctions());
  if (all || suite == "gradients") results.push_back(validate_gradients());
  if (all || suite == "quadrature") results.push_back(validate_quadrature());
  if (results.empty()) throw ConfigError("unknown suite '" + suite + "'");
  bool ok = true;
  for (const auto& r : results) {
    std::printf("%s %s (%.2f s): %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.seconds, r.detail.c_str());
    ok = ok && r.pass;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"xgnn: extended Galerkin neural networks"};
  app.require_subcommand(1);

  RunArgs ra;
  auto* run = app.add_subcommand("run", "Adaptive basis construction for a preset");
  run->add_option("--preset", ra.preset, "Preset name");
  run->add_option("--config", ra.config_path, "key = value file");
  run->add_option("--seed", ra.seed, "Random seed");
  run->add_option("--out", ra.out, "Output directory")->capture_default_str();
  run->add_option("--tol", ra.tol, "Stop when eta < tol");
  run->add_option("--max-basis", ra.max_basis, "Maximum number of basis functions");
  run->add_option("--seeds", ra.seeds, "Seed sweep N..M, one subdirectory per seed");
  run->add_option("--set", ra.sets, "Override a config key (key=value), repeatable");

  double alpha = 0.0;
  bool want_complex = false;
  int count = 3;
  std::string op = "biharmonic", pencil_out;
  auto* pencil = app.add_subcommand("pencil", "Corner singular exponents");
  pencil->add_option("--alpha", alpha, "Interior angle")->required();
  pencil->add_flag("--complex", want_complex, "Search complex roots");
  pencil->add_option("--count", count, "Number of roots")->capture_default_str();
  pencil->add_option("--op", op, "laplace or biharmonic")->capture_default_str();
  pencil->add_option("--out", pencil_out, "Directory for pencil.csv");

  std::string suite = "all";
  auto* validate = app.add_subcommand("validate", "Built-in numerical checks");
  validate->add_option("--suite", suite, "pencil, eigenfunctions, gradients, quadrature or all")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(ra);
    if (*pencil) return cmd_pencil(alpha, want_complex, count, op, pencil_out);
    if (*validate) return cmd_validate(suite);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
