#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <actens/actens.hpp>

namespace fs = std::filesystem;
using namespace actens;

namespace {

std::string sanitize(const std::string& name) {
  std::string out;
  for (const char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '_' || c == '-' || c == '.';
    out.push_back(ok ? c : '_');
  }
  return out;
}

int cmd_list() {
  std::size_t widest = 0;
  for (const auto& e : activation_registry()) widest = std::max(widest, e.name.size());
  std::printf("%-*s  %6s  %9s  %s\n", static_cast<int>(widest), "name", "params", "max_input",
              "description");
  for (const auto& e : activation_registry()) {
    const ActivationSpec spec = spec_by_name(e.name);
    std::printf("%-*s  %6d  %9s  %s\n", static_cast<int>(widest), e.name.c_str(), param_count(spec),
                e.max_input_sensitive ? "yes" : "no", e.what.c_str());
  }
  return 0;
}

int cmd_gradcheck(const std::vector<std::string>& kinds, double tol, std::uint64_t seed) {
  std::vector<std::string> names = kinds;
  if (names.empty())
    for (const auto& e : activation_registry()) names.push_back(e.name);
  for (const auto& n : names) {
    if (find_activation(n) == nullptr) {
      std::cerr << "unknown activation: " << n << "\n";
      return 2;
    }
  }

  bool all_ok = true;
  for (const auto& n : names) {
    for (const double max_input : {1.0, 255.0}) {
      const ActivationSpec spec = spec_by_name(n, max_input);

      GradCheckOptions aopts;
      aopts.tol = tol;
      aopts.seed = seed;
      const GradCheckReport arep = check_activation_gradients(spec, aopts);

      NetGradCheckOptions nopts;
      nopts.tol = 10.0 * tol;
      nopts.seed = seed;
      const GradCheckReport nrep = check_network_gradients(spec, nopts);

      for (const GradCheckReport* rep : {&arep, &nrep}) {
        if (rep->ok()) continue;
        all_ok = false;
        for (const auto& issue : rep->issues)
          std::printf("FAIL %s max_input=%g %s: analytic=%.9g numeric=%.9g rel_err=%.3g\n",
                      n.c_str(), max_input, issue.param.c_str(), issue.analytic, issue.numeric,
                      issue.rel_err);
      }
      if (arep.ok() && nrep.ok())
        std::printf("ok   %s max_input=%g (%d checks, max rel err %.3g)\n", n.c_str(), max_input,
                    arep.checks + nrep.checks, std::max(arep.max_rel_err, nrep.max_rel_err));
    }
  }
  return all_ok ? 0 : 1;
}

int cmd_run(const std::string& config_path) {
  std::string text;
  RunConfig cfg;
  try {
    text = read_file(config_path);
    cfg = parse_run_config(text);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  fs::path out_dir = cfg.output;
  if (const char* root = std::getenv("ACTENS_OUTPUT_ROOT"); root != nullptr && *root != '\0')
    out_dir = fs::path(root) / cfg.output;

  try {
    std::vector<Dataset> datasets = make_datasets(cfg);
    for (auto& ds : datasets)
      if (!fs::path(ds.name).stem().empty()) ds.name = sanitize(fs::path(ds.name).stem().string());
    const std::vector<EnsembleDef> defs = make_defs(cfg);
    const ProtocolConfig pc = make_protocol_config(cfg);

    ProtocolResult res = run_protocol(defs, datasets, pc);

    fs::create_directories(out_dir);
    write_performance_csv(res.table, (out_dir / "performance.csv").string());
    {
      std::ofstream jf(out_dir / "performance.json", std::ios::binary);
      jf << performance_to_json(res.table).dump(2) << "\n";
    }
    res.manifest["experiment"] = cfg.name;
    res.manifest["config_hash"] = config_hash(text);
    {
      std::ofstream mf(out_dir / "manifest.json", std::ios::binary);
      mf << res.manifest.dump(2) << "\n";
    }
    for (std::size_t m = 0; m < res.store.models.size(); ++m) {
      const fs::path mdir = out_dir / "scores" / sanitize(res.store.models[m]);
      fs::create_directories(mdir);
      for (std::size_t d = 0; d < res.store.datasets.size(); ++d)
        write_score_csv(res.store.cells[m][d],
                        (mdir / (sanitize(res.store.datasets[d]) + ".csv")).string());
    }

    std::printf("%-20s", "model");
    for (const auto& d : res.table.datasets) std::printf("  %12s", d.c_str());
    std::printf("  %12s\n", "Avg");
    for (std::size_t m = 0; m < res.table.models.size(); ++m) {
      std::printf("%-20s", res.table.models[m].c_str());
      for (const double v : res.table.cells[m]) std::printf("  %12.4f", v);
      std::printf("  %12.4f\n", res.table.avg(static_cast<int>(m)));
    }
    std::printf("wrote %s\n", (out_dir / "performance.csv").string().c_str());
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return 1;
  }
}

int cmd_compare(const std::string& table_path, const std::string& model_a, const std::string& model_b,
                bool one_sided) {
  PerformanceTable table;
  try {
    table = read_performance_csv(table_path);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  const int ia = table.model_index(model_a);
  const int ib = table.model_index(model_b);
  if (ia < 0 || ib < 0) {
    std::cerr << "model not found in table: " << (ia < 0 ? model_a : model_b) << "\n";
    return 2;
  }

  const WilcoxonResult r = wilcoxon_signed_rank(table.row(ia), table.row(ib));
  std::printf("comparison over %zu datasets: %s vs %s\n", table.datasets.size(), model_a.c_str(),
              model_b.c_str());
  if (!r.defined) {
    std::printf("all paired differences are zero; p = 1\n");
    return 0;
  }
  std::printf("W = %g (W+ = %g, W- = %g), effective pairs = %d, %s\n", r.w, r.w_plus, r.w_minus,
              r.n_effective, r.exact ? "exact distribution" : "normal approximation");
  std::printf("p two-sided = %.6g\n", r.p_two_sided);
  std::printf("p one-sided (%s > %s) = %.6g\n", model_a.c_str(), model_b.c_str(), r.p_one_sided);
  const double headline = one_sided ? r.p_one_sided : r.p_two_sided;
  const char* dir = r.direction > 0 ? "first above second" : (r.direction < 0 ? "second above first" : "no direction");
  std::printf("p = %.6g, direction: %s\n", headline, dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"activation-function library: registry, gradient checks, evaluation protocol"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "print the registered activation functions");

  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference validation of all gradients");
  std::vector<std::string> kinds;
  double tol = 1e-5;
  std::uint64_t seed = 1;
  gradcheck->add_option("--kinds", kinds, "activation names to check (default: all)");
  gradcheck->add_option("--tol", tol, "relative error tolerance");
  gradcheck->add_option("--seed", seed, "rng seed");

  auto* run = app.add_subcommand("run", "run the cross-validation protocol from a config file");
  std::string config_path;
  run->add_option("config", config_path, "config file (sectioned key=value or JSON)")->required();

  auto* compare = app.add_subcommand("compare", "signed-rank comparison of two table rows");
  std::string table_path, model_a, model_b;
  bool one_sided = false;
  compare->add_option("table", table_path, "performance CSV")->required();
  compare->add_option("model_a", model_a, "first model name")->required();
  compare->add_option("model_b", model_b, "second model name")->required();
  compare->add_flag("--one-sided", one_sided, "headline p-value tests first > second");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  if (list->parsed()) return cmd_list();
  if (gradcheck->parsed()) return cmd_gradcheck(kinds, tol, seed);
  if (run->parsed()) return cmd_run(config_path);
  if (compare->parsed()) return cmd_compare(table_path, model_a, model_b, one_sided);
  return 2;
}
