// Command-line front end; talks to the library exclusively through the C
// API in clusterlab.h.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "clusterlab.h"

namespace {

using nlohmann::json;

struct DatasetDeleter {
  void operator()(clab_dataset* d) const { clab_dataset_free(d); }
};
using DatasetPtr = std::unique_ptr<clab_dataset, DatasetDeleter>;

struct StringDeleter {
  void operator()(char* s) const { clab_string_free(s); }
};
using StringPtr = std::unique_ptr<char, StringDeleter>;

int fail(clab_status status) {
  std::cerr << "error: " << clab_last_error() << "\n";
  return static_cast<int>(status);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CLI::ValidationError("--config", "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

bool write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return false;
  out << content;
  return true;
}

// Loads the config JSON (or {}), applying --seed / --out overrides.
std::string build_config(const std::string& config_path, bool have_seed,
                         std::uint64_t seed, const std::string& output_path) {
  json cfg = json::object();
  if (!config_path.empty()) {
    cfg = json::parse(read_file(config_path), nullptr, true, true);
    if (!cfg.is_object())
      throw CLI::ValidationError("--config", "config root must be an object");
  }
  if (have_seed) cfg["seed"] = seed;
  if (!output_path.empty()) cfg["output_path"] = output_path;
  return cfg.dump();
}

DatasetPtr load_dataset(const std::string& path, clab_status* status) {
  clab_dataset* raw = nullptr;
  *status = clab_dataset_load_csv(path.c_str(), &raw);
  return DatasetPtr(raw);
}

int cmd_generate(int example, int n, std::uint64_t seed, const std::string& out) {
  clab_dataset* raw = nullptr;
  clab_status status = clab_dataset_generate(example, n, seed, &raw);
  if (status != CLAB_OK) return fail(status);
  DatasetPtr data(raw);
  status = clab_dataset_save_csv(data.get(), out.c_str());
  if (status != CLAB_OK) return fail(status);
  std::cout << "wrote " << clab_dataset_size(data.get()) << " points ("
            << clab_dataset_dim(data.get()) << "-d) to " << out << "\n";
  return 0;
}

int cmd_fit(const std::string& algo, const std::string& data_path,
            const std::string& config_path, bool have_seed, std::uint64_t seed,
            const std::string& out) {
  clab_status status;
  DatasetPtr data = load_dataset(data_path, &status);
  if (status != CLAB_OK) return fail(status);

  std::string cfg = build_config(config_path, have_seed, seed, "");
  char* result = nullptr;
  status = clab_fit(data.get(), algo.c_str(), cfg.c_str(), &result);
  if (status != CLAB_OK) return fail(status);
  StringPtr guard(result);

  json r = json::parse(result);
  std::cout << "algorithm: " << algo << "\n";
  if (r.contains("iterations")) std::cout << "iterations: " << r["iterations"] << "\n";
  if (r.contains("converged"))
    std::cout << "converged: " << (r["converged"].get<bool>() ? "yes" : "no") << "\n";
  if (r.contains("loglik_trace") && !r["loglik_trace"].empty())
    std::cout << "final loglik: " << r["loglik_trace"].back() << "\n";
  if (r.contains("wcss_trace") && !r["wcss_trace"].empty())
    std::cout << "final wcss: " << r["wcss_trace"].back() << "\n";
  if (r.contains("success_rate"))
    std::cout << "success rate: " << r["success_rate"] << "\n";
  if (!out.empty() && !write_file(out, std::string(result))) {
    std::cerr << "error: cannot write " << out << "\n";
    return 2;
  }
  return 0;
}

int cmd_bench(const std::string& data_path, const std::string& config_path,
              bool have_seed, std::uint64_t seed, const std::string& out) {
  clab_status status = CLAB_OK;
  DatasetPtr data;
  if (!data_path.empty()) {
    data = load_dataset(data_path, &status);
    if (status != CLAB_OK) return fail(status);
  }
  std::string cfg = build_config(config_path, have_seed, seed, out);
  char* result = nullptr;
  status = clab_bench_run(data.get(), cfg.c_str(), &result);
  if (status != CLAB_OK) return fail(status);
  StringPtr guard(result);

  json r = json::parse(result);
  std::cout << "algorithm: " << r["algorithm"].get<std::string>() << "\n";
  std::cout << "trials: " << r["all"].size() << "\n";
  std::cout << "best success rate: " << r["best"]["success_rate"] << " (trial "
            << r["best"]["trial_index"] << ")\n";
  if (r["numeric_failures"].get<int>() > 0)
    std::cout << "numeric failures: " << r["numeric_failures"] << "\n";
  return 0;
}

int cmd_sweep(const std::string& data_path, const std::string& config_path,
              const std::vector<double>& deltas, bool have_seed, std::uint64_t seed,
              const std::string& out) {
  clab_status status = CLAB_OK;
  DatasetPtr data;
  if (!data_path.empty()) {
    data = load_dataset(data_path, &status);
    if (status != CLAB_OK) return fail(status);
  }
  std::string cfg = build_config(config_path, have_seed, seed, out);
  char* result = nullptr;
  status = clab_sweep_run(data.get(), cfg.c_str(), deltas.data(),
                          static_cast<int>(deltas.size()), &result);
  if (status != CLAB_OK) return fail(status);
  StringPtr guard(result);

  json r = json::parse(result);
  std::printf("%10s  %s\n", "delta", "best success rate");
  for (const auto& row : r)
    std::printf("%10g  %.4f\n", row["delta"].get<double>(),
                row["best_success_rate"].get<double>());
  return 0;
}

int cmd_cost(const std::string& data_path, int k, double delta,
             const std::string& out) {
  clab_status status;
  DatasetPtr data = load_dataset(data_path, &status);
  if (status != CLAB_OK) return fail(status);

  char* result = nullptr;
  status = clab_cost_report(data.get(), k, delta, &result);
  if (status != CLAB_OK) return fail(status);
  StringPtr guard(result);

  json r = json::parse(result);
  std::printf("%-18s %g\n", "kappa(V1)", r["kappa_v1"].get<double>());
  std::printf("%-18s %g\n", "kappa(V2)", r["kappa_v2"].get<double>());
  std::printf("%-18s %g\n", "mu(V1)", r["mu_v1"].get<double>());
  std::printf("%-18s %g\n", "mu(V2)", r["mu_v2"].get<double>());
  std::printf("%-18s %g\n", "eta_mu", r["eta_mu"].get<double>());
  std::printf("%-18s %g\n", "eta_sigma", r["eta_sigma"].get<double>());
  std::printf("%-18s %g\n", "term_pi", r["term_pi"].get<double>());
  std::printf("%-18s %g\n", "term_mu_tomo", r["term_mu_tomo"].get<double>());
  std::printf("%-18s %g\n", "term_mu_norm", r["term_mu_norm"].get<double>());
  std::printf("%-18s %g\n", "term_sigma_tomo", r["term_sigma_tomo"].get<double>());
  std::printf("%-18s %g\n", "term_sigma_norm", r["term_sigma_norm"].get<double>());
  std::printf("%-18s %g\n", "total", r["total"].get<double>());
  std::printf("%-18s %ld\n", "n_pi_samples", r["n_pi_samples"].get<long>());
  if (!out.empty() && !write_file(out, std::string(result))) {
    std::cerr << "error: cannot write " << out << "\n";
    return 2;
  }
  return 0;
}

int cmd_plot(const std::string& data_path, const std::string& params_path,
             const std::string& out) {
  clab_status status;
  DatasetPtr data = load_dataset(data_path, &status);
  if (status != CLAB_OK) return fail(status);
  std::string params;
  if (!params_path.empty()) params = read_file(params_path);
  status = clab_scatter_svg(data.get(), params.empty() ? nullptr : params.c_str(),
                            out.c_str());
  if (status != CLAB_OK) return fail(status);
  std::cout << "wrote " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"clustering laboratory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(clab_version()));

  int example = 1, n = 1000, k = 2;
  std::uint64_t seed = 0;
  double delta = 0.2;
  std::string data_path, config_path, out_path, algo, params_path;
  std::vector<double> deltas;

  auto* generate = app.add_subcommand("generate", "sample a synthetic dataset");
  generate->add_option("--example", example, "built-in example (1 or 2)")
      ->check(CLI::Range(1, 2));
  generate->add_option("--n", n, "number of points")->check(CLI::PositiveNumber);
  generate->add_option("--seed", seed, "random seed");
  generate->add_option("--out", out_path, "output CSV path")->required();

  auto* fit = app.add_subcommand("fit", "fit one model to a dataset");
  fit->add_option("--algo", algo,
                  "em | delta-em | kmeans | delta-kmeans | qem-emulation")
      ->required();
  fit->add_option("--data", data_path, "input CSV")->required();
  fit->add_option("--config", config_path, "algorithm config JSON file");
  auto* fit_seed = fit->add_option("--seed", seed, "random seed override");
  fit->add_option("--out", out_path, "write the result JSON here");

  auto* bench = app.add_subcommand("bench", "multi-trial benchmark");
  bench->add_option("--config", config_path, "experiment config JSON file");
  bench->add_option("--data", data_path, "input CSV (otherwise generated)");
  auto* bench_seed = bench->add_option("--seed", seed, "random seed override");
  bench->add_option("--out", out_path, "output base path (.json/.csv)");

  auto* sweep = app.add_subcommand("sweep", "benchmark across delta values");
  sweep->add_option("--deltas", deltas, "comma-separated delta list")
      ->required()
      ->delimiter(',');
  sweep->add_option("--config", config_path, "experiment config JSON file");
  sweep->add_option("--data", data_path, "input CSV (otherwise generated)");
  auto* sweep_seed = sweep->add_option("--seed", seed, "random seed override");
  sweep->add_option("--out", out_path, "output base path (.csv/.svg)");

  auto* cost = app.add_subcommand("cost", "runtime cost report");
  cost->add_option("--data", data_path, "input CSV")->required();
  cost->add_option("--delta", delta, "target label accuracy delta")
      ->check(CLI::PositiveNumber);
  cost->add_option("--k", k, "component count")->check(CLI::PositiveNumber);
  cost->add_option("--out", out_path, "write the report JSON here");

  auto* plot = app.add_subcommand("plot", "scatter plot of a dataset");
  plot->add_option("--data", data_path, "input CSV")->required();
  plot->add_option("--params", params_path, "fitted parameter JSON file");
  plot->add_option("--out", out_path, "output SVG path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) return cmd_generate(example, n, seed, out_path);
    if (fit->parsed())
      return cmd_fit(algo, data_path, config_path, fit_seed->count() > 0, seed,
                     out_path);
    if (bench->parsed())
      return cmd_bench(data_path, config_path, bench_seed->count() > 0, seed,
                       out_path);
    if (sweep->parsed())
      return cmd_sweep(data_path, config_path, deltas, sweep_seed->count() > 0, seed,
                       out_path);
    if (cost->parsed()) return cmd_cost(data_path, k, delta, out_path);
    if (plot->parsed()) return cmd_plot(data_path, params_path, out_path);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed JSON: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
