#include "clusterlab.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "bench.hpp"
#include "cost_model.hpp"
#include "io.hpp"

namespace {

thread_local std::string g_last_error;

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename Fn>
clab_status guarded(Fn&& fn) {
  try {
    fn();
    return CLAB_OK;
  } catch (const clab::ConfigError& e) {
    g_last_error = e.what();
    return CLAB_ERROR_CONFIG;
  } catch (const nlohmann::json::exception& e) {
    g_last_error = std::string("malformed JSON: ") + e.what();
    return CLAB_ERROR_CONFIG;
  } catch (const clab::NumericError& e) {
    g_last_error = e.what();
    return CLAB_ERROR_NUMERIC;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CLAB_ERROR_NUMERIC;
  } catch (...) {
    g_last_error = "unknown error";
    return CLAB_ERROR_NUMERIC;
  }
}

clab::json parse_json(const char* text, const char* what) {
  if (!text) throw clab::ConfigError(std::string("missing ") + what);
  try {
    return clab::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw clab::ConfigError(std::string("malformed ") + what + ": " + e.what());
  }
}

}  // namespace

struct clab_dataset {
  clab::Dataset data;
};

extern "C" {

const char* clab_version(void) { return "1.0.0"; }

const char* clab_last_error(void) { return g_last_error.c_str(); }

void clab_string_free(char* s) { std::free(s); }

clab_status clab_dataset_generate(int example, int n, uint64_t seed,
                                  clab_dataset** out) {
  return guarded([&] {
    if (!out) throw clab::ConfigError("null output pointer");
    clab::Dataset data;
    if (example == 1) {
      data = clab::generate_example1(n, seed);
    } else if (example == 2) {
      data = clab::generate_example2(n, seed);
    } else {
      throw clab::ConfigError("example must be 1 or 2");
    }
    *out = new clab_dataset{std::move(data)};
  });
}

clab_status clab_dataset_load_csv(const char* path, clab_dataset** out) {
  return guarded([&] {
    if (!out) throw clab::ConfigError("null output pointer");
    if (!path) throw clab::ConfigError("null path");
    *out = new clab_dataset{clab::load_dataset_csv(path)};
  });
}

clab_status clab_dataset_save_csv(const clab_dataset* data, const char* path) {
  return guarded([&] {
    if (!data) throw clab::ConfigError("null dataset");
    if (!path) throw clab::ConfigError("null path");
    clab::save_dataset_csv(data->data, path);
  });
}

int clab_dataset_size(const clab_dataset* data) {
  return data ? data->data.size() : 0;
}

int clab_dataset_dim(const clab_dataset* data) {
  return data ? data->data.dim() : 0;
}

int clab_dataset_has_labels(const clab_dataset* data) {
  return data && data->data.true_labels ? 1 : 0;
}

void clab_dataset_free(clab_dataset* data) { delete data; }

clab_status clab_fit(const clab_dataset* data, const char* algorithm,
                     const char* config_json, char** result_json) {
  return guarded([&] {
    if (!data) throw clab::ConfigError("null dataset");
    if (!algorithm) throw clab::ConfigError("null algorithm");
    if (!result_json) throw clab::ConfigError("null output pointer");
    clab::json cfg = config_json && *config_json ? parse_json(config_json, "config")
                                                 : clab::json::object();
    clab::Algorithm algo = clab::algorithm_from_string(algorithm);
    clab::json out = clab::run_single_fit(data->data, algo, cfg);
    *result_json = copy_string(out.dump(2) + "\n");
  });
}

clab_status clab_bench_run(const clab_dataset* data, const char* config_json,
                           char** result_json) {
  return guarded([&] {
    if (!result_json) throw clab::ConfigError("null output pointer");
    clab::ExperimentConfig config =
        clab::experiment_config_from_json(parse_json(config_json, "config"));
    clab::BenchmarkResult result =
        data ? clab::run_benchmark(data->data, config) : clab::run_benchmark(config);
    clab::json j;
    j["algorithm"] = clab::algorithm_to_string(config.algorithm);
    j["numeric_failures"] = result.numeric_failures;
    j["best"] = {{"trial_index", result.best.trial_index},
                 {"success_rate", result.best.success_rate},
                 {"final_loglik", result.best.final_loglik},
                 {"iterations", result.best.iterations},
                 {"seed_used", result.best.seed_used}};
    j["all"] = clab::json::array();
    for (const auto& o : result.all)
      j["all"].push_back({{"trial_index", o.trial_index},
                          {"success_rate", o.success_rate},
                          {"final_loglik", o.final_loglik},
                          {"iterations", o.iterations},
                          {"seed_used", o.seed_used}});
    *result_json = copy_string(j.dump(2) + "\n");
  });
}

clab_status clab_sweep_run(const clab_dataset* data, const char* config_json,
                           const double* deltas, int n_deltas, char** result_json) {
  return guarded([&] {
    if (!result_json) throw clab::ConfigError("null output pointer");
    if (!deltas || n_deltas < 1) throw clab::ConfigError("no deltas given");
    clab::ExperimentConfig config =
        clab::experiment_config_from_json(parse_json(config_json, "config"));
    clab::Dataset generated;
    const clab::Dataset* use = nullptr;
    if (data) {
      use = &data->data;
    } else {
      std::uint64_t data_seed = clab::derive_seed(config.seed, 1000003);
      if (config.example == "I") {
        generated = clab::generate_example1(config.n, data_seed);
      } else if (config.example == "II") {
        generated = clab::generate_example2(config.n, data_seed);
      } else {
        throw clab::ConfigError("custom experiments need an explicit dataset");
      }
      use = &generated;
    }
    std::vector<double> ds(deltas, deltas + n_deltas);
    auto table = clab::delta_sweep(*use, ds, config);
    clab::json j = clab::json::array();
    for (const auto& [delta, rate] : table)
      j.push_back({{"delta", delta}, {"best_success_rate", rate}});
    *result_json = copy_string(j.dump(2) + "\n");
  });
}

clab_status clab_cost_report(const clab_dataset* data, int k, double delta,
                             char** report_json) {
  return guarded([&] {
    if (!data) throw clab::ConfigError("null dataset");
    if (!report_json) throw clab::ConfigError("null output pointer");
    clab::DataMatrices matrices = clab::DataMatrices::from_dataset(data->data);
    auto [eta_mu, eta_sigma] = clab::eta_values(data->data);
    clab::EpsilonBudget budget = clab::epsilon_budget(delta, eta_mu, eta_sigma);
    clab::CostReport report = clab::qem_runtime_estimate(matrices, k, budget);
    report.n_pi_samples = clab::n_pi_samples_required(k, budget.eps4_pi, 0.05);
    *report_json = copy_string(clab::cost_report_to_json(report).dump(2) + "\n");
  });
}

clab_status clab_params_validate(const char* params_json, char** violations_json) {
  return guarded([&] {
    if (!violations_json) throw clab::ConfigError("null output pointer");
    clab::GmmParams params =
        clab::params_from_json(parse_json(params_json, "parameter JSON"));
    clab::json j = clab::validate_params(params);
    *violations_json = copy_string(j.dump(2) + "\n");
  });
}

clab_status clab_scatter_svg(const clab_dataset* data, const char* params_json,
                             const char* path) {
  return guarded([&] {
    if (!data) throw clab::ConfigError("null dataset");
    if (!path) throw clab::ConfigError("null path");
    if (params_json && *params_json) {
      clab::GmmParams params =
          clab::params_from_json(parse_json(params_json, "parameter JSON"));
      clab::write_scatter_svg(data->data, &params, nullptr, path);
    } else {
      clab::write_scatter_svg(data->data, nullptr, nullptr, path);
    }
  });
}

}  // extern "C"
