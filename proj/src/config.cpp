#include "lobmkl/config.hpp"

#include <fstream>
#include <set>

#include "lobmkl/error.hpp"

namespace lobmkl {

using nlohmann::json;

namespace {

void reject_unknown(const json& section, std::string_view name, std::set<std::string> allowed) {
  if (!section.is_object()) throw ValidationError("config section '" + std::string(name) + "' must be an object");
  for (const auto& [key, value] : section.items())
    if (!allowed.contains(key))
      throw ValidationError("unknown config key '" + std::string(name) + "." + key + "'");
}

template <typename T>
void read(const json& section, const char* key, T& out) {
  if (section.contains(key)) out = section.at(key).get<T>();
}

}  // namespace

void RunConfig::validate() const {
  synth.validate();
  backtest.validate();
  if (cv.folds < 2) throw ValidationError("cv.folds must be >= 2");
  if (cv.max_train < 2) throw ValidationError("cv.max_train must be >= 2");
  if (pvalue_iterations == 0) throw ValidationError("significance.iterations must be >= 1");
}

RunConfig run_config_from_json(const json& doc) {
  RunConfig rc;
  try {
    reject_unknown(doc, "<root>",
                   {"seed", "synth", "features", "backtest", "solver", "kernels", "significance",
                    "cv", "output"});
    read(doc, "seed", rc.seed);
    rc.synth.seed = rc.seed;
    rc.backtest.seed = rc.seed;

    if (doc.contains("synth")) {
      const auto& s = doc.at("synth");
      reject_unknown(s, "synth", {"n_snapshots", "mean_inter_arrival_ms", "tick_size", "base_price",
                                  "drift_coupling", "seed"});
      read(s, "n_snapshots", rc.synth.n_snapshots);
      read(s, "mean_inter_arrival_ms", rc.synth.mean_inter_arrival_ms);
      read(s, "tick_size", rc.synth.tick_size);
      read(s, "base_price", rc.synth.base_price);
      read(s, "drift_coupling", rc.synth.drift_coupling);
      read(s, "seed", rc.synth.seed);
    }
    if (doc.contains("features")) {
      const auto& f = doc.at("features");
      reject_unknown(f, "features", {"lags", "half_lives"});
      read(f, "lags", rc.backtest.features.lags);
      read(f, "half_lives", rc.backtest.features.half_lives);
    }
    if (doc.contains("backtest")) {
      const auto& b = doc.at("backtest");
      reject_unknown(b, "backtest", {"train_size", "test_size", "horizons", "model", "label_embargo",
                                     "normalize_kernels"});
      read(b, "train_size", rc.backtest.train_size);
      read(b, "test_size", rc.backtest.test_size);
      read(b, "horizons", rc.backtest.horizons);
      if (b.contains("model")) rc.backtest.model = parse_model(b.at("model").get<std::string>());
      read(b, "label_embargo", rc.backtest.label_embargo);
      read(b, "normalize_kernels", rc.backtest.normalize_kernels);
    }
    if (doc.contains("solver")) {
      const auto& s = doc.at("solver");
      reject_unknown(s, "solver", {"c", "svm_tolerance", "mkl_svm_tolerance", "gap_tolerance",
                                   "weight_tolerance", "max_outer_iterations"});
      auto& sv = rc.backtest.solver;
      read(s, "c", sv.c);
      read(s, "svm_tolerance", sv.svm_tolerance);
      read(s, "mkl_svm_tolerance", sv.mkl_svm_tolerance);
      read(s, "gap_tolerance", sv.gap_tolerance);
      read(s, "weight_tolerance", sv.weight_tolerance);
      read(s, "max_outer_iterations", sv.max_outer_iterations);
    }
    if (doc.contains("kernels")) {
      const auto& k = doc.at("kernels");
      reject_unknown(k, "kernels", {"rbf_scale_multipliers", "poly_degrees", "net_variances"});
      read(k, "rbf_scale_multipliers", rc.backtest.bank.rbf_scale_multipliers);
      read(k, "poly_degrees", rc.backtest.bank.poly_degrees);
      read(k, "net_variances", rc.backtest.bank.net_variances);
    }
    if (doc.contains("significance")) {
      const auto& s = doc.at("significance");
      reject_unknown(s, "significance", {"iterations"});
      read(s, "iterations", rc.pvalue_iterations);
    }
    if (doc.contains("cv")) {
      const auto& c = doc.at("cv");
      reject_unknown(c, "cv", {"folds", "max_train"});
      read(c, "folds", rc.cv.folds);
      read(c, "max_train", rc.cv.max_train);
    }
    if (doc.contains("output")) {
      const auto& o = doc.at("output");
      reject_unknown(o, "output", {"report", "tables", "heatmap", "ranking"});
      read(o, "report", rc.output.report);
      read(o, "tables", rc.output.tables);
      read(o, "heatmap", rc.output.heatmap);
      read(o, "ranking", rc.output.ranking);
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("invalid config: ") + e.what());
  }
  rc.validate();
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config '" + path.string() + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ValidationError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return run_config_from_json(doc);
}

}  // namespace lobmkl
