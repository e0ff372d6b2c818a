#include "lobmkl/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "lobmkl/backtest.hpp"
#include "lobmkl/config.hpp"
#include "lobmkl/error.hpp"
#include "lobmkl/lob_data.hpp"
#include "lobmkl/report.hpp"

namespace lobmkl {

namespace {

namespace fs = std::filesystem;

SnapshotSeries read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open data file '" + path + "'");
  return parse_snapshots(in);
}

// Writes through a temporary file so a failed run never leaves a partial output.
template <typename Fn>
void write_file(const std::string& path, Fn&& fill) {
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    fill(out);
    out.flush();
    if (!out) throw Error("failed writing '" + path + "'");
  }
  fs::rename(tmp, target);
}

RunConfig base_config(const std::string& config_path) {
  return config_path.empty() ? RunConfig{} : load_run_config(config_path);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multiple kernel learning on limit order book data"};
  app.name("lobmkl");
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  bool serial = false;

  // generate
  auto* gen = app.add_subcommand("generate", "Write a synthetic order book CSV");
  std::string gen_out;
  std::optional<std::size_t> gen_n;
  std::optional<double> gen_coupling, gen_arrival, gen_tick, gen_base;
  gen->add_option("--out", gen_out, "Output CSV path")->required();
  gen->add_option("--n", gen_n, "Number of snapshots");
  gen->add_option("--drift-coupling", gen_coupling, "Imbalance-to-drift coupling");
  gen->add_option("--mean-inter-arrival", gen_arrival, "Mean time between updates (ms)");
  gen->add_option("--tick-size", gen_tick, "Price increment");
  gen->add_option("--base-price", gen_base, "Starting best bid");
  gen->add_option("--config", config_path, "JSON run configuration");
  gen->add_option("--seed", seed, "Random seed");

  // backtest
  auto* bt = app.add_subcommand("backtest", "Run the walk-forward experiment");
  std::string bt_data, bt_model, bt_out, bt_tables, bt_heatmap;
  std::vector<double> bt_horizons;
  std::optional<std::size_t> bt_train, bt_test, bt_pvalue_iters;
  std::optional<double> bt_c;
  bt->add_option("--data", bt_data, "Order book CSV")->required();
  bt->add_option("--config", config_path, "JSON run configuration");
  bt->add_option("--model", bt_model, "'mkl' or a single combination such as F8K16");
  bt->add_option("--out", bt_out, "Report JSON path (default report.json)");
  bt->add_option("--tables", bt_tables, "Also write the ASCII tables to this file");
  bt->add_option("--heatmap", bt_heatmap, "Write the 128 x horizons weight grid (MKL only)");
  bt->add_option("--horizons", bt_horizons, "Horizons in seconds");
  bt->add_option("--train-size", bt_train, "In-sample instances per window");
  bt->add_option("--test-size", bt_test, "Out-of-sample instances per window");
  bt->add_option("--c", bt_c, "SVM box constraint");
  bt->add_option("--pvalue-iterations", bt_pvalue_iters,
                 "Also compute Monte Carlo p-values with this many iterations");
  bt->add_option("--seed", seed, "Random seed");
  bt->add_flag("--serial", serial, "Disable OpenMP parallelism");

  // cv-select
  auto* cv = app.add_subcommand("cv-select", "Rank all 128 combinations by cross-validation");
  std::string cv_data, cv_out;
  std::optional<std::size_t> cv_folds, cv_max_train;
  std::vector<double> cv_horizons;
  cv->add_option("--data", cv_data, "Order book CSV")->required();
  cv->add_option("--config", config_path, "JSON run configuration");
  cv->add_option("--folds", cv_folds, "Number of contiguous folds (default 10)");
  cv->add_option("--max-train", cv_max_train, "Training subsample per fold (default 200)");
  cv->add_option("--horizons", cv_horizons, "Horizons in seconds");
  cv->add_option("--out", cv_out, "Ranking CSV path (default stdout)");
  cv->add_option("--seed", seed, "Random seed");
  cv->add_flag("--serial", serial, "Disable OpenMP parallelism");

  // pvalue
  auto* pv = app.add_subcommand("pvalue", "Add Monte Carlo p-values to a report");
  std::string pv_report, pv_out;
  std::optional<std::size_t> pv_iters;
  pv->add_option("--report", pv_report, "Report JSON to augment")->required();
  pv->add_option("--iterations", pv_iters, "Random replays (default 100000)");
  pv->add_option("--out", pv_out, "Output path (default: overwrite --report)");
  pv->add_option("--config", config_path, "JSON run configuration");
  pv->add_option("--seed", seed, "Random seed");
  pv->add_flag("--serial", serial, "Disable OpenMP parallelism");

  // report
  auto* rp = app.add_subcommand("report", "Render stored reports as tables and a heatmap grid");
  std::vector<std::string> rp_reports;
  std::string rp_out, rp_heatmap;
  rp->add_option("reports,--reports", rp_reports, "Report JSON files (one table column each)")
      ->required();
  rp->add_option("--out", rp_out, "Tables text path (default stdout)");
  rp->add_option("--heatmap", rp_heatmap, "Heatmap CSV path (MKL reports only)");

  std::vector<std::string> argv_storage{"lobmkl"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "lobmkl: " << e.what() << '\n';
    return 2;
  }

  const Execution exec = serial ? Execution::Serial : Execution::Parallel;
  try {
    if (gen->parsed()) {
      RunConfig rc = base_config(config_path);
      if (seed) rc.synth.seed = *seed;
      if (gen_n) rc.synth.n_snapshots = *gen_n;
      if (gen_coupling) rc.synth.drift_coupling = *gen_coupling;
      if (gen_arrival) rc.synth.mean_inter_arrival_ms = *gen_arrival;
      if (gen_tick) rc.synth.tick_size = *gen_tick;
      if (gen_base) rc.synth.base_price = *gen_base;
      rc.synth.validate();
      const auto series = generate_synthetic(rc.synth);
      write_file(gen_out, [&](std::ostream& os) { write_snapshots(os, series); });
      return 0;
    }

    if (bt->parsed()) {
      RunConfig rc = base_config(config_path);
      auto& cfg = rc.backtest;
      if (seed) cfg.seed = *seed;
      if (!bt_model.empty()) cfg.model = parse_model(bt_model);
      if (!bt_horizons.empty()) cfg.horizons = bt_horizons;
      if (bt_train) cfg.train_size = *bt_train;
      if (bt_test) cfg.test_size = *bt_test;
      if (bt_c) cfg.solver.c = *bt_c;
      rc.validate();
      if (bt_out.empty()) bt_out = rc.output.report.empty() ? "report.json" : rc.output.report;
      if (bt_tables.empty()) bt_tables = rc.output.tables;
      if (bt_heatmap.empty()) bt_heatmap = rc.output.heatmap;

      const auto series = read_csv(bt_data);
      BacktestReport report = run_backtest(series, cfg, exec);
      if (bt_pvalue_iters) attach_significance(report, *bt_pvalue_iters, cfg.seed, exec);

      const std::span<const BacktestReport> one(&report, 1);
      const std::string tables = render_tables(one);
      write_file(bt_out, [&](std::ostream& os) { os << report_to_json(report).dump(1) << '\n'; });
      if (!bt_tables.empty()) write_file(bt_tables, [&](std::ostream& os) { os << tables; });
      if (!bt_heatmap.empty()) {
        const auto heat = weight_heatmap(report);
        write_file(bt_heatmap, [&](std::ostream& os) { write_heatmap_csv(os, heat, cfg.horizons); });
      }
      out << tables;
      return 0;
    }

    if (cv->parsed()) {
      RunConfig rc = base_config(config_path);
      if (seed) rc.backtest.seed = *seed;
      if (cv_folds) rc.cv.folds = *cv_folds;
      if (cv_max_train) rc.cv.max_train = *cv_max_train;
      if (!cv_horizons.empty()) rc.backtest.horizons = cv_horizons;
      rc.validate();
      if (cv_out.empty()) cv_out = rc.output.ranking;
      const auto series = read_csv(cv_data);
      const auto ranking = cross_validate_kernels(series, rc.backtest, rc.cv, exec);
      if (cv_out.empty()) {
        write_ranking_csv(out, ranking);
      } else {
        write_file(cv_out, [&](std::ostream& os) { write_ranking_csv(os, ranking); });
      }
      return 0;
    }

    if (pv->parsed()) {
      RunConfig rc = base_config(config_path);
      const std::size_t iterations = pv_iters.value_or(rc.pvalue_iterations);
      const std::uint64_t s = seed.value_or(rc.seed);
      BacktestReport report = load_report(pv_report);
      attach_significance(report, iterations, s, exec);
      const std::string target = pv_out.empty() ? pv_report : pv_out;
      write_file(target, [&](std::ostream& os) { os << report_to_json(report).dump(1) << '\n'; });
      out << render_table(std::span<const BacktestReport>(&report, 1), TableMetric::PValue);
      return 0;
    }

    if (rp->parsed()) {
      std::vector<BacktestReport> reports;
      for (const auto& path : rp_reports) reports.push_back(load_report(path));
      const std::string tables = render_tables(reports);
      if (!rp_heatmap.empty()) {
        std::vector<BacktestReport> mkl;
        std::vector<double> horizons;
        for (const auto& r : reports)
          if (r.has_weights()) {
            for (const auto& h : r.horizons) horizons.push_back(h.horizon_s);
            mkl.push_back(r);
          }
        if (mkl.empty()) throw ValidationError("--heatmap needs at least one MKL report");
        const auto heat = weight_heatmap(mkl);
        write_file(rp_heatmap, [&](std::ostream& os) { write_heatmap_csv(os, heat, horizons); });
      }
      if (rp_out.empty()) {
        out << tables;
      } else {
        write_file(rp_out, [&](std::ostream& os) { os << tables; });
      }
      return 0;
    }
  } catch (const std::exception& e) {
    err << "lobmkl: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace lobmkl
