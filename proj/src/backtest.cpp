#include "lobmkl/backtest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <exception>
#include <map>
#include <random>
#include <stdexcept>

#include "lobmkl/error.hpp"

namespace lobmkl {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

std::vector<int> model_combinations(const ModelSpec& model) {
  return std::visit(overloaded{
                        [](const MklModelSpec&) {
                          std::vector<int> all(kCombinationCount);
                          for (int m = 0; m < kCombinationCount; ++m) all[static_cast<std::size_t>(m)] = m;
                          return all;
                        },
                        [](const SingleKernelSpec& s) {
                          return std::vector<int>{combination_id(s.feature_id, s.kernel_index)};
                        },
                    },
                    model);
}

bool is_mkl(const ModelSpec& model) { return std::holds_alternative<MklModelSpec>(model); }

// Mean diagonal, used to bring every kernel to a unit average self-similarity.
double gram_scale(const GramMatrix& g, bool normalize) {
  if (!normalize) return 1.0;
  const double s = g.diagonal().mean();
  return s > 1e-12 ? s : 1.0;
}

GramMatrix restrict(const GramMatrix& g, std::span<const std::size_t> rows,
                    std::span<const std::size_t> cols) {
  GramMatrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (std::size_t i = 0; i < rows.size(); ++i)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          g(static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(cols[j]));
  return out;
}

std::array<double, kDirectionCount> proportions(const std::array<std::size_t, kDirectionCount>& counts) {
  const std::size_t total = counts[0] + counts[1] + counts[2];
  if (total == 0) return {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  std::array<double, kDirectionCount> p{};
  for (int c = 0; c < kDirectionCount; ++c)
    p[static_cast<std::size_t>(c)] = static_cast<double>(counts[static_cast<std::size_t>(c)]) / static_cast<double>(total);
  // Keep the sum exactly representable as 1 for downstream validation.
  p[2] = 1.0 - p[0] - p[1];
  return p;
}

// Classifier for an empty training set: never votes +1.
TrainedClassifier empty_classifier(std::size_t n_weights) {
  TrainedClassifier tc;
  tc.weights = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n_weights),
                                         1.0 / static_cast<double>(n_weights));
  tc.svm.bias = -1.0;
  tc.svm.degenerate = true;
  return tc;
}

std::size_t feature_slot(const WindowModel& model, int feature_id) {
  for (std::size_t s = 0; s < model.features.size(); ++s)
    if (model.features[s].feature_id == feature_id) return s;
  throw std::logic_error("feature not present in window model");
}

double percent(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

template <typename Fn>
void for_each_index(std::ptrdiff_t n, Execution exec, Fn&& fn) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic) if (exec == Execution::Parallel)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

std::string combination_name(int combination) {
  if (combination < 0 || combination >= kCombinationCount)
    throw std::out_of_range("combination id out of range");
  return "F" + std::to_string(combination / kBankSize + 1) + "K" +
         std::to_string(combination % kBankSize + 1);
}

ModelSpec parse_model(std::string_view text) {
  std::string lower(text);
  for (auto& ch : lower) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (lower == "mkl" || lower == "simplemkl") return MklModelSpec{};
  const auto k_pos = lower.find('k');
  if (lower.size() >= 4 && lower[0] == 'f' && k_pos != std::string::npos) {
    int f = 0, k = 0;
    const auto* b = lower.data();
    const auto r1 = std::from_chars(b + 1, b + k_pos, f);
    const auto r2 = std::from_chars(b + k_pos + 1, b + lower.size(), k);
    if (r1.ec == std::errc{} && r1.ptr == b + k_pos && r2.ec == std::errc{} &&
        r2.ptr == b + lower.size() && f >= 1 && f <= kFeatureCount && k >= 1 && k <= kBankSize)
      return SingleKernelSpec{f, k};
  }
  throw ValidationError("unknown model '" + std::string(text) +
                        "' (expected 'mkl' or F<1-8>K<1-16>, e.g. F8K16)");
}

std::string model_name(const ModelSpec& model) {
  return std::visit(overloaded{
                        [](const MklModelSpec&) { return std::string("SimpleMKL"); },
                        [](const SingleKernelSpec& s) {
                          return combination_name(combination_id(s.feature_id, s.kernel_index));
                        },
                    },
                    model);
}

void SolverConfig::validate() const {
  if (!(c > 0.0)) throw ValidationError("C must be positive");
  if (!(svm_tolerance > 0.0) || !(mkl_svm_tolerance > 0.0) || !(gap_tolerance > 0.0) ||
      !(weight_tolerance > 0.0))
    throw ValidationError("solver tolerances must be positive");
  if (max_outer_iterations == 0) throw ValidationError("max_outer_iterations must be positive");
}

void BacktestConfig::validate() const {
  if (train_size < 2) throw ValidationError("train_size must be >= 2");
  if (test_size < 1) throw ValidationError("test_size must be >= 1");
  if (horizons.empty()) throw ValidationError("at least one horizon is required");
  for (double h : horizons)
    if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("horizons must be positive");
  if (const auto* s = std::get_if<SingleKernelSpec>(&model)) {
    if (s->feature_id < 1 || s->feature_id > kFeatureCount || s->kernel_index < 1 ||
        s->kernel_index > kBankSize)
      throw ValidationError("single-kernel model out of range");
  }
  solver.validate();
  features.validate();
  bank.validate();
}

std::size_t BacktestConfig::minimum_series_length() const {
  return features.warm_index() + train_size + test_size;
}

std::vector<WindowPlan> plan_windows(const SnapshotSeries& series, const BacktestConfig& config) {
  config.validate();
  const std::size_t need = config.minimum_series_length();
  if (series.size() < need)
    throw ValidationError("series too short: need at least " + std::to_string(need) +
                          " snapshots (warm-up " + std::to_string(config.features.warm_index()) +
                          " + train " + std::to_string(config.train_size) + " + test " +
                          std::to_string(config.test_size) + "), got " +
                          std::to_string(series.size()));
  const std::size_t warm = config.features.warm_index();
  const std::size_t n_warm = series.size() - warm;
  const std::size_t n_windows = (n_warm - config.train_size) / config.test_size;

  std::vector<WindowPlan> plans(n_windows);
  for (std::size_t w = 0; w < n_windows; ++w) {
    auto& p = plans[w];
    p.index = w;
    const std::size_t start = warm + w * config.test_size;
    for (std::size_t k = 0; k < config.train_size; ++k) p.train.push_back(start + k);
    for (std::size_t k = 0; k < config.test_size; ++k)
      p.test.push_back(start + config.train_size + k);
  }
  return plans;
}

WindowModel fit_window(const SnapshotSeries& series, const FeatureTable& table,
                       const WindowPlan& plan, const BacktestConfig& config) {
  WindowModel model;
  model.plan = plan;
  model.combinations = model_combinations(config.model);

  std::map<int, std::vector<int>> kernels_by_feature;
  for (int m : model.combinations) kernels_by_feature[m / kBankSize + 1].push_back(m % kBankSize);

  for (const auto& [feature_id, kernels] : kernels_by_feature) {
    FeatureKernels fk;
    fk.feature_id = feature_id;
    const FeatureMatrix raw = table.select(feature_id, plan.train);
    fk.train = standardize(raw, raw).first;
    fk.bank = default_kernel_bank(fk.train, config.bank);
    fk.scale.fill(1.0);
    for (int k : kernels) {
      auto ks = static_cast<std::size_t>(k);
      GramMatrix g = gram(fk.train, fk.bank[ks], Execution::Serial);
      fk.scale[ks] = gram_scale(g, config.normalize_kernels);
      if (fk.scale[ks] != 1.0) g /= fk.scale[ks];
      fk.grams[ks] = std::move(g);
    }
    model.features.push_back(std::move(fk));
  }

  const std::size_t train_end = plan.train.back();
  const bool mkl = is_mkl(config.model);
  const std::size_t n_weights = model.combinations.size();

  for (double h : config.horizons) {
    HorizonModel hm;
    hm.horizon_s = h;
    std::array<std::size_t, kDirectionCount> class_counts{};
    for (std::size_t p = 0; p < plan.train.size(); ++p) {
      const std::size_t i = plan.train[p];
      const auto future = horizon_index(series, i, h);
      if (!future || (config.label_embargo && *future > train_end)) continue;
      const DirectionalLabel label = label_instance(series[i], series[*future]);
      hm.labeled.push_back(p);
      for (int c = 0; c < 3; ++c) hm.labels[static_cast<std::size_t>(c)].push_back(label[c]);
      if (const auto d = label.direction()) ++class_counts[static_cast<std::size_t>(*d)];
    }
    hm.class_proportions = proportions(class_counts);

    if (hm.labeled.empty()) {
      for (auto& tc : hm.classifiers) tc = empty_classifier(n_weights);
      model.horizons.push_back(std::move(hm));
      continue;
    }

    std::vector<GramMatrix> grams;
    grams.reserve(n_weights);
    for (int m : model.combinations) {
      const auto& fk = model.features[feature_slot(model, m / kBankSize + 1)];
      grams.push_back(restrict(fk.grams[static_cast<std::size_t>(m % kBankSize)], hm.labeled, hm.labeled));
    }

    if (mkl) {
      MKLProblem problem;
      problem.grams = std::move(grams);
      problem.c = config.solver.c;
      problem.gap_tolerance = config.solver.gap_tolerance;
      problem.weight_tolerance = config.solver.weight_tolerance;
      problem.max_outer_iterations = config.solver.max_outer_iterations;
      problem.svm_tolerance = config.solver.mkl_svm_tolerance;
      for (std::size_t c = 0; c < 3; ++c) {
        problem.labels = hm.labels[c];
        MKLModel fitted = train_simplemkl(problem, Execution::Serial);
        hm.classifiers[c] = TrainedClassifier{std::move(fitted.weights), std::move(fitted.inner),
                                              fitted.converged};
      }
    } else {
      for (std::size_t c = 0; c < 3; ++c) {
        SVMProblem problem{grams.front(), hm.labels[c], config.solver.c};
        hm.classifiers[c] = TrainedClassifier{Eigen::VectorXd::Ones(1),
                                              train_svm(problem, config.solver.svm_tolerance), true};
      }
    }
    model.horizons.push_back(std::move(hm));
  }
  return model;
}

WindowPredictions predict_window(const WindowModel& model, const FeatureTable& table,
                                 std::span<const std::size_t> test_indices) {
  // Cross Gram (test x full train block) per combination.
  std::vector<GramMatrix> cross(model.combinations.size());
  std::map<int, FeatureMatrix> test_features;
  for (const auto& fk : model.features)
    test_features.emplace(fk.feature_id,
                          apply_standardization(table.select(fk.feature_id, test_indices),
                                                fk.train.mean, fk.train.stddev));
  for (std::size_t j = 0; j < model.combinations.size(); ++j) {
    const int m = model.combinations[j];
    const auto& fk = model.features[feature_slot(model, m / kBankSize + 1)];
    const auto k = static_cast<std::size_t>(m % kBankSize);
    cross[j] = gram(test_features.at(fk.feature_id), fk.train, fk.bank[k], Execution::Serial);
    if (fk.scale[k] != 1.0) cross[j] /= fk.scale[k];
  }

  const auto n_test = static_cast<Eigen::Index>(test_indices.size());
  std::vector<std::size_t> all_rows(test_indices.size());
  for (std::size_t r = 0; r < all_rows.size(); ++r) all_rows[r] = r;

  WindowPredictions out;
  for (const auto& hm : model.horizons) {
    std::array<Eigen::VectorXd, 3> values;
    for (std::size_t c = 0; c < 3; ++c) {
      const auto& tc = hm.classifiers[c];
      if (hm.labeled.empty()) {
        values[c] = Eigen::VectorXd::Constant(n_test, tc.svm.bias);
        continue;
      }
      GramMatrix combined = GramMatrix::Zero(n_test, static_cast<Eigen::Index>(hm.labeled.size()));
      for (std::size_t j = 0; j < cross.size(); ++j) {
        const double w = tc.weights[static_cast<Eigen::Index>(j)];
        if (w == 0.0) continue;
        combined.noalias() += w * restrict(cross[j], all_rows, hm.labeled);
      }
      values[c] = decision_values(tc.svm, hm.labels[c], combined);
    }
    std::vector<Prediction> preds(test_indices.size());
    for (Eigen::Index r = 0; r < n_test; ++r)
      preds[static_cast<std::size_t>(r)] =
          combine_signs(sign_of(values[0][r]), sign_of(values[1][r]), sign_of(values[2][r]));
    out.decision_values.push_back(std::move(values));
    out.predictions.push_back(std::move(preds));
  }
  return out;
}

bool BacktestReport::has_weights() const {
  if (horizons.empty()) return false;
  for (const auto& h : horizons)
    for (const auto& w : h.windows)
      if (w.weights.empty()) return false;
  return true;
}

BacktestReport run_backtest(const SnapshotSeries& series, const BacktestConfig& config,
                            Execution exec) {
  const auto plans = plan_windows(series, config);
  const FeatureTable table(series, config.features);
  const bool mkl = is_mkl(config.model);
  const std::size_t n_h = config.horizons.size();

  // [window][horizon]
  std::vector<std::vector<WindowRecord>> records(plans.size());
  for_each_index(static_cast<std::ptrdiff_t>(plans.size()), exec, [&](std::size_t w) {
    const auto& plan = plans[w];
    const WindowModel model = fit_window(series, table, plan, config);
    const WindowPredictions preds = predict_window(model, table, plan.test);
    auto& out = records[w];
    out.resize(n_h);
    for (std::size_t h = 0; h < n_h; ++h) {
      const auto& hm = model.horizons[h];
      WindowRecord rec;
      rec.window = w;
      rec.train_begin = plan.train.front();
      rec.test_begin = plan.test.front();
      rec.labeled_train = hm.labeled.size();
      rec.baseline.class_proportions = hm.class_proportions;
      rec.predictions = preds.predictions[h];
      for (std::size_t q = 0; q < plan.test.size(); ++q) {
        const std::size_t t = plan.test[q];
        const auto future = horizon_index(series, t, config.horizons[h]);
        if (!future) {
          ++rec.counts.dropped;
          continue;
        }
        ++rec.counts.total;
        const auto truth = label_instance(series[t], series[*future]).direction();
        const Prediction p = rec.predictions[q];
        if (p == Prediction::Abstain) {
          ++rec.counts.abstained;
          continue;
        }
        ++rec.counts.possible;
        rec.baseline.possible_indices.push_back(q);
        rec.baseline.true_classes.push_back(truth);
        if (truth && is_correct(p, *truth)) ++rec.counts.correct;
      }
      if (mkl)
        for (const auto& tc : hm.classifiers)
          rec.weights.emplace_back(tc.weights.data(), tc.weights.data() + tc.weights.size());
      out[h] = std::move(rec);
    }
  });

  BacktestReport report;
  report.model = model_name(config.model);
  report.train_size = config.train_size;
  report.test_size = config.test_size;
  for (std::size_t h = 0; h < n_h; ++h) {
    HorizonResult hr;
    hr.horizon_s = config.horizons[h];
    for (auto& per_window : records) {
      auto& rec = per_window[h];
      hr.counts.possible += rec.counts.possible;
      hr.counts.correct += rec.counts.correct;
      hr.counts.total += rec.counts.total;
      hr.counts.abstained += rec.counts.abstained;
      hr.counts.dropped += rec.counts.dropped;
      hr.windows.push_back(std::move(rec));
    }
    hr.possible_pct = percent(hr.counts.possible, hr.counts.total);
    hr.accuracy_pct = percent(hr.counts.correct, hr.counts.possible);
    report.horizons.push_back(std::move(hr));
  }
  return report;
}

void attach_significance(BacktestReport& report, std::size_t iterations, std::uint64_t seed,
                         Execution exec) {
  for (std::size_t h = 0; h < report.horizons.size(); ++h) {
    auto& hr = report.horizons[h];
    std::vector<WindowBaseline> baselines;
    baselines.reserve(hr.windows.size());
    for (const auto& w : hr.windows) baselines.push_back(w.baseline);
    hr.significance = monte_carlo_pvalue(baselines, hr.counts.correct, iterations, seed + h, exec);
  }
}

std::vector<CvEntry> cross_validate_kernels(const SnapshotSeries& series,
                                            const BacktestConfig& config, const CvOptions& options,
                                            Execution exec) {
  config.validate();
  if (options.folds < 2) throw ValidationError("cross-validation needs at least 2 folds");
  if (options.max_train < 2) throw ValidationError("cross-validation max_train must be >= 2");
  const FeatureTable table(series, config.features);
  const std::size_t warm = config.features.warm_index();

  std::vector<double> accuracy_sum(kCombinationCount, 0.0);
  std::size_t rounds = 0;

  for (std::size_t h_idx = 0; h_idx < config.horizons.size(); ++h_idx) {
    const double h = config.horizons[h_idx];
    std::vector<std::size_t> labeled;
    std::vector<std::size_t> future_of;
    for (std::size_t i = warm; i < series.size(); ++i) {
      const auto f = horizon_index(series, i, h);
      if (!f) continue;
      labeled.push_back(i);
      future_of.push_back(*f);
    }
    if (labeled.size() / options.folds < 2)
      throw ValidationError("insufficient data per fold: " + std::to_string(labeled.size()) +
                            " labelled instances for " + std::to_string(options.folds) +
                            " folds at horizon " + std::to_string(h) + "s");

    for (std::size_t fold = 0; fold < options.folds; ++fold) {
      const std::size_t lo = fold * labeled.size() / options.folds;
      const std::size_t hi = (fold + 1) * labeled.size() / options.folds;
      const std::size_t fold_first = labeled[lo];

      // Earlier instances whose label reaches into the held-out fold are purged.
      std::vector<std::size_t> candidates;
      for (std::size_t r = 0; r < labeled.size(); ++r) {
        if (r >= lo && r < hi) continue;
        if (r < lo && future_of[r] >= fold_first) continue;
        candidates.push_back(r);
      }
      if (candidates.size() < 2)
        throw ValidationError("insufficient data per fold: fewer than 2 training instances");

      std::vector<std::size_t> chosen;
      if (candidates.size() > options.max_train) {
        std::seed_seq seq{static_cast<std::uint32_t>(config.seed),
                          static_cast<std::uint32_t>(config.seed >> 32),
                          static_cast<std::uint32_t>(h_idx), static_cast<std::uint32_t>(fold)};
        std::mt19937_64 rng(seq);
        std::sample(candidates.begin(), candidates.end(), std::back_inserter(chosen),
                    static_cast<std::ptrdiff_t>(options.max_train), rng);
      } else {
        chosen = candidates;
      }

      std::vector<std::size_t> train_idx, test_idx;
      std::array<std::vector<int>, 3> y;
      for (std::size_t r : chosen) {
        train_idx.push_back(labeled[r]);
        const auto l = label_instance(series[labeled[r]], series[future_of[r]]);
        for (int c = 0; c < 3; ++c) y[static_cast<std::size_t>(c)].push_back(l[c]);
      }
      std::vector<std::optional<Direction>> truth;
      for (std::size_t r = lo; r < hi; ++r) {
        test_idx.push_back(labeled[r]);
        truth.push_back(label_instance(series[labeled[r]], series[future_of[r]]).direction());
      }

      std::array<FeatureMatrix, kFeatureCount> tr, te;
      std::array<KernelBank, kFeatureCount> banks;
      for (int f = 1; f <= kFeatureCount; ++f) {
        auto [a, b] = standardize(table.select(f, train_idx), table.select(f, test_idx));
        banks[static_cast<std::size_t>(f - 1)] = default_kernel_bank(a, config.bank);
        tr[static_cast<std::size_t>(f - 1)] = std::move(a);
        te[static_cast<std::size_t>(f - 1)] = std::move(b);
      }

      std::vector<double> fold_accuracy(kCombinationCount, 0.0);
      for_each_index(kCombinationCount, exec, [&](std::size_t m) {
        const std::size_t f = m / kBankSize;
        const auto& spec = banks[f][m % kBankSize];
        GramMatrix g = gram(tr[f], spec, Execution::Serial);
        GramMatrix x = gram(te[f], tr[f], spec, Execution::Serial);
        const double s = gram_scale(g, config.normalize_kernels);
        if (s != 1.0) {
          g /= s;
          x /= s;
        }
        std::array<Eigen::VectorXd, 3> values;
        for (std::size_t c = 0; c < 3; ++c) {
          const SVMModel svm = train_svm(SVMProblem{g, y[c], config.solver.c}, config.solver.svm_tolerance);
          values[c] = decision_values(svm, y[c], x);
        }
        std::size_t possible = 0, correct = 0;
        for (std::size_t r = 0; r < truth.size(); ++r) {
          const auto i = static_cast<Eigen::Index>(r);
          const Prediction p = combine_signs(sign_of(values[0][i]), sign_of(values[1][i]),
                                             sign_of(values[2][i]));
          if (p == Prediction::Abstain) continue;
          ++possible;
          if (truth[r] && is_correct(p, *truth[r])) ++correct;
        }
        fold_accuracy[m] = percent(correct, possible);
      });
      for (int m = 0; m < kCombinationCount; ++m)
        accuracy_sum[static_cast<std::size_t>(m)] += fold_accuracy[static_cast<std::size_t>(m)];
      ++rounds;
    }
  }

  std::vector<CvEntry> ranking;
  for (int m = 0; m < kCombinationCount; ++m)
    ranking.push_back({m / kBankSize + 1, m % kBankSize + 1,
                       accuracy_sum[static_cast<std::size_t>(m)] / static_cast<double>(rounds)});
  std::stable_sort(ranking.begin(), ranking.end(), [](const CvEntry& a, const CvEntry& b) {
    if (a.cv_accuracy != b.cv_accuracy) return a.cv_accuracy > b.cv_accuracy;
    if (a.feature_id != b.feature_id) return a.feature_id < b.feature_id;
    return a.kernel_index < b.kernel_index;
  });
  return ranking;
}

Eigen::MatrixXd weight_heatmap(std::span<const BacktestReport> reports) {
  std::size_t columns = 0;
  for (const auto& r : reports) {
    if (!r.has_weights())
      throw ValidationError("weight heatmap needs MKL reports; '" + r.model + "' has no weights");
    columns += r.horizons.size();
  }
  Eigen::MatrixXd heat = Eigen::MatrixXd::Zero(kCombinationCount, static_cast<Eigen::Index>(columns));
  Eigen::Index col = 0;
  for (const auto& r : reports) {
    for (const auto& h : r.horizons) {
      std::size_t count = 0;
      for (const auto& w : h.windows)
        for (const auto& d : w.weights) {
          if (d.size() != static_cast<std::size_t>(kCombinationCount))
            throw ValidationError("weight vectors must have 128 entries");
          for (int m = 0; m < kCombinationCount; ++m) heat(m, col) += d[static_cast<std::size_t>(m)];
          ++count;
        }
      if (count == 0) throw ValidationError("horizon without weight vectors");
      heat.col(col) /= static_cast<double>(count);
      ++col;
    }
  }
  return heat;
}

Eigen::MatrixXd weight_heatmap(const BacktestReport& report) {
  return weight_heatmap(std::span<const BacktestReport>(&report, 1));
}

}  // namespace lobmkl
