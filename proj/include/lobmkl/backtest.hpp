#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lobmkl/execution.hpp"
#include "lobmkl/features.hpp"
#include "lobmkl/kernels.hpp"
#include "lobmkl/labeling.hpp"
#include "lobmkl/lob_data.hpp"
#include "lobmkl/mkl.hpp"
#include "lobmkl/significance.hpp"
#include "lobmkl/svm.hpp"

namespace lobmkl {

inline constexpr int kCombinationCount = kFeatureCount * kBankSize;  // 128

// Feature/kernel combination id in [0, 128): (feature_id - 1) * 16 + (kernel_index - 1).
inline int combination_id(int feature_id, int kernel_index) {
  return (feature_id - 1) * kBankSize + (kernel_index - 1);
}
std::string combination_name(int combination);  // "F1K1" .. "F8K16"

struct MklModelSpec {};
struct SingleKernelSpec {
  int feature_id = 1;    // 1..8
  int kernel_index = 1;  // 1..16
};
using ModelSpec = std::variant<MklModelSpec, SingleKernelSpec>;

// "mkl" or "F<feature>K<kernel>", e.g. "F8K16".
ModelSpec parse_model(std::string_view text);
// "SimpleMKL" or "F8K16".
std::string model_name(const ModelSpec& model);

struct SolverConfig {
  double c = 1.0;
  double svm_tolerance = 1e-4;
  double mkl_svm_tolerance = 1e-6;
  double gap_tolerance = 1e-3;
  double weight_tolerance = 1e-6;
  std::size_t max_outer_iterations = 200;

  void validate() const;
};

struct BacktestConfig {
  std::size_t train_size = 100;
  std::size_t test_size = 100;
  std::vector<double> horizons{5, 10, 20, 50, 100, 200};  // seconds
  ModelSpec model = MklModelSpec{};
  SolverConfig solver;
  FeatureConfig features;
  BankConfig bank;
  // Train instances whose label needs a snapshot past the train block are
  // left out, so no post-train price enters the fitted model.
  bool label_embargo = true;
  // Divide each Gram matrix by its mean train diagonal.
  bool normalize_kernels = true;
  std::uint64_t seed = 1;

  void validate() const;
  // Warm-up plus one train block plus one test block.
  std::size_t minimum_series_length() const;
};

// Series indices of one walk-forward window.
struct WindowPlan {
  std::size_t index = 0;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Contiguous non-overlapping windows; each test block becomes the next
// window's train block. Throws ValidationError naming the minimum length.
std::vector<WindowPlan> plan_windows(const SnapshotSeries& series, const BacktestConfig& config);

// One of the three binary machines of a window. For MKL runs `weights` has
// 128 entries; single-kernel runs hold the single weight 1.
struct TrainedClassifier {
  Eigen::VectorXd weights;
  SVMModel svm;
  bool converged = true;
};

struct HorizonModel {
  double horizon_s = 0.0;
  std::vector<std::size_t> labeled;  // positions within the train block
  std::array<std::vector<int>, 3> labels;
  std::array<TrainedClassifier, 3> classifiers;
  std::array<double, kDirectionCount> class_proportions{};
};

struct FeatureKernels {
  int feature_id = 0;
  FeatureMatrix train;  // standardised
  KernelBank bank;
  std::array<double, kBankSize> scale{};  // divisor applied to every Gram
  std::array<GramMatrix, kBankSize> grams;  // train x train, scaled; empty if unused
};

// Everything fitted from one train block.
struct WindowModel {
  WindowPlan plan;
  std::vector<int> combinations;  // combination ids the classifiers weight
  std::vector<FeatureKernels> features;  // one per feature used
  std::vector<HorizonModel> horizons;
};

// Uses only data at or before the last train index (plus, without the label
// embargo, the horizon snapshots of train instances).
WindowModel fit_window(const SnapshotSeries& series, const FeatureTable& table,
                       const WindowPlan& plan, const BacktestConfig& config);

struct WindowPredictions {
  // [horizon][classifier][test position]
  std::vector<std::array<Eigen::VectorXd, 3>> decision_values;
  std::vector<std::vector<Prediction>> predictions;  // [horizon][test position]
};

WindowPredictions predict_window(const WindowModel& model, const FeatureTable& table,
                                 std::span<const std::size_t> test_indices);

struct HorizonCounts {
  std::size_t possible = 0;   // kept predictions with a realised label
  std::size_t correct = 0;
  std::size_t total = 0;      // test instances with a realised label
  std::size_t abstained = 0;  // labelled instances without a kept prediction
  std::size_t dropped = 0;    // test instances whose horizon is past the data
};

struct WindowRecord {
  std::size_t window = 0;
  std::size_t train_begin = 0;  // series index
  std::size_t test_begin = 0;   // series index
  std::size_t labeled_train = 0;
  HorizonCounts counts;
  WindowBaseline baseline;
  std::vector<Prediction> predictions;             // every test position
  std::vector<std::vector<double>> weights;        // 3 x 128, MKL only
};

struct HorizonResult {
  double horizon_s = 0.0;
  HorizonCounts counts;
  double possible_pct = 0.0;
  double accuracy_pct = 0.0;
  std::optional<SignificanceResult> significance;
  std::vector<WindowRecord> windows;
};

struct BacktestReport {
  std::string model;  // "SimpleMKL" or "F<f>K<k>"
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::vector<HorizonResult> horizons;

  bool has_weights() const;
};

BacktestReport run_backtest(const SnapshotSeries& series, const BacktestConfig& config,
                            Execution exec = Execution::Parallel);

// Fills every horizon's significance field from its stored window baselines.
void attach_significance(BacktestReport& report, std::size_t iterations, std::uint64_t seed,
                         Execution exec = Execution::Parallel);

struct CvOptions {
  std::size_t folds = 10;
  std::size_t max_train = 200;  // random subsample of the training folds
};

struct CvEntry {
  int feature_id = 0;
  int kernel_index = 0;
  double cv_accuracy = 0.0;  // percent of kept predictions that are correct
};

// All 128 single-kernel combinations ranked by mean held-out accuracy over
// contiguous folds and all configured horizons.
std::vector<CvEntry> cross_validate_kernels(const SnapshotSeries& series,
                                            const BacktestConfig& config,
                                            const CvOptions& options = {},
                                            Execution exec = Execution::Parallel);

// 128 x (total horizons) matrix; entry (m, h) averages d_m over windows and
// the three classifiers.
Eigen::MatrixXd weight_heatmap(std::span<const BacktestReport> reports);
Eigen::MatrixXd weight_heatmap(const BacktestReport& report);

}  // namespace lobmkl
