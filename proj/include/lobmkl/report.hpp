#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>

#include "json.hpp"
#include "lobmkl/backtest.hpp"

namespace lobmkl {

nlohmann::json report_to_json(const BacktestReport& report);
BacktestReport report_from_json(const nlohmann::json& doc);

void save_report(const std::filesystem::path& path, const BacktestReport& report);
BacktestReport load_report(const std::filesystem::path& path);

enum class TableMetric { PossiblePct, AccuracyPct, PValue };

// One row per horizon, one column per report. All reports must share the
// same horizon list.
std::string render_table(std::span<const BacktestReport> reports, TableMetric metric);
// "Percentage of time predictions possible" and "Percentage accuracy of
// predictions" tables, plus p-values when every report has them.
std::string render_tables(std::span<const BacktestReport> reports);

// Header "combination,<h1>,<h2>,..." then one "F<f>K<k>,..." row per combination.
void write_heatmap_csv(std::ostream& out, const Eigen::MatrixXd& heatmap,
                       std::span<const double> horizons);

void write_ranking_csv(std::ostream& out, std::span<const CvEntry> ranking);

std::string format_horizon(double seconds);

}  // namespace lobmkl
