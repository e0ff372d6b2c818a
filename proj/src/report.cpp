#include "lobmkl/report.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "lobmkl/error.hpp"

namespace lobmkl {

using nlohmann::json;

namespace {

char prediction_code(Prediction p) {
  switch (p) {
    case Prediction::Up: return 'U';
    case Prediction::Down: return 'D';
    case Prediction::None: return 'N';
    case Prediction::Abstain: break;
  }
  return '-';
}

Prediction prediction_from_code(char c) {
  switch (c) {
    case 'U': return Prediction::Up;
    case 'D': return Prediction::Down;
    case 'N': return Prediction::None;
    case '-': return Prediction::Abstain;
    default: throw ValidationError(std::string("unknown prediction code '") + c + "'");
  }
}

json counts_to_json(const HorizonCounts& c) {
  return {{"possible", c.possible}, {"correct", c.correct}, {"total", c.total},
          {"abstained", c.abstained}, {"dropped", c.dropped}};
}

HorizonCounts counts_from_json(const json& j) {
  HorizonCounts c;
  c.possible = j.at("possible").get<std::size_t>();
  c.correct = j.at("correct").get<std::size_t>();
  c.total = j.at("total").get<std::size_t>();
  c.abstained = j.value("abstained", std::size_t{0});
  c.dropped = j.value("dropped", std::size_t{0});
  return c;
}

std::string fixed(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

std::string format_p_value(const std::optional<SignificanceResult>& s) {
  if (!s) return "n/a";
  char buf[64];
  if (s->exceed_count == 0) {
    std::snprintf(buf, sizeof(buf), "<%.0e", 1.0 / static_cast<double>(s->iterations));
    return buf;
  }
  std::snprintf(buf, sizeof(buf), "%.2e", s->p_value);
  return buf;
}

}  // namespace

std::string format_horizon(double seconds) {
  std::ostringstream os;
  os << seconds;
  return os.str();
}

json report_to_json(const BacktestReport& report) {
  json doc;
  doc["model"] = report.model;
  doc["train_size"] = report.train_size;
  doc["test_size"] = report.test_size;
  json horizons = json::array();
  for (const auto& h : report.horizons) {
    json jh;
    jh["delta_t"] = h.horizon_s;
    jh["possible_pct"] = h.possible_pct;
    jh["accuracy_pct"] = h.accuracy_pct;
    jh["counts"] = counts_to_json(h.counts);
    if (h.significance) {
      jh["p_value"] = h.significance->p_value;
      jh["significance"] = {{"iterations", h.significance->iterations},
                            {"exceed_count", h.significance->exceed_count}};
    } else {
      jh["p_value"] = nullptr;
    }
    json windows = json::array();
    json weights = json::array();
    for (const auto& w : h.windows) {
      json jw;
      jw["window"] = w.window;
      jw["train_begin"] = w.train_begin;
      jw["test_begin"] = w.test_begin;
      jw["labeled_train"] = w.labeled_train;
      jw["counts"] = counts_to_json(w.counts);
      jw["class_proportions"] = w.baseline.class_proportions;
      jw["possible_indices"] = w.baseline.possible_indices;
      json truth = json::array();
      for (const auto& t : w.baseline.true_classes) {
        if (t) truth.push_back(std::string(to_string(*t)));
        else truth.push_back(nullptr);
      }
      jw["true_classes"] = std::move(truth);
      std::string codes;
      for (Prediction p : w.predictions) codes.push_back(prediction_code(p));
      jw["predictions"] = codes;
      windows.push_back(std::move(jw));
      if (!w.weights.empty()) weights.push_back(w.weights);
    }
    jh["windows"] = std::move(windows);
    if (!weights.empty()) jh["weights"] = std::move(weights);
    horizons.push_back(std::move(jh));
  }
  doc["horizons"] = std::move(horizons);
  return doc;
}

BacktestReport report_from_json(const json& doc) {
  try {
    BacktestReport r;
    r.model = doc.at("model").get<std::string>();
    r.train_size = doc.at("train_size").get<std::size_t>();
    r.test_size = doc.at("test_size").get<std::size_t>();
    for (const auto& jh : doc.at("horizons")) {
      HorizonResult h;
      h.horizon_s = jh.at("delta_t").get<double>();
      h.possible_pct = jh.at("possible_pct").get<double>();
      h.accuracy_pct = jh.at("accuracy_pct").get<double>();
      h.counts = counts_from_json(jh.at("counts"));
      if (jh.contains("significance") && !jh.at("p_value").is_null()) {
        SignificanceResult s;
        s.p_value = jh.at("p_value").get<double>();
        s.iterations = jh.at("significance").at("iterations").get<std::size_t>();
        s.exceed_count = jh.at("significance").at("exceed_count").get<std::size_t>();
        h.significance = s;
      }
      const json* weights = jh.contains("weights") ? &jh.at("weights") : nullptr;
      std::size_t wi = 0;
      for (const auto& jw : jh.at("windows")) {
        WindowRecord w;
        w.window = jw.at("window").get<std::size_t>();
        w.train_begin = jw.at("train_begin").get<std::size_t>();
        w.test_begin = jw.at("test_begin").get<std::size_t>();
        w.labeled_train = jw.value("labeled_train", std::size_t{0});
        w.counts = counts_from_json(jw.at("counts"));
        w.baseline.class_proportions = jw.at("class_proportions").get<std::array<double, 3>>();
        w.baseline.possible_indices = jw.at("possible_indices").get<std::vector<std::size_t>>();
        for (const auto& t : jw.at("true_classes")) {
          if (t.is_null()) {
            w.baseline.true_classes.push_back(std::nullopt);
            continue;
          }
          const auto d = direction_from_string(t.get<std::string>());
          if (!d) throw ValidationError("unknown class '" + t.get<std::string>() + "'");
          w.baseline.true_classes.push_back(d);
        }
        for (char c : jw.at("predictions").get<std::string>())
          w.predictions.push_back(prediction_from_code(c));
        if (weights) w.weights = weights->at(wi).get<std::vector<std::vector<double>>>();
        h.windows.push_back(std::move(w));
        ++wi;
      }
      r.horizons.push_back(std::move(h));
    }
    return r;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed report document: ") + e.what());
  }
}

void save_report(const std::filesystem::path& path, const BacktestReport& report) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << report_to_json(report).dump(1) << '\n';
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

BacktestReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open report '" + path.string() + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ValidationError("report '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return report_from_json(doc);
}

std::string render_table(std::span<const BacktestReport> reports, TableMetric metric) {
  if (reports.empty()) throw ValidationError("no reports to render");
  const auto& rows = reports.front().horizons;
  for (const auto& r : reports) {
    if (r.horizons.size() != rows.size())
      throw ValidationError("reports have different horizon lists");
    for (std::size_t h = 0; h < rows.size(); ++h)
      if (r.horizons[h].horizon_s != rows[h].horizon_s)
        throw ValidationError("reports have different horizon lists");
  }

  const char* title = metric == TableMetric::PossiblePct   ? "Percentage of time predictions possible"
                      : metric == TableMetric::AccuracyPct ? "Percentage accuracy of predictions"
                                                           : "Monte Carlo p-values";
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"dt"});
  for (const auto& r : reports) cells.front().push_back(r.model);
  for (std::size_t h = 0; h < rows.size(); ++h) {
    std::vector<std::string> row{format_horizon(rows[h].horizon_s)};
    for (const auto& r : reports) {
      const auto& hr = r.horizons[h];
      switch (metric) {
        case TableMetric::PossiblePct: row.push_back(fixed(hr.possible_pct, 1)); break;
        case TableMetric::AccuracyPct: row.push_back(fixed(hr.accuracy_pct, 1)); break;
        case TableMetric::PValue: row.push_back(format_p_value(hr.significance)); break;
      }
    }
    cells.push_back(std::move(row));
  }

  std::vector<std::size_t> width(cells.front().size(), 0);
  for (const auto& row : cells)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());

  std::ostringstream os;
  std::string rule = "+";
  for (std::size_t w : width) rule += std::string(w + 2, '-') + "+";
  os << title << '\n' << rule << '\n';
  for (std::size_t r = 0; r < cells.size(); ++r) {
    os << '|';
    for (std::size_t c = 0; c < cells[r].size(); ++c)
      os << ' ' << std::setw(static_cast<int>(width[c])) << cells[r][c] << " |";
    os << '\n';
    if (r == 0 || r + 1 == cells.size()) os << rule << '\n';
  }
  return os.str();
}

std::string render_tables(std::span<const BacktestReport> reports) {
  std::string out = render_table(reports, TableMetric::PossiblePct) + "\n" +
                    render_table(reports, TableMetric::AccuracyPct);
  bool all_significance = true;
  for (const auto& r : reports)
    for (const auto& h : r.horizons) all_significance = all_significance && h.significance;
  if (all_significance) out += "\n" + render_table(reports, TableMetric::PValue);
  return out;
}

void write_heatmap_csv(std::ostream& out, const Eigen::MatrixXd& heatmap,
                       std::span<const double> horizons) {
  if (static_cast<std::size_t>(heatmap.cols()) != horizons.size())
    throw ValidationError("heatmap column count does not match horizons");
  out << "combination";
  for (double h : horizons) out << ',' << format_horizon(h);
  out << '\n';
  out << std::setprecision(17);
  for (Eigen::Index m = 0; m < heatmap.rows(); ++m) {
    out << combination_name(static_cast<int>(m));
    for (Eigen::Index c = 0; c < heatmap.cols(); ++c) out << ',' << heatmap(m, c);
    out << '\n';
  }
}

void write_ranking_csv(std::ostream& out, std::span<const CvEntry> ranking) {
  out << "rank,combination,feature_id,kernel_index,cv_accuracy\n";
  out << std::setprecision(17);
  for (std::size_t r = 0; r < ranking.size(); ++r) {
    const auto& e = ranking[r];
    out << r + 1 << ',' << combination_name(combination_id(e.feature_id, e.kernel_index)) << ','
        << e.feature_id << ',' << e.kernel_index << ',' << e.cv_accuracy << '\n';
  }
}

}  // namespace lobmkl
