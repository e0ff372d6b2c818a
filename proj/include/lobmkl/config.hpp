#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"
#include "lobmkl/backtest.hpp"
#include "lobmkl/lob_data.hpp"

namespace lobmkl {

// Everything a CLI run can be configured with. Loaded from a JSON document
// whose sections mirror the members below; unknown keys are rejected.
struct RunConfig {
  SynthConfig synth;
  BacktestConfig backtest;
  CvOptions cv;
  std::size_t pvalue_iterations = 100'000;
  std::uint64_t seed = 1;

  struct Outputs {
    std::string report;
    std::string tables;
    std::string heatmap;
    std::string ranking;
  } output;

  // Validates every nested section.
  void validate() const;
};

RunConfig run_config_from_json(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace lobmkl
