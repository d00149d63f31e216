#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sstex/pipeline.hpp"

namespace sstex {

/// size,mean_error,std_error,rep_1..rep_R; numbers printed round-trip exact.
std::string curve_csv(const LearningCurve& curve);
void write_curve_csv(const std::filesystem::path& path, const LearningCurve& curve);
/// Parses a file written by write_curve_csv; the curve is named after the stem.
LearningCurve read_curve_csv(const std::filesystem::path& path);

/// Line chart of mean error against log-scaled size. The first curve is
/// drawn thick, the rest thin. x spans [min size, max size], y [0, max error].
std::string render_svg(const std::vector<LearningCurve>& curves, const std::string& title);

/// One CSV per curve (named <curve name>.csv) plus chart.svg; returns the
/// written paths. Throws ExportError if the directory is not writable.
std::vector<std::filesystem::path> export_results(const std::vector<LearningCurve>& curves,
                                                  const std::filesystem::path& out_dir,
                                                  const std::string& title = "learning curves");
std::vector<std::filesystem::path> export_results(const CurveSet& curves, const std::filesystem::path& out_dir,
                                                  const std::string& title = "learning curves");

}  // namespace sstex
