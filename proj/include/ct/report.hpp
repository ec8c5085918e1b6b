#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ct/evaluation.hpp"
#include "json.hpp"

namespace ct {

/// Provenance embedded in every output file.
struct RunStamp {
  std::uint64_t seed = 42;
  std::string corpus_hash;
};

nlohmann::json report_json(const Analysis& analysis, const PipelineConfig& config, const RunStamp& stamp);

/// First line of every CSV: "# ct <version> seed=<seed> corpus=<hash> feed=<id>".
std::string csv_banner(const RunStamp& stamp, const std::string& feed_id);

/// tau_hours is the lag times the corpus bin width in hours.
std::string correlogram_csv(const std::vector<CorrelogramPoint>& points, const RunStamp& stamp,
                            const std::string& feed_id, double bin_hours = 1.0);
std::string trend_csv(const Trend& trend, const RunStamp& stamp, const std::string& feed_id);
std::string topwords_csv(const std::vector<TopTerm>& terms, const RunStamp& stamp, const std::string& feed_id);

inline constexpr int kModelFormatVersion = 1;

/// A summary model as stored next to the report.
struct StoredModel {
  std::string feed_id;
  std::string corpus_hash;
  std::uint64_t seed = 42;
  Index axis_offset = 0;  // trimmed-axis offset (largest grid lag) the model was fit on
  TrainedModel model;
};

nlohmann::json model_json(const StoredModel& stored);
/// Throws FormatError on missing or mistyped fields.
StoredModel model_from_json(const nlohmann::json& j);

/// Directory name used for a feed's files; characters outside [A-Za-z0-9._-] become '_'.
std::string feed_dir_name(const std::string& feed_id);

/// Writes report.json and feeds/<feed>/{model.json, correlogram.csv, trend.csv, topwords.csv}.
void write_analysis(const std::filesystem::path& dir, const Analysis& analysis, const PipelineConfig& config,
                    const RunStamp& stamp, double bin_hours = 1.0);

}  // namespace ct
