#include "ct/report.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ct/error.hpp"
#include "ct/json_io.hpp"
#include "ct/version.hpp"

namespace ct {
namespace {

using nlohmann::json;

json to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vector_from(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Index>(values.size()));
}

json percentiles_json(const std::vector<double>& values) {
  const Percentiles p = percentiles(values);
  return {{"p25", p.p25}, {"p50", p.p50}, {"p75", p.p75}};
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

json baseline_json(const BaselineScores& s) {
  json j;
  j["fold_scores"] = s.fold_scores;
  j["degenerate_folds"] = s.degenerate;
  j["mean"] = mean_of(s.fold_scores);
  j["percentiles"] = percentiles_json(s.fold_scores);
  return j;
}

std::string csv_value(double v) { return std::isfinite(v) ? format_double(v) : "nan"; }

}  // namespace

json report_json(const Analysis& analysis, const PipelineConfig& config, const RunStamp& stamp) {
  json cfg;
  cfg["folds"] = config.folds;
  cfg["inner_folds"] = config.inner_folds;
  cfg["grid"] = {{"lags", config.grid.lags}, {"kappas", config.grid.kappas}};
  cfg["seed"] = stamp.seed;
  cfg["corpus_hash"] = stamp.corpus_hash;
  cfg["tool_version"] = kToolVersion;
  cfg["baseline_lsa"] = config.lsa_baseline;
  cfg["shuffle_control"] = config.shuffle_control;
  cfg["top_terms"] = config.top_terms;

  json feeds = json::array();
  for (const FeedReport& r : analysis.feeds) {
    json f;
    f["feed_id"] = r.feed_id;
    f["fold_correlations"] = r.fold_correlations;
    f["degenerate_folds"] = r.degenerate_folds;
    f["mean"] = r.mean;
    f["percentiles"] = {{"p25", r.percentiles.p25}, {"p50", r.percentiles.p50}, {"p75", r.percentiles.p75}};
    json chosen = json::array();
    for (const HyperChoice& c : r.chosen) chosen.push_back({{"n_lags", c.n_lags}, {"kappa", c.kappa}});
    f["chosen"] = chosen;
    f["train_lambdas"] = r.train_lambdas;
    if (r.has_summary) {
      f["summary"] = {{"n_lags", r.summary_choice.n_lags},
                      {"kappa", r.summary_choice.kappa},
                      {"lambda", r.summary_model.kcca.lambda},
                      {"eigenvalue", r.summary_model.kcca.eigenvalue}};
    } else {
      f["summary"] = nullptr;
    }
    json corr = json::array();
    for (const CorrelogramPoint& p : r.correlogram) {
      corr.push_back({{"tau", p.tau}, {"rho", p.rho ? json(*p.rho) : json(nullptr)}});
    }
    f["correlogram"] = corr;
    json top = json::array();
    for (const TopTerm& t : r.top_terms) top.push_back({{"term", t.term}, {"lag", t.lag}, {"weight", t.weight}});
    f["top_terms"] = top;
    if (r.lsa) {
      json lsa = baseline_json(*r.lsa);
      std::vector<Index> lags = config.grid.lags;
      std::sort(lags.begin(), lags.end());
      lags.erase(std::unique(lags.begin(), lags.end()), lags.end());
      json per_lag = json::array();
      for (Index li = 0; li < r.lsa->per_lag.cols(); ++li) {
        json scores = json::array();
        for (Index k = 0; k < r.lsa->per_lag.rows(); ++k) {
          const double v = r.lsa->per_lag(k, li);
          scores.push_back(std::isfinite(v) ? json(v) : json(nullptr));
        }
        per_lag.push_back({{"lag", lags[static_cast<std::size_t>(li)]}, {"fold_scores", scores}});
      }
      lsa["per_lag"] = per_lag;
      f["lsa"] = lsa;
    }
    if (r.shuffled) f["shuffled"] = baseline_json(*r.shuffled);
    feeds.push_back(f);
  }

  json ranking = json::array();
  Index rank = 1;
  for (const RankEntry& e : analysis.ranking.entries) {
    json row = {{"rank", rank++}, {"feed_id", e.feed_id}, {"ct", e.score}};
    for (const FeedReport& r : analysis.feeds) {
      if (r.feed_id != e.feed_id) continue;
      if (r.lsa) row["lsa"] = mean_of(r.lsa->fold_scores);
      if (r.shuffled) row["ct_shuffled"] = mean_of(r.shuffled->fold_scores);
    }
    ranking.push_back(row);
  }
  return {{"config", cfg}, {"feeds", feeds}, {"ranking", ranking}};
}

std::string csv_banner(const RunStamp& stamp, const std::string& feed_id) {
  return std::string("# ct ") + kToolVersion + " seed=" + std::to_string(stamp.seed) + " corpus=" + stamp.corpus_hash +
         " feed=" + feed_id + "\n";
}

std::string correlogram_csv(const std::vector<CorrelogramPoint>& points, const RunStamp& stamp,
                            const std::string& feed_id, double bin_hours) {
  std::string out = csv_banner(stamp, feed_id) + "tau_hours,rho\n";
  for (const CorrelogramPoint& p : points) {
    out += format_double(static_cast<double>(p.tau) * bin_hours) + "," +
           (p.rho ? csv_value(*p.rho) : std::string("nan")) + "\n";
  }
  return out;
}

std::string trend_csv(const Trend& trend, const RunStamp& stamp, const std::string& feed_id) {
  std::string out = csv_banner(stamp, feed_id) + "t,canonical_trend,predicted_trend\n";
  for (std::size_t i = 0; i < trend.t.size(); ++i) {
    const auto k = static_cast<Index>(i);
    out += std::to_string(trend.t[i]) + "," + csv_value(trend.canonical(k)) + "," + csv_value(trend.predicted(k)) + "\n";
  }
  return out;
}

std::string topwords_csv(const std::vector<TopTerm>& terms, const RunStamp& stamp, const std::string& feed_id) {
  std::string out = csv_banner(stamp, feed_id) + "term,lag,weight\n";
  for (const TopTerm& t : terms) {
    std::string term = t.term;
    if (term.find_first_of(",\"\n") != std::string::npos) {
      std::string quoted = "\"";
      for (char c : term) {
        if (c == '"') quoted += '"';
        quoted += c;
      }
      term = quoted + "\"";
    }
    out += term + "," + std::to_string(t.lag) + "," + csv_value(t.weight) + "\n";
  }
  return out;
}

json model_json(const StoredModel& stored) {
  const TrainedModel& m = stored.model;
  json w_x = json::array();
  for (Index tau = 1; tau <= m.n_lags(); ++tau) w_x.push_back(to_json(m.weights.w_x.col(tau - 1)));
  json j;
  j["format_version"] = kModelFormatVersion;
  j["tool_version"] = kToolVersion;
  j["feed_id"] = stored.feed_id;
  j["corpus_hash"] = stored.corpus_hash;
  j["seed"] = stored.seed;
  j["axis_offset"] = stored.axis_offset;
  j["kernel"] = "linear";
  j["n_lags"] = m.n_lags();
  j["kappa"] = m.kcca.kappa;
  j["lambda"] = m.kcca.lambda;
  j["eigenvalue"] = m.kcca.eigenvalue;
  j["w_x"] = w_x;
  j["w_y"] = to_json(m.weights.w_y);
  j["x_mean"] = to_json(m.x_mean);
  j["y_mean"] = to_json(m.y_mean);
  j["alpha"] = to_json(m.kcca.alpha);
  j["beta"] = to_json(m.kcca.beta);
  j["train_indices"] = m.kcca.train_indices;
  return j;
}

StoredModel model_from_json(const json& j) {
  StoredModel s;
  try {
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw Error(Errc::FormatError, "unsupported model format_version: expected " +
                                         std::to_string(kModelFormatVersion) + ", found " + std::to_string(version));
    }
    if (j.at("kernel").get<std::string>() != "linear") throw Error(Errc::NonLinearKernel, "stored model is not linear");
    s.feed_id = j.at("feed_id").get<std::string>();
    s.corpus_hash = j.at("corpus_hash").get<std::string>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.axis_offset = j.at("axis_offset").get<Index>();
    TrainedModel& m = s.model;
    const auto lags = j.at("w_x");
    const Eigen::VectorXd w_y = vector_from(j.at("w_y"));
    const Index W = w_y.size();
    if (!lags.is_array() || lags.empty()) throw Error(Errc::FormatError, "model has no lag weights");
    m.weights.w_y = w_y;
    m.weights.w_x.resize(W, static_cast<Index>(lags.size()));
    for (std::size_t tau = 0; tau < lags.size(); ++tau) {
      const Eigen::VectorXd col = vector_from(lags[tau]);
      if (col.size() != W) throw Error(Errc::FormatError, "lag weights differ in length from w_y");
      m.weights.w_x.col(static_cast<Index>(tau)) = col;
    }
    m.x_mean = vector_from(j.at("x_mean"));
    m.y_mean = vector_from(j.at("y_mean"));
    if (m.x_mean.size() != W * m.n_lags() || m.y_mean.size() != W) {
      throw Error(Errc::FormatError, "model means do not match the weight shapes");
    }
    if (j.at("n_lags").get<Index>() != m.n_lags()) throw Error(Errc::FormatError, "n_lags disagrees with w_x");
    if (s.axis_offset < m.n_lags()) throw Error(Errc::FormatError, "axis_offset smaller than n_lags");
    m.kcca.n_lags = m.n_lags();
    m.kcca.kappa = j.at("kappa").get<double>();
    m.kcca.lambda = j.at("lambda").get<double>();
    m.kcca.eigenvalue = j.at("eigenvalue").get<double>();
    m.kcca.alpha = vector_from(j.at("alpha"));
    m.kcca.beta = vector_from(j.at("beta"));
    m.kcca.train_indices = j.at("train_indices").get<std::vector<Index>>();
  } catch (const json::exception& e) {
    throw Error(Errc::FormatError, std::string("model.json schema mismatch: ") + e.what());
  }
  return s;
}

std::string feed_dir_name(const std::string& feed_id) {
  std::string out = feed_id;
  for (char& c : out) {
    const bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '.' ||
                    c == '_' || c == '-';
    if (!ok) c = '_';
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

void write_analysis(const std::filesystem::path& dir, const Analysis& analysis, const PipelineConfig& config,
                    const RunStamp& stamp, double bin_hours) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::IoError, "cannot create " + dir.string() + ": " + ec.message());
  write_text(dir / "report.json", dump_canonical(report_json(analysis, config, stamp)));
  for (const FeedReport& r : analysis.feeds) {
    if (!r.has_summary) continue;
    const auto feed_dir = dir / "feeds" / feed_dir_name(r.feed_id);
    std::filesystem::create_directories(feed_dir, ec);
    if (ec) throw Error(Errc::IoError, "cannot create " + feed_dir.string() + ": " + ec.message());
    StoredModel stored{r.feed_id, stamp.corpus_hash, stamp.seed, r.axis_offset, r.summary_model};
    write_text(feed_dir / "model.json", dump_canonical(model_json(stored)));
    write_text(feed_dir / "correlogram.csv", correlogram_csv(r.correlogram, stamp, r.feed_id, bin_hours));
    write_text(feed_dir / "trend.csv", trend_csv(r.trend, stamp, r.feed_id));
    write_text(feed_dir / "topwords.csv", topwords_csv(r.top_terms, stamp, r.feed_id));
  }
}

}  // namespace ct
