#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ct/corpus.hpp"
#include "ct/embedding.hpp"
#include "ct/kcca.hpp"

namespace ct {

// ---------------------------------------------------------------------------
// Blocked cross-validation

struct Fold {
  std::vector<Index> test;
  std::vector<Index> train;
  std::vector<Index> discarded;
};

/// Contiguous blocks of an index axis. Block sizes follow the usual
/// "first (n mod k) blocks get one extra element" split. Training values in
/// (last test value, last test value + n_lags] are discarded because their
/// lag window overlaps the test block.
struct FoldPlan {
  Index n_folds = 0;
  Index n_lags = 0;
  std::vector<std::pair<Index, Index>> blocks;  // [begin, end) positions in the axis
  std::vector<Fold> folds;
};

/// Plan over the axis 0 .. t_eff - 1. Throws TooShortForFolds when t_eff < n_folds * (n_lags + 2).
FoldPlan plan_folds(Index t_eff, Index n_folds, Index n_lags);
/// Plan over an arbitrary sorted index list (used for the inner folds).
FoldPlan plan_folds(std::span<const Index> axis, Index n_folds, Index n_lags);

struct HyperGrid {
  std::vector<Index> lags{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<double> kappas{1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1e0, 1e1};

  void validate() const;  // throws BadConfig
  Index max_lag() const;
};

struct PipelineConfig {
  Index folds = 10;
  Index inner_folds = 10;
  HyperGrid grid;
  std::uint64_t seed = 42;
  bool lsa_baseline = false;
  bool shuffle_control = false;
  unsigned jobs = 1;
  Index top_terms = 3;
  std::vector<std::string> feeds;  // empty = all feeds

  void validate() const;  // throws BadConfig
};

// ---------------------------------------------------------------------------
// One feed's learning problem

/// Everything needed to fit feed f against the pool of the other feeds.
/// Index j on the trimmed axis is absolute time j + offset where offset is the
/// largest grid lag, so all lag settings share one axis.
struct FeedProblem {
  std::string feed_id;
  Index offset = 0;
  Eigen::MatrixXd x;         // raw feed, W x T
  EmbeddedMatrix embedded;   // lag-stacked feed at `offset` lags
  Eigen::MatrixXd y;         // pool on the trimmed axis, W x (T - offset)

  Index num_terms() const { return x.rows(); }
  Index t_eff() const { return y.cols(); }
  /// Rows of the embedded matrix belonging to lags 1..n_lags.
  Index rows_begin(Index n_lags) const { return embedded.lag_row(n_lags); }
};

FeedProblem make_feed_problem(const Corpus& corpus, std::string_view feed_id, Index max_lag);
FeedProblem make_feed_problem(std::string feed_id, Eigen::MatrixXd x, const Eigen::MatrixXd& pool, Index max_lag);

struct TrainedModel {
  KccaModel kcca;
  PrimalWeights weights;
  Eigen::VectorXd x_mean;  // stacked training mean for lags 1..n_lags
  Eigen::VectorXd y_mean;

  Index n_lags() const { return weights.w_x.cols(); }
};

/// Fits on the given trimmed-axis columns. Reads nothing outside `train`.
TrainedModel fit_model(const FeedProblem& problem, std::span<const Index> train, Index n_lags, double kappa,
                       bool with_alpha = true);

struct Projections {
  Eigen::VectorXd u;  // feed side, sum over lags of w_x(tau)^T x(t - tau)
  Eigen::VectorXd v;  // pool side, w_y^T y(t)
};

/// Projections of trimmed-axis columns, centered with the training means.
Projections project_columns(const FeedProblem& problem, const TrainedModel& model, std::span<const Index> cols);

/// Pearson correlation of the projected test series; nullopt when degenerate.
std::optional<double> test_correlation(const FeedProblem& problem, const TrainedModel& model,
                                       std::span<const Index> test);
/// Same score from centered train x test kernel blocks.
std::optional<double> test_correlation(const KccaModel& model, const Eigen::MatrixXd& kx_block,
                                       const Eigen::MatrixXd& ky_block);

struct Selection {
  Index n_lags = 0;
  double kappa = 0.0;
  double score = 0.0;
  Eigen::MatrixXd mean_scores;  // lags x kappas, grid order
};

/// Inner blocked CV on `train` (trimmed-axis indices). Maximizes the mean
/// inner test correlation; ties go to the smaller lag, then the larger kappa.
Selection nested_select(const FeedProblem& problem, std::span<const Index> train, const HyperGrid& grid,
                        Index inner_folds);

struct CorrelogramPoint {
  Index tau = 0;
  std::optional<double> rho;
};

/// rho(tau) = corr_t(w_x(tau)^T x(t - tau), w_y^T y(t)) over the given trimmed-axis indices.
std::vector<CorrelogramPoint> canonical_correlogram(const FeedProblem& problem, const TrainedModel& model,
                                                    std::span<const Index> eval);

struct Trend {
  std::vector<Index> t;             // absolute bin index
  Eigen::VectorXd canonical;        // w_y^T y(t), unit sum of squares
  Eigen::VectorXd predicted;        // convolutional prediction, unit sum of squares
};

/// Throws DegenerateProjection when either series is identically zero.
Trend emit_trend(const FeedProblem& problem, const TrainedModel& model, std::span<const Index> eval);

struct TopTerm {
  std::string term;
  Index lag = 0;
  double weight = 0.0;
};

/// The k terms with the largest summed |w_x| over lags, one entry per lag,
/// scaled so the largest-magnitude emitted weight is exactly 1.
std::vector<TopTerm> top_terms(const PrimalWeights& weights, const Vocabulary& vocabulary, Index k);

// ---------------------------------------------------------------------------
// Baselines

/// Unit top eigenvector of A A^T (A uncentered, columns are samples), with
/// the largest-magnitude entry positive. Uses the smaller Gram matrix.
Eigen::VectorXd lsa_direction(const Eigen::MatrixXd& samples);

struct BaselineScores {
  std::vector<double> fold_scores;
  std::vector<bool> degenerate;
  Eigen::MatrixXd per_lag;  // folds x lags (LSA only); NaN where undefined
};

BaselineScores lsa_baseline(const FeedProblem& problem, const FoldPlan& plan, std::span<const Index> lags);

/// Columns permuted uniformly at random; redrawn while the permutation is the
/// identity and there are more than 5 columns.
Eigen::MatrixXd shuffle_columns(const Eigen::MatrixXd& x, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Pipeline

struct Percentiles {
  double p25 = 0.0, p50 = 0.0, p75 = 0.0;
};

/// Linear interpolation between order statistics at position p * (n - 1).
double percentile(std::vector<double> values, double p);
Percentiles percentiles(const std::vector<double>& values);

struct HyperChoice {
  Index n_lags = 0;
  double kappa = 0.0;

  friend bool operator==(const HyperChoice&, const HyperChoice&) = default;
};

struct FoldOutcome {
  double score = 0.0;
  bool degenerate = false;
  HyperChoice chosen;
  double train_lambda = 0.0;
};

/// Selects hyperparameters on the fold's training block, refits, scores the test block.
FoldOutcome evaluate_fold(const FeedProblem& problem, const Fold& fold, const PipelineConfig& config);

struct FeedReport {
  std::string feed_id;
  std::vector<double> fold_correlations;
  std::vector<bool> degenerate_folds;
  Percentiles percentiles;
  double mean = 0.0;
  std::vector<HyperChoice> chosen;
  std::vector<double> train_lambdas;

  /// Model refit on the whole trimmed axis with the most frequent fold choice.
  /// Unavailable when that fit is degenerate (e.g. a silent feed).
  bool has_summary = false;
  HyperChoice summary_choice;
  TrainedModel summary_model;
  Index axis_offset = 0;
  std::vector<CorrelogramPoint> correlogram;
  Trend trend;
  std::vector<TopTerm> top_terms;

  std::optional<BaselineScores> lsa;
  std::optional<BaselineScores> shuffled;
};

/// Most frequent choice; ties go to the smaller lag, then the larger kappa.
HyperChoice most_frequent_choice(const std::vector<HyperChoice>& choices);

/// Copy of the problem whose feed columns are permuted in time with a seed
/// derived from (seed, feed id); the pool is untouched.
FeedProblem shuffled_problem(const FeedProblem& problem, std::uint64_t seed);

/// Identical CT pipeline on the time-shuffled feed, one score per outer fold.
BaselineScores shuffle_control(const Corpus& corpus, std::string_view feed_id, const PipelineConfig& config);

struct RankEntry {
  std::string feed_id;
  double score = 0.0;
};

struct Ranking {
  std::vector<RankEntry> entries;
};

/// Descending mean fold correlation; equal scores in ascending feed id order.
Ranking rank_feeds(std::span<const FeedReport> reports);

struct Analysis {
  std::vector<FeedReport> feeds;
  Ranking ranking;
};

/// Full pipeline over every feed (or config.feeds). Output does not depend on config.jobs.
Analysis analyze_corpus(const Corpus& corpus, const PipelineConfig& config);

/// Runs fn(i) for i in [0, n) on up to `jobs` threads; exceptions are rethrown
/// in task order after all tasks finished.
void run_tasks(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn);

}  // namespace ct
