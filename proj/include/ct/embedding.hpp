#pragma once

#include <Eigen/Dense>
#include <string>
#include <string_view>

#include "ct/corpus.hpp"

namespace ct {

/// Entrywise mean of every feed except one.
struct PooledSeries {
  std::string excluded_feed;
  Eigen::MatrixXd matrix;  // W x T
};

/// Lag-stacked copy of a W x T series.
///
/// Row block b (rows [b*W, (b+1)*W)) holds lag tau = n_lags - b, so the top
/// block is the oldest sample and the bottom block is x(t-1). Column j belongs
/// to absolute time t = j + n_lags and contains x(t - n_lags) ... x(t - 1).
struct EmbeddedMatrix {
  std::string feed_id;
  Index n_lags = 0;
  Index num_terms = 0;
  Eigen::MatrixXd matrix;  // (W * n_lags) x (T - n_lags)

  Index valid_offset() const { return n_lags; }
  /// First row of the block holding lag tau (1 <= tau <= n_lags).
  Index lag_row(Index tau) const { return (n_lags - tau) * num_terms; }
};

Eigen::MatrixXd to_dense(const SparseSeries& series);

/// Throws NotEnoughFeeds when F < 2 and UnknownFeed for a missing id.
PooledSeries pool_excluding(const Corpus& corpus, std::string_view feed_id);

/// Throws InvalidArgument for n_lags < 1 and SeriesTooShort when T <= n_lags.
EmbeddedMatrix temporal_embed(const Eigen::MatrixXd& series, Index n_lags, std::string feed_id = {});
EmbeddedMatrix temporal_embed(const FeedSeries& series, Index n_lags);

/// Drops the first n_lags columns so column j is absolute time j + n_lags.
Eigen::MatrixXd trim_pool(const PooledSeries& pool, Index n_lags);

}  // namespace ct
