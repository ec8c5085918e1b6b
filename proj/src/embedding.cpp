#include "ct/embedding.hpp"

#include "ct/error.hpp"

namespace ct {

Eigen::MatrixXd to_dense(const SparseSeries& series) { return Eigen::MatrixXd(series); }

PooledSeries pool_excluding(const Corpus& corpus, std::string_view feed_id) {
  if (corpus.num_feeds() < 2) {
    throw Error(Errc::NotEnoughFeeds, "pooling needs at least two feeds, corpus has " +
                                          std::to_string(corpus.num_feeds()));
  }
  const auto excluded = corpus.feed_index(feed_id);
  if (!excluded) throw Error(Errc::UnknownFeed, "no feed named '" + std::string(feed_id) + "'");

  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(corpus.num_terms(), corpus.num_bins);
  for (Index f = 0; f < corpus.num_feeds(); ++f) {
    if (f == *excluded) continue;
    sum += corpus.feeds[static_cast<std::size_t>(f)].matrix;
  }
  sum /= static_cast<double>(corpus.num_feeds() - 1);
  return {std::string(feed_id), std::move(sum)};
}

EmbeddedMatrix temporal_embed(const Eigen::MatrixXd& series, Index n_lags, std::string feed_id) {
  if (n_lags < 1) throw Error(Errc::InvalidArgument, "number of lags must be at least 1");
  const Index W = series.rows();
  const Index T = series.cols();
  if (T <= n_lags) {
    throw Error(Errc::SeriesTooShort,
                "series of length " + std::to_string(T) + " cannot be embedded with " + std::to_string(n_lags) + " lags");
  }
  EmbeddedMatrix out;
  out.feed_id = std::move(feed_id);
  out.n_lags = n_lags;
  out.num_terms = W;
  out.matrix.resize(W * n_lags, T - n_lags);
  for (Index b = 0; b < n_lags; ++b) {
    out.matrix.middleRows(b * W, W) = series.middleCols(b, T - n_lags);
  }
  return out;
}

EmbeddedMatrix temporal_embed(const FeedSeries& series, Index n_lags) {
  return temporal_embed(to_dense(series.matrix), n_lags, series.feed_id);
}

Eigen::MatrixXd trim_pool(const PooledSeries& pool, Index n_lags) {
  if (n_lags < 1) throw Error(Errc::InvalidArgument, "number of lags must be at least 1");
  if (pool.matrix.cols() <= n_lags) {
    throw Error(Errc::SeriesTooShort, "pool of length " + std::to_string(pool.matrix.cols()) +
                                          " cannot be trimmed by " + std::to_string(n_lags));
  }
  return pool.matrix.rightCols(pool.matrix.cols() - n_lags);
}

}  // namespace ct
