#include "ct/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <numeric>
#include <thread>

#include "ct/error.hpp"
#include "ct/random.hpp"

namespace ct {
namespace {

Eigen::MatrixXd gather_cols(const Eigen::MatrixXd& m, std::span<const Index> cols, Index row_begin, Index rows) {
  Eigen::MatrixXd out(rows, static_cast<Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) out.col(static_cast<Index>(i)) = m.col(cols[i]).segment(row_begin, rows);
  return out;
}

Eigen::MatrixXd gather_cols(const Eigen::MatrixXd& m, std::span<const Index> cols) {
  return gather_cols(m, cols, 0, m.rows());
}

bool is_degenerate(const Error& e) { return e.code() == Errc::DegenerateProjection; }

std::vector<Index> iota_indices(Index n) {
  std::vector<Index> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), Index{0});
  return v;
}

[[noreturn]] void rethrow_with_context(const Error& e, const std::string& context) {
  throw Error(e.code(), context + ": " + e.detail());
}

}  // namespace

// ---------------------------------------------------------------------------

FoldPlan plan_folds(std::span<const Index> axis, Index n_folds, Index n_lags) {
  if (n_folds < 2) throw Error(Errc::InvalidArgument, "cross-validation needs at least 2 folds");
  if (n_lags < 0) throw Error(Errc::InvalidArgument, "number of lags must be non-negative");
  const auto n = static_cast<Index>(axis.size());
  if (n < n_folds * (n_lags + 2)) {
    throw Error(Errc::TooShortForFolds, std::to_string(n) + " samples cannot hold " + std::to_string(n_folds) +
                                            " folds with " + std::to_string(n_lags) + " lags (need " +
                                            std::to_string(n_folds * (n_lags + 2)) + ")");
  }
  FoldPlan plan;
  plan.n_folds = n_folds;
  plan.n_lags = n_lags;
  const Index base = n / n_folds;
  const Index extra = n % n_folds;
  Index begin = 0;
  for (Index b = 0; b < n_folds; ++b) {
    const Index end = begin + base + (b < extra ? 1 : 0);
    plan.blocks.emplace_back(begin, end);
    begin = end;
  }
  for (const auto& [b, e] : plan.blocks) {
    Fold fold;
    const Index last = axis[static_cast<std::size_t>(e - 1)];
    for (Index i = 0; i < n; ++i) {
      const Index v = axis[static_cast<std::size_t>(i)];
      if (i >= b && i < e) {
        fold.test.push_back(v);
      } else if (v > last && v <= last + n_lags) {
        fold.discarded.push_back(v);
      } else {
        fold.train.push_back(v);
      }
    }
    plan.folds.push_back(std::move(fold));
  }
  return plan;
}

FoldPlan plan_folds(Index t_eff, Index n_folds, Index n_lags) {
  if (t_eff < 0) throw Error(Errc::InvalidArgument, "axis length must be non-negative");
  const auto axis = iota_indices(t_eff);
  return plan_folds(std::span<const Index>(axis), n_folds, n_lags);
}

void HyperGrid::validate() const {
  if (lags.empty()) throw Error(Errc::BadConfig, "lag grid is empty");
  if (kappas.empty()) throw Error(Errc::BadConfig, "kappa grid is empty");
  for (Index l : lags) {
    if (l < 1) throw Error(Errc::BadConfig, "lags must be at least 1, got " + std::to_string(l));
  }
  for (double k : kappas) {
    if (!(k >= kKappaFloor) || !std::isfinite(k)) {
      throw Error(Errc::BadConfig, "kappa values must be finite and at least 1e-8");
    }
  }
}

Index HyperGrid::max_lag() const { return lags.empty() ? 0 : *std::max_element(lags.begin(), lags.end()); }

void PipelineConfig::validate() const {
  if (folds < 2) throw Error(Errc::BadConfig, "folds must be at least 2");
  if (inner_folds < 2) throw Error(Errc::BadConfig, "inner folds must be at least 2");
  if (top_terms < 1) throw Error(Errc::BadConfig, "top term count must be at least 1");
  grid.validate();
}

// ---------------------------------------------------------------------------

FeedProblem make_feed_problem(std::string feed_id, Eigen::MatrixXd x, const Eigen::MatrixXd& pool, Index max_lag) {
  if (x.rows() != pool.rows() || x.cols() != pool.cols()) {
    throw Error(Errc::ShapeMismatch, "feed and pool differ in shape");
  }
  FeedProblem p;
  p.feed_id = std::move(feed_id);
  p.offset = max_lag;
  p.embedded = temporal_embed(x, max_lag, p.feed_id);
  p.y = pool.rightCols(pool.cols() - max_lag);
  p.x = std::move(x);
  return p;
}

FeedProblem make_feed_problem(const Corpus& corpus, std::string_view feed_id, Index max_lag) {
  PooledSeries pool = pool_excluding(corpus, feed_id);
  const auto f = *corpus.feed_index(feed_id);
  return make_feed_problem(std::string(feed_id), to_dense(corpus.feeds[static_cast<std::size_t>(f)].matrix),
                           pool.matrix, max_lag);
}

TrainedModel fit_model(const FeedProblem& problem, std::span<const Index> train, Index n_lags, double kappa,
                       bool with_alpha) {
  if (n_lags < 1 || n_lags > problem.offset) {
    throw Error(Errc::InvalidArgument, "lag " + std::to_string(n_lags) + " outside 1.." + std::to_string(problem.offset));
  }
  const LinearKcca solver(problem.embedded.matrix, problem.y, train);
  const LinearKccaFit fit = solver.factor(problem.rows_begin(n_lags), n_lags * problem.num_terms()).solve(kappa, with_alpha);
  TrainedModel m;
  m.kcca = fit.model;
  m.kcca.n_lags = n_lags;
  m.weights = PrimalWeights::from_stacked(fit.w_x, problem.num_terms(), fit.w_y);
  m.x_mean = fit.x_mean;
  m.y_mean = fit.y_mean;
  return m;
}

Projections project_columns(const FeedProblem& problem, const TrainedModel& model, std::span<const Index> cols) {
  const Index rows = model.n_lags() * problem.num_terms();
  Eigen::MatrixXd xs = gather_cols(problem.embedded.matrix, cols, problem.rows_begin(model.n_lags()), rows);
  Eigen::MatrixXd ys = gather_cols(problem.y, cols);
  xs.colwise() -= model.x_mean;
  ys.colwise() -= model.y_mean;
  return {xs.transpose() * model.weights.stacked_x(), ys.transpose() * model.weights.w_y};
}

std::optional<double> test_correlation(const FeedProblem& problem, const TrainedModel& model,
                                       std::span<const Index> test) {
  const Projections p = project_columns(problem, model, test);
  return pearson(p.u, p.v);
}

std::optional<double> test_correlation(const KccaModel& model, const Eigen::MatrixXd& kx_block,
                                       const Eigen::MatrixXd& ky_block) {
  const auto [u, v] = project(model, kx_block, ky_block);
  return pearson(u, v);
}

Selection nested_select(const FeedProblem& problem, std::span<const Index> train, const HyperGrid& grid,
                        Index inner_folds) {
  grid.validate();
  std::vector<Index> lags = grid.lags;
  std::vector<double> kappas = grid.kappas;
  std::sort(lags.begin(), lags.end());
  lags.erase(std::unique(lags.begin(), lags.end()), lags.end());
  std::sort(kappas.begin(), kappas.end());
  kappas.erase(std::unique(kappas.begin(), kappas.end()), kappas.end());
  if (lags.back() > problem.offset) {
    throw Error(Errc::InvalidArgument, "grid lag exceeds the problem's embedding depth");
  }

  const FoldPlan plan = plan_folds(train, inner_folds, problem.offset);
  const Index W = problem.num_terms();
  const auto n_l = static_cast<Index>(lags.size());
  const auto n_k = static_cast<Index>(kappas.size());
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(n_l, n_k);

  for (const Fold& fold : plan.folds) {
    const LinearKcca solver(problem.embedded.matrix, problem.y, fold.train);
    const Eigen::MatrixXd xt = gather_cols(problem.embedded.matrix, fold.test);
    const Eigen::MatrixXd yt = gather_cols(problem.y, fold.test);
    for (Index li = 0; li < n_l; ++li) {
      const Index l = lags[static_cast<std::size_t>(li)];
      const Index rows = l * W;
      const LinearKccaFactor factor = solver.factor(problem.rows_begin(l), rows);
      for (Index ki = 0; ki < n_k; ++ki) {
        try {
          const LinearKccaFit fit = factor.solve(kappas[static_cast<std::size_t>(ki)], false);
          const Eigen::VectorXd u = (xt.bottomRows(rows).colwise() - fit.x_mean).transpose() * fit.w_x;
          const Eigen::VectorXd v = (yt.colwise() - fit.y_mean).transpose() * fit.w_y;
          if (const auto r = pearson(u, v)) sums(li, ki) += *r;
        } catch (const Error& e) {
          if (!is_degenerate(e)) throw;
        }
      }
    }
  }

  Selection sel;
  sel.mean_scores = sums / static_cast<double>(plan.folds.size());
  double best = -std::numeric_limits<double>::infinity();
  for (Index li = 0; li < n_l; ++li) {
    for (Index ki = n_k - 1; ki >= 0; --ki) {
      if (sel.mean_scores(li, ki) > best) {
        best = sel.mean_scores(li, ki);
        sel.n_lags = lags[static_cast<std::size_t>(li)];
        sel.kappa = kappas[static_cast<std::size_t>(ki)];
      }
    }
  }
  sel.score = best;
  return sel;
}

std::vector<CorrelogramPoint> canonical_correlogram(const FeedProblem& problem, const TrainedModel& model,
                                                    std::span<const Index> eval) {
  const Index W = problem.num_terms();
  const Index n = model.n_lags();
  Eigen::MatrixXd ys = gather_cols(problem.y, eval);
  ys.colwise() -= model.y_mean;
  const Eigen::VectorXd b = ys.transpose() * model.weights.w_y;
  std::vector<CorrelogramPoint> out;
  for (Index tau = 1; tau <= n; ++tau) {
    Eigen::MatrixXd xs = gather_cols(problem.embedded.matrix, eval, problem.embedded.lag_row(tau), W);
    xs.colwise() -= model.x_mean.segment((n - tau) * W, W);
    const Eigen::VectorXd a = xs.transpose() * model.weights.w_x.col(tau - 1);
    out.push_back({tau, pearson(a, b)});
  }
  return out;
}

Trend emit_trend(const FeedProblem& problem, const TrainedModel& model, std::span<const Index> eval) {
  Projections p = project_columns(problem, model, eval);
  const double nv = p.v.norm();
  const double nu = p.u.norm();
  if (!(nv > 0) || !(nu > 0)) throw Error(Errc::DegenerateProjection, "trend is identically zero");
  Trend t;
  for (Index j : eval) t.t.push_back(j + problem.offset);
  t.canonical = p.v / nv;
  t.predicted = p.u / nu;
  return t;
}

std::vector<TopTerm> top_terms(const PrimalWeights& weights, const Vocabulary& vocabulary, Index k) {
  const Index W = weights.w_x.rows();
  if (vocabulary.size() != W) throw Error(Errc::ShapeMismatch, "weights do not match the vocabulary");
  const Eigen::VectorXd mass = weights.w_x.cwiseAbs().rowwise().sum();
  std::vector<Index> order;
  for (Index w = 0; w < W; ++w) {
    if (mass(w) > 0) order.push_back(w);
  }
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return mass(a) > mass(b); });
  if (static_cast<Index>(order.size()) > k) order.resize(static_cast<std::size_t>(k));

  std::vector<TopTerm> out;
  double scale = 0.0;
  for (Index w : order) {
    for (Index tau = 1; tau <= weights.w_x.cols(); ++tau) {
      const double value = weights.w_x(w, tau - 1);
      if (std::abs(value) > std::abs(scale)) scale = value;
      out.push_back({vocabulary.term(w), tau, value});
    }
  }
  if (scale != 0.0) {
    for (TopTerm& t : out) t.weight /= scale;
  }
  return out;
}

// ---------------------------------------------------------------------------

Eigen::VectorXd lsa_direction(const Eigen::MatrixXd& samples) {
  const Index d = samples.rows();
  const Index n = samples.cols();
  if (d == 0 || n == 0) throw Error(Errc::DegenerateProjection, "no samples for LSA");
  Eigen::VectorXd v;
  if (d <= n) {
    Eigen::MatrixXd g = samples * samples.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (g + g.transpose()));
    if (solver.info() != Eigen::Success) throw Error(Errc::NumericalFailure, "LSA eigensolve did not converge");
    v = solver.eigenvectors().col(d - 1);
  } else {
    Eigen::MatrixXd g = samples.transpose() * samples;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (g + g.transpose()));
    if (solver.info() != Eigen::Success) throw Error(Errc::NumericalFailure, "LSA eigensolve did not converge");
    v = samples * solver.eigenvectors().col(n - 1);
  }
  const double norm = v.norm();
  if (!(norm > 0) || samples.squaredNorm() == 0.0) throw Error(Errc::DegenerateProjection, "LSA input is all zeros");
  v /= norm;
  Index best = 0;
  for (Index i = 1; i < v.size(); ++i) {
    if (std::abs(v(i)) > std::abs(v(best))) best = i;
  }
  if (v(best) < 0) v = -v;
  return v;
}

BaselineScores lsa_baseline(const FeedProblem& problem, const FoldPlan& plan, std::span<const Index> lags) {
  for (Index l : lags) {
    if (l < 1 || l > problem.offset) throw Error(Errc::InvalidArgument, "LSA lag outside the embedding depth");
  }
  BaselineScores out;
  out.per_lag = Eigen::MatrixXd::Constant(static_cast<Index>(plan.folds.size()), static_cast<Index>(lags.size()),
                                          std::numeric_limits<double>::quiet_NaN());
  for (std::size_t k = 0; k < plan.folds.size(); ++k) {
    const Fold& fold = plan.folds[k];
    std::optional<double> best;
    try {
      std::vector<Index> raw_train;
      for (Index j : fold.train) raw_train.push_back(j + problem.offset);
      const Eigen::VectorXd vx = lsa_direction(gather_cols(problem.x, raw_train));
      const Eigen::VectorXd vy = lsa_direction(gather_cols(problem.y, fold.train));
      const Eigen::VectorXd b = gather_cols(problem.y, fold.test).transpose() * vy;
      for (std::size_t li = 0; li < lags.size(); ++li) {
        std::vector<Index> shifted;
        for (Index j : fold.test) shifted.push_back(j + problem.offset - lags[li]);
        const Eigen::VectorXd a = gather_cols(problem.x, shifted).transpose() * vx;
        if (const auto r = pearson(a, b)) {
          out.per_lag(static_cast<Index>(k), static_cast<Index>(li)) = *r;
          if (!best || *r > *best) best = r;
        }
      }
    } catch (const Error& e) {
      if (!is_degenerate(e)) throw;
    }
    out.fold_scores.push_back(best.value_or(0.0));
    out.degenerate.push_back(!best.has_value());
  }
  return out;
}

Eigen::MatrixXd shuffle_columns(const Eigen::MatrixXd& x, std::uint64_t seed) {
  Rng rng(seed);
  const auto n = static_cast<std::size_t>(x.cols());
  std::vector<std::size_t> perm = rng.permutation(n);
  auto identity = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      if (perm[i] != i) return false;
    }
    return true;
  };
  while (n > 5 && identity()) perm = rng.permutation(n);
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (std::size_t i = 0; i < n; ++i) out.col(static_cast<Index>(i)) = x.col(static_cast<Index>(perm[i]));
  return out;
}

FeedProblem shuffled_problem(const FeedProblem& problem, std::uint64_t seed) {
  FeedProblem p;
  p.feed_id = problem.feed_id;
  p.offset = problem.offset;
  p.x = shuffle_columns(problem.x, derive_seed(seed, "shuffle:" + problem.feed_id));
  p.embedded = temporal_embed(p.x, p.offset, p.feed_id);
  p.y = problem.y;
  return p;
}

// ---------------------------------------------------------------------------

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw Error(Errc::InvalidArgument, "percentile of an empty list");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

Percentiles percentiles(const std::vector<double>& values) {
  return {percentile(values, 0.25), percentile(values, 0.50), percentile(values, 0.75)};
}

FoldOutcome evaluate_fold(const FeedProblem& problem, const Fold& fold, const PipelineConfig& config) {
  const Selection sel = nested_select(problem, fold.train, config.grid, config.inner_folds);
  FoldOutcome out;
  out.chosen = {sel.n_lags, sel.kappa};
  try {
    const TrainedModel model = fit_model(problem, fold.train, sel.n_lags, sel.kappa, false);
    out.train_lambda = model.kcca.lambda;
    const auto r = test_correlation(problem, model, fold.test);
    out.score = r.value_or(0.0);
    out.degenerate = !r.has_value();
  } catch (const Error& e) {
    if (!is_degenerate(e)) throw;
    out.degenerate = true;
  }
  return out;
}

HyperChoice most_frequent_choice(const std::vector<HyperChoice>& choices) {
  if (choices.empty()) throw Error(Errc::InvalidArgument, "no hyperparameter choices");
  // Key order: smaller lag first, then larger kappa.
  std::map<std::pair<Index, double>, int> counts;
  for (const HyperChoice& c : choices) ++counts[{c.n_lags, -c.kappa}];
  auto best = counts.begin();
  for (auto it = counts.begin(); it != counts.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return {best->first.first, -best->first.second};
}

BaselineScores shuffle_control(const Corpus& corpus, std::string_view feed_id, const PipelineConfig& config) {
  config.validate();
  const FeedProblem base = make_feed_problem(corpus, feed_id, config.grid.max_lag());
  const FeedProblem shuffled = shuffled_problem(base, config.seed);
  const FoldPlan plan = plan_folds(shuffled.t_eff(), config.folds, shuffled.offset);
  BaselineScores out;
  for (const Fold& fold : plan.folds) {
    const FoldOutcome o = evaluate_fold(shuffled, fold, config);
    out.fold_scores.push_back(o.score);
    out.degenerate.push_back(o.degenerate);
  }
  return out;
}

Ranking rank_feeds(std::span<const FeedReport> reports) {
  Ranking r;
  for (const FeedReport& f : reports) r.entries.push_back({f.feed_id, f.mean});
  std::sort(r.entries.begin(), r.entries.end(), [](const RankEntry& a, const RankEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.feed_id < b.feed_id;
  });
  return r;
}

void run_tasks(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  auto guarded = [&](std::size_t i) {
    try {
      fn(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const std::size_t workers = std::min<std::size_t>(std::max(1u, jobs), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) guarded(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) guarded(i);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

Analysis analyze_corpus(const Corpus& corpus, const PipelineConfig& config) {
  config.validate();
  std::vector<std::string> feed_ids = config.feeds;
  if (feed_ids.empty()) {
    for (const FeedSeries& f : corpus.feeds) feed_ids.push_back(f.feed_id);
  }
  for (const std::string& id : feed_ids) {
    if (!corpus.feed_index(id)) throw Error(Errc::UnknownFeed, "no feed named '" + id + "'");
  }
  if (corpus.num_feeds() < 2) {
    throw Error(Errc::NotEnoughFeeds, "analysis needs at least two feeds, corpus has " +
                                          std::to_string(corpus.num_feeds()));
  }
  const Index max_lag = config.grid.max_lag();
  if (corpus.num_bins <= max_lag) {
    throw Error(Errc::SeriesTooShort, "corpus has " + std::to_string(corpus.num_bins) + " bins, lag grid needs more than " +
                                          std::to_string(max_lag));
  }
  const FoldPlan plan = plan_folds(corpus.num_bins - max_lag, config.folds, max_lag);
  const std::size_t n_feeds = feed_ids.size();
  const auto n_folds = static_cast<std::size_t>(config.folds);

  std::vector<FeedProblem> problems(n_feeds);
  std::vector<FeedProblem> shuffled(config.shuffle_control ? n_feeds : 0);
  run_tasks(n_feeds, config.jobs, [&](std::size_t f) {
    problems[f] = make_feed_problem(corpus, feed_ids[f], max_lag);
    if (config.shuffle_control) shuffled[f] = shuffled_problem(problems[f], config.seed);
  });

  // Task layout: [CT folds | shuffled folds], feed-major, fold-minor.
  const std::size_t per_kind = n_feeds * n_folds;
  std::vector<FoldOutcome> outcomes(per_kind * (config.shuffle_control ? 2 : 1));
  run_tasks(outcomes.size(), config.jobs, [&](std::size_t i) {
    const bool is_shuffle = i >= per_kind;
    const std::size_t f = (i % per_kind) / n_folds;
    const std::size_t k = i % n_folds;
    try {
      outcomes[i] = evaluate_fold(is_shuffle ? shuffled[f] : problems[f], plan.folds[k], config);
    } catch (const Error& e) {
      rethrow_with_context(e, std::string(is_shuffle ? "shuffle control, " : "") + "feed '" + feed_ids[f] +
                                  "' fold " + std::to_string(k + 1));
    }
  });

  Analysis analysis;
  analysis.feeds.resize(n_feeds);
  run_tasks(n_feeds, config.jobs, [&](std::size_t f) {
    FeedReport& r = analysis.feeds[f];
    const FeedProblem& problem = problems[f];
    r.feed_id = feed_ids[f];
    r.axis_offset = max_lag;
    for (std::size_t k = 0; k < n_folds; ++k) {
      const FoldOutcome& o = outcomes[f * n_folds + k];
      r.fold_correlations.push_back(o.score);
      r.degenerate_folds.push_back(o.degenerate);
      r.chosen.push_back(o.chosen);
      r.train_lambdas.push_back(o.train_lambda);
    }
    r.percentiles = percentiles(r.fold_correlations);
    r.mean = std::accumulate(r.fold_correlations.begin(), r.fold_correlations.end(), 0.0) /
             static_cast<double>(n_folds);

    try {
      r.summary_choice = most_frequent_choice(r.chosen);
      const auto axis = iota_indices(problem.t_eff());
      r.summary_model = fit_model(problem, axis, r.summary_choice.n_lags, r.summary_choice.kappa, true);
      r.correlogram = canonical_correlogram(problem, r.summary_model, axis);
      r.trend = emit_trend(problem, r.summary_model, axis);
      r.top_terms = top_terms(r.summary_model.weights, corpus.vocabulary, config.top_terms);
      r.has_summary = true;
    } catch (const Error& e) {
      if (!is_degenerate(e)) rethrow_with_context(e, "feed '" + r.feed_id + "' summary model");
      r.has_summary = false;
      r.correlogram.clear();
      r.top_terms.clear();
      r.trend = {};
    }

    if (config.lsa_baseline) {
      std::vector<Index> lags = config.grid.lags;
      std::sort(lags.begin(), lags.end());
      lags.erase(std::unique(lags.begin(), lags.end()), lags.end());
      r.lsa = lsa_baseline(problem, plan, lags);
    }
    if (config.shuffle_control) {
      BaselineScores s;
      for (std::size_t k = 0; k < n_folds; ++k) {
        const FoldOutcome& o = outcomes[per_kind + f * n_folds + k];
        s.fold_scores.push_back(o.score);
        s.degenerate.push_back(o.degenerate);
      }
      r.shuffled = std::move(s);
    }
  });
  analysis.ranking = rank_feeds(analysis.feeds);
  return analysis;
}

}  // namespace ct
