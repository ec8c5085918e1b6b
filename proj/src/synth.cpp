#include "ct/synth.hpp"

#include <cmath>
#include <cstdio>

#include "ct/error.hpp"
#include "ct/random.hpp"

namespace ct {
namespace {

[[noreturn]] void bad_config(const std::string& what) { throw Error(Errc::BadConfig, what); }

SparseSeries sparse_from_dense(const Eigen::MatrixXd& dense) { return dense.sparseView(0.0, 0.0); }

Instant synthetic_t0() { return parse_rfc3339("2010-04-14T00:00:00Z"); }

std::string padded(const char* prefix, Index i, Index count) {
  const int width = count > 100 ? 3 : 2;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*lld", prefix, width, static_cast<long long>(i));
  return buf;
}

}  // namespace

void ToyConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) bad_config("gamma must lie in (0, 1]");
  if (lag < 1) bad_config("lag must be at least 1");
  if (T < 1 || 4 * lag >= T) bad_config("lag must be below T/4");
  if (w_x.norm() == 0.0 || w_y.norm() == 0.0) bad_config("trend weights must be non-zero");
}

ToyData generate_toy(const ToyConfig& config) {
  config.validate();
  Rng rng(config.seed);
  ToyData out;
  out.latent.resize(config.T + config.lag);
  for (Index i = 0; i < out.latent.size(); ++i) out.latent(i) = rng.normal();

  const double noise = std::sqrt(1.0 - config.gamma);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(6, config.T);
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(6, config.T);
  for (Index t = 0; t < config.T; ++t) {
    for (Index w = 0; w < 3; ++w) {
      x(w, t) = config.gamma * config.w_x(w) * out.latent(t + config.lag) + noise * rng.normal();
    }
  }
  for (Index t = 0; t < config.T; ++t) {
    for (Index w = 0; w < 3; ++w) {
      y(3 + w, t) = config.gamma * config.w_y(w) * out.latent(t) + noise * rng.normal();
    }
  }

  Corpus& c = out.corpus;
  c.vocabulary = Vocabulary(kToyTerms);
  c.t0 = synthetic_t0();
  c.num_bins = config.T;
  c.synthetic = true;
  c.feeds.push_back({"X", sparse_from_dense(x)});
  c.feeds.push_back({"Y", sparse_from_dense(y)});
  return out;
}

void LeaderConfig::validate() const {
  if (F < 3) bad_config("leader corpora need at least 3 feeds");
  if (W < 1) bad_config("W must be at least 1");
  if (leader_lag < 1) bad_config("leader_lag must be at least 1");
  if (T < 1 || 4 * (leader_lag + 1) >= T) bad_config("leader_lag must be below T/4");
  if (!(trend_sparsity > 0.0 && trend_sparsity <= 1.0)) bad_config("trend_sparsity must lie in (0, 1]");
  if (!(gamma > 0.0 && gamma <= 1.0)) bad_config("gamma must lie in (0, 1]");
}

LeaderData generate_leader(const LeaderConfig& config) {
  config.validate();
  Rng rng(config.seed);
  LeaderData out;
  out.leader = static_cast<Index>(rng.below(static_cast<std::uint64_t>(config.F)));

  const Index support_size =
      std::max<Index>(1, static_cast<Index>(std::llround(config.trend_sparsity * static_cast<double>(config.W))));
  for (Index f = 0; f < config.F; ++f) {
    // Partial Fisher-Yates over the term indices.
    std::vector<Index> terms(static_cast<std::size_t>(config.W));
    for (Index w = 0; w < config.W; ++w) terms[static_cast<std::size_t>(w)] = w;
    for (Index i = 0; i < support_size; ++i) {
      const auto j = i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(config.W - i)));
      std::swap(terms[static_cast<std::size_t>(i)], terms[static_cast<std::size_t>(j)]);
    }
    std::vector<Index> support(terms.begin(), terms.begin() + support_size);
    std::sort(support.begin(), support.end());

    Eigen::VectorXd load = Eigen::VectorXd::Zero(config.W);
    for (Index w : support) load(w) = 0.5 + 0.5 * rng.uniform();
    load.normalize();

    const Index jitter = static_cast<Index>(rng.below(2));
    out.support.push_back(std::move(support));
    out.loadings.push_back(std::move(load));
    out.delay.push_back(f == out.leader ? 0 : config.leader_lag - jitter);
  }

  // s(t) lives at latent(t + leader_lag) so followers can look leader_lag bins back.
  Eigen::VectorXd latent(config.T + config.leader_lag);
  for (Index i = 0; i < latent.size(); ++i) latent(i) = rng.normal();

  const double noise = std::sqrt(1.0 - config.gamma);
  Corpus& c = out.corpus;
  std::vector<std::string> terms;
  for (Index w = 0; w < config.W; ++w) terms.push_back(padded("term", w, config.W));
  c.vocabulary = Vocabulary(std::move(terms));
  c.t0 = synthetic_t0();
  c.num_bins = config.T;
  c.synthetic = true;
  for (Index f = 0; f < config.F; ++f) {
    const auto fi = static_cast<std::size_t>(f);
    Eigen::MatrixXd x(config.W, config.T);
    for (Index t = 0; t < config.T; ++t) {
      const double s = latent(t + config.leader_lag - out.delay[fi]);
      for (Index w = 0; w < config.W; ++w) x(w, t) = config.gamma * out.loadings[fi](w) * s + noise * rng.normal();
    }
    c.feeds.push_back({padded("feed", f, config.F), sparse_from_dense(x)});
  }
  return out;
}

nlohmann::json gen_json(const ToyConfig& config) {
  nlohmann::json j;
  j["mode"] = "toy";
  j["T"] = config.T;
  j["gamma"] = config.gamma;
  j["lag"] = config.lag;
  j["w_x"] = {config.w_x(0), config.w_x(1), config.w_x(2)};
  j["w_y"] = {config.w_y(0), config.w_y(1), config.w_y(2)};
  j["seed"] = config.seed;
  j["leader"] = "X";
  return j;
}

nlohmann::json gen_json(const LeaderConfig& config, const LeaderData& data) {
  nlohmann::json j;
  j["mode"] = "leader";
  j["F"] = config.F;
  j["W"] = config.W;
  j["T"] = config.T;
  j["leader_lag"] = config.leader_lag;
  j["trend_sparsity"] = config.trend_sparsity;
  j["gamma"] = config.gamma;
  j["seed"] = config.seed;
  j["leader"] = data.corpus.feeds[static_cast<std::size_t>(data.leader)].feed_id;
  auto feeds = nlohmann::json::array();
  for (std::size_t f = 0; f < data.support.size(); ++f) {
    nlohmann::json feed;
    feed["id"] = data.corpus.feeds[f].feed_id;
    feed["delay"] = data.delay[f];
    auto support = nlohmann::json::array();
    for (Index w : data.support[f]) support.push_back(data.corpus.vocabulary.term(w));
    feed["support"] = support;
    feeds.push_back(feed);
  }
  j["feeds"] = feeds;
  return j;
}

}  // namespace ct
