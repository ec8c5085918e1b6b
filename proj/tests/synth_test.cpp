#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ct/embedding.hpp"
#include "ct/error.hpp"
#include "ct/synth.hpp"

using namespace ct;

namespace {

template <class Config>
Errc config_error(const Config& cfg) {
  try {
    cfg.validate();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::InvalidArgument;
}

double sample_variance(const Eigen::ArrayXd& v) {
  const double m = v.mean();
  return (v - m).square().sum() / static_cast<double>(v.size() - 1);
}

}  // namespace

TEST_CASE("toy data without noise is the shifted trend") {
  ToyConfig cfg;
  cfg.gamma = 1.0;
  cfg.T = 200;
  const ToyData d = generate_toy(cfg);
  const Eigen::MatrixXd x = to_dense(d.corpus.feeds[0].matrix);
  const Eigen::MatrixXd y = to_dense(d.corpus.feeds[1].matrix);
  for (Index t = 0; t < cfg.T; ++t) {
    CHECK(x.col(t).head(3) == cfg.w_x * d.latent(t + cfg.lag));
    CHECK(y.col(t).tail(3) == cfg.w_y * d.latent(t));
  }
  // Feed X at time t shows what feed Y shows at time t + lag.
  for (Index t = 0; t + cfg.lag < cfg.T; ++t) {
    CHECK(x(1, t) / cfg.w_x(1) == doctest::Approx(y(3, t + cfg.lag) / cfg.w_y(0)));
  }
}

TEST_CASE("toy corpus layout") {
  const ToyData d = generate_toy(ToyConfig{});
  const Corpus& c = d.corpus;
  CHECK(c.vocabulary.terms() == std::vector<std::string>{"Phone", "Volcano", "Airplane", "Cloud", "iPad", "Ash"});
  REQUIRE(c.num_feeds() == 2);
  CHECK(c.feeds[0].feed_id == "X");
  CHECK(c.feeds[1].feed_id == "Y");
  CHECK(c.synthetic);
  CHECK(c.normalization == Normalization::Counts);
  CHECK(c.num_bins == 2000);
  CHECK_NOTHROW(c.validate());
  const Eigen::MatrixXd x = to_dense(c.feeds[0].matrix);
  const Eigen::MatrixXd y = to_dense(c.feeds[1].matrix);
  CHECK(x.bottomRows(3).cwiseAbs().maxCoeff() == 0.0);
  CHECK(y.topRows(3).cwiseAbs().maxCoeff() == 0.0);
  CHECK(x.minCoeff() < 0.0);
}

TEST_CASE("toy generation is deterministic in the seed") {
  ToyConfig a;
  a.seed = 99;
  CHECK(generate_toy(a).corpus == generate_toy(a).corpus);
  ToyConfig b = a;
  b.seed = 100;
  CHECK_FALSE(generate_toy(a).corpus == generate_toy(b).corpus);
}

TEST_CASE("toy residuals carry the configured noise scale") {
  for (double gamma : {0.9, 0.5}) {
    ToyConfig cfg;
    cfg.gamma = gamma;
    cfg.seed = 5;
    const ToyData d = generate_toy(cfg);
    const Eigen::MatrixXd x = to_dense(d.corpus.feeds[0].matrix);
    const Eigen::MatrixXd y = to_dense(d.corpus.feeds[1].matrix);
    for (Index w = 0; w < 3; ++w) {
      Eigen::ArrayXd rx(cfg.T), ry(cfg.T);
      for (Index t = 0; t < cfg.T; ++t) {
        rx(t) = (x(w, t) - gamma * cfg.w_x(w) * d.latent(t + cfg.lag)) / std::sqrt(1 - gamma);
        ry(t) = (y(3 + w, t) - gamma * cfg.w_y(w) * d.latent(t)) / std::sqrt(1 - gamma);
      }
      CHECK(std::abs(sample_variance(rx) - 1.0) < 0.05);
      CHECK(std::abs(sample_variance(ry) - 1.0) < 0.05);
    }
  }
}

TEST_CASE("toy config bounds") {
  ToyConfig c;
  c.gamma = 1.5;
  CHECK(config_error(c) == Errc::BadConfig);
  c.gamma = 0.0;
  CHECK(config_error(c) == Errc::BadConfig);
  c = ToyConfig{};
  c.lag = 0;
  CHECK(config_error(c) == Errc::BadConfig);
  c.lag = 500;  // T / 4
  CHECK(config_error(c) == Errc::BadConfig);
  c = ToyConfig{};
  c.w_y.setZero();
  CHECK(config_error(c) == Errc::BadConfig);
  CHECK_THROWS_AS(generate_toy(c), Error);
}

TEST_CASE("leader corpus structure") {
  LeaderConfig cfg;
  cfg.seed = 8;
  const LeaderData d = generate_leader(cfg);
  const Corpus& c = d.corpus;
  REQUIRE(c.num_feeds() == cfg.F);
  CHECK(c.num_terms() == cfg.W);
  CHECK(c.feeds[0].feed_id == "feed00");
  CHECK(c.vocabulary.term(11) == "term11");
  CHECK(d.leader >= 0);
  CHECK(d.leader < cfg.F);
  for (Index f = 0; f < cfg.F; ++f) {
    const auto fi = static_cast<std::size_t>(f);
    CAPTURE(f);
    CHECK(d.support[fi].size() == 3);
    CHECK(d.loadings[fi].norm() == doctest::Approx(1.0));
    for (Index w = 0; w < cfg.W; ++w) {
      const bool in_support = std::find(d.support[fi].begin(), d.support[fi].end(), w) != d.support[fi].end();
      CHECK((d.loadings[fi](w) != 0.0) == in_support);
    }
    if (f == d.leader) {
      CHECK(d.delay[fi] == 0);
    } else {
      CHECK(d.delay[fi] >= cfg.leader_lag - 1);
      CHECK(d.delay[fi] <= cfg.leader_lag);
    }
  }
  CHECK(generate_leader(cfg).corpus == c);
}

TEST_CASE("leader feeds see the trend with their planted delay") {
  LeaderConfig cfg;
  cfg.seed = 21;
  cfg.gamma = 1.0;
  const LeaderData d = generate_leader(cfg);
  const auto leader = static_cast<std::size_t>(d.leader);
  const Eigen::MatrixXd lead = to_dense(d.corpus.feeds[leader].matrix);
  const Index lw = d.support[leader][0];
  for (std::size_t f = 0; f < d.delay.size(); ++f) {
    if (f == leader) continue;
    const Eigen::MatrixXd x = to_dense(d.corpus.feeds[f].matrix);
    const Index w = d.support[f][0];
    for (Index t = 10; t < 50; ++t) {
      CHECK(x(w, t) / d.loadings[f](w) == doctest::Approx(lead(lw, t - d.delay[f]) / d.loadings[leader](lw)));
    }
  }
}

TEST_CASE("leader config bounds") {
  LeaderConfig c;
  c.F = 2;
  CHECK(config_error(c) == Errc::BadConfig);
  c = LeaderConfig{};
  c.leader_lag = 0;
  CHECK(config_error(c) == Errc::BadConfig);
  c = LeaderConfig{};
  c.trend_sparsity = 0;
  CHECK(config_error(c) == Errc::BadConfig);
  c = LeaderConfig{};
  c.gamma = -0.1;
  CHECK(config_error(c) == Errc::BadConfig);
}

TEST_CASE("gen.json echoes the configuration") {
  ToyConfig t;
  t.seed = 77;
  const auto j = gen_json(t);
  CHECK(j.at("seed").get<std::uint64_t>() == 77);
  CHECK(j.at("lag").get<int>() == 3);
  CHECK(j.at("mode").get<std::string>() == "toy");

  LeaderConfig l;
  const LeaderData d = generate_leader(l);
  const auto jl = gen_json(l, d);
  CHECK(jl.at("leader").get<std::string>() == d.corpus.feeds[static_cast<std::size_t>(d.leader)].feed_id);
  CHECK(jl.at("feeds").size() == 5);
}
