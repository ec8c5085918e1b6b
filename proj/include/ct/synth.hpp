#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "ct/corpus.hpp"
#include "json.hpp"

namespace ct {

/// Two-feed toy data: a latent white-noise trend s(t) observed by feed "X"
/// `lag` bins before feed "Y".
///
///   X(:, t) = gamma * w_x * s(t + lag) + sqrt(1 - gamma) * eps_x(t)
///   Y(:, t) = gamma * w_y * s(t)       + sqrt(1 - gamma) * eps_y(t)
///
/// Draw order: s for t = 0 .. T + lag - 1, then eps_x column by column, then eps_y.
struct ToyConfig {
  Index T = 2000;
  double gamma = 0.9;
  Index lag = 3;
  Eigen::Vector3d w_x{0.05, 0.9, 0.4};  // Phone, Volcano, Airplane
  Eigen::Vector3d w_y{0.9, 0.05, 0.6};  // Cloud, iPad, Ash
  std::uint64_t seed = 42;

  void validate() const;  // throws BadConfig
};

inline const std::vector<std::string> kToyTerms = {"Phone", "Volcano", "Airplane", "Cloud", "iPad", "Ash"};

struct ToyData {
  Corpus corpus;               // feeds "X" (terms 0-2) and "Y" (terms 3-5)
  Eigen::VectorXd latent;      // s(t) for t = 0 .. T + lag - 1
};

ToyData generate_toy(const ToyConfig& config);

/// F feeds sharing one latent trend. The leader shows s(t); every other feed
/// shows s(t - leader_lag + jitter) with jitter in {0, 1}. Each feed loads the
/// trend on its own random subset of terms.
///
/// Draw order: leader slot, then per feed (term subset, loadings, jitter),
/// then s, then noise feed by feed, column by column.
struct LeaderConfig {
  Index F = 5;
  Index W = 12;
  Index T = 2000;
  Index leader_lag = 4;
  double trend_sparsity = 0.25;
  double gamma = 0.9;
  std::uint64_t seed = 42;

  void validate() const;  // throws BadConfig
};

struct LeaderData {
  Corpus corpus;
  Index leader = 0;
  std::vector<std::vector<Index>> support;  // trend-carrying terms per feed
  std::vector<Eigen::VectorXd> loadings;    // W-vector per feed
  std::vector<Index> delay;                 // bins behind the leader (0 for the leader)
};

LeaderData generate_leader(const LeaderConfig& config);

nlohmann::json gen_json(const ToyConfig& config);
nlohmann::json gen_json(const LeaderConfig& config, const LeaderData& data);

}  // namespace ct
