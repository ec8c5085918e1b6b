#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <numeric>

#include "ct/embedding.hpp"
#include "ct/error.hpp"
#include "ct/kcca.hpp"
#include "ct/random.hpp"
#include "ct/synth.hpp"

using namespace ct;

namespace {

Eigen::MatrixXd gaussian(Index rows, Index cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  }
  return m;
}

// Independent oracle: first canonical correlation from the covariance
// generalized eigenproblem [0 Cxy; Cyx 0] v = rho [Cxx 0; 0 Cyy] v.
double input_space_cca(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  const Eigen::MatrixXd xc = x.colwise() - x.rowwise().mean();
  const Eigen::MatrixXd yc = y.colwise() - y.rowwise().mean();
  const Index p = x.rows(), q = y.rows();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p + q, p + q);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(p + q, p + q);
  a.topRightCorner(p, q) = xc * yc.transpose();
  a.bottomLeftCorner(q, p) = yc * xc.transpose();
  b.topLeftCorner(p, p) = xc * xc.transpose();
  b.bottomRightCorner(q, q) = yc * yc.transpose();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, b);
  return solver.eigenvalues()(p + q - 1);
}

std::vector<Index> all_columns(Index n) {
  std::vector<Index> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), Index{0});
  return v;
}

double rel_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).norm() / std::max(1e-300, b.norm()); }

}  // namespace

TEST_CASE("linear kernel") {
  CHECK(linear_kernel(Eigen::MatrixXd::Identity(2, 2)) == Eigen::MatrixXd::Identity(2, 2));

  Eigen::MatrixXd orth(2, 2);
  orth << 3, 0,
          0, -2;
  Eigen::MatrixXd expected(2, 2);
  expected << 9, 0,
              0, 4;
  CHECK(linear_kernel(orth) == expected);

  Rng rng(11);
  const Eigen::MatrixXd a = gaussian(5, 40, rng);
  const Eigen::MatrixXd k = linear_kernel(a);
  CHECK(k == k.transpose());
  for (Index i = 0; i < 40; ++i) {
    for (Index j = 0; j < 40; ++j) {
      double dot = 0;
      for (Index r = 0; r < 5; ++r) dot += a(r, i) * a(r, j);
      CHECK(std::abs(k(i, j) - dot) <= 1e-12 * std::max(1.0, std::abs(dot)));
    }
  }
  try {
    linear_kernel(Eigen::MatrixXd::Ones(3, 1));
    FAIL("expected TooFewSamples");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::TooFewSamples);
  }
}

TEST_CASE("kernel centering") {
  Rng rng(12);
  SUBCASE("constant features vanish") {
    const Eigen::MatrixXd c = Eigen::MatrixXd::Constant(3, 10, 2.5);
    CHECK(center_kernel(linear_kernel(c)).matrix.cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("already centered data is unchanged") {
    Eigen::MatrixXd a = gaussian(4, 12, rng);
    a.colwise() -= a.rowwise().mean();
    const Eigen::MatrixXd k = linear_kernel(a);
    CHECK((center_kernel(k).matrix - k).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("row sums are zero") {
    const Eigen::MatrixXd a = gaussian(4, 30, rng).array() + 3.0;
    const CenteredKernel ck = center_kernel(linear_kernel(a));
    CHECK(ck.matrix.rowwise().sum().cwiseAbs().maxCoeff() < 1e-8 * 30);
  }
  SUBCASE("cross blocks use training means only") {
    const Eigen::MatrixXd train = gaussian(3, 20, rng).array() + 1.0;
    const Eigen::MatrixXd other = gaussian(3, 7, rng);
    const CenteredKernel ck = center_kernel(linear_kernel(train));
    const Eigen::MatrixXd cross = center_cross(train.transpose() * other, ck.centering);
    const Eigen::VectorXd m = train.rowwise().mean();
    const Eigen::MatrixXd expected = (train.colwise() - m).transpose() * (other.colwise() - m);
    CHECK((cross - expected).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("self-correlation of a one-dimensional signal") {
  Rng rng(13);
  const Eigen::MatrixXd s = gaussian(1, 80, rng);
  const KernelPair kp = make_kernel_pair(s, s);
  const KccaModel m = solve_kcca(kp.x.matrix, kp.y.matrix, 1e-6);
  CHECK(m.lambda >= 0.999);
  CHECK(m.lambda <= 1.0);
}

TEST_CASE("white noise matches the input-space oracle") {
  Rng rng(14);
  const Eigen::MatrixXd x = gaussian(3, 200, rng);
  const Eigen::MatrixXd y = gaussian(2, 200, rng);
  const KernelPair kp = make_kernel_pair(x, y);
  const KccaModel m = solve_kcca(kp.x.matrix, kp.y.matrix, 1e-2);
  const double oracle = input_space_cca(x, y);
  CHECK(m.lambda < 0.35);
  // kappa = 1e-2 is negligible next to Gram eigenvalues of order n = 200.
  CHECK(m.lambda == doctest::Approx(oracle).epsilon(1e-4));
}

TEST_CASE("the input-space oracle is invariant under invertible feature maps") {
  Rng rng(15);
  const Eigen::MatrixXd x = gaussian(4, 150, rng);
  Eigen::MatrixXd y = gaussian(3, 150, rng);
  y.row(0) += 0.7 * x.row(1);
  const Eigen::MatrixXd a = gaussian(4, 4, rng) + 3 * Eigen::MatrixXd::Identity(4, 4);
  const Eigen::MatrixXd b = gaussian(3, 3, rng) + 3 * Eigen::MatrixXd::Identity(3, 3);
  CHECK(input_space_cca(a * x, b * y) == doctest::Approx(input_space_cca(x, y)).epsilon(1e-10));
}

TEST_CASE("dual solution properties") {
  Rng rng(16);
  Eigen::MatrixXd x = gaussian(5, 60, rng);
  Eigen::MatrixXd y = gaussian(3, 60, rng);
  y.row(2) += x.row(0) - 0.5 * x.row(3);
  const KernelPair kp = make_kernel_pair(x, y);
  const double kappa = 1e-3;
  const KccaModel m = solve_kcca(kp.x.matrix, kp.y.matrix, kappa);
  const Index n = 60;
  const Eigen::MatrixXd lx = kp.x.matrix * kp.x.matrix + kappa * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd ly = kp.y.matrix * kp.y.matrix + kappa * Eigen::MatrixXd::Identity(n, n);

  SUBCASE("normalization and eigen-equation") {
    CHECK(m.alpha.dot(lx * m.alpha) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(m.beta.dot(ly * m.beta) == doctest::Approx(1.0).epsilon(1e-8));
    const Eigen::VectorXd lhs = kp.x.matrix * (kp.y.matrix * m.beta);
    CHECK(rel_diff(lhs, m.eigenvalue * (lx * m.alpha)) < 1e-6);
  }
  SUBCASE("sign convention and training correlation") {
    Index best = 0;
    m.beta.cwiseAbs().maxCoeff(&best);
    CHECK(m.beta(best) > 0);
    const auto [u, v] = project(m, kp.x.matrix, kp.y.matrix);
    const auto r = pearson(u, v);
    REQUIRE(r.has_value());
    CHECK(*r == doctest::Approx(m.lambda).epsilon(1e-10));
    CHECK(m.lambda >= m.eigenvalue - 1e-12);
  }
  SUBCASE("unit alpha picks a kernel row") {
    KccaModel e = m;
    e.alpha = Eigen::VectorXd::Unit(n, 0);
    const auto [u, v] = project(e, kp.x.matrix, kp.y.matrix);
    CHECK(u == kp.x.matrix.row(0).transpose());
    CHECK_THROWS_AS(project(e, kp.x.matrix.topRows(3), kp.y.matrix), Error);
  }
  SUBCASE("primal weights reproduce the dual projections") {
    const Eigen::MatrixXd xc = x.colwise() - x.rowwise().mean();
    const Eigen::MatrixXd yc = y.colwise() - y.rowwise().mean();
    const PrimalWeights w = recover_primal(m, xc, 5, yc);
    CHECK(w.w_x.cols() == 1);
    CHECK(rel_diff(xc.transpose() * w.w_x.col(0), kp.x.matrix * m.alpha) < 1e-8);
    CHECK(rel_diff(yc.transpose() * w.w_y, kp.y.matrix * m.beta) < 1e-8);
    KccaModel other = m;
    other.linear_kernel = false;
    try {
      recover_primal(other, xc, 5, yc);
      FAIL("expected NonLinearKernel");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::NonLinearKernel);
    }
  }
  SUBCASE("kappa below the floor") {
    try {
      solve_kcca(kp.x.matrix, kp.y.matrix, 1e-9);
      FAIL("expected SingularRhs");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::SingularRhs);
    }
  }
}

TEST_CASE("spectral and linear routes agree with the dense reference") {
  Rng rng(17);
  Eigen::MatrixXd x = gaussian(8, 90, rng);
  Eigen::MatrixXd y = gaussian(4, 90, rng);
  y.row(1) += 0.8 * x.row(2) + 0.3 * x.row(7);
  const KernelPair kp = make_kernel_pair(x, y);
  const SpectralKcca spectral(kp.x.matrix, kp.y.matrix);
  const auto cols = all_columns(90);
  const LinearKcca primal(x, y, cols, KccaRoute::Primal);
  const LinearKcca dual(x, y, cols, KccaRoute::Dual);
  CHECK(primal.route() == KccaRoute::Primal);
  CHECK(dual.route() == KccaRoute::Dual);
  CHECK(LinearKcca(x, y, cols).route() == KccaRoute::Primal);

  for (double kappa : {1e-5, 1e-2, 1.0, 10.0}) {
    CAPTURE(kappa);
    const KccaModel ref = solve_kcca(kp.x.matrix, kp.y.matrix, kappa);
    const KccaModel sp = spectral.solve(kappa);
    const LinearKccaFit fp = primal.factor(0, 8).solve(kappa);
    const LinearKccaFit fd = dual.factor(0, 8).solve(kappa);
    for (const KccaModel* m : {&sp, &fp.model, &fd.model}) {
      CHECK(m->lambda == doctest::Approx(ref.lambda).epsilon(1e-8));
      CHECK(m->eigenvalue == doctest::Approx(ref.eigenvalue).epsilon(1e-8));
      CHECK(rel_diff(m->alpha, ref.alpha) < 1e-6);
      CHECK(rel_diff(m->beta, ref.beta) < 1e-6);
    }
    const Eigen::MatrixXd xc = x.colwise() - fp.x_mean;
    CHECK(rel_diff(xc.transpose() * fp.w_x, kp.x.matrix * ref.alpha) < 1e-6);
    CHECK(rel_diff(xc.transpose() * fd.w_x, kp.x.matrix * ref.alpha) < 1e-6);
  }
}

TEST_CASE("a row range of the stacked matrix equals fitting that block alone") {
  Rng rng(18);
  Eigen::MatrixXd x = gaussian(9, 120, rng);
  Eigen::MatrixXd y = gaussian(3, 120, rng);
  y.row(0) += x.row(5);
  const auto cols = all_columns(120);
  const LinearKcca whole(x, y, cols);
  const LinearKcca part(x.middleRows(3, 4), y, cols);
  const LinearKccaFit a = whole.factor(3, 4).solve(1e-3);
  const LinearKccaFit b = part.factor(0, 4).solve(1e-3);
  CHECK(a.model.lambda == doctest::Approx(b.model.lambda).epsilon(1e-10));
  CHECK(rel_diff(a.w_x, b.w_x) < 1e-8);
}

TEST_CASE("training lambda is non-increasing in kappa") {
  Rng rng(19);
  Eigen::MatrixXd x = gaussian(6, 100, rng);
  Eigen::MatrixXd y = gaussian(4, 100, rng);
  y.row(3) += 0.4 * x.row(1);
  const LinearKcca lk(x, y, all_columns(100), KccaRoute::Dual);
  const LinearKccaFactor f = lk.factor(0, 6);
  double prev_lambda = 2, prev_mu = 2;
  for (double kappa : {1e-8, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 1e3, 1e5}) {
    const LinearKccaFit fit = f.solve(kappa, false);
    CHECK(fit.model.lambda <= prev_lambda + 1e-12);
    CHECK(fit.model.eigenvalue <= prev_mu + 1e-12);
    CHECK(fit.model.alpha.size() == 0);
    prev_lambda = fit.model.lambda;
    prev_mu = fit.model.eigenvalue;
  }
}

TEST_CASE("toy data at five lags trains to a high correlation") {
  ToyConfig cfg;
  cfg.seed = 3;
  const Corpus c = generate_toy(cfg).corpus;
  const EmbeddedMatrix e = temporal_embed(c.feeds[0], 5);
  const Eigen::MatrixXd y = trim_pool(pool_excluding(c, "X"), 5);
  const LinearKcca lk(e.matrix, y, all_columns(e.matrix.cols()));
  const LinearKccaFit fit = lk.factor(0, e.matrix.rows()).solve(1e-3);
  CHECK(fit.model.lambda >= 0.8);
}

TEST_CASE("degenerate views") {
  Rng rng(20);
  const Eigen::MatrixXd x = gaussian(3, 30, rng);
  const Eigen::MatrixXd y = Eigen::MatrixXd::Constant(2, 30, 4.0);
  const LinearKcca lk(x, y, all_columns(30));
  try {
    lk.factor(0, 3).solve(1e-3);
    FAIL("expected DegenerateProjection");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DegenerateProjection);
  }
  CHECK_FALSE(pearson(Eigen::VectorXd::Constant(5, 1.0), Eigen::VectorXd::LinSpaced(5, 0, 1)).has_value());
}

TEST_CASE("primal weights stacking") {
  Eigen::VectorXd stacked(6);
  stacked << 1, 2, 3, 4, 5, 6;  // W = 2, lags 3: top block is lag 3
  const PrimalWeights w = PrimalWeights::from_stacked(stacked, 2, Eigen::VectorXd::Zero(2));
  CHECK(w.w_x.col(2) == Eigen::Vector2d(1, 2));
  CHECK(w.w_x.col(0) == Eigen::Vector2d(5, 6));
  CHECK(w.stacked_x() == stacked);
  CHECK_THROWS_AS(PrimalWeights::from_stacked(stacked, 4, Eigen::VectorXd::Zero(4)), Error);
}
