#include "ct/kcca.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "ct/error.hpp"

namespace ct {
namespace {

// Eigenvalues at or below this fraction of the largest are treated as zero.
constexpr double kRankTolerance = 1e-12;

struct Spectrum {
  Eigen::VectorXd values;   // descending, strictly positive
  Eigen::MatrixXd vectors;  // matching columns
};

Spectrum positive_spectrum(const Eigen::MatrixXd& symmetric) {
  Spectrum out;
  if (symmetric.rows() == 0) return out;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric);
  if (solver.info() != Eigen::Success) throw Error(Errc::NumericalFailure, "symmetric eigensolve did not converge");
  const auto& values = solver.eigenvalues();
  const Index n = values.size();
  const double top = values(n - 1);
  if (!(top > 0)) return out;
  const double cutoff = top * kRankTolerance;
  Index keep = 0;
  while (keep < n && values(n - 1 - keep) > cutoff) ++keep;
  out.values.resize(keep);
  out.vectors.resize(symmetric.rows(), keep);
  for (Index i = 0; i < keep; ++i) {
    out.values(i) = values(n - 1 - i);
    out.vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
  }
  return out;
}

struct SingularPair {
  double sigma = 0.0;
  Eigen::VectorXd left;
  Eigen::VectorXd right;
};

SingularPair top_singular_pair(const Eigen::MatrixXd& c) {
  if (c.rows() == 0 || c.cols() == 0) {
    throw Error(Errc::DegenerateProjection, "one side has no variance on the training samples");
  }
  SingularPair out;
  const bool wide = c.rows() <= c.cols();
  Eigen::MatrixXd gram = wide ? Eigen::MatrixXd(c * c.transpose()) : Eigen::MatrixXd(c.transpose() * c);
  gram = 0.5 * (gram + gram.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  if (solver.info() != Eigen::Success) throw Error(Errc::NumericalFailure, "reduced eigensolve did not converge");
  const Index top = gram.rows() - 1;
  out.sigma = std::sqrt(std::max(0.0, solver.eigenvalues()(top)));
  if (!(out.sigma > 0) || !std::isfinite(out.sigma)) {
    throw Error(Errc::DegenerateProjection, "no correlated direction between the two views");
  }
  Eigen::VectorXd v = solver.eigenvectors().col(top);
  if (wide) {
    out.left = v;
    out.right = c.transpose() * v;
    out.right.normalize();
  } else {
    out.right = v;
    out.left = c * v;
    out.left.normalize();
  }
  out.sigma = out.left.dot(c * out.right);
  return out;
}

Index largest_magnitude_index(const Eigen::VectorXd& v) {
  Index best = 0;
  for (Index i = 1; i < v.size(); ++i) {
    if (std::abs(v(i)) > std::abs(v(best))) best = i;
  }
  return best;
}

}  // namespace

Eigen::MatrixXd LinearKernel::cross(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) const {
  if (a.rows() != b.rows()) throw Error(Errc::ShapeMismatch, "kernel arguments differ in feature dimension");
  return a.transpose() * b;
}

Eigen::MatrixXd linear_kernel(const Eigen::MatrixXd& samples) {
  if (samples.cols() < 2) {
    throw Error(Errc::TooFewSamples, "a kernel needs at least 2 samples, got " + std::to_string(samples.cols()));
  }
  Eigen::MatrixXd k = samples.transpose() * samples;
  return 0.5 * (k + k.transpose());
}

CenteredKernel center_kernel(const Eigen::MatrixXd& train_gram) {
  if (train_gram.rows() != train_gram.cols()) throw Error(Errc::ShapeMismatch, "training Gram must be square");
  CenteredKernel out;
  out.centering.row_means = train_gram.rowwise().mean();
  out.centering.grand_mean = out.centering.row_means.mean();
  const auto& r = out.centering.row_means;
  out.matrix = train_gram;
  out.matrix.colwise() -= r;
  out.matrix.rowwise() -= r.transpose();
  out.matrix.array() += out.centering.grand_mean;
  out.matrix = 0.5 * (out.matrix + out.matrix.transpose()).eval();
  return out;
}

Eigen::MatrixXd center_cross(const Eigen::MatrixXd& train_by_other, const KernelCentering& centering) {
  if (train_by_other.rows() != centering.row_means.size()) {
    throw Error(Errc::ShapeMismatch, "cross block rows must match the training sample count");
  }
  const Eigen::RowVectorXd col_means = train_by_other.colwise().mean();
  Eigen::MatrixXd out = train_by_other;
  out.colwise() -= centering.row_means;
  out.rowwise() -= col_means;
  out.array() += centering.grand_mean;
  return out;
}

KernelPair make_kernel_pair(const Eigen::MatrixXd& x_train, const Eigen::MatrixXd& y_train) {
  if (x_train.cols() != y_train.cols()) throw Error(Errc::ShapeMismatch, "views differ in sample count");
  return {center_kernel(linear_kernel(x_train)), center_kernel(linear_kernel(y_train))};
}

std::optional<double> pearson(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) {
  if (a.size() != b.size()) throw Error(Errc::ShapeMismatch, "correlated series differ in length");
  if (a.size() < 2) return std::nullopt;
  const Eigen::ArrayXd ac = a.array() - a.mean();
  const Eigen::ArrayXd bc = b.array() - b.mean();
  const double saa = ac.square().sum();
  const double sbb = bc.square().sum();
  // Relative test: a constant series leaves only rounding residue after mean removal.
  if (!(saa > 1e-24 * a.squaredNorm()) || !(sbb > 1e-24 * b.squaredNorm())) return std::nullopt;
  const double r = (ac * bc).sum() / std::sqrt(saa * sbb);
  if (!std::isfinite(r)) return std::nullopt;
  return std::clamp(r, -1.0, 1.0);
}

KccaModel solve_kcca(const Eigen::MatrixXd& kx, const Eigen::MatrixXd& ky, double kappa) {
  const Index n = kx.rows();
  if (kx.cols() != n || ky.rows() != n || ky.cols() != n) {
    throw Error(Errc::ShapeMismatch, "kernels must be square and of equal size");
  }
  if (n < 2) throw Error(Errc::TooFewSamples, "need at least 2 samples");
  if (!(kappa >= kKappaFloor)) {
    throw Error(Errc::SingularRhs, "kappa below the floor " + std::to_string(kKappaFloor));
  }
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
  const Eigen::LLT<Eigen::MatrixXd> lx(kx * kx + kappa * identity);
  const Eigen::LLT<Eigen::MatrixXd> ly(ky * ky + kappa * identity);
  if (lx.info() != Eigen::Success || ly.info() != Eigen::Success) {
    throw Error(Errc::SingularRhs, "Cholesky factorization of K^2 + kappa I failed");
  }
  // M = Rx^-1 Kx Ky Ry^-T with L = R R^T.
  const Eigen::MatrixXd a = lx.matrixL().solve(kx * ky);
  const Eigen::MatrixXd m = ly.matrixL().solve(a.transpose()).transpose();
  const SingularPair pair = top_singular_pair(m);

  KccaModel model;
  model.kappa = kappa;
  model.eigenvalue = std::clamp(pair.sigma, 0.0, 1.0);
  model.alpha = lx.matrixU().solve(pair.left);
  model.beta = ly.matrixU().solve(pair.right);
  if (model.beta(largest_magnitude_index(model.beta)) < 0) {
    model.alpha = -model.alpha;
    model.beta = -model.beta;
  }
  const Eigen::VectorXd u = kx * model.alpha;
  const Eigen::VectorXd v = ky * model.beta;
  model.x_norm = u.norm();
  model.y_norm = v.norm();
  const auto r = pearson(u, v);
  if (!r) throw Error(Errc::DegenerateProjection, "training projection has zero variance");
  model.lambda = std::clamp(*r, 0.0, 1.0);
  return model;
}

SpectralKcca::SpectralKcca(const Eigen::MatrixXd& kx, const Eigen::MatrixXd& ky) : n_(kx.rows()) {
  if (kx.cols() != n_ || ky.rows() != n_ || ky.cols() != n_) {
    throw Error(Errc::ShapeMismatch, "kernels must be square and of equal size");
  }
  if (n_ < 2) throw Error(Errc::TooFewSamples, "need at least 2 samples");
  Spectrum sx = positive_spectrum(0.5 * (kx + kx.transpose()));
  Spectrum sy = positive_spectrum(0.5 * (ky + ky.transpose()));
  x_values_ = std::move(sx.values);
  y_values_ = std::move(sy.values);
  x_basis_ = std::move(sx.vectors);
  y_basis_ = std::move(sy.vectors);
  cross_ = x_basis_.transpose() * y_basis_;
}

KccaModel SpectralKcca::solve(double kappa) const {
  if (!(kappa >= kKappaFloor)) {
    throw Error(Errc::SingularRhs, "kappa below the floor " + std::to_string(kKappaFloor));
  }
  const Eigen::ArrayXd gx = (x_values_.array().square() + kappa).rsqrt();
  const Eigen::ArrayXd gy = (y_values_.array().square() + kappa).rsqrt();
  const Eigen::ArrayXd dx = x_values_.array() * gx;
  const Eigen::ArrayXd dy = y_values_.array() * gy;
  const Eigen::MatrixXd reduced = dx.matrix().asDiagonal() * cross_ * dy.matrix().asDiagonal();
  SingularPair pair = top_singular_pair(reduced);

  KccaModel model;
  model.kappa = kappa;
  model.alpha = x_basis_ * (gx * pair.left.array()).matrix();
  model.beta = y_basis_ * (gy * pair.right.array()).matrix();
  if (model.beta(largest_magnitude_index(model.beta)) < 0) {
    model.alpha = -model.alpha;
    model.beta = -model.beta;
  }
  model.eigenvalue = std::clamp(pair.sigma, 0.0, 1.0);
  model.x_norm = (dx * pair.left.array()).matrix().norm();
  model.y_norm = (dy * pair.right.array()).matrix().norm();
  model.lambda = std::clamp(pair.sigma / (model.x_norm * model.y_norm), 0.0, 1.0);
  return model;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> project(const KccaModel& model, const Eigen::MatrixXd& kx_block,
                                                    const Eigen::MatrixXd& ky_block) {
  if (kx_block.rows() != model.alpha.size() || ky_block.rows() != model.beta.size() ||
      kx_block.cols() != ky_block.cols()) {
    throw Error(Errc::ShapeMismatch, "kernel blocks do not match the model's training samples");
  }
  return {kx_block.transpose() * model.alpha, ky_block.transpose() * model.beta};
}

Eigen::VectorXd PrimalWeights::stacked_x() const {
  const Index W = w_x.rows();
  const Index lags = w_x.cols();
  Eigen::VectorXd out(W * lags);
  for (Index tau = 1; tau <= lags; ++tau) out.segment((lags - tau) * W, W) = w_x.col(tau - 1);
  return out;
}

PrimalWeights PrimalWeights::from_stacked(const Eigen::VectorXd& stacked_x, Index num_terms, Eigen::VectorXd w_y) {
  if (num_terms <= 0 || stacked_x.size() % num_terms != 0) {
    throw Error(Errc::ShapeMismatch, "stacked weights are not a multiple of the vocabulary size");
  }
  const Index lags = stacked_x.size() / num_terms;
  PrimalWeights out;
  out.w_x.resize(num_terms, lags);
  for (Index tau = 1; tau <= lags; ++tau) out.w_x.col(tau - 1) = stacked_x.segment((lags - tau) * num_terms, num_terms);
  out.w_y = std::move(w_y);
  return out;
}

PrimalWeights recover_primal(const KccaModel& model, const Eigen::MatrixXd& embedded_train, Index num_terms,
                             const Eigen::MatrixXd& pool_train) {
  if (!model.linear_kernel) {
    throw Error(Errc::NonLinearKernel, "primal weights exist only for the linear kernel");
  }
  if (embedded_train.cols() != model.alpha.size() || pool_train.cols() != model.beta.size()) {
    throw Error(Errc::ShapeMismatch, "training matrices do not match the dual coefficients");
  }
  return PrimalWeights::from_stacked(embedded_train * model.alpha, num_terms, pool_train * model.beta);
}

LinearKcca::LinearKcca(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, std::span<const Index> train_cols,
                       KccaRoute route)
    : train_cols_(train_cols.begin(), train_cols.end()), route_(route) {
  if (x.cols() != y.cols()) throw Error(Errc::ShapeMismatch, "views differ in sample count");
  const Index n = num_samples();
  if (n < 2) throw Error(Errc::TooFewSamples, "need at least 2 training samples, got " + std::to_string(n));
  for (Index c : train_cols_) {
    if (c < 0 || c >= x.cols()) throw Error(Errc::ShapeMismatch, "training column out of range");
  }

  xc_.resize(x.rows(), n);
  yc_.resize(y.rows(), n);
  for (Index i = 0; i < n; ++i) {
    xc_.col(i) = x.col(train_cols_[static_cast<std::size_t>(i)]);
    yc_.col(i) = y.col(train_cols_[static_cast<std::size_t>(i)]);
  }
  x_mean_ = xc_.rowwise().mean();
  y_mean_ = yc_.rowwise().mean();
  xc_.colwise() -= x_mean_;
  yc_.colwise() -= y_mean_;

  if (route_ == KccaRoute::Auto) route_ = (x.rows() + y.rows() <= n) ? KccaRoute::Primal : KccaRoute::Dual;

  Spectrum sy;
  if (route_ == KccaRoute::Primal) {
    const Index d = x.rows();
    const Index p = y.rows();
    Eigen::MatrixXd stacked(d + p, n);
    stacked.topRows(d) = xc_;
    stacked.bottomRows(p) = yc_;
    moments_ = Eigen::MatrixXd::Zero(d + p, d + p);
    moments_.selfadjointView<Eigen::Lower>().rankUpdate(stacked);
    moments_ = moments_.selfadjointView<Eigen::Lower>();
    sy = positive_spectrum(moments_.bottomRightCorner(p, p));
  } else {
    sy = positive_spectrum(linear_kernel(yc_));
  }
  y_values_ = std::move(sy.values);
  y_basis_ = std::move(sy.vectors);
}

LinearKccaFactor LinearKcca::factor(Index row_begin, Index rows) const {
  if (row_begin < 0 || rows < 1 || row_begin + rows > xc_.rows()) {
    throw Error(Errc::ShapeMismatch, "row range outside the embedded matrix");
  }
  LinearKccaFactor f;
  f.owner_ = this;
  f.row_begin_ = row_begin;
  f.rows_ = rows;
  if (route_ == KccaRoute::Primal) {
    const Index d = xc_.rows();
    Spectrum sx = positive_spectrum(moments_.block(row_begin, row_begin, rows, rows));
    f.x_values_ = std::move(sx.values);
    f.x_basis_ = std::move(sx.vectors);
    const Eigen::MatrixXd cxy = moments_.block(row_begin, d, rows, yc_.rows());
    const Eigen::VectorXd x_scale = f.x_values_.array().rsqrt().matrix();
    const Eigen::VectorXd y_scale = y_values_.array().rsqrt().matrix();
    f.cross_ = x_scale.asDiagonal() * (f.x_basis_.transpose() * cxy * y_basis_) * y_scale.asDiagonal();
  } else {
    Spectrum sx = positive_spectrum(linear_kernel(xc_.middleRows(row_begin, rows)));
    f.x_values_ = std::move(sx.values);
    f.x_basis_ = std::move(sx.vectors);
    f.cross_ = f.x_basis_.transpose() * y_basis_;
  }
  return f;
}

LinearKccaFit LinearKccaFactor::solve(double kappa, bool with_alpha) const {
  if (!(kappa >= kKappaFloor)) {
    throw Error(Errc::SingularRhs, "kappa below the floor " + std::to_string(kKappaFloor));
  }
  const LinearKcca& o = *owner_;
  const Eigen::ArrayXd& kx = x_values_.array();
  const Eigen::ArrayXd& ky = o.y_values_.array();
  const Eigen::ArrayXd gx = (kx.square() + kappa).rsqrt();
  const Eigen::ArrayXd gy = (ky.square() + kappa).rsqrt();
  const Eigen::ArrayXd dx = kx * gx;
  const Eigen::ArrayXd dy = ky * gy;
  const Eigen::MatrixXd reduced = dx.matrix().asDiagonal() * cross_ * dy.matrix().asDiagonal();
  const SingularPair pair = top_singular_pair(reduced);
  const auto xc = o.xc_.middleRows(row_begin_, rows_);

  LinearKccaFit fit;
  KccaModel& model = fit.model;
  model.kappa = kappa;
  model.train_indices = o.train_cols_;
  model.linear_kernel = true;

  Eigen::VectorXd alpha_coef;  // alpha = xc^T alpha_coef (primal) or x_basis alpha_coef (dual)
  if (o.route_ == KccaRoute::Primal) {
    const Eigen::ArrayXd sx = kx.sqrt();
    const Eigen::ArrayXd sy = ky.sqrt();
    fit.w_x = x_basis_ * (sx * gx * pair.left.array()).matrix();
    fit.w_y = o.y_basis_ * (sy * gy * pair.right.array()).matrix();
    model.beta = o.yc_.transpose() * (o.y_basis_ * (gy / sy * pair.right.array()).matrix());
    alpha_coef = x_basis_ * (gx / sx * pair.left.array()).matrix();
  } else {
    model.beta = o.y_basis_ * (gy * pair.right.array()).matrix();
    fit.w_y = o.yc_ * model.beta;
    const Eigen::VectorXd alpha = x_basis_ * (gx * pair.left.array()).matrix();
    fit.w_x = xc * alpha;
    alpha_coef = alpha;
  }

  const bool flip = model.beta(largest_magnitude_index(model.beta)) < 0;
  if (flip) {
    model.beta = -model.beta;
    fit.w_x = -fit.w_x;
    fit.w_y = -fit.w_y;
    alpha_coef = -alpha_coef;
  }
  if (with_alpha) {
    model.alpha = o.route_ == KccaRoute::Primal ? Eigen::VectorXd(xc.transpose() * alpha_coef) : alpha_coef;
  }

  model.eigenvalue = std::clamp(pair.sigma, 0.0, 1.0);
  model.x_norm = (dx * pair.left.array()).matrix().norm();
  model.y_norm = (dy * pair.right.array()).matrix().norm();
  model.lambda = std::clamp(pair.sigma / (model.x_norm * model.y_norm), 0.0, 1.0);
  fit.x_mean = o.x_mean_.segment(row_begin_, rows_);
  fit.y_mean = o.y_mean_;
  return fit;
}

}  // namespace ct
