#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ct/corpus.hpp"

namespace ct {

/// Smallest admissible regularizer; the right-hand side of the generalized
/// eigenproblem is singular at zero for centered kernels.
inline constexpr double kKappaFloor = 1e-8;

/// Kernel function on column samples. Only the linear kernel ships; primal
/// weight recovery is defined for linear kernels only.
class Kernel {
 public:
  virtual ~Kernel() = default;
  virtual std::string name() const = 0;
  virtual bool is_linear() const = 0;
  /// Gram block between the columns of a and the columns of b.
  virtual Eigen::MatrixXd cross(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) const = 0;
};

class LinearKernel final : public Kernel {
 public:
  std::string name() const override { return "linear"; }
  bool is_linear() const override { return true; }
  Eigen::MatrixXd cross(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) const override;
};

/// K = A^T A for a d x n sample matrix, symmetrized. Throws TooFewSamples when n < 2.
Eigen::MatrixXd linear_kernel(const Eigen::MatrixXd& samples);

/// Training statistics needed to center kernel blocks that involve other samples.
struct KernelCentering {
  Eigen::VectorXd row_means;  // mean of each training row of the raw Gram
  double grand_mean = 0.0;
};

struct CenteredKernel {
  Eigen::MatrixXd matrix;
  KernelCentering centering;
};

/// Double centering H K H with H = I - 11^T / n.
CenteredKernel center_kernel(const Eigen::MatrixXd& train_gram);

/// Centers a raw train x other Gram block with the training statistics only.
Eigen::MatrixXd center_cross(const Eigen::MatrixXd& train_by_other, const KernelCentering& centering);

struct KernelPair {
  CenteredKernel x;
  CenteredKernel y;
};

KernelPair make_kernel_pair(const Eigen::MatrixXd& x_train, const Eigen::MatrixXd& y_train);

/// First canonical pair of the regularized kernel CCA problem
///   [0 KxKy; KyKx 0][a; b] = mu [Lx 0; 0 Ly][a; b],  L = K^2 + kappa I.
///
/// `eigenvalue` is mu. `lambda` is the Pearson correlation of the training
/// projections Kx*alpha and Ky*beta, i.e. mu with the kappa terms removed from
/// the normalization; both lie in [0, 1] and coincide as kappa -> 0.
/// Normalization: alpha^T Lx alpha = beta^T Ly beta = 1; the largest-magnitude
/// entry of beta is positive.
struct KccaModel {
  Eigen::VectorXd alpha;
  Eigen::VectorXd beta;
  double lambda = 0.0;
  double eigenvalue = 0.0;
  double kappa = 0.0;
  Index n_lags = 0;
  std::vector<Index> train_indices;
  /// Norms of the centered training projections.
  double x_norm = 0.0;
  double y_norm = 0.0;
  bool linear_kernel = true;
};

/// Reference route: Cholesky factors of Lx and Ly reduce the problem to a
/// symmetric eigenproblem of size n. O(n^3); kernels must be centered.
KccaModel solve_kcca(const Eigen::MatrixXd& kx, const Eigen::MatrixXd& ky, double kappa);

/// Same problem solved in the eigenbases of Kx and Ky. Reusable for every kappa.
class SpectralKcca {
 public:
  SpectralKcca(const Eigen::MatrixXd& kx, const Eigen::MatrixXd& ky);
  KccaModel solve(double kappa) const;
  Index num_samples() const { return n_; }

 private:
  Index n_;
  Eigen::VectorXd x_values_, y_values_;
  Eigen::MatrixXd x_basis_, y_basis_;
  Eigen::MatrixXd cross_;
};

/// Projections u = Kx_block^T alpha, v = Ky_block^T beta of a train x other block pair.
std::pair<Eigen::VectorXd, Eigen::VectorXd> project(const KccaModel& model, const Eigen::MatrixXd& kx_block,
                                                    const Eigen::MatrixXd& ky_block);

/// Per-lag feature weights. Column tau - 1 of w_x holds lag tau.
struct PrimalWeights {
  Eigen::MatrixXd w_x;  // W x n_lags
  Eigen::VectorXd w_y;  // W

  /// Back to the stacked embedded order (top block = oldest lag).
  Eigen::VectorXd stacked_x() const;
  static PrimalWeights from_stacked(const Eigen::VectorXd& stacked_x, Index num_terms, Eigen::VectorXd w_y);
};

/// w_x = X_embedded * alpha split by lag, w_y = Y * beta.
/// Throws NonLinearKernel for models trained on another kernel, ShapeMismatch on size errors.
PrimalWeights recover_primal(const KccaModel& model, const Eigen::MatrixXd& embedded_train, Index num_terms,
                             const Eigen::MatrixXd& pool_train);

/// Pearson correlation; nullopt when either side has zero variance.
std::optional<double> pearson(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b);

enum class KccaRoute {
  Auto,    // primal when the stacked feature count is below the sample count
  Primal,  // eigenproblems on feature second moments
  Dual,    // eigenproblems on n x n kernels
};

/// Result of a linear-kernel fit on a row range of the embedded matrix.
struct LinearKccaFit {
  KccaModel model;          // alpha is empty when not requested
  Eigen::VectorXd w_x;      // stacked, same row range as the fit
  Eigen::VectorXd w_y;
  Eigen::VectorXd x_mean;   // training means used for centering
  Eigen::VectorXd y_mean;
};

class LinearKccaFactor;

/// Linear-kernel CCA on fixed training columns of (x, y). Centering, second
/// moments and the pool-side spectrum are computed once; factor() then handles
/// any contiguous x row range (one lag setting) and the factor any kappa.
/// Only training columns are ever read.
class LinearKcca {
 public:
  LinearKcca(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, std::span<const Index> train_cols,
             KccaRoute route = KccaRoute::Auto);

  LinearKccaFactor factor(Index row_begin, Index rows) const;

  Index num_samples() const { return static_cast<Index>(train_cols_.size()); }
  KccaRoute route() const { return route_; }
  const std::vector<Index>& train_cols() const { return train_cols_; }

 private:
  friend class LinearKccaFactor;

  std::vector<Index> train_cols_;
  KccaRoute route_;
  Eigen::MatrixXd xc_;
  Eigen::MatrixXd yc_;
  Eigen::VectorXd x_mean_;
  Eigen::VectorXd y_mean_;
  Eigen::MatrixXd moments_;  // primal route: [xc; yc] [xc; yc]^T
  Eigen::VectorXd y_values_;
  Eigen::MatrixXd y_basis_;  // primal: feature eigenvectors; dual: kernel eigenvectors
};

class LinearKccaFactor {
 public:
  LinearKccaFit solve(double kappa, bool with_alpha = true) const;

 private:
  friend class LinearKcca;
  LinearKccaFactor() = default;

  const LinearKcca* owner_ = nullptr;
  Index row_begin_ = 0;
  Index rows_ = 0;
  Eigen::VectorXd x_values_;
  Eigen::MatrixXd x_basis_;
  Eigen::MatrixXd cross_;
};

}  // namespace ct
