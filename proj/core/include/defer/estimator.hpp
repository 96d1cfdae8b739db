#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "defer/link.hpp"

namespace defer {

// One logged (context, response) pair.
using Sample = std::pair<Eigen::VectorXd, double>;

// Confidence-ellipsoid parameters: sub-Gaussian noise scale sigma, the lower
// slope bound kappa, and the failure probability delta.
struct ConfidenceConfig {
  double sigma = 0.1;
  double kappa = 1.0;
  double delta = 0.1;

  void validate() const;  // throws DomainError unless all fields are strictly in range
};

// beta(t) = (sigma/kappa) * sqrt(2 d log((1 + 2 t d) / delta)).
double confidence_radius(const ConfidenceConfig& cfg, std::int64_t t, int dim);

enum class OptimisticDirection { RewardUp, CostDown };

// Ridge-penalized GLM maximum likelihood over a history of samples.
//
// Identity link: the closed-form solution of (ridge*I + sum x x^T) theta = sum y x.
// Logistic link: Newton iteration on the penalized negative log-likelihood,
// stopping when the gradient infinity-norm falls below 1e-8 (cap 100 steps).
//
// Throws SingularMatrixError when ridge = 0 and the design does not span,
// ConvergenceError (carrying the final gradient norm) when the cap is hit.
Eigen::VectorXd mle_fit(const LinkFunction& link, const std::vector<Sample>& history,
                        double ridge);

// Per-arm GLM state: the regularized design matrix M = ridge*I + sum x x^T,
// its maintained inverse, the current MLE, and the observation log.
//
// The inverse is advanced by rank-one updates and re-inverted directly every
// kInverseRefreshPeriod updates to bound drift. Single-writer; read-only
// prediction is safe to share across threads.
class ArmEstimator {
 public:
  static constexpr std::int64_t kInverseRefreshPeriod = 512;

  ArmEstimator() = default;
  ArmEstimator(int dim, double ridge, LinkFunction link);

  int dim() const { return dim_; }
  double ridge() const { return ridge_; }
  const LinkFunction& link() const { return link_; }

  // Logs (x, y), applies the rank-one design update, and refits the MLE.
  // Throws DomainError on dimension mismatch.
  void update(const Eigen::VectorXd& x, double y);

  // Replaces the entire history (used when contexts are re-embedded) and
  // recomputes M, its inverse, and the MLE from scratch.
  void rebuild(const std::vector<Sample>& samples);

  const Eigen::MatrixXd& design() const { return design_; }
  const Eigen::MatrixXd& design_inverse() const { return inverse_; }
  const Eigen::VectorXd& mle() const { return theta_; }
  std::int64_t observation_count() const { return static_cast<std::int64_t>(history_.size()); }
  const std::vector<Sample>& history() const { return history_; }

  // Smallest eigenvalue of the un-ridged design sum M - ridge*I.
  double min_eigenvalue_unridged() const;

  // mu(x^T theta_hat).
  double predict_mean(const Eigen::VectorXd& x) const;

  // sqrt(x^T M^-1 x).
  double ellipsoid_norm(const Eigen::VectorXd& x) const;

  // theta_hat +- beta * M^-1 x / sqrt(x^T M^-1 x). Throws DomainError on a
  // zero context.
  Eigen::VectorXd optimistic_param(const Eigen::VectorXd& x, double beta,
                                   OptimisticDirection direction) const;

  // mu(x^T theta_hat +- beta * sqrt(x^T M^-1 x)); the same scalar the
  // perturbed parameter produces, computed without forming it.
  double optimistic_mean(const Eigen::VectorXd& x, double beta,
                         OptimisticDirection direction) const;

 private:
  void check_dim(const Eigen::VectorXd& x) const;
  void refit();
  void refresh_inverse();

  int dim_ = 0;
  double ridge_ = 0.0;
  LinkFunction link_;
  Eigen::MatrixXd design_;
  Eigen::MatrixXd inverse_;
  Eigen::VectorXd theta_;
  Eigen::VectorXd response_sum_;  // sum of y * x, feeds the identity-link closed form
  std::vector<Sample> history_;
  std::int64_t updates_since_refresh_ = 0;
};

}  // namespace defer
