#include "defer/estimator.hpp"

#include <cmath>
#include <sstream>

#include "defer/errors.hpp"

namespace defer {

namespace {

constexpr double kGradientTolerance = 1e-8;
constexpr int kNewtonCap = 100;

// Penalized negative log-likelihood pieces for the logistic link with
// responses in [0, 1].
double logistic_objective(const std::vector<Sample>& history, double ridge,
                          const Eigen::VectorXd& theta) {
  double nll = 0.0;
  for (const auto& [x, y] : history) {
    const double z = x.dot(theta);
    // log(1 + e^z) - y z, evaluated stably.
    const double softplus = z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    nll += softplus - y * z;
  }
  return nll + 0.5 * ridge * theta.squaredNorm();
}

Eigen::VectorXd logistic_gradient(const LinkFunction& link, const std::vector<Sample>& history,
                                  double ridge, const Eigen::VectorXd& theta) {
  Eigen::VectorXd grad = ridge * theta;
  for (const auto& [x, y] : history) {
    grad += (link.mu(x.dot(theta)) - y) * x;
  }
  return grad;
}

bool nearly_singular(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  return !(lo > 1e-12 * std::max(1.0, hi));
}

Eigen::VectorXd newton_logistic(const LinkFunction& link, const std::vector<Sample>& history,
                                double ridge, Eigen::VectorXd theta) {
  const int d = static_cast<int>(theta.size());
  double objective = logistic_objective(history, ridge, theta);
  for (int iter = 0; iter < kNewtonCap; ++iter) {
    const Eigen::VectorXd grad = logistic_gradient(link, history, ridge, theta);
    const double grad_norm = grad.lpNorm<Eigen::Infinity>();
    if (grad_norm <= kGradientTolerance) return theta;

    Eigen::MatrixXd hessian = ridge * Eigen::MatrixXd::Identity(d, d);
    for (const auto& [x, y] : history) {
      (void)y;
      hessian.noalias() += link.mu_prime(x.dot(theta)) * (x * x.transpose());
    }
    if (ridge == 0.0 && nearly_singular(hessian)) {
      throw SingularMatrixError(
          "logistic MLE system is singular with ridge = 0; set ridge > 0");
    }
    const Eigen::VectorXd step = hessian.ldlt().solve(grad);

    // Step halving keeps the penalized objective non-increasing; the slack
    // admits full Newton steps once the improvement is below the resolution
    // of the objective itself.
    const double slack = 1e-9 * (1.0 + std::abs(objective));
    double scale = 1.0;
    Eigen::VectorXd candidate = theta - scale * step;
    double candidate_objective = logistic_objective(history, ridge, candidate);
    for (int halving = 0; halving < 40 && !(candidate_objective <= objective + slack); ++halving) {
      scale *= 0.5;
      candidate = theta - scale * step;
      candidate_objective = logistic_objective(history, ridge, candidate);
    }
    theta = candidate;
    objective = candidate_objective;
  }
  const double final_norm =
      logistic_gradient(link, history, ridge, theta).lpNorm<Eigen::Infinity>();
  if (final_norm <= kGradientTolerance) return theta;
  std::ostringstream msg;
  msg << "logistic MLE did not converge within " << kNewtonCap
      << " iterations; final gradient norm " << final_norm;
  throw ConvergenceError(msg.str(), final_norm);
}

}  // namespace

void ConfidenceConfig::validate() const {
  if (!(sigma > 0.0)) throw DomainError("confidence sigma must be > 0");
  if (!(kappa > 0.0)) throw DomainError("confidence kappa must be > 0");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("confidence delta must lie in (0, 1)");
}

double confidence_radius(const ConfidenceConfig& cfg, std::int64_t t, int dim) {
  cfg.validate();
  if (t < 1) throw DomainError("confidence_radius requires t >= 1");
  if (dim < 1) throw DomainError("confidence_radius requires dim >= 1");
  const double td = static_cast<double>(t) * static_cast<double>(dim);
  return (cfg.sigma / cfg.kappa) *
         std::sqrt(2.0 * static_cast<double>(dim) * std::log((1.0 + 2.0 * td) / cfg.delta));
}

Eigen::VectorXd mle_fit(const LinkFunction& link, const std::vector<Sample>& history,
                        double ridge) {
  if (history.empty()) throw DomainError("mle_fit requires a non-empty history");
  if (ridge < 0.0) throw DomainError("ridge must be >= 0");
  const int d = static_cast<int>(history.front().first.size());
  for (const auto& [x, y] : history) {
    if (x.size() != d) throw DomainError("mle_fit history has mixed dimensions");
    if (!x.allFinite() || !std::isfinite(y)) throw DomainError("mle_fit history has non-finite entries");
  }

  if (link.kind() == LinkKind::Identity) {
    Eigen::MatrixXd m = ridge * Eigen::MatrixXd::Identity(d, d);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
    for (const auto& [x, y] : history) {
      m.noalias() += x * x.transpose();
      b.noalias() += y * x;
    }
    if (ridge == 0.0 && nearly_singular(m)) {
      throw SingularMatrixError(
          "identity MLE system is singular with ridge = 0; set ridge > 0");
    }
    return m.ldlt().solve(b);
  }
  return newton_logistic(link, history, ridge, Eigen::VectorXd::Zero(d));
}

ArmEstimator::ArmEstimator(int dim, double ridge, LinkFunction link)
    : dim_(dim), ridge_(ridge), link_(link) {
  if (dim < 1) throw DomainError("ArmEstimator requires dim >= 1");
  if (!(ridge > 0.0)) throw DomainError("ArmEstimator requires ridge > 0");
  design_ = ridge * Eigen::MatrixXd::Identity(dim, dim);
  inverse_ = (1.0 / ridge) * Eigen::MatrixXd::Identity(dim, dim);
  theta_ = Eigen::VectorXd::Zero(dim);
  response_sum_ = Eigen::VectorXd::Zero(dim);
}

void ArmEstimator::check_dim(const Eigen::VectorXd& x) const {
  if (x.size() != dim_) {
    throw DomainError("context dimension " + std::to_string(x.size()) +
                      " does not match estimator dimension " + std::to_string(dim_));
  }
}

void ArmEstimator::update(const Eigen::VectorXd& x, double y) {
  check_dim(x);
  if (!x.allFinite() || !std::isfinite(y)) throw DomainError("non-finite observation");

  design_.noalias() += x * x.transpose();
  const Eigen::VectorXd v = inverse_ * x;
  inverse_.noalias() -= (v * v.transpose()) / (1.0 + x.dot(v));
  response_sum_.noalias() += y * x;
  history_.emplace_back(x, y);

  if (++updates_since_refresh_ >= kInverseRefreshPeriod) refresh_inverse();
  refit();
}

void ArmEstimator::rebuild(const std::vector<Sample>& samples) {
  if (!samples.empty()) {
    const int d = static_cast<int>(samples.front().first.size());
    if (d != dim_) throw DomainError("rebuild samples do not match estimator dimension");
  }
  design_ = ridge_ * Eigen::MatrixXd::Identity(dim_, dim_);
  response_sum_.setZero();
  history_.clear();
  history_.reserve(samples.size());
  for (const auto& [x, y] : samples) {
    check_dim(x);
    design_.noalias() += x * x.transpose();
    response_sum_.noalias() += y * x;
    history_.emplace_back(x, y);
  }
  refresh_inverse();
  refit();
}

void ArmEstimator::refresh_inverse() {
  inverse_ = design_.llt().solve(Eigen::MatrixXd::Identity(dim_, dim_));
  updates_since_refresh_ = 0;
}

void ArmEstimator::refit() {
  if (history_.empty()) {
    theta_.setZero();
    return;
  }
  if (link_.kind() == LinkKind::Identity) {
    theta_.noalias() = inverse_ * response_sum_;
  } else {
    // Warm start from the previous fit; the per-update refit is then a
    // couple of Newton steps.
    // TODO: the warm-started full refit is O(n d^2) per observation; an
    // online quasi-Newton step would make logistic-link replay runs O(d^2).
    theta_ = newton_logistic(link_, history_, ridge_, theta_);
  }
}

double ArmEstimator::min_eigenvalue_unridged() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      design_ - ridge_ * Eigen::MatrixXd::Identity(dim_, dim_));
  return es.eigenvalues().minCoeff();
}

double ArmEstimator::predict_mean(const Eigen::VectorXd& x) const {
  check_dim(x);
  return link_.mu(x.dot(theta_));
}

double ArmEstimator::ellipsoid_norm(const Eigen::VectorXd& x) const {
  check_dim(x);
  return std::sqrt(std::max(0.0, x.dot(inverse_ * x)));
}

Eigen::VectorXd ArmEstimator::optimistic_param(const Eigen::VectorXd& x, double beta,
                                               OptimisticDirection direction) const {
  check_dim(x);
  if (x.isZero(0.0)) throw DomainError("optimistic_param requires a nonzero context");
  const Eigen::VectorXd v = inverse_ * x;
  const double norm = std::sqrt(std::max(0.0, x.dot(v)));
  if (!(norm > 0.0)) throw DomainError("optimistic_param: degenerate ellipsoid norm");
  const double sign = direction == OptimisticDirection::RewardUp ? 1.0 : -1.0;
  return theta_ + (sign * beta / norm) * v;
}

double ArmEstimator::optimistic_mean(const Eigen::VectorXd& x, double beta,
                                     OptimisticDirection direction) const {
  check_dim(x);
  if (x.isZero(0.0)) throw DomainError("optimistic_mean requires a nonzero context");
  const double sign = direction == OptimisticDirection::RewardUp ? 1.0 : -1.0;
  return link_.mu(x.dot(theta_) + sign * beta * ellipsoid_norm(x));
}

}  // namespace defer
