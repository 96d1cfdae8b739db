#include "defer/link.hpp"

#include <cmath>

#include "defer/errors.hpp"

namespace defer {

LinkFunction LinkFunction::identity() { return LinkFunction(LinkKind::Identity, 1.0, 1.0); }

LinkFunction LinkFunction::logistic(double kappa_floor) {
  if (!(kappa_floor > 0.0) || kappa_floor > 0.25) {
    throw DomainError("logistic kappa_floor must lie in (0, 0.25]");
  }
  return LinkFunction(LinkKind::Logistic, 0.25, kappa_floor);
}

double LinkFunction::mu(double z) const {
  if (!std::isfinite(z)) throw DomainError("link function evaluated at non-finite input");
  switch (kind_) {
    case LinkKind::Identity:
      return z;
    case LinkKind::Logistic:
      if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
      } else {
        const double e = std::exp(z);
        return e / (1.0 + e);
      }
  }
  return z;
}

double LinkFunction::mu_prime(double z) const {
  if (!std::isfinite(z)) throw DomainError("link derivative evaluated at non-finite input");
  switch (kind_) {
    case LinkKind::Identity:
      return 1.0;
    case LinkKind::Logistic: {
      const double m = mu(z);
      return m * (1.0 - m);
    }
  }
  return 1.0;
}

std::string LinkFunction::name() const {
  return kind_ == LinkKind::Identity ? "identity" : "logistic";
}

}  // namespace defer
