#pragma once

#include <string>

namespace defer {

enum class LinkKind { Identity, Logistic };

// Monotone mean function mapping a linear score to an expected reward or
// cost, together with the derivative bounds the confidence machinery needs:
// lipschitz() bounds mu' from above everywhere, kappa_floor() bounds it from
// below over the configured feasible range.
class LinkFunction {
 public:
  LinkFunction() : LinkFunction(identity()) {}

  static LinkFunction identity();
  // kappa_floor must lie in (0, 1/4]; 1/4 is the sigmoid's maximum slope.
  static LinkFunction logistic(double kappa_floor = 0.1);

  // mu(z). Throws DomainError on non-finite input.
  double mu(double z) const;
  // mu'(z).
  double mu_prime(double z) const;

  LinkKind kind() const { return kind_; }
  double lipschitz() const { return lipschitz_; }
  double kappa_floor() const { return kappa_floor_; }
  std::string name() const;

 private:
  LinkFunction(LinkKind kind, double lipschitz, double kappa_floor)
      : kind_(kind), lipschitz_(lipschitz), kappa_floor_(kappa_floor) {}

  LinkKind kind_;
  double lipschitz_;
  double kappa_floor_;
};

// The three mean functions one deferral problem carries: the model arm's
// reward, the human arm's reward, and the deferral cost.
struct LinkSet {
  LinkFunction reward_model;
  LinkFunction reward_human;
  LinkFunction cost;
};

}  // namespace defer
