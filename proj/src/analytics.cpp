#include "repulse/analytics.hpp"

#include <cmath>

#include "repulse/numeric.hpp"

namespace repulse::analytics {

namespace {

void check_sigma(double sigma) {
  if (!(sigma > 0.0 && sigma <= 1.0))
    throw std::domain_error("sigma must lie in (0,1]");
}

void check_time(double t) {
  if (!(t >= 0.0)) throw std::domain_error("t must be >= 0");
}

void check_rates(double lambda, double epsilon) {
  if (!(lambda >= 0.0)) throw std::domain_error("lambda must be >= 0");
  if (!(epsilon > 0.0)) throw std::domain_error("epsilon must be > 0");
}

}  // namespace

double sigma_of(double lambda, double epsilon) {
  check_rates(lambda, epsilon);
  return 1.0 / std::cosh(epsilon * std::sqrt(2.0 * lambda));
}

double one_minus_sigma_of(double lambda, double epsilon) {
  check_rates(lambda, epsilon);
  const double x = epsilon * std::sqrt(2.0 * lambda);
  const double sh = std::sinh(0.5 * x);
  return 2.0 * sh * sh / std::cosh(x);  // (cosh x - 1)/cosh x
}

double no_branch_mass(double sigma, double t) {
  check_sigma(sigma);
  check_time(t);
  // Both terms nonnegative: no cancellation for any (sigma, t).
  return (1.0 - sigma) + sigma * std::exp(-t);
}

double partition_v(double sigma, double t) {
  if (sigma == 1.0) {
    check_time(t);
    return 1.0;
  }
  return std::exp(-t) / no_branch_mass(sigma, t);
}

double log_partition_v(double sigma, double t) {
  if (sigma == 1.0) {
    check_time(t);
    return 0.0;
  }
  return -t - std::log(no_branch_mass(sigma, t));
}

double mean_particles(double sigma, double t) {
  return 1.0 / no_branch_mass(sigma, t);
}

double laplace_n(double sigma, double t, double s, double gamma) {
  check_sigma(sigma);
  check_time(t);
  if (!(s >= 0.0 && s <= t)) throw std::domain_error("laplace_n: need 0 <= s <= t");
  // Convergence of the geometric series behind the closed form.
  const double radius =
      std::exp(gamma) * sigma * partition_v(sigma, t - s) * (-std::expm1(-s));
  if (radius >= 1.0)
    throw std::domain_error("laplace_n: transform diverges at this gamma");
  const double num = no_branch_mass(sigma, t);
  const double den = std::exp(-gamma) * no_branch_mass(sigma, t - s) -
                     sigma * (std::exp(s - t) - std::exp(-t));
  return num / den;
}

double geom_param_terminal(double sigma, double t) {
  return no_branch_mass(sigma, t);
}

double geom_param_window(double sigma, double rho) {
  check_sigma(sigma);
  if (sigma < 1.0 && !(rho <= -std::log1p(-sigma)))
    throw std::domain_error("geom_param_window: rho must be <= -ln(1-sigma)");
  return 1.0 / (1.0 + sigma * std::exp(rho));
}

double first_branch_cdf(double sigma, double t, double r) {
  check_sigma(sigma);
  check_time(t);
  if (!(r >= 0.0 && r <= t))
    throw std::domain_error("first_branch_cdf: need 0 <= r <= t");
  // e^{-r} - e^{-t} = e^{-r} (1 - e^{-(t-r)}), cancellation-free.
  const double diff = std::exp(-r) * (-std::expm1(-(t - r)));
  return sigma * diff / no_branch_mass(sigma, r);
}

double limit_kernel_cdf(double T, double delta) {
  if (!(delta >= 0.0)) throw std::domain_error("limit_kernel_cdf: delta >= 0");
  const double z = -delta - T;
  if (z > 700.0)  // e^z would overflow; CDF ~ expm1(delta) e^T
    return std::expm1(delta) * std::exp(T);
  return -std::expm1(-delta) / (std::exp(z) + 1.0);
}

double limit_first_cdf(double delta) {
  return 1.0 / (1.0 + std::exp(-delta));
}

double limit_kernel_mean_wait(double T) {
  if (T > 36.0) return 1.0 + 0.5 * std::exp(-T);
  return (1.0 + std::exp(T)) * num::softplus(-T);
}

double partition_rescaled_limit(double lambda, double epsilon, double t) {
  check_time(t);
  if (!(lambda > 0.0)) throw std::domain_error("lambda must be > 0 here");
  // e^t v(t) = 1/((1-sigma) + sigma e^{-t}) with 1-sigma formed stably.
  const double mass = one_minus_sigma_of(lambda, epsilon) +
                      sigma_of(lambda, epsilon) * std::exp(-t);
  return lambda * epsilon * epsilon / mass;
}

double LambdaSchedule::at(double t) const {
  switch (kind) {
    case LambdaScheduleKind::Constant:
      return lambda0;
    case LambdaScheduleKind::InverseT:
      if (!(t > 0.0)) throw std::domain_error("1/t schedule needs t > 0");
      return lambda0 / t;
    case LambdaScheduleKind::ExpDecay:
      return lambda0 * std::exp(-alpha * t);
  }
  throw std::logic_error("unreachable");
}

LambdaSchedule LambdaSchedule::constant(double lambda0) {
  if (!(lambda0 >= 0.0)) throw std::domain_error("lambda0 must be >= 0");
  return {LambdaScheduleKind::Constant, lambda0, 0.0};
}

LambdaSchedule LambdaSchedule::inverse_t(double lambda0) {
  if (!(lambda0 > 0.0)) throw std::domain_error("lambda0 must be > 0");
  return {LambdaScheduleKind::InverseT, lambda0, 0.0};
}

LambdaSchedule LambdaSchedule::exp_decay(double lambda0, double alpha) {
  if (!(lambda0 > 0.0)) throw std::domain_error("lambda0 must be > 0");
  if (!(alpha >= 0.0 && alpha < 1.0))
    throw std::domain_error("decay rate must lie in [0,1)");
  return {LambdaScheduleKind::ExpDecay, lambda0, alpha};
}

ModelParams ModelParams::from_rates(double lambda, double epsilon, double p0,
                                    double horizon) {
  check_rates(lambda, epsilon);
  if (!(p0 >= 0.0 && p0 < 1.0)) throw std::domain_error("p0 must lie in [0,1)");
  if (!(horizon > 0.0)) throw std::domain_error("horizon must be > 0");
  ModelParams p;
  p.lambda = lambda;
  p.epsilon = epsilon;
  p.sigma = sigma_of(lambda, epsilon);
  p.p0 = p0;
  p.horizon = horizon;
  return p;
}

ModelParams ModelParams::from_sigma(double sigma, double p0, double horizon) {
  check_sigma(sigma);
  if (!(p0 >= 0.0 && p0 < 1.0)) throw std::domain_error("p0 must lie in [0,1)");
  if (!(horizon > 0.0)) throw std::domain_error("horizon must be > 0");
  ModelParams p;
  p.sigma = sigma;
  p.p0 = p0;
  p.horizon = horizon;
  return p;
}

}  // namespace repulse::analytics
