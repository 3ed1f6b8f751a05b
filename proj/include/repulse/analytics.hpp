#pragma once

#include <cmath>
#include <stdexcept>

namespace repulse::analytics {

// Branching weight per particle implied by a proximity penalty of strength
// lambda acting inside a tube of half-width epsilon: sech(epsilon*sqrt(2 lambda)).
double sigma_of(double lambda, double epsilon);

// 1 - sigma_of, computed without cancellation (needed near sigma -> 1).
double one_minus_sigma_of(double lambda, double epsilon);

// Probability that a lone ancestor never branches up to t, relative to the
// tilted partition function: e^{-t}/v = (1-sigma) + sigma e^{-t}. This
// quantity is the workhorse denominator of every closed form below.
double no_branch_mass(double sigma, double t);

// Tilted partition function v(t) = e^{-t} / ((1-sigma) + sigma e^{-t});
// solves v' = sigma v^2 - v with v(0) = 1.
double partition_v(double sigma, double t);
double log_partition_v(double sigma, double t);

// Mean particle count under the tilted law: 1 / ((1-sigma) + sigma e^{-t}).
double mean_particles(double sigma, double t);

// Laplace transform E[e^{gamma n(s)}] of the particle count at time
// s in [0, t] under the horizon-t tilt (the window before the horizon is
// t - s). Throws std::domain_error when the underlying geometric series
// diverges (e^gamma too large).
double laplace_n(double sigma, double t, double s, double gamma);

// Terminal particle count is geometric on {1,2,...} with this parameter.
double geom_param_terminal(double sigma, double t);

// Particle count at t + ln(1-sigma) + rho (rho <= -ln(1-sigma)) converges to
// a geometric law with parameter 1/(1 + sigma e^rho).
double geom_param_window(double sigma, double rho);

// P(first branch <= t - r) for the tilted ancestor over horizon t; defective,
// total mass sigma(1 - e^{-t}).
double first_branch_cdf(double sigma, double t, double r);

// Small-lambda limit objects. T is the birth time of a node on the shifted
// clock; delta is a wait.
double limit_kernel_cdf(double T, double delta);   // (1-e^-d)/(e^{-d-T}+1)
double limit_first_cdf(double delta);              // logistic 1/(1+e^-d)
double limit_kernel_mean_wait(double T);           // (1+e^T) ln(1+e^{-T})

// e^t lambda epsilon^2 v(t) with sigma = sigma_of(lambda, epsilon); tends to
// 1 as lambda -> 0 then t -> infinity.
double partition_rescaled_limit(double lambda, double epsilon, double t);

enum class LambdaScheduleKind { Constant, InverseT, ExpDecay };

struct LambdaSchedule {
  LambdaScheduleKind kind = LambdaScheduleKind::Constant;
  double lambda0 = 0.0;
  double alpha = 0.0;  // ExpDecay rate, must be < 1
  double at(double t) const;
  static LambdaSchedule constant(double lambda0);
  static LambdaSchedule inverse_t(double lambda0);
  static LambdaSchedule exp_decay(double lambda0, double alpha);
};

// Geometric law on {1,2,...}.
struct GeomLaw {
  double p;
  explicit GeomLaw(double p_) : p(p_) {
    if (!(p > 0.0 && p <= 1.0)) throw std::domain_error("GeomLaw: p in (0,1]");
  }
  double mean() const { return 1.0 / p; }
  double pmf(long long k) const {
    return k < 1 ? 0.0 : p * std::pow(1.0 - p, static_cast<double>(k - 1));
  }
  double cdf(double k) const {
    const double fk = std::floor(k);
    return fk < 1.0 ? 0.0 : -std::expm1(fk * std::log1p(-p));
  }
};

// Shared parameter bundle. Exactly one of {(lambda, epsilon), sigma} is given
// at construction; the other is derived (sigma via sigma_of) or left NaN.
struct ModelParams {
  double lambda = std::nan("");
  double epsilon = std::nan("");
  double sigma = std::nan("");
  double p0 = 0.0;  // death probability at a clock ring; p2 = 1 - p0
  double horizon = 0.0;

  double p2() const { return 1.0 - p0; }
  static ModelParams from_rates(double lambda, double epsilon, double p0,
                                double horizon);
  static ModelParams from_sigma(double sigma, double p0, double horizon);
};

}  // namespace repulse::analytics
