#include "repulse/deathmodel.hpp"

#include <cmath>
#include <stdexcept>

#include "repulse/numeric.hpp"

namespace repulse::deathmodel {

namespace {

void check_params(double sigma, double p0) {
  if (!(sigma > 0.0 && sigma <= 1.0))
    throw std::domain_error("sigma must lie in (0,1]");
  if (!(p0 >= 0.0 && p0 < 1.0)) throw std::domain_error("p0 must lie in [0,1)");
}

}  // namespace

DeathFixpoints fixpoints(double sigma, double p0) {
  check_params(sigma, p0);
  const double p2 = 1.0 - p0;
  DeathFixpoints fp;
  fp.discriminant = 1.0 - 4.0 * sigma * p2 * p0;
  const double s = std::sqrt(fp.discriminant);
  // Larger-magnitude root first; the small root via the product p0/(sigma p2)
  // to dodge cancellation when p0 is small.
  fp.v_plus = (1.0 + s) / (2.0 * sigma * p2);
  fp.v_minus = 2.0 * p0 / (1.0 + s);
  return fp;
}

double decay_rate(double sigma, double p0) {
  // 2 sigma p2 v_minus - 1 simplifies to -sqrt(discriminant) exactly.
  return -std::sqrt(fixpoints(sigma, p0).discriminant);
}

namespace {

// Shared denominator 1/(w0 - v_minus) - sigma p2 expm1(a t)/a for the ODE
// solution started at w0; expm1(at)/a handled through the series-guarded
// ratio so a -> 0 is smooth.
double ode_denominator(double w0_minus_vm_inv, double sigma, double p0,
                       double a, double t) {
  const double p2 = 1.0 - p0;
  return w0_minus_vm_inv - sigma * p2 * t * num::em1_over(a * t);
}

}  // namespace

double partition_v_death(double sigma, double p0, double t) {
  check_params(sigma, p0);
  if (!(t >= 0.0)) throw std::domain_error("t must be >= 0");
  if (sigma == 1.0) return 1.0;
  const DeathFixpoints fp = fixpoints(sigma, p0);
  const double a = -std::sqrt(fp.discriminant);
  const double d = ode_denominator(1.0 / (1.0 - fp.v_minus), sigma, p0, a, t);
  return fp.v_minus + std::exp(a * t) / d;
}

double generating_w(double sigma, double p0, double t, double gamma) {
  check_params(sigma, p0);
  if (!(t >= 0.0)) throw std::domain_error("t must be >= 0");
  if (!(gamma >= 0.0)) throw std::domain_error("gamma must be >= 0");
  const DeathFixpoints fp = fixpoints(sigma, p0);
  const double a = -std::sqrt(fp.discriminant);
  const double w0 = std::exp(-gamma);
  if (w0 == fp.v_minus) return fp.v_minus;  // stationary start
  const double d = ode_denominator(1.0 / (w0 - fp.v_minus), sigma, p0, a, t);
  return fp.v_minus + std::exp(a * t) / d;
}

double mean_n_death(double sigma, double p0, double t) {
  check_params(sigma, p0);
  if (!(t >= 0.0)) throw std::domain_error("t must be >= 0");
  if (sigma == 1.0) return std::exp((1.0 - 2.0 * p0) * t);
  const DeathFixpoints fp = fixpoints(sigma, p0);
  const double a = -std::sqrt(fp.discriminant);
  const double d = ode_denominator(1.0 / (1.0 - fp.v_minus), sigma, p0, a, t);
  const double b = (1.0 - fp.v_minus) * d;
  const double v = fp.v_minus + std::exp(a * t) / d;
  return std::exp(a * t) / (v * b * b);
}

double u_sigma_direct(double sigma, double p0, double t) {
  check_params(sigma, p0);
  if (!(t >= 0.0)) throw std::domain_error("t must be >= 0");
  const double p2 = 1.0 - p0;
  const double integral = num::adaptive_simpson(
      [&](double s) { return 2.0 * p2 * sigma * partition_v_death(sigma, p0, s) - 1.0; },
      0.0, t, 1e-10);
  return std::exp(integral);
}

}  // namespace repulse::deathmodel
