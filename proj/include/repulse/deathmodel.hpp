#pragma once

namespace repulse::deathmodel {

// Fixpoints of sigma p2 v^2 - v + p0 with p2 = 1 - p0. The discriminant is
// 1 - 4 sigma p2 p0; roots are real for all sigma in (0,1], p0 in [0,1/2].
struct DeathFixpoints {
  double v_plus = 0.0;
  double v_minus = 0.0;
  double discriminant = 0.0;
};
DeathFixpoints fixpoints(double sigma, double p0);

// Exponent governing large-t decay/growth: 2 sigma p2 v_minus - 1.
double decay_rate(double sigma, double p0);

// Weighted survival functional E[sigma^{m(t)}] (weight on branch count m)
// for the branching/death skeleton; solves v' = sigma p2 v^2 - v + p0,
// v(0) = 1.
double partition_v_death(double sigma, double p0, double t);

// Same ODE started from e^{-gamma}: generating function
// E[sigma^{m(t)} e^{-gamma n(t)}].
double generating_w(double sigma, double p0, double t, double gamma);

// Weighted mean particle count E[n sigma^m]/E[sigma^m].
double mean_n_death(double sigma, double p0, double t);

// Independent route to E[n sigma^m] via exp(int_0^t (2 p2 sigma v(s) - 1) ds)
// with adaptive Simpson at absolute tolerance 1e-10 on the exponent.
double u_sigma_direct(double sigma, double p0, double t);

}  // namespace repulse::deathmodel
