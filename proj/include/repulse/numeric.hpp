#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace repulse {

// Thrown when a computation exceeds a resource cap (particle count, memory).
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when an iterative scheme fails to meet its convergence gate.
struct NotConvergedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown by the PDE solver when the requested domain cannot contain the
// solution to the requested accuracy.
struct DomainTooSmallError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace num {

// ln(1+e^z), stable over the whole real line (and for z = -inf).
double softplus(double z) noexcept;

// expm1(z)/z with the removable singularity at z=0 filled in by series.
double em1_over(double z) noexcept;

// Standard normal CDF.
double norm_cdf(double x) noexcept;

// Adaptive Simpson quadrature with absolute tolerance.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol);

// Regularized lower incomplete gamma P(a,x) (series + continued fraction).
double gamma_p(double a, double x);

// Chi-square CDF and upper quantile (monotone bisection on gamma_p).
double chi2_cdf(double df, double x);
double chi2_quantile(double df, double p);

// Classic RK4 with fixed step; used as an independent ODE oracle in tests and
// kept here so the CLI can expose it for cross-checks.
double rk4(const std::function<double(double, double)>& f, double y0, double t0,
           double t1, double h);

// Least-squares slope/intercept of y against x.
struct LineFit {
  double slope = 0, intercept = 0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct MeanVar {
  double mean = 0, var = 0;  // var is the unbiased sample variance
  std::size_t n = 0;
};
MeanVar mean_var(const std::vector<double>& xs);

}  // namespace num
}  // namespace repulse
