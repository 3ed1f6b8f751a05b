#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "repulse/analytics.hpp"
#include "repulse/deathmodel.hpp"
#include "repulse/numeric.hpp"

using namespace repulse;
using namespace repulse::deathmodel;

TEST_CASE("weighted survival solves its Riccati ODE") {
  const double sigma = 0.9, p0 = 0.2, p2 = 0.8;
  const double direct = partition_v_death(sigma, p0, 2.0);
  const double ode = num::rk4(
      [&](double, double v) { return sigma * p2 * v * v - v + p0; }, 1.0, 0.0,
      2.0, 1e-4);
  CHECK(direct == doctest::Approx(ode).epsilon(1e-8));

  const double gamma = 0.5;
  const double gw = generating_w(sigma, p0, 2.0, gamma);
  const double gw_ode = num::rk4(
      [&](double, double v) { return sigma * p2 * v * v - v + p0; },
      std::exp(-gamma), 0.0, 2.0, 1e-4);
  CHECK(gw == doctest::Approx(gw_ode).epsilon(1e-8));
}

TEST_CASE("ODE residual by central differences") {
  const double sigma = 0.7, p0 = 0.3, p2 = 0.7, t = 1.5, h = 1e-5;
  const double w = partition_v_death(sigma, p0, t);
  const double dw = (partition_v_death(sigma, p0, t + h) -
                     partition_v_death(sigma, p0, t - h)) /
                    (2.0 * h);
  CHECK(std::fabs(dw - (sigma * p2 * w * w - w + p0)) < 1e-6);
}

TEST_CASE("fixpoints at the degenerate corners") {
  const auto at_one = fixpoints(1.0, 0.2);
  CHECK(at_one.v_plus == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(at_one.v_minus == doctest::Approx(0.25).epsilon(1e-14));  // p0/p2
  const auto no_death = fixpoints(0.8, 0.0);
  CHECK(no_death.v_minus == 0.0);
  CHECK(no_death.v_plus == doctest::Approx(1.25).epsilon(1e-14));
  CHECK(no_death.discriminant == 1.0);
  CHECK_THROWS_AS(fixpoints(0.0, 0.2), std::domain_error);
  CHECK_THROWS_AS(fixpoints(0.5, 1.0), std::domain_error);
}

TEST_CASE("decay rate identities") {
  for (const double sigma : {0.3, 0.9, 1.0})
    for (const double p0 : {0.05, 0.2, 0.45}) {
      const auto fp = fixpoints(sigma, p0);
      const double direct = 2.0 * sigma * (1.0 - p0) * fp.v_minus - 1.0;
      CHECK(std::fabs(decay_rate(sigma, p0) - direct) < 1e-14);
    }
  // v_minus grows with sigma at fixed p0
  CHECK(fixpoints(0.3, 0.2).v_minus < fixpoints(0.9, 0.2).v_minus);
  // no death: pure tilted growth at rate... none lost
  CHECK(decay_rate(0.9, 0.0) == -1.0);
}

TEST_CASE("death-free limit recovers the plain partition function") {
  for (const double t : {0.0, 1.0, 5.0})
    CHECK(partition_v_death(0.6, 0.0, t) ==
          doctest::Approx(analytics::partition_v(0.6, t)).epsilon(1e-12));
}

TEST_CASE("sigma = 1 keeps the ancestral weight at one") {
  CHECK(partition_v_death(1.0, 0.2, 7.0) == 1.0);
  CHECK(mean_n_death(1.0, 0.2, 3.0) ==
        doctest::Approx(std::exp(0.6 * 3.0)).epsilon(1e-12));
}

TEST_CASE("generating function endpoints") {
  const double sigma = 0.9, p0 = 0.2;
  CHECK(generating_w(sigma, p0, 3.0, 0.0) ==
        doctest::Approx(partition_v_death(sigma, p0, 3.0)).epsilon(1e-12));
  CHECK(generating_w(sigma, p0, 0.0, 0.7) ==
        doctest::Approx(std::exp(-0.7)).epsilon(1e-14));
  CHECK(generating_w(sigma, p0, 2.0, 0.5) > generating_w(sigma, p0, 2.0, 1.5));
  // stationary start stays put
  const double vm = fixpoints(sigma, p0).v_minus;
  CHECK(generating_w(sigma, p0, 10.0, -std::log(vm)) ==
        doctest::Approx(vm).epsilon(1e-12));
  CHECK_THROWS_AS(generating_w(sigma, p0, 1.0, -0.1), std::domain_error);
}

TEST_CASE("two routes to the weighted mean count agree") {
  for (const double sigma : {0.5, 0.9})
    for (const double p0 : {0.05, 0.3})
      for (const double t : {0.5, 2.0, 4.0}) {
        const double via_mean =
            mean_n_death(sigma, p0, t) * partition_v_death(sigma, p0, t);
        const double direct = u_sigma_direct(sigma, p0, t);
        CHECK(std::fabs(via_mean / direct - 1.0) < 1e-6);
      }
  CHECK(mean_n_death(0.9, 0.2, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("large-t slope of the weighted mean equals the decay rate") {
  const double sigma = 0.9, p0 = 0.2;
  // by t = 40 the subleading mode (relative size e^{2at}) is below 1e-10
  const double slope = (std::log(mean_n_death(sigma, p0, 50.0)) -
                        std::log(mean_n_death(sigma, p0, 40.0))) /
                       10.0;
  CHECK(slope == doctest::Approx(decay_rate(sigma, p0)).epsilon(1e-6));
}

TEST_CASE("argument validation") {
  CHECK_THROWS_AS(partition_v_death(0.5, 0.2, -1.0), std::domain_error);
  CHECK_THROWS_AS(mean_n_death(0.5, -0.1, 1.0), std::domain_error);
  CHECK_THROWS_AS(u_sigma_direct(1.5, 0.2, 1.0), std::domain_error);
}
