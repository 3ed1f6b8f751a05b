#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "repulse/rng.hpp"
#include "repulse/stats.hpp"

using namespace repulse;
using namespace repulse::stats;

namespace {

// Geometric on {1,2,...} by inversion.
std::int64_t geom_draw(rng::Stream& s, double p) {
  const double u = s.uniform();
  return 1 + static_cast<std::int64_t>(std::log(u) / std::log1p(-p));
}

std::vector<std::int64_t> geom_counts(rng::Stream& s, double p, int n) {
  std::vector<std::int64_t> counts;
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(geom_draw(s, p));
    if (counts.size() < k) counts.resize(k, 0);
    ++counts[k - 1];
  }
  return counts;
}

}  // namespace

TEST_CASE("KS acceptance threshold") {
  CHECK(ks_threshold(1) == doctest::Approx(1.6276236).epsilon(1e-4));
  CHECK(ks_threshold(10000) ==
        doctest::Approx(ks_threshold(1) / 100.0).epsilon(1e-12));
  CHECK(ks_threshold(100, 0.05) < ks_threshold(100, 0.01));
  CHECK_THROWS_AS(ks_threshold(0), std::domain_error);
  CHECK_THROWS_AS(ks_threshold(10, 1.0), std::domain_error);
}

TEST_CASE("KS statistic on a perfect and a wrong fit") {
  const std::size_t n = 1000;
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i)
    grid[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
  auto ident = [](double x) { return x < 0 ? 0.0 : (x > 1 ? 1.0 : x); };
  const auto good = ks_statistic(grid, ident);
  CHECK(good.statistic == doctest::Approx(0.5 / static_cast<double>(n)).epsilon(1e-9));
  CHECK(good.pass);
  const auto bad = ks_statistic(grid, [](double x) {
    return x < 0 ? 0.0 : (x > 1 ? 1.0 : x * x);
  });
  CHECK(bad.statistic > 0.2);
  CHECK_FALSE(bad.pass);
  CHECK_THROWS_AS(ks_statistic({}, ident), std::domain_error);
  CHECK_THROWS_AS(ks_statistic({0.5}, [](double) { return 2.0; }),
                  std::domain_error);
}

TEST_CASE("KS rejection rate is calibrated at alpha = 0.01") {
  rng::Stream s(31);
  int rejects = 0;
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> xs(500);
    for (auto& x : xs) x = s.exponential();
    const auto r = ks_statistic(
        xs, [](double x) { return x <= 0 ? 0.0 : -std::expm1(-x); });
    rejects += r.pass ? 0 : 1;
  }
  // Binomial(200, 0.01): more than 8 rejections has probability ~ 2e-4.
  CHECK(rejects <= 8);
}

TEST_CASE("chi-square geometric test accepts the true parameter") {
  rng::Stream s(77);
  const auto counts = geom_counts(s, 0.4, 50000);
  const auto r = chisq_geometric(counts, 0.4);
  CHECK(r.pass);
  CHECK(r.n_samples == 50000);
  // every pooled bin keeps expected count >= 5, so several bins survive
  CHECK(r.details.size() >= 3);
}

TEST_CASE("chi-square geometric test rejects a shifted parameter") {
  rng::Stream s(78);
  const auto counts = geom_counts(s, 0.45, 50000);
  const auto r = chisq_geometric(counts, 0.5);
  CHECK_FALSE(r.pass);
  CHECK(r.statistic > 10.0 * r.threshold);
}

TEST_CASE("chi-square pooling fails loudly on tiny samples") {
  CHECK_THROWS_AS(chisq_geometric({3, 2, 1}, 0.5), std::domain_error);
  CHECK_THROWS_AS(chisq_geometric({}, 0.5), std::domain_error);
  CHECK_THROWS_AS(chisq_geometric({10, -1}, 0.5), std::domain_error);
  CHECK_THROWS_AS(chisq_geometric({10, 10}, 1.0), std::domain_error);
}

TEST_CASE("rescaled exponential test") {
  rng::Stream s(5);
  std::vector<double> xs(5000);
  for (auto& x : xs) x = 0.5 * s.exponential();  // Exp(2)
  CHECK(exp_rescaled_test(xs, 0.5).pass);
  CHECK_FALSE(exp_rescaled_test(xs, 1.0).pass);
  CHECK_THROWS_AS(exp_rescaled_test(xs, 0.0), std::domain_error);
}

TEST_CASE("weighted ratio handles extreme log-weights") {
  // equal weights, even if individually they would underflow exp
  const WeightedRatio eq = weighted_ratio({-1000.0, -1000.0}, {1.0, 3.0});
  CHECK(eq.value == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(eq.ess == doctest::Approx(2.0).epsilon(1e-14));

  const WeightedRatio mix = weighted_ratio({0.0, std::log(3.0)}, {1.0, 5.0});
  CHECK(mix.value == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(mix.ess == doctest::Approx(1.6).epsilon(1e-12));
  CHECK(mix.std_error > 0.0);

  CHECK_THROWS_AS(weighted_ratio({}, {}), std::domain_error);
  CHECK_THROWS_AS(weighted_ratio({0.0}, {1.0, 2.0}), std::domain_error);
  const double ninf = -std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(weighted_ratio({ninf, ninf}, {1.0, 2.0}), std::domain_error);
}

TEST_CASE("fit report serializes to one JSON object") {
  FitReport r;
  r.test_name = "demo";
  r.statistic = 0.5;
  r.threshold = 1.0;
  r.n_samples = 10;
  r.pass = true;
  r.note = "ok";
  const std::string j = r.to_json();
  CHECK(j.front() == '{');
  CHECK(j.back() == '}');
  CHECK(j.find("\"demo\"") != std::string::npos);
  CHECK(j.find("\"pass\":true") != std::string::npos);
}
