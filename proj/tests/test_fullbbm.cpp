#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "repulse/analytics.hpp"
#include "repulse/fullbbm.hpp"
#include "repulse/numeric.hpp"
#include "repulse/rng.hpp"
#include "repulse/stats.hpp"

using namespace repulse;
using namespace repulse::fullbbm;

namespace {

BbmRealization two_particle_frames(double gap, int n_frames, double dt) {
  BbmRealization r;
  r.dt = dt;
  r.horizon = n_frames * dt;
  r.epsilon = 1.0;
  for (int m = 0; m < n_frames; ++m) {
    auto& f = r.frames.emplace_back();
    f.push_back(ParticleRecord{0, -1, 0.0});
    f.push_back(ParticleRecord{1, -1, gap});
  }
  return r;
}

FullParams framed_params() {
  FullParams p;
  p.lambda = 0.3;
  p.epsilon = 0.5;
  p.horizon = 2.0;
  p.dt = 0.01;
  p.store_frames = true;
  return p;
}

}  // namespace

TEST_CASE("penalty recount on hand-built frames") {
  // 4 frames, final one excluded; 2 ordered pairs per counted frame
  const BbmRealization r = two_particle_frames(0.4, 4, 0.1);
  CHECK(penalty_of(r, 0.5) == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(penalty_of(r, 0.3) == 0.0);
  CHECK(penalty_of(r, 0.5, 2) == doctest::Approx(0.8).epsilon(1e-14));

  BbmRealization shifted = r;
  for (auto& f : shifted.frames)
    for (auto& p : f) p.x += 5.0;
  CHECK(penalty_of(shifted, 0.5) == penalty_of(r, 0.5));

  CHECK_THROWS_AS(penalty_of(r, 0.5, 0), std::domain_error);
  BbmRealization empty;
  CHECK_THROWS_AS(penalty_of(empty, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(branch_separation_times(empty, 0.5), std::invalid_argument);
}

TEST_CASE("inline penalty equals the direct recount") {
  const FullParams p = framed_params();
  for (std::uint64_t i = 0; i < 10; ++i) {
    const BbmRealization r = simulate_bbm(p, rng::derive(17, "pen", i));
    CHECK(penalty_of(r, p.epsilon) ==
          doctest::Approx(r.penalty).epsilon(1e-12));
    CHECK(penalty_of(r, 0.3) <= penalty_of(r, 0.8) + 1e-12);
    // a coarser Riemann sum stays within a factor of the full one
    if (r.penalty > 0.0) {
      const double coarse = penalty_of(r, p.epsilon, 2);
      CHECK(coarse >= 0.45 * r.penalty);
      CHECK(coarse <= 2.1 * r.penalty);
    }
  }
}

TEST_CASE("offspring-pair coexistence bounds the penalty from below") {
  const FullParams p = framed_params();
  for (std::uint64_t i = 0; i < 20; ++i) {
    const BbmRealization r = simulate_bbm(p, rng::derive(23, "sep", i));
    const auto times = branch_separation_times(r, p.epsilon);
    CHECK(times.size() == r.branch_events.size());
    double s = 0.0;
    for (const double d : times) s += d;
    CHECK(2.0 * s <= r.penalty + 1e-9);
  }
}

TEST_CASE("structural bookkeeping of a realization") {
  FullParams p;
  p.p0 = 0.3;
  p.horizon = 2.0;
  p.dt = 0.05;
  for (std::uint64_t i = 0; i < 50; ++i) {
    const BbmRealization r = simulate_bbm(p, rng::derive(29, "bk", i));
    r.skeleton.check_structure();
    const int branches = r.skeleton.branch_count();
    const int deaths = r.skeleton.death_count();
    CHECK(static_cast<int>(r.n_final()) == 1 + branches - deaths);
    CHECK(r.count_per_frame.back() == r.n_final());
    CHECK(r.count_per_frame.size() == 41);  // horizon/dt + 1 frames
    if (!r.branch_events.empty())
      CHECK(r.first_branch == doctest::Approx(r.branch_events.front().first));
    else
      CHECK(!std::isfinite(r.first_branch));
  }
}

TEST_CASE("branch-free mean count is the Yule growth") {
  FullParams p;
  p.horizon = 3.0;
  p.dt = 0.05;
  const int n = 4000;
  std::vector<double> ns;
  std::vector<double> sups;
  for (std::uint64_t i = 0; i < n; ++i) {
    const BbmRealization r = simulate_bbm(p, rng::derive(41, "yule", i));
    ns.push_back(static_cast<double>(r.n_final()));
    sups.push_back(sup_normalized_count(r));
  }
  const num::MeanVar mv = num::mean_var(ns);
  CHECK(std::fabs(mv.mean - std::exp(3.0)) <
        3.5 * std::sqrt(mv.var / static_cast<double>(n)));

  // Doob: P(sup_s n(s) e^{-s} > 5) <= 1/5
  int over = 0;
  for (const double v : sups) over += v > 5.0 ? 1 : 0;
  const double frac = static_cast<double>(over) / n;
  const double se = std::sqrt(frac * (1.0 - frac) / n);
  CHECK(frac - 3.5 * se <= 0.2);
}

TEST_CASE("a branchless ancestor ends at a standard normal position") {
  FullParams p;
  p.horizon = 1.0;
  p.dt = 0.05;
  std::vector<double> xs;
  for (std::uint64_t i = 0; i < 3000; ++i) {
    const BbmRealization r = simulate_bbm(p, rng::derive(43, "pos", i));
    if (r.n_final() == 1) xs.push_back(r.final_particles[0].x);
  }
  CHECK(xs.size() > 800);
  const auto ks =
      stats::ks_statistic(xs, [](double x) { return num::norm_cdf(x); });
  CHECK(ks.pass);
}

TEST_CASE("tube exit time has the right mean and transform") {
  const double eps = 0.5, dt = 1e-4;
  rng::Stream s(57);
  const int n = 20000;
  std::vector<double> taus(n);
  for (auto& t : taus) t = sample_tau_epsilon(eps, dt, s);
  const num::MeanVar mv = num::mean_var(taus);
  CHECK(std::fabs(mv.mean - eps * eps) <
        3.5 * std::sqrt(mv.var / static_cast<double>(n)) + dt);

  std::vector<double> ws(n);
  for (int i = 0; i < n; ++i) ws[i] = std::exp(-taus[i]);
  const num::MeanVar mw = num::mean_var(ws);
  const double target = 1.0 / std::cosh(eps * std::sqrt(2.0));
  CHECK(std::fabs(mw.mean - target) <
        3.5 * std::sqrt(mw.var / static_cast<double>(n)) + dt);

  CHECK_THROWS_AS(sample_tau_epsilon(0.0, dt, s), std::domain_error);
  CHECK_THROWS_AS(sample_tau_epsilon(eps, 0.0, s), std::domain_error);
}

TEST_CASE("unpenalized estimates reduce to plain means") {
  FullParams p;
  p.horizon = 2.0;
  p.dt = 0.05;
  const std::size_t n = 500;
  const auto est = tilted_estimate(
      [](const BbmRealization& r) { return static_cast<double>(r.n_final()); },
      p, n, 61, 2);
  double mean = 0.0;
  for (std::uint64_t i = 0; i < n; ++i)
    mean += static_cast<double>(
        simulate_bbm(p, rng::derive(61, "bbm", i)).n_final());
  mean /= static_cast<double>(n);
  CHECK(est.value == doctest::Approx(mean).epsilon(1e-14));
  CHECK(est.effective_sample_size == doctest::Approx(static_cast<double>(n)));
}

TEST_CASE("estimates do not depend on the worker count") {
  FullParams p;
  p.lambda = 0.2;
  p.epsilon = 0.5;
  p.horizon = 2.0;
  p.dt = 0.01;
  auto f = [](const BbmRealization& r) {
    return r.first_branch <= 1.0 ? 1.0 : 0.0;
  };
  const auto a = tilted_estimate(f, p, 200, 71, 1);
  const auto b = tilted_estimate(f, p, 200, 71, 3);
  CHECK(a.value == b.value);
  CHECK(a.std_error == b.std_error);
  CHECK(a.effective_sample_size == b.effective_sample_size);
}

TEST_CASE("repeat simulation is byte-identical") {
  FullParams p;
  p.lambda = 0.1;
  p.epsilon = 0.8;
  p.horizon = 1.5;
  p.dt = 0.01;
  const auto s = rng::derive(83, "det", 5);
  const BbmRealization a = simulate_bbm(p, s);
  const BbmRealization b = simulate_bbm(p, s);
  CHECK(realization_csv_row(a, s.key(), p) == realization_csv_row(b, s.key(), p));
  CHECK(a.penalty == b.penalty);
  CHECK(a.n_final() == b.n_final());
  for (std::size_t i = 0; i < a.final_particles.size(); ++i)
    CHECK(a.final_particles[i].x == b.final_particles[i].x);
}

TEST_CASE("particle cap aborts with a resource error") {
  FullParams p;
  p.horizon = 6.0;
  p.dt = 0.05;
  p.particle_cap = 50;
  bool thrown = false;
  for (std::uint64_t i = 0; i < 10 && !thrown; ++i) {
    try {
      simulate_bbm(p, rng::derive(91, "cap", i));
    } catch (const ResourceError& e) {
      thrown = true;
      CHECK(std::string(e.what()).find("particle cap") != std::string::npos);
    }
  }
  CHECK(thrown);
}

TEST_CASE("max-position law estimates are monotone in the level") {
  const auto plain = max_cdf_estimate(1.0, 1.0, {0.3, 1.0, 2.5}, 2000, 0.02, 97);
  CHECK(plain.size() == 3);
  for (const auto& e : plain) {
    CHECK(e.value >= 0.0);
    CHECK(e.value <= 1.0);
    CHECK(e.effective_sample_size == doctest::Approx(2000.0));
  }
  CHECK(plain[0].value <= plain[1].value);
  CHECK(plain[1].value <= plain[2].value);

  const auto tilted =
      max_cdf_estimate(0.5, 1.0, {0.3, 1.0, 2.5}, 2000, 0.02, 97);
  CHECK(tilted[0].value <= tilted[1].value + 1e-12);
  CHECK(tilted[1].value <= tilted[2].value + 1e-12);
  CHECK_THROWS_AS(max_cdf_estimate(0.0, 1.0, {0.0}, 10, 0.02, 1),
                  std::domain_error);
}

TEST_CASE("improved first-branch bound holds on a small run") {
  FullParams p;
  p.lambda = 0.1;
  p.epsilon = 1.0;
  p.horizon = 5.0;
  p.dt = 0.01;
  const auto rep = check_improved_bound(p, 2.0, 2.0, 400, 103, 2);
  CHECK(rep.pass);
  CHECK(rep.threshold ==
        doctest::Approx(first_branch_bound_improved(0.1, 1.0, 5.0, 2.0, 2.0)));
  CHECK_THROWS_AS(check_improved_bound(p, 6.0, 2.0, 10, 1, 1),
                  std::domain_error);
}

TEST_CASE("closed-form bounds reject bad arguments") {
  CHECK_THROWS_AS(first_branch_bound_improved(0.0, 1.0, 5.0, 2.0, 2.0),
                  std::domain_error);
  CHECK_THROWS_AS(first_branch_bound_improved(0.1, 1.0, 5.0, 2.0, 1.0),
                  std::domain_error);
  CHECK_THROWS_AS(denominator_lower_bound(0.1, 5.0, 0.5), std::domain_error);
  // at c = 2 the two routes to the improved bound agree on the prefactor
  const double b = first_branch_bound_improved(0.05, 0.5, 6.0, 2.0, 2.0);
  const double le2 = 0.05 * 0.25;
  const double expect = 4.0 * std::exp(1.0) * std::sqrt(0.05) /
                        (le2 * le2 * std::exp(2.0) + le2);
  CHECK(b == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("parameter validation") {
  FullParams p;
  p.horizon = 1.0;
  p.dt = 0.0;
  CHECK_THROWS_AS(simulate_bbm(p, rng::Stream(1)), std::domain_error);
  p.dt = 0.01;
  p.epsilon = 0.0;
  CHECK_THROWS_AS(simulate_bbm(p, rng::Stream(1)), std::domain_error);
  p.epsilon = 1.0;
  p.particle_cap = 0;
  CHECK_THROWS_AS(simulate_bbm(p, rng::Stream(1)), std::domain_error);
}
