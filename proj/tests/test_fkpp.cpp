#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "repulse/fkpp.hpp"
#include "repulse/numeric.hpp"

using namespace repulse;
using namespace repulse::fkpp;

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;

GridField heaviside_on(double x_min, double x_max, double dx) {
  GridField f;
  f.x_min = x_min;
  f.dx = dx;
  const auto n = static_cast<std::size_t>(std::llround((x_max - x_min) / dx));
  f.values.resize(n + 1);
  for (std::size_t j = 0; j <= n; ++j) {
    const double x = f.x_at(j);
    f.values[j] = x < -1e-12 ? 1.0 : (x > 1e-12 ? 0.0 : 0.5);
  }
  return f;
}

}  // namespace

TEST_CASE("reaction profiles and their integrals") {
  const auto dec = ReactionProfile::decaying(0.7);
  CHECK(dec.kind() == ReactionProfile::Kind::Decaying);
  CHECK(dec.sigma() == 0.7);
  CHECK(dec.g(0.0) == doctest::Approx(0.7).epsilon(1e-14));
  CHECK(dec.g(1.0) > dec.g(2.0));  // strength decays
  CHECK(dec.G_increment(0.5, 2.5) ==
        doctest::Approx(G_decay(0.7, 2.5) - G_decay(0.7, 0.5)).epsilon(1e-12));

  const auto one = ReactionProfile::constant_one();
  CHECK(one.g(13.0) == 1.0);
  CHECK(one.G_increment(0.5, 2.5) == doctest::Approx(2.0).epsilon(1e-14));

  const auto tab = ReactionProfile::tabulated([](double t) { return std::sin(t); });
  const double pi = 3.14159265358979323846;
  CHECK(tab.G_increment(0.0, pi) == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("time identities of the decaying reaction") {
  // delta >= 1 - sigma keeps tau_delta nonnegative (g starts at sigma)
  for (const double sigma : {0.5, 0.99})
    for (const double delta : {0.5, 0.7}) {
      const double tau = tau_delta(sigma, delta);
      CHECK(g_decay(sigma, tau) == doctest::Approx(1.0 - delta).epsilon(1e-12));
      CHECK(G_decay(sigma, tau) ==
            doctest::Approx(-std::log1p(-sigma) + std::log(delta))
                .epsilon(1e-12));
    }
  for (const double sigma : {0.5, 0.99})
    for (const double Delta : {0.1, 0.5}) {
      const double T = T_Delta(sigma, Delta);
      // G(inf) - G(T) = Delta
      CHECK(-std::log1p(-sigma) - G_decay(sigma, T) ==
            doctest::Approx(Delta).epsilon(1e-12));
    }
  CHECK(tau_delta(0.5, 0.5) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(bramson_front(1.0) == doctest::Approx(kSqrt2).epsilon(1e-14));
  // large t: G approaches its plateau from below (gap ~ e^{-t}/4 at t = 8)
  CHECK(G_decay(0.8, 8.0) < -std::log1p(-0.8));
  CHECK(G_decay(0.8, 8.0) ==
        doctest::Approx(-std::log1p(-0.8)).epsilon(1e-3));
}

TEST_CASE("grid field interpolation and front location") {
  GridField f;
  f.x_min = -1.0;
  f.dx = 0.5;
  f.values = {1.0, 0.8, 0.4, 0.1, 0.0};
  CHECK(f.x_max() == doctest::Approx(1.0));
  CHECK(f.value_at(-1.0) == 1.0);
  CHECK(f.value_at(-0.25) == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(f.value_at(-5.0) == 1.0);   // clamped
  CHECK(f.value_at(5.0) == 0.0);
  // 0.5 crossing between x = -0.5 (0.8) and x = 0 (0.4)
  CHECK(front_position(f) == doctest::Approx(-0.125).epsilon(1e-12));
  GridField flat = f;
  flat.values = {1.0, 1.0, 1.0, 1.0, 1.0};
  CHECK_THROWS_AS(front_position(flat), std::runtime_error);
}

TEST_CASE("reaction-free solve reproduces the heat kernel") {
  SolverOptions opt;  // default grid [-20,20], dx 0.02, dt 8e-4
  TdFkppSolver solver(ReactionProfile::tabulated([](double) { return 0.0; }),
                      opt);
  // Heaviside start with half weight at the jump node
  const auto& f0 = solver.field();
  CHECK(f0.value_at(0.0) == 0.5);
  CHECK(f0.value_at(-0.02) == 1.0);
  CHECK(f0.value_at(0.02) == 0.0);

  solver.advance_to(1.0);
  CHECK(solver.time() == doctest::Approx(1.0).epsilon(1e-12));
  double worst = 0.0;
  for (double x = -10.0; x <= 10.0; x += 0.1)
    worst = std::max(worst, std::fabs(solver.field().value_at(x) -
                                      num::norm_cdf(-x)));
  CHECK(worst < 1e-4);
}

TEST_CASE("discrete heat convolution") {
  const GridField h = heaviside_on(-20.0, 20.0, 0.02);
  const GridField c = heat_convolve(h, 0.7);
  double worst = 0.0;
  for (double x = -8.0; x <= 8.0; x += 0.05)
    worst = std::max(worst,
                     std::fabs(c.value_at(x) - num::norm_cdf(-x / std::sqrt(0.7))));
  CHECK(worst < 1e-4);

  // semigroup property away from the padded ends
  const GridField two = heat_convolve(heat_convolve(h, 0.3), 0.4);
  double diff = 0.0;
  for (double x = -8.0; x <= 8.0; x += 0.05)
    diff = std::max(diff, std::fabs(two.value_at(x) - c.value_at(x)));
  CHECK(diff < 1e-6);

  GridField ones = h;
  for (auto& v : ones.values) v = 1.0;
  const GridField c1 = heat_convolve(ones, 1.3);
  for (const double v : c1.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(convolve_clean_radius(4.0) == doctest::Approx(16.0).epsilon(1e-14));
}

TEST_CASE("decaying reaction is dominated by the constant one") {
  SolverOptions opt;
  opt.grid = {-15.0, 15.0, 0.05, 2e-3};
  const auto a = solve_tdfkpp(ReactionProfile::decaying(0.9), 3.0, {3.0}, opt);
  const auto b = solve_tdfkpp(ReactionProfile::constant_one(), 3.0, {3.0}, opt);
  for (std::size_t j = 0; j < a[0].values.size(); ++j)
    CHECK(a[0].values[j] <= b[0].values[j] + 1e-12);
}

TEST_CASE("refinement estimate shrinks at second order") {
  // dx = 0.08 with dt = 2 dx^2 is still pre-asymptotic: the half-weight jump
  // in the initial data excites slowly damped Crank-Nicolson modes at that
  // time step.  One level down the ladder the ratios settle onto 4.
  SolverOptions coarse;
  coarse.grid = {-15.0, 15.0, 0.04, 3.2e-3};
  SolverOptions fine;
  fine.grid = {-15.0, 15.0, 0.02, 8.0e-4};
  const auto r = ReactionProfile::decaying(0.8);
  const double e1 = grid_refinement_error(r, 2.0, coarse);
  const double e2 = grid_refinement_error(r, 2.0, fine);
  CHECK(e1 > e2);
  CHECK(e1 / e2 > 3.0);
  CHECK(e1 / e2 < 5.5);
  SolverOptions moving = fine;
  moving.moving_window = true;
  CHECK_THROWS_AS(grid_refinement_error(r, 2.0, moving), std::invalid_argument);
}

TEST_CASE("snapshots are taken at snapped times") {
  SolverOptions opt;
  opt.grid = {-10.0, 10.0, 0.05, 2e-3};
  const auto run = solve_tdfkpp(ReactionProfile::constant_one(), 1.0,
                                {0.2505, 0.5, 1.0}, opt);
  CHECK(run.size() == 3);
  CHECK(std::fabs(run[0].time - 0.2505) <= 1e-3 + 1e-12);
  CHECK(run[1].time == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(run[2].time == doctest::Approx(1.0).epsilon(1e-12));
  // monotone profiles stay inside [0,1]
  for (const auto& f : run)
    for (const double v : f.values) {
      CHECK(v >= -1e-12);
      CHECK(v <= 1.0 + 1e-12);
    }
}

TEST_CASE("solver aborts when the front reaches the boundary") {
  SolverOptions opt;
  opt.grid = {-6.0, 6.0, 0.02, 8e-4};
  CHECK_THROWS_AS(solve_tdfkpp(ReactionProfile::decaying(0.9), 5.0, {5.0}, opt),
                  DomainTooSmallError);
}

TEST_CASE("moving window follows the front without disturbing it") {
  SolverOptions fixed;
  fixed.grid = {-45.0, 45.0, 0.05, 5e-3};
  SolverOptions moving = fixed;
  moving.moving_window = true;
  const auto a = solve_tdfkpp(ReactionProfile::constant_one(), 20.0, {20.0},
                              fixed);
  const auto b = solve_tdfkpp(ReactionProfile::constant_one(), 20.0, {20.0},
                              moving);
  CHECK(b[0].x_min > a[0].x_min);  // the window did shift
  CHECK(std::fabs(front_position(a[0]) - front_position(b[0])) < 1e-4);
  const double fr = front_position(a[0]);
  for (double x = fr - 5.0; x <= fr + 5.0; x += 0.25)
    CHECK(a[0].value_at(x) == doctest::Approx(b[0].value_at(x)).epsilon(1e-6));
}

TEST_CASE("tail fits recover a synthetic wave shape exactly") {
  // right tail 3 (x-1) e^{-sqrt2 x}, left tail 1 - 0.8 e^{(2-sqrt2) x},
  // joined linearly; the fitter must undo the front centering shift.
  GridField f;
  f.x_min = -12.0;
  f.dx = 0.01;
  // joins tight enough that the centered fit windows stay on the exact tails
  const double join_l = -1.5, join_r = 1.5;
  const double vl = 1.0 - 0.8 * std::exp((2.0 - kSqrt2) * join_l);
  const double vr = 3.0 * (join_r - 1.0) * std::exp(-kSqrt2 * join_r);
  const std::size_t n = static_cast<std::size_t>(std::llround(24.0 / f.dx));
  f.values.resize(n + 1);
  for (std::size_t j = 0; j <= n; ++j) {
    const double x = f.x_at(j);
    if (x <= join_l)
      f.values[j] = 1.0 - 0.8 * std::exp((2.0 - kSqrt2) * x);
    else if (x >= join_r)
      f.values[j] = 3.0 * (x - 1.0) * std::exp(-kSqrt2 * x);
    else
      f.values[j] = vl + (vr - vl) * (x - join_l) / (join_r - join_l);
  }
  const double fr = front_position(f);
  const WaveProfile w = wave_from_field(f);
  CHECK(std::fabs(w.right_tail.slope + kSqrt2) < 2e-3);
  CHECK(std::fabs(w.right_tail.shift - (1.0 - fr)) < 0.02);
  CHECK(w.right_tail.c_factor > 0.0);
  CHECK(std::fabs(w.left_tail.slope - (2.0 - kSqrt2)) < 1e-9);
  CHECK(std::fabs(w.left_tail.c_factor -
                  0.8 * std::exp((2.0 - kSqrt2) * fr)) < 1e-9);
}

TEST_CASE("early extraction is refused") {
  SolverOptions opt;
  opt.grid = {-45.0, 45.0, 0.05, 5e-3};
  opt.moving_window = true;
  const auto run =
      solve_tdfkpp(ReactionProfile::constant_one(), 30.0, {30.0}, opt);
  CHECK_THROWS_AS(extract_wave(run, 30.0), NotConvergedError);
  CHECK_THROWS_AS(extract_wave({}, 30.0), std::invalid_argument);
}

TEST_CASE("regime report: settled wave, growth bracket, constants") {
  const double sigma = 0.99, delta = 0.5, Delta = 0.1;
  const double tau = tau_delta(sigma, delta);
  const double T = T_Delta(sigma, Delta);
  const double t_end = T + 5.0;
  SolverOptions opt;
  opt.grid = {-26.0, 32.0, 0.04, 3.2e-3};
  const auto snaps = solve_tdfkpp(ReactionProfile::decaying(sigma), t_end,
                                  {tau, 0.5 * (tau + T), T, t_end}, opt);

  SolverOptions wopt;
  wopt.grid = {-45.0, 45.0, 0.05, 5e-3};
  wopt.moving_window = true;
  const auto wrun =
      solve_tdfkpp(ReactionProfile::constant_one(), 400.0, {400.0}, wopt);
  const WaveProfile wave = extract_wave(wrun, 400.0);
  CHECK(wave.residual < 1e-3);

  // The shape gap to the settled wave relaxes slowly (measured 0.073 at
  // tau=3.5, 0.047 at tau=4.6), so the wave tolerance reflects the snapshot
  // time; the growth/bracket checks sit well under 0.01.
  const RegimeReport rep =
      regime_report(sigma, delta, Delta, snaps, wave, 0.06, 0.03);
  CHECK(rep.wave_regime.pass);
  CHECK(rep.intermediate_lower.pass);
  CHECK(rep.intermediate_upper.pass);
  CHECK(rep.diffusive_bracket.pass);
  CHECK(rep.g_constant_identity.pass);
  CHECK(rep.all_pass());
  const std::string j = rep.to_json();
  CHECK(j.find("wave_regime") != std::string::npos);
  CHECK(j.find("g_constant_identity") != std::string::npos);
}

TEST_CASE("snapshot serialization") {
  GridField f;
  f.x_min = -0.5;
  f.dx = 0.5;
  f.time = 2.0;
  f.values = {1.0, 0.5, 0.0};
  const std::string csv = snapshot_csv(f);
  CHECK(csv.rfind("t,x,w\n", 0) == 0);
  CHECK(csv.find("2,-0.5,1\n") != std::string::npos);
  std::size_t lines = 0;
  for (const char c : csv) lines += c == '\n';
  CHECK(lines == 4);
}
