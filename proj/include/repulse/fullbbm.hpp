#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "repulse/qmgw.hpp"
#include "repulse/rng.hpp"
#include "repulse/stats.hpp"

namespace repulse::fullbbm {

struct FullParams {
  double lambda = 0.0;
  double epsilon = 1.0;
  double p0 = 0.0;  // death probability at a clock ring; branch w.p. 1-p0
  double horizon = 1.0;
  double dt = 1e-3;
  std::size_t particle_cap = 1'000'000;
  bool store_frames = false;  // keep every grid frame (memory-heavy)
};

struct ParticleRecord {
  std::int32_t id = 0;      // skeleton node index
  std::int32_t parent = -1;
  double x = 0.0;
};

// One realization of spatial branching Brownian motion on a uniform grid.
// Positions advance by exact Gaussian increments; clock rings keep their
// exact times in the skeleton but offspring are placed at the parent's
// position at the end of the containing grid cell.
struct BbmRealization {
  double dt = 0.0;       // effective step (horizon / #steps)
  double horizon = 0.0;
  double epsilon = 0.0;  // proximity radius used by the inline penalty
  // Left-endpoint Riemann sum of the ordered-pair proximity time: at each
  // grid time s_m (m < M), dt * #{(i,j), i != j, |x_i - x_j| <= epsilon}.
  double penalty = 0.0;
  double first_branch = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> count_per_frame;  // particles alive at each s_m
  std::vector<std::pair<double, std::int32_t>> branch_events;  // (exact time, parent)
  std::vector<ParticleRecord> final_particles;  // frame at the horizon
  std::vector<std::vector<ParticleRecord>> frames;  // all frames iff store_frames
  qmgw::QmgwTree skeleton;  // nodes in birth order (not depth-first)

  std::size_t n_final() const { return final_particles.size(); }
  double log_weight(double lambda) const { return -lambda * penalty; }
};

// Throws ResourceError if the particle count ever exceeds params.particle_cap.
BbmRealization simulate_bbm(const FullParams& params, rng::Stream stream);

// Direct O(n^2)-per-frame recount of the proximity penalty. Requires
// store_frames; frame_stride > 1 coarsens the Riemann sum (step stride*dt).
double penalty_of(const BbmRealization& r, double epsilon,
                  std::size_t frame_stride = 1);

// Grid time for each branch event's offspring pair to first separate past
// epsilon, truncated at the horizon or at either child's own event. The
// penalty is at least twice the sum of these. Requires store_frames.
std::vector<double> branch_separation_times(const BbmRealization& r,
                                            double epsilon);

// sup_m n(s_m) e^{-s_m}, the quantity controlled by the Doob bound.
double sup_normalized_count(const BbmRealization& r);

double max_position(const BbmRealization& r);

struct WeightedEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
  double effective_sample_size = 0.0;
};

using RealFunctional = std::function<double(const BbmRealization&)>;

// Self-normalized importance estimate of E_tilted[f] with per-realization
// weight exp(-lambda * penalty). Realization i uses the stream derived from
// (seed, "bbm", i), so results do not depend on the worker count.
WeightedEstimate tilted_estimate(const RealFunctional& f,
                                 const FullParams& params,
                                 std::size_t n_samples, std::uint64_t seed,
                                 int workers = 1);

// First exit of |B| from (-epsilon, epsilon) on a dt grid with a Brownian-
// bridge crossing check inside each step; returns the end of the detecting
// cell, (m+1)*dt.
double sample_tau_epsilon(double epsilon, double dt, rng::Stream& stream);

// Tilted-measure bound P(tau_1 <= t - r) <= sigma(e^-r - e^-t) / (denom(t)
// denom(r)) with denom(u) = 1 - sigma(1 - e^-u).
double first_branch_bound_basic(double sigma, double t, double r);

// Sharper bound from the martingale argument; at c = 2 this is
// 4e sqrt(lambda) / (lambda^2 eps^4 e^r + lambda eps^2).
double first_branch_bound_improved(double lambda, double epsilon, double t,
                                   double r, double c = 2.0);

// Lower bound e^{-t} (lambda c^2)^{-1/2} (1 - 1/c) / e on E[e^{-lambda I_t}]
// used by the improved bound.
double denominator_lower_bound(double lambda, double t, double c);

// One-sided check that the Monte Carlo estimate of P(tau_1 <= horizon - r)
// stays below the improved bound, with 3 SE slack.
stats::FitReport check_improved_bound(const FullParams& params, double r,
                                      double c, std::size_t n_samples,
                                      std::uint64_t seed, int workers = 1);

// P(max at time t <= x) in the simplified model: plain means of
// sigma^{n(t)-1} 1[max <= x] over lambda = 0 realizations, normalized by the
// closed-form partition value. One shared set of realizations serves all xs.
std::vector<WeightedEstimate> max_cdf_estimate(double sigma, double t,
                                               const std::vector<double>& xs,
                                               std::size_t n_samples,
                                               double dt, std::uint64_t seed,
                                               int workers = 1);

std::string realization_csv_header();
std::string realization_csv_row(const BbmRealization& r, std::uint64_t seed,
                                const FullParams& params);

}  // namespace repulse::fullbbm
