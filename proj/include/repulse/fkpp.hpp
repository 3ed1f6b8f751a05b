#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "repulse/stats.hpp"

namespace repulse::fkpp {

// Reaction strength sigma/((1-sigma)e^t + sigma) and its running integral
// G(t) = t - ln((1-sigma)e^t + sigma), in forms stable for large t.
double g_decay(double sigma, double t);
double G_decay(double sigma, double t);

// Last time with 1 - g(t) <= delta; may be negative when sigma is small.
double tau_delta(double sigma, double delta);
// First time with G(inf) - G(t) <= Delta; may be negative.
double T_Delta(double sigma, double Delta);

// Front centering term sqrt(2) t - (3 / (2 sqrt 2)) ln t.
double bramson_front(double t);

struct GridField {
  double x_min = 0.0;
  double dx = 1.0;
  double time = 0.0;
  std::vector<double> values;

  double x_at(std::size_t j) const {
    return x_min + static_cast<double>(j) * dx;
  }
  double x_max() const { return x_at(values.empty() ? 0 : values.size() - 1); }
  // Linear interpolation; x outside the grid clamps to the end values.
  double value_at(double x) const;
};

// Level-1/2 crossing of a nonincreasing field, linearly interpolated.
// Throws std::runtime_error when the level is not bracketed by the grid.
double front_position(const GridField& f);

class ReactionProfile {
 public:
  enum class Kind { Decaying, ConstantOne, Tabulated };

  static ReactionProfile decaying(double sigma);
  static ReactionProfile constant_one();
  static ReactionProfile tabulated(std::function<double(double)> g);

  Kind kind() const { return kind_; }
  double sigma() const { return sigma_; }
  double g(double t) const;
  // Integral of g over [t0, t1]; closed form for the first two kinds,
  // adaptive quadrature for tabulated profiles.
  double G_increment(double t0, double t1) const;

 private:
  Kind kind_ = Kind::ConstantOne;
  double sigma_ = 1.0;
  std::function<double(double)> fn_;
};

struct GridSpec {
  double x_min = -20.0;
  double x_max = 20.0;
  double dx = 0.02;
  double dt = 8e-4;  // keep dt <= 2 dx^2: the splitting is then monotone
};

struct SolverOptions {
  GridSpec grid;
  // Shift the domain rightward to follow the front (for long constant-g
  // runs); the grid size stays fixed, vacated right nodes are filled with 0.
  bool moving_window = false;
  double window_margin = 30.0;  // shift when x_max - front < margin
  double window_shift = 10.0;
  double boundary_tol = 1e-8;  // boundary-influence monitor threshold
};

// Strang splitting: Crank-Nicolson diffusion half-steps around an exact
// logistic reaction step using the exact integral of g over the step.
// Neumann boundaries; values are asserted to stay in [0,1] every step and the
// boundary values are monitored against their initial asymptotes.
class TdFkppSolver {
 public:
  // Heaviside start: 1 for x < 0, 1/2 at a node on 0, 0 for x > 0.
  TdFkppSolver(ReactionProfile reaction, const SolverOptions& opt);
  // Custom monotone initial data on the grid implied by `initial`.
  TdFkppSolver(ReactionProfile reaction, GridField initial,
               const SolverOptions& opt);

  void step();
  void advance_to(double t);  // t is snapped to a whole number of steps
  const GridField& field() const { return field_; }
  double time() const { return field_.time; }
  double dt() const { return dt_; }
  double front() const { return front_position(field_); }

 private:
  void diffusion_half();
  void check_state();

  ReactionProfile reaction_;
  SolverOptions opt_;
  GridField field_;
  double dt_ = 0.0;
  std::uint64_t n_steps_ = 0;
  double left_target_ = 1.0;
  double right_target_ = 0.0;
  // Prefactored constant tridiagonal system for the CN half-step.
  double beta_ = 0.0;
  std::vector<double> cp_;         // modified superdiagonal
  std::vector<double> inv_diag_;   // 1 / pivot
  std::vector<double> rhs_;        // scratch
};

// Snapshots at the requested times (each snapped to the nearest step).
std::vector<GridField> solve_tdfkpp(const ReactionProfile& reaction,
                                    double t_end,
                                    std::vector<double> snapshot_times,
                                    const SolverOptions& opt);

// Discrete Gaussian convolution, kernel variance tau truncated at 8 standard
// deviations and renormalized; ends are replicate-padded. Values closer than
// 8 sqrt(tau) to a boundary are influenced by the padding.
GridField heat_convolve(const GridField& f, double tau);
double convolve_clean_radius(double tau);

// Two-sided refinement study: solve with (dx, dt) and (dx/2, dt/4), compare
// at t_end on the shared nodes; returns (4/3) sup |difference|, the
// second-order Richardson error estimate for the coarse run.
double grid_refinement_error(const ReactionProfile& reaction, double t_end,
                             const SolverOptions& opt);

struct TailFit {
  double slope = 0.0;
  double intercept = 0.0;
  // Smallest constant making the tail bound hold over the fit window.
  double c_factor = 0.0;
  // Fitted origin of the linear prefactor (right tail only). The decay there
  // is (x - shift) e^{slope x}; ignoring the shift biases the fitted rate by
  // O(1/x) over the window, well past the 5% gate.
  double shift = 0.0;
};

struct WaveProfile {
  GridField profile;  // shifted so the level-1/2 point sits at x = 0
  // max |(1/2) v'' + sqrt(2) v' + v(1-v)| over the trimmed interior,
  // derivatives by fourth-order central differences.
  double residual = 0.0;
  TailFit right_tail;  // ln v - ln(x-shift) vs x on [2, 8]; slope near -sqrt(2)
  TailFit left_tail;   // ln(1-v) vs x on [-8, -2]; slope near 2 - sqrt(2)
  double value_at(double x) const { return profile.value_at(x); }
};

// Centers the snapshot nearest at_time and fits the tails. Throws
// NotConvergedError when the wave-equation residual exceeds 1e-3 (profile
// not settled; rerun with a later at_time).
WaveProfile extract_wave(const std::vector<GridField>& run,
                         double at_time = 400.0);
WaveProfile wave_from_field(const GridField& field);

struct RegimeReport {
  stats::FitReport wave_regime;         // w(tau_delta) against [(1-d)v0, v0]
  stats::FitReport intermediate_lower;  // (1-d) conv(v0) <= w
  stats::FitReport intermediate_upper;  // w <= e^{G(t)-G(tau)} conv(v0) ^ 1
  stats::FitReport diffusive_bracket;   // conv(w(T)) <= w <= e^Delta conv(w(T))
  stats::FitReport g_constant_identity;  // e^{G(T)-G(tau)} = (1/d) e^{-Delta}
  bool all_pass() const;
  std::string to_json() const;
};

// snapshots must cover tau_delta, a time strictly between tau_delta and
// T_Delta, and a time past T_Delta (nearest snapshots are used; the last one
// must lie beyond T_Delta). wave_tol bounds the regime-(i) violation,
// bracket_tol the convolution-bracket violations.
RegimeReport regime_report(double sigma, double delta, double Delta,
                           const std::vector<GridField>& snapshots,
                           const WaveProfile& wave, double wave_tol,
                           double bracket_tol);

std::string snapshot_csv(const GridField& f);  // rows t,x,w

}  // namespace repulse::fkpp
