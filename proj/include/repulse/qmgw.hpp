#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "repulse/analytics.hpp"
#include "repulse/rng.hpp"

namespace repulse::qmgw {

using analytics::ModelParams;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Binary address of a node: the root is the empty path, children append 0/1.
struct NodeLabel {
  std::vector<std::uint8_t> path;
  std::string to_string() const;
  static NodeLabel parse(const std::string& s);
  bool is_prefix_of(const NodeLabel& other) const;
  NodeLabel child(std::uint8_t bit) const;
};

enum class Fate : std::uint8_t {
  Survived,  // clock did not ring before the horizon
  Branched,  // replaced by two offspring at event_time
  Died       // removed at event_time (death-enabled trees only)
};

struct QmgwNode {
  std::int32_t parent = -1;
  std::array<std::int32_t, 2> child{{-1, -1}};
  // Wait since birth until the node's event. +inf is the explicit sentinel
  // for "nothing happens before the horizon" (and for the limiting-model
  // root, whose birth is at -inf).
  double wait = kInf;
  double event_time = kInf;  // absolute time of the event, +inf if none
  Fate fate = Fate::Survived;
};

class QmgwTree {
 public:
  double root_time = 0.0;  // -inf for the limiting model
  double horizon = 0.0;
  std::vector<QmgwNode> nodes;  // depth-first order, child 0 before child 1

  double birth_time(std::int32_t idx) const;
  // Number of particles alive at time s (born at or before s, event after s).
  int particle_count(double s) const;
  // Root's branch time if it is <= horizon, otherwise empty.
  std::optional<double> first_branch_time() const;
  int branch_count() const;  // number of Branched nodes
  int death_count() const;
  NodeLabel label_of(std::int32_t idx) const;
  // Structural checks: parent/child wiring, two-children rule, event-time
  // additivity. Throws std::logic_error on violation.
  void check_structure() const;
};

// Tilted binary tree over [0, horizon] with branch weight params.sigma.
// Requires params.p0 == 0. The stream must be dedicated to this tree; node
// streams are derived from it by label.
QmgwTree sample_simplified_tree(const ModelParams& params, rng::Stream stream);

// Plain branching/death skeleton: Exp(1) clocks, branch w.p. 1-p0, die w.p.
// p0. Untilted; weighting happens in the caller.
QmgwTree sample_gw_tree(double p0, double horizon, rng::Stream stream);

// Small-lambda limiting tree on the shifted clock. The root sits at -inf and
// its branch time is logistic; later waits follow the limit kernel. Branch
// times are always drawn (the kernel is proper); children exist only when the
// branch time is <= delta_horizon.
QmgwTree sample_limiting_tree(double delta_horizon, rng::Stream stream);

// Quantile transforms used by the samplers, exposed for verification.
// Conditional-on-branching wait with remaining horizon h under weight sigma.
double wait_quantile(double sigma, double h, double q);
// Limit-kernel wait for a node born at shifted time T.
double kernel_wait_quantile(double T, double q);
double logistic_quantile(double q);

// Recursive event on waits: either unconstrained, or "this node branches with
// wait <= threshold and the two subtrees satisfy left/right".
class NormalEvent {
 public:
  static NormalEvent unconstrained();
  static NormalEvent wait_within(double threshold, NormalEvent left,
                                 NormalEvent right);
  bool is_unconstrained() const { return impl_ == nullptr; }
  double threshold() const;
  const NormalEvent& left() const;
  const NormalEvent& right() const;
  int depth() const;
  double max_threshold() const;
  bool eval(const QmgwTree& tree, std::int32_t node = 0) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
};

// Monte Carlo probability of a normal event under the tilted tree law.
McEstimate event_probability(const NormalEvent& event, const ModelParams& params,
                             std::size_t n_samples, std::uint64_t seed,
                             int workers = 1);

// JSON-lines serialization (one line per tree): {"seed","params","nodes"},
// nodes listed depth-first with child 0 first, sentinel waits as null.
std::string tree_to_jsonl(const QmgwTree& tree, std::uint64_t seed,
                          const ModelParams& params);

}  // namespace repulse::qmgw
