#include "repulse/qmgw.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "repulse/numeric.hpp"
#include "repulse/parallel.hpp"

namespace repulse::qmgw {

std::string NodeLabel::to_string() const {
  std::string s;
  s.reserve(path.size());
  for (const auto b : path) s.push_back(b ? '1' : '0');
  return s;
}

NodeLabel NodeLabel::parse(const std::string& s) {
  NodeLabel l;
  l.path.reserve(s.size());
  for (const char c : s) {
    if (c != '0' && c != '1') throw std::invalid_argument("NodeLabel: bad bit");
    l.path.push_back(c == '1');
  }
  return l;
}

bool NodeLabel::is_prefix_of(const NodeLabel& other) const {
  if (path.size() > other.path.size()) return false;
  return std::equal(path.begin(), path.end(), other.path.begin());
}

NodeLabel NodeLabel::child(std::uint8_t bit) const {
  NodeLabel c = *this;
  c.path.push_back(bit ? 1 : 0);
  return c;
}

double QmgwTree::birth_time(std::int32_t idx) const {
  const auto& n = nodes.at(static_cast<std::size_t>(idx));
  return n.parent < 0 ? root_time
                      : nodes[static_cast<std::size_t>(n.parent)].event_time;
}

int QmgwTree::particle_count(double s) const {
  if (!(s >= root_time && s <= horizon))
    throw std::domain_error("particle_count: s outside [root_time, horizon]");
  int count = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double birth = birth_time(static_cast<std::int32_t>(i));
    if (birth <= s && s < nodes[i].event_time) ++count;
  }
  return count;
}

std::optional<double> QmgwTree::first_branch_time() const {
  if (nodes.empty()) throw std::logic_error("empty tree");
  const auto& root = nodes.front();
  if (root.fate == Fate::Branched && root.event_time <= horizon)
    return root.event_time;
  return std::nullopt;
}

int QmgwTree::branch_count() const {
  int m = 0;
  for (const auto& n : nodes) m += n.fate == Fate::Branched;
  return m;
}

int QmgwTree::death_count() const {
  int m = 0;
  for (const auto& n : nodes) m += n.fate == Fate::Died;
  return m;
}

NodeLabel QmgwTree::label_of(std::int32_t idx) const {
  std::vector<std::uint8_t> bits;
  std::int32_t cur = idx;
  while (cur > 0) {
    const auto& parent = nodes.at(
        static_cast<std::size_t>(nodes[static_cast<std::size_t>(cur)].parent));
    bits.push_back(parent.child[1] == cur ? 1 : 0);
    cur = nodes[static_cast<std::size_t>(cur)].parent;
  }
  std::reverse(bits.begin(), bits.end());
  return NodeLabel{std::move(bits)};
}

void QmgwTree::check_structure() const {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    const bool has_children = n.child[0] >= 0 || n.child[1] >= 0;
    if (has_children != (n.fate == Fate::Branched && n.event_time <= horizon))
      throw std::logic_error("children iff branch within horizon violated");
    if (has_children && (n.child[0] < 0 || n.child[1] < 0))
      throw std::logic_error("branched node must have two children");
    for (const auto c : n.child) {
      if (c < 0) continue;
      if (nodes.at(static_cast<std::size_t>(c)).parent !=
          static_cast<std::int32_t>(i))
        throw std::logic_error("child/parent wiring broken");
    }
    const double birth = birth_time(static_cast<std::int32_t>(i));
    if (std::isfinite(n.wait) && std::isfinite(birth)) {
      // event-time additivity: T = birth + wait
      if (std::fabs(birth + n.wait - n.event_time) >
          1e-9 * (1.0 + std::fabs(n.event_time)))
        throw std::logic_error("event time != birth + wait");
    }
  }
}

double wait_quantile(double sigma, double h, double q) {
  if (!(sigma > 0.0 && sigma <= 1.0)) throw std::domain_error("sigma in (0,1]");
  if (!(h > 0.0)) throw std::domain_error("remaining horizon must be > 0");
  if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("q in [0,1]");
  const double a = q * (-std::expm1(-h));
  // w = softplus(ln(A(1-sigma)) + h) - log1p(-A sigma); sigma=1 collapses the
  // first term (truncated exponential case).
  const double z = std::log(a) + std::log1p(-sigma) + h;
  const double w = num::softplus(z) - std::log1p(-a * sigma);
  return std::min(w, h);
}

double kernel_wait_quantile(double T, double q) {
  if (!(q > 0.0 && q < 1.0)) throw std::domain_error("q in (0,1)");
  return num::softplus(std::log(q) - T) - std::log1p(-q);
}

double logistic_quantile(double q) {
  if (!(q > 0.0 && q < 1.0)) throw std::domain_error("q in (0,1)");
  return std::log(q) - std::log1p(-q);
}

namespace {

struct PendingNode {
  std::int32_t parent;
  std::int8_t slot;  // -1 for root
  double birth;
  rng::Stream stream;
};

}  // namespace

QmgwTree sample_simplified_tree(const ModelParams& params, rng::Stream stream) {
  if (params.p0 != 0.0)
    throw std::domain_error("sample_simplified_tree: requires p0 == 0");
  const double sigma = params.sigma;
  const double horizon = params.horizon;
  if (!(sigma > 0.0 && sigma <= 1.0 && horizon > 0.0))
    throw std::domain_error("sample_simplified_tree: bad params");

  QmgwTree tree;
  tree.root_time = 0.0;
  tree.horizon = horizon;
  std::vector<PendingNode> stack;
  stack.push_back({-1, -1, 0.0, stream});
  while (!stack.empty()) {
    PendingNode p = stack.back();
    stack.pop_back();
    const auto idx = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    auto& node = tree.nodes.back();
    node.parent = p.parent;
    if (p.parent >= 0)
      tree.nodes[static_cast<std::size_t>(p.parent)]
          .child[static_cast<std::size_t>(p.slot)] = idx;

    const double h = horizon - p.birth;
    const double p_branch = sigma * (-std::expm1(-h));
    const double u = p.stream.uniform();
    if (u < p_branch) {
      const double w = wait_quantile(sigma, h, p.stream.uniform());
      node.wait = w;
      node.event_time = p.birth + w;
      node.fate = Fate::Branched;
      // child 1 pushed first so child 0 is materialized next (DFS order)
      stack.push_back({idx, 1, node.event_time, p.stream.child(1)});
      stack.push_back({idx, 0, node.event_time, p.stream.child(0)});
    }
  }
  return tree;
}

QmgwTree sample_gw_tree(double p0, double horizon, rng::Stream stream) {
  if (!(p0 >= 0.0 && p0 < 1.0)) throw std::domain_error("p0 in [0,1)");
  if (!(horizon > 0.0)) throw std::domain_error("horizon must be > 0");
  QmgwTree tree;
  tree.root_time = 0.0;
  tree.horizon = horizon;
  std::vector<PendingNode> stack;
  stack.push_back({-1, -1, 0.0, stream});
  while (!stack.empty()) {
    PendingNode p = stack.back();
    stack.pop_back();
    const auto idx = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    auto& node = tree.nodes.back();
    node.parent = p.parent;
    if (p.parent >= 0)
      tree.nodes[static_cast<std::size_t>(p.parent)]
          .child[static_cast<std::size_t>(p.slot)] = idx;

    const double life = p.stream.exponential();
    if (life < horizon - p.birth) {
      node.wait = life;
      node.event_time = p.birth + life;
      if (p.stream.uniform() < p0) {
        node.fate = Fate::Died;
      } else {
        node.fate = Fate::Branched;
        stack.push_back({idx, 1, node.event_time, p.stream.child(1)});
        stack.push_back({idx, 0, node.event_time, p.stream.child(0)});
      }
    }
  }
  return tree;
}

QmgwTree sample_limiting_tree(double delta_horizon, rng::Stream stream) {
  if (!std::isfinite(delta_horizon))
    throw std::domain_error("delta_horizon must be finite");
  QmgwTree tree;
  tree.root_time = -kInf;
  tree.horizon = delta_horizon;

  // Root: wait from -inf is the sentinel; the branch time itself is logistic.
  tree.nodes.emplace_back();
  {
    auto& root = tree.nodes.back();
    root.event_time = logistic_quantile(stream.uniform());
    root.fate = Fate::Branched;
  }
  if (tree.nodes[0].event_time > delta_horizon) {
    tree.nodes[0].fate = Fate::Survived;  // known future branch, no children here
    return tree;
  }
  std::vector<PendingNode> stack;
  stack.push_back({0, 1, tree.nodes[0].event_time, stream.child(1)});
  stack.push_back({0, 0, tree.nodes[0].event_time, stream.child(0)});
  while (!stack.empty()) {
    PendingNode p = stack.back();
    stack.pop_back();
    const auto idx = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    auto& node = tree.nodes.back();
    node.parent = p.parent;
    tree.nodes[static_cast<std::size_t>(p.parent)]
        .child[static_cast<std::size_t>(p.slot)] = idx;

    const double w = kernel_wait_quantile(p.birth, p.stream.uniform());
    node.wait = w;
    node.event_time = p.birth + w;
    if (node.event_time <= delta_horizon) {
      node.fate = Fate::Branched;
      stack.push_back({idx, 1, node.event_time, p.stream.child(1)});
      stack.push_back({idx, 0, node.event_time, p.stream.child(0)});
    }
  }
  return tree;
}

struct NormalEvent::Impl {
  double threshold;
  NormalEvent left, right;
  int depth;
  double max_threshold;
};

NormalEvent NormalEvent::unconstrained() { return NormalEvent{}; }

NormalEvent NormalEvent::wait_within(double threshold, NormalEvent left,
                                     NormalEvent right) {
  if (!(threshold > 0.0) || !std::isfinite(threshold))
    throw std::domain_error("NormalEvent: threshold must be finite positive");
  NormalEvent e;
  auto impl = std::make_shared<Impl>();
  impl->threshold = threshold;
  impl->depth = 1 + std::max(left.depth(), right.depth());
  impl->max_threshold =
      std::max({threshold, left.max_threshold(), right.max_threshold()});
  impl->left = std::move(left);
  impl->right = std::move(right);
  e.impl_ = std::move(impl);
  return e;
}

double NormalEvent::threshold() const {
  if (!impl_) throw std::logic_error("unconstrained event has no threshold");
  return impl_->threshold;
}

const NormalEvent& NormalEvent::left() const {
  if (!impl_) throw std::logic_error("unconstrained event has no children");
  return impl_->left;
}

const NormalEvent& NormalEvent::right() const {
  if (!impl_) throw std::logic_error("unconstrained event has no children");
  return impl_->right;
}

int NormalEvent::depth() const { return impl_ ? impl_->depth : 0; }

double NormalEvent::max_threshold() const {
  return impl_ ? impl_->max_threshold : 0.0;
}

bool NormalEvent::eval(const QmgwTree& tree, std::int32_t node) const {
  if (!impl_) return true;
  const auto& n = tree.nodes.at(static_cast<std::size_t>(node));
  if (n.fate != Fate::Branched || n.child[0] < 0) return false;
  if (!(n.wait <= impl_->threshold)) return false;
  return impl_->left.eval(tree, n.child[0]) &&
         impl_->right.eval(tree, n.child[1]);
}

McEstimate event_probability(const NormalEvent& event,
                             const ModelParams& params, std::size_t n_samples,
                             std::uint64_t seed, int workers) {
  if (n_samples == 0) throw std::domain_error("event_probability: n == 0");
  if (event.max_threshold() > params.horizon)
    throw std::domain_error("event_probability: threshold beyond horizon");
  std::vector<std::uint8_t> hits(n_samples, 0);
  par::for_each_index(n_samples, workers, [&](std::size_t i) {
    const QmgwTree tree =
        sample_simplified_tree(params, rng::derive(seed, "event", i));
    hits[i] = event.eval(tree) ? 1 : 0;
  });
  double s = 0.0;
  for (const auto h : hits) s += h;
  McEstimate out;
  out.n_samples = n_samples;
  out.value = s / static_cast<double>(n_samples);
  out.std_error = std::sqrt(out.value * (1.0 - out.value) /
                            static_cast<double>(n_samples));
  return out;
}

std::string tree_to_jsonl(const QmgwTree& tree, std::uint64_t seed,
                          const ModelParams& params) {
  nlohmann::json j;
  j["seed"] = seed;
  nlohmann::json p;
  if (std::isfinite(params.lambda)) p["lambda"] = params.lambda;
  if (std::isfinite(params.epsilon)) p["epsilon"] = params.epsilon;
  if (std::isfinite(params.sigma)) p["sigma"] = params.sigma;
  p["p0"] = params.p0;
  p["t"] = params.horizon;
  j["params"] = std::move(p);

  // Serialize depth-first, child 0 before child 1, independent of storage
  // order, so equal trees always dump to equal bytes.
  nlohmann::json nodes = nlohmann::json::array();
  std::vector<std::pair<std::int32_t, std::string>> stack;
  stack.emplace_back(0, "");
  while (!stack.empty()) {
    auto [idx, label] = std::move(stack.back());
    stack.pop_back();
    const auto& n = tree.nodes.at(static_cast<std::size_t>(idx));
    nlohmann::json jn;
    jn["label"] = label;
    if (std::isfinite(n.wait))
      jn["wait"] = n.wait;
    else
      jn["wait"] = nullptr;
    if (std::isfinite(n.event_time))
      jn["T"] = n.event_time;
    else
      jn["T"] = nullptr;
    nodes.push_back(std::move(jn));
    if (n.child[1] >= 0) stack.emplace_back(n.child[1], label + "1");
    if (n.child[0] >= 0) stack.emplace_back(n.child[0], label + "0");
  }
  j["nodes"] = std::move(nodes);
  return j.dump();
}

}  // namespace repulse::qmgw
