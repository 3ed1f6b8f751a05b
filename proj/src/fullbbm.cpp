#include "repulse/fullbbm.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "repulse/analytics.hpp"
#include "repulse/numeric.hpp"
#include "repulse/parallel.hpp"

namespace repulse::fullbbm {

namespace {

struct Alive {
  double x;
  double clock;  // absolute time of the next clock ring
  std::int32_t node;
  bool dead;
  rng::Stream stream;
};

// Ordered pairs at distance <= eps among the given positions. Sorting makes
// the count independent of particle order; the sweep is O(n log n + pairs
// frontier) instead of the naive O(n^2).
std::size_t ordered_pairs_within(std::vector<double>& xs, double eps) {
  std::sort(xs.begin(), xs.end());
  std::size_t unordered = 0;
  std::size_t lo = 0;
  for (std::size_t j = 1; j < xs.size(); ++j) {
    while (xs[j] - xs[lo] > eps) ++lo;
    unordered += j - lo;
  }
  return 2 * unordered;
}

void check_full_params(const FullParams& p) {
  if (!(p.lambda >= 0.0)) throw std::domain_error("lambda must be >= 0");
  if (!(p.epsilon > 0.0)) throw std::domain_error("epsilon must be > 0");
  if (!(p.p0 >= 0.0 && p.p0 < 1.0))
    throw std::domain_error("p0 must lie in [0,1)");
  if (!(p.horizon > 0.0)) throw std::domain_error("horizon must be > 0");
  if (!(p.dt > 0.0)) throw std::domain_error("dt must be > 0");
  if (p.particle_cap == 0) throw std::domain_error("particle_cap must be >= 1");
}

}  // namespace

BbmRealization simulate_bbm(const FullParams& params, rng::Stream stream) {
  check_full_params(params);
  const auto steps = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(params.horizon / params.dt)));
  const double dt = params.horizon / static_cast<double>(steps);
  const double sd = std::sqrt(dt);
  const double p2 = 1.0 - params.p0;

  BbmRealization out;
  out.dt = dt;
  out.horizon = params.horizon;
  out.epsilon = params.epsilon;
  out.skeleton.root_time = 0.0;
  out.skeleton.horizon = params.horizon;
  out.count_per_frame.reserve(steps + 1);
  if (params.store_frames) out.frames.reserve(steps + 1);

  auto& nodes = out.skeleton.nodes;
  std::vector<Alive> alive;
  std::size_t live = 0;

  // Particle id == skeleton node index; its stream is derived from that label
  // alone, so the draw sequence of one particle never depends on the others.
  auto spawn = [&](std::int32_t parent, double birth, double x) {
    const auto id = static_cast<std::int32_t>(nodes.size());
    qmgw::QmgwNode node;
    node.parent = parent;
    nodes.push_back(node);
    Alive a{x, 0.0, id, false, stream.child(static_cast<std::uint64_t>(id))};
    const double life = a.stream.exponential();
    a.clock = birth + life;
    if (a.clock <= params.horizon) {
      nodes[id].wait = life;
      nodes[id].event_time = a.clock;
    }
    ++live;
    return a;
  };

  alive.push_back(spawn(-1, 0.0, 0.0));

  auto record_frame = [&]() {
    out.count_per_frame.push_back(live);
    if (params.store_frames) {
      auto& f = out.frames.emplace_back();
      f.reserve(live);
      for (const auto& a : alive)
        f.push_back(ParticleRecord{a.node, nodes[a.node].parent, a.x});
    }
  };

  std::vector<double> pos;  // scratch for the pair count
  // Clock rings inside the current cell, ordered by (time, node id).
  using Cand = std::tuple<double, std::int32_t, std::size_t>;
  std::priority_queue<Cand, std::vector<Cand>, std::greater<Cand>> cand;

  for (std::size_t m = 0; m < steps; ++m) {
    record_frame();
    pos.clear();
    for (const auto& a : alive) pos.push_back(a.x);
    out.penalty +=
        dt * static_cast<double>(ordered_pairs_within(pos, params.epsilon));

    const double cell_end =
        (m + 1 == steps) ? params.horizon : static_cast<double>(m + 1) * dt;
    for (std::size_t i = 0; i < alive.size(); ++i) {
      alive[i].x += sd * alive[i].stream.normal();
      if (alive[i].clock <= cell_end)
        cand.emplace(alive[i].clock, alive[i].node, i);
    }
    bool removed = false;
    while (!cand.empty()) {
      const auto [when, node_id, idx] = cand.top();
      cand.pop();
      const double u = alive[idx].stream.uniform();
      const double x = alive[idx].x;  // cell-end position of the parent
      alive[idx].dead = true;
      --live;
      removed = true;
      if (u < p2) {
        nodes[node_id].fate = qmgw::Fate::Branched;
        out.branch_events.emplace_back(when, node_id);
        if (!std::isfinite(out.first_branch)) out.first_branch = when;
        for (int b = 0; b < 2; ++b) {
          Alive child = spawn(node_id, when, x);
          nodes[node_id].child[b] = child.node;
          // A newborn can ring again inside the same cell.
          if (child.clock <= cell_end)
            cand.emplace(child.clock, child.node, alive.size());
          alive.push_back(child);
        }
        if (live > params.particle_cap) {
          std::ostringstream msg;
          msg << "particle cap " << params.particle_cap << " exceeded at t="
              << when << " (live=" << live
              << ", branch events=" << out.branch_events.size() << ")";
          throw ResourceError(msg.str());
        }
      } else {
        nodes[node_id].fate = qmgw::Fate::Died;
      }
    }
    if (removed)
      alive.erase(std::remove_if(alive.begin(), alive.end(),
                                 [](const Alive& a) { return a.dead; }),
                  alive.end());
  }
  record_frame();
  out.final_particles.reserve(alive.size());
  for (const auto& a : alive)
    out.final_particles.push_back(
        ParticleRecord{a.node, nodes[a.node].parent, a.x});
  return out;
}

double penalty_of(const BbmRealization& r, double epsilon,
                  std::size_t frame_stride) {
  if (r.frames.empty())
    throw std::invalid_argument("penalty_of requires store_frames");
  if (frame_stride == 0) throw std::domain_error("frame_stride must be >= 1");
  const double step = r.dt * static_cast<double>(frame_stride);
  double acc = 0.0;
  // Final frame excluded: left-endpoint rule.
  for (std::size_t m = 0; m + 1 < r.frames.size(); m += frame_stride) {
    const auto& f = r.frames[m];
    std::size_t count = 0;
    for (std::size_t i = 0; i < f.size(); ++i)
      for (std::size_t j = 0; j < f.size(); ++j)
        if (i != j && std::fabs(f[i].x - f[j].x) <= epsilon) ++count;
    acc += static_cast<double>(count) * step;
  }
  return acc;
}

std::vector<double> branch_separation_times(const BbmRealization& r,
                                            double epsilon) {
  if (r.frames.empty())
    throw std::invalid_argument("branch_separation_times requires store_frames");
  const auto& nodes = r.skeleton.nodes;
  const std::size_t m_last = r.frames.size() - 1;
  auto first_frame = [&](double when) {
    const double f = std::ceil(when / r.dt - 1e-9);
    return f <= 0.0 ? std::size_t{0}
                    : std::min(static_cast<std::size_t>(f), m_last);
  };
  // Last frame a particle appears in: the one before its event's cell end.
  auto last_frame = [&](std::int32_t id) {
    const double ev = nodes[static_cast<std::size_t>(id)].event_time;
    if (!std::isfinite(ev)) return m_last;
    const double f = std::ceil(ev / r.dt - 1e-9) - 1.0;
    return f <= 0.0 ? std::size_t{0}
                    : std::min(static_cast<std::size_t>(f), m_last);
  };
  auto find_x = [&](std::size_t m, std::int32_t id, double* x) {
    for (const auto& rec : r.frames[m])
      if (rec.id == id) {
        *x = rec.x;
        return true;
      }
    return false;
  };
  std::vector<double> out;
  out.reserve(r.branch_events.size());
  for (const auto& [when, parent] : r.branch_events) {
    const auto& pn = nodes[static_cast<std::size_t>(parent)];
    const std::int32_t c0 = pn.child[0];
    const std::int32_t c1 = pn.child[1];
    double d = 0.0;
    const std::size_t stop = std::min(last_frame(c0), last_frame(c1));
    for (std::size_t m = first_frame(when); m <= stop; ++m) {
      double x0 = 0.0;
      double x1 = 0.0;
      if (!find_x(m, c0, &x0) || !find_x(m, c1, &x1)) break;
      if (std::fabs(x0 - x1) > epsilon) break;
      if (m == m_last) break;  // final frame carries no penalty weight
      d += r.dt;
    }
    out.push_back(d);
  }
  return out;
}

double sup_normalized_count(const BbmRealization& r) {
  double best = 0.0;
  for (std::size_t m = 0; m < r.count_per_frame.size(); ++m) {
    const double s = std::min(static_cast<double>(m) * r.dt, r.horizon);
    best = std::max(best,
                    static_cast<double>(r.count_per_frame[m]) * std::exp(-s));
  }
  return best;
}

double max_position(const BbmRealization& r) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : r.final_particles) best = std::max(best, p.x);
  return best;
}

WeightedEstimate tilted_estimate(const RealFunctional& f,
                                 const FullParams& params,
                                 std::size_t n_samples, std::uint64_t seed,
                                 int workers) {
  if (n_samples == 0) throw std::domain_error("need n_samples >= 1");
  std::vector<double> logw(n_samples);
  std::vector<double> val(n_samples);
  par::for_each_index(
      n_samples, workers,
      [&](std::size_t i) {
        const BbmRealization r =
            simulate_bbm(params, rng::derive(seed, "bbm", i));
        logw[i] = r.log_weight(params.lambda);
        val[i] = f(r);
      },
      16);
  const stats::WeightedRatio wr = stats::weighted_ratio(logw, val);
  return WeightedEstimate{wr.value, wr.std_error, n_samples, wr.ess};
}

double sample_tau_epsilon(double epsilon, double dt, rng::Stream& stream) {
  if (!(epsilon > 0.0)) throw std::domain_error("epsilon must be > 0");
  if (!(dt > 0.0)) throw std::domain_error("dt must be > 0");
  const double sd = std::sqrt(dt);
  double a = 0.0;
  for (std::uint64_t m = 0;; ++m) {
    const double b = a + sd * stream.normal();
    const double t_end = static_cast<double>(m + 1) * dt;
    if (std::fabs(b) >= epsilon) return t_end;
    // Bridge crossing probability exp(-2(eps-a)(eps-b)/dt) per barrier; the
    // draw is skipped when the probability is below e^-40 (the skip rule is a
    // function of the path only, so determinism is preserved).
    const double qp = 2.0 * (epsilon - a) * (epsilon - b);
    if (qp <= 40.0 * dt && stream.uniform() < std::exp(-qp / dt)) return t_end;
    const double qm = 2.0 * (epsilon + a) * (epsilon + b);
    if (qm <= 40.0 * dt && stream.uniform() < std::exp(-qm / dt)) return t_end;
    a = b;
  }
}

double first_branch_bound_basic(double sigma, double t, double r) {
  return analytics::first_branch_cdf(sigma, t, r) /
         analytics::no_branch_mass(sigma, t);
}

double first_branch_bound_improved(double lambda, double epsilon, double t,
                                   double r, double c) {
  if (!(c > 1.0)) throw std::domain_error("c must be > 1");
  if (!(lambda > 0.0)) throw std::domain_error("lambda must be > 0");
  if (c == 2.0) {
    const double le2 = lambda * epsilon * epsilon;
    return 4.0 * std::numbers::e * std::sqrt(lambda) /
           (le2 * le2 * std::exp(r) + le2);
  }
  const double sigma = analytics::sigma_of(lambda, epsilon);
  return first_branch_bound_basic(sigma, t, r) * std::numbers::e * c *
         std::sqrt(lambda) / (1.0 - 1.0 / c);
}

double denominator_lower_bound(double lambda, double t, double c) {
  if (!(c > 1.0)) throw std::domain_error("c must be > 1");
  return std::exp(-t - 1.0) * (1.0 - 1.0 / c) / (c * std::sqrt(lambda));
}

stats::FitReport check_improved_bound(const FullParams& params, double r,
                                      double c, std::size_t n_samples,
                                      std::uint64_t seed, int workers) {
  if (!(r >= 0.0 && r <= params.horizon))
    throw std::domain_error("need 0 <= r <= horizon");
  const double cutoff = params.horizon - r;
  const WeightedEstimate est = tilted_estimate(
      [cutoff](const BbmRealization& x) {
        return x.first_branch <= cutoff ? 1.0 : 0.0;
      },
      params, n_samples, seed, workers);
  const double bound = first_branch_bound_improved(
      params.lambda, params.epsilon, params.horizon, r, c);
  const double sigma = analytics::sigma_of(params.lambda, params.epsilon);
  stats::FitReport rep;
  rep.test_name = "first_branch_improved_bound";
  rep.statistic = std::max(0.0, est.value - 3.0 * est.std_error);
  rep.threshold = bound;
  rep.n_samples = n_samples;
  rep.seed = seed;
  rep.pass = rep.statistic <= rep.threshold;
  rep.details = {est.value, est.std_error, est.effective_sample_size};
  std::ostringstream note;
  note << std::setprecision(10) << "estimate=" << est.value
       << " se=" << est.std_error << " ess=" << est.effective_sample_size
       << " basic_bound="
       << first_branch_bound_basic(sigma, params.horizon, r)
       << " denom_lower=" << denominator_lower_bound(params.lambda,
                                                     params.horizon, c)
       << " r=" << r << " c=" << c;
  rep.note = note.str();
  return rep;
}

std::vector<WeightedEstimate> max_cdf_estimate(double sigma, double t,
                                               const std::vector<double>& xs,
                                               std::size_t n_samples,
                                               double dt, std::uint64_t seed,
                                               int workers) {
  if (!(sigma > 0.0 && sigma <= 1.0))
    throw std::domain_error("sigma must lie in (0,1]");
  if (n_samples == 0) throw std::domain_error("need n_samples >= 1");
  FullParams params;
  params.lambda = 0.0;
  params.epsilon = 1.0;
  params.horizon = t;
  params.dt = dt;
  std::vector<double> w(n_samples);
  std::vector<double> mx(n_samples);
  par::for_each_index(
      n_samples, workers,
      [&](std::size_t i) {
        const BbmRealization r =
            simulate_bbm(params, rng::derive(seed, "maxcdf", i));
        w[i] = std::pow(sigma, static_cast<double>(r.n_final()) - 1.0);
        mx[i] = max_position(r);
      },
      64);
  double sw = 0.0;
  double sw2 = 0.0;
  for (const double wi : w) {
    sw += wi;
    sw2 += wi * wi;
  }
  const double ess = sw2 > 0.0 ? sw * sw / sw2 : 0.0;
  const double v = analytics::partition_v(sigma, t);
  const auto n = static_cast<double>(n_samples);
  std::vector<WeightedEstimate> out;
  out.reserve(xs.size());
  for (const double x : xs) {
    // Plain (not self-normalized) mean of sigma^{n-1} 1[max <= x], divided by
    // the closed-form partition value.
    std::vector<double> g(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) g[i] = mx[i] <= x ? w[i] : 0.0;
    const num::MeanVar mv = num::mean_var(g);
    out.push_back(WeightedEstimate{mv.mean / v, std::sqrt(mv.var / n) / v,
                                   n_samples, ess});
  }
  return out;
}

std::string realization_csv_header() {
  return "seed,lambda,epsilon,t,dt,n_final,I_t,tau1,weight_log";
}

std::string realization_csv_row(const BbmRealization& r, std::uint64_t seed,
                                const FullParams& params) {
  std::ostringstream os;
  os << seed << ',' << std::setprecision(17) << params.lambda << ','
     << params.epsilon << ',' << r.horizon << ',' << r.dt << ','
     << r.n_final() << ',' << r.penalty << ',';
  if (std::isfinite(r.first_branch)) os << r.first_branch;  // empty if none
  os << ',' << r.log_weight(params.lambda);
  return os.str();
}

}  // namespace repulse::fullbbm
